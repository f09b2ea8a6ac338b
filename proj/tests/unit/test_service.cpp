// SPDX-License-Identifier: Apache-2.0
#include "../support/fixtures.hpp"
#include "../support/test_server.hpp"

#include "vaxstance/annotation_service.hpp"

#include <doctest.h>

using namespace vaxstance;
namespace vt = vaxstance::testing;

namespace {

json body_of(const httplib::Result& res) {
  REQUIRE(res);
  return json::parse(res->body);
}

int post_label(httplib::Client& c, const std::string& id, const std::string& who, const std::string& stance) {
  auto res = c.Post("/v1/label", json{{"comment_id", id}, {"annotator_id", who}, {"stance", stance}}.dump(),
                    "application/json");
  REQUIRE(res);
  return res->status;
}

struct Fixture {
  AnnotationLog log;
  ReviewQueue queue{{{"p1", "texto p1", Stance::kAgainst, 0.05}, {"p2", "texto p2", Stance::kFavorable, 0.2}},
                    std::nullopt};
  MockScorer scorer{{{"salva", Stance::kFavorable}}, 0.1};
  vt::TestServer srv;

  explicit Fixture(bool with_scorer = true) {
    AnnotationApi api;
    api.items = {{"c1", "primeiro"}, {"c2", "segundo"}, {"c3", "terceiro"}};
    api.log = &log;
    api.review = &queue;
    api.scorer = with_scorer ? &scorer : nullptr;
    api.default_batch_size = 2;
    mount_annotation_api(srv.server(), api);
    srv.start();
  }
};

}  // namespace

TEST_SUITE("service") {

TEST_CASE("route list is exactly the versioned API") {
  CHECK(annotation_api_routes() ==
        std::vector<std::string>{"GET /v1/batch", "POST /v1/label", "GET /v1/agreement", "GET /v1/review/queue",
                                 "POST /v1/review/decision", "POST /v1/score"});
}

TEST_CASE("batches skip items the annotator labeled and full items") {
  Fixture f;
  httplib::Client c(f.srv.url());
  auto b = body_of(c.Get("/v1/batch?annotator=ana"));
  REQUIRE(b["items"].size() == 2);
  CHECK(b["items"][0]["comment_id"] == "c1");
  CHECK(b["items"][0].contains("text"));
  CHECK_FALSE(b["items"][0].contains("video_id"));

  CHECK(post_label(c, "c1", "ana", "FAVORABLE") == 201);
  b = body_of(c.Get("/v1/batch?annotator=ana&size=5"));
  CHECK(b["items"].size() == 2);
  CHECK(b["items"][0]["comment_id"] == "c2");

  CHECK(post_label(c, "c1", "bia", "FAVORABLE") == 201);
  CHECK(post_label(c, "c1", "caio", "AGAINST") == 201);
  b = body_of(c.Get("/v1/batch?annotator=davi&size=5"));
  CHECK(b["items"][0]["comment_id"] == "c2");

  CHECK(c.Get("/v1/batch")->status == 400);
  CHECK(c.Get("/v1/batch?annotator=x&size=0")->status == 400);
  CHECK(c.Get("/v1/batch?annotator=x&size=abc")->status == 400);
}

TEST_CASE("label statuses") {
  Fixture f;
  httplib::Client c(f.srv.url());
  CHECK(post_label(c, "c1", "ana", "AGAINST") == 201);
  CHECK(post_label(c, "c1", "ana", "FAVORABLE") == 409);
  CHECK(post_label(c, "zz", "ana", "FAVORABLE") == 404);
  CHECK(post_label(c, "c1", "bia", "MAYBE") == 400);
  CHECK(post_label(c, "c1", "", "AGAINST") == 400);
  CHECK(c.Post("/v1/label", "{", "application/json")->status == 400);
  CHECK(post_label(c, "c1", "bia", "AGAINST") == 201);
  CHECK(post_label(c, "c1", "caio", "AGAINST") == 201);
  CHECK(post_label(c, "c1", "davi", "AGAINST") == 409);
  CHECK(f.log.label_count("c1") == 3);
}

TEST_CASE("agreement endpoint") {
  Fixture f;
  httplib::Client c(f.srv.url());
  for (const char* who : {"a", "b", "c"}) {
    post_label(c, "c1", who, "FAVORABLE");
    post_label(c, "c2", who, "AGAINST");
  }
  post_label(c, "c3", "a", "FAVORABLE");
  const auto b = body_of(c.Get("/v1/agreement"));
  CHECK(b["raters"] == 3);
  CHECK(b["items_complete"] == 2);
  CHECK(b["kappa"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("review queue and decisions") {
  Fixture f;
  httplib::Client c(f.srv.url());
  auto q = body_of(c.Get("/v1/review/queue"));
  REQUIRE(q["items"].size() == 2);
  CHECK(q["items"][0]["comment_id"] == "p2");
  CHECK(q["items"][0]["stance"] == "FAVORABLE");

  auto post = [&](const json& j) { return c.Post("/v1/review/decision", j.dump(), "application/json")->status; };
  CHECK(post({{"comment_id", "p1"}, {"verdict", "override"}}) == 400);
  CHECK(post({{"comment_id", "p1"}, {"verdict", "maybe"}}) == 400);
  CHECK(post({{"comment_id", "p1"}, {"verdict", "override"}, {"stance", "INCONCLUSIVE"}, {"reviewer", "r"}}) == 200);
  CHECK(post({{"comment_id", "p1"}, {"verdict", "accept"}}) == 409);
  CHECK(post({{"comment_id", "nope"}, {"verdict", "accept"}}) == 404);
  q = body_of(c.Get("/v1/review/queue?limit=5"));
  CHECK(q["items"].size() == 1);
  CHECK(f.queue.decisions().size() == 1);
}

TEST_CASE("score endpoint with and without a scorer") {
  {
    Fixture f;
    httplib::Client c(f.srv.url());
    const auto b = body_of(c.Post("/v1/score", R"({"texts": ["salva", "nada"]})", "application/json"));
    CHECK(b["probs"].size() == 2);
    CHECK(b["class_order"] == class_order_json());
    CHECK(b["probs"][0][0].get<double>() == doctest::Approx(1.1 / 1.3));
  }
  Fixture none(false);
  httplib::Client c(none.srv.url());
  CHECK(c.Post("/v1/score", R"({"texts": ["x"]})", "application/json")->status == 503);
  CHECK(c.Get("/score")->status == 404);
}

}  // TEST_SUITE
