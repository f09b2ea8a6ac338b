// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/annotation_service.hpp"

#include "vaxstance/error.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <memory>

namespace vaxstance {

namespace {

constexpr const char* kJson = "application/json";

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
      return 400;
    case ErrorKind::kMissingInput:
      return 404;
    case ErrorKind::kConflict:
      return 409;
    case ErrorKind::kRetryable:
    case ErrorKind::kUnavailable:
      return 503;
    case ErrorKind::kGeneric:
      break;
  }
  return 500;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

// Runs a handler body and turns exceptions into JSON error responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    reply(res, status_for(e.kind()), json{{"error", e.what()}});
  } catch (const json::exception& e) {
    reply(res, 400, json{{"error", std::string("malformed body: ") + e.what()}});
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    reply(res, 500, json{{"error", e.what()}});
  }
}

std::size_t size_param(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto text = req.get_param_value(key);
  try {
    const long long v = std::stoll(text);
    if (v <= 0) throw validation_error(std::string(key) + " must be positive");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw validation_error(std::string(key) + " is not an integer: " + text);
  }
}

Timestamp now_seconds() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

std::string route(const char* suffix) { return std::string(kApiPrefix) + suffix; }

}  // namespace

std::vector<std::string> annotation_api_routes() {
  return {"GET " + route("/batch"),         "POST " + route("/label"),
          "GET " + route("/agreement"),     "GET " + route("/review/queue"),
          "POST " + route("/review/decision"), "POST " + route("/score")};
}

void mount_annotation_api(httplib::Server& server, const AnnotationApi& api) {
  if (!api.log || !api.review) throw validation_error("annotation API needs a log and a queue");
  auto state = std::make_shared<AnnotationApi>(api);
  auto known = std::make_shared<std::unordered_map<std::string, std::size_t>>();
  for (std::size_t i = 0; i < state->items.size(); ++i) known->emplace(state->items[i].first, i);

  server.Get(route("/batch"), [state](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto annotator = req.get_param_value("annotator");
      if (annotator.empty()) throw validation_error("annotator parameter is required");
      const auto limit = size_param(req, "size", state->default_batch_size);
      json items = json::array();
      for (const auto& [id, text] : state->items) {
        if (items.size() >= limit) break;
        if (state->log->has_label(id, annotator)) continue;
        if (state->log->label_count(id) >= static_cast<std::size_t>(state->raters)) continue;
        // Text only: video and channel context are withheld on purpose.
        items.push_back(json{{"comment_id", id}, {"text", text}});
      }
      reply(res, 200, json{{"annotator", annotator}, {"items", items}});
    });
  });

  server.Post(route("/label"), [state, known](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto event = label_event_from_json(json::parse(req.body));
      if (!known->contains(event.comment_id)) {
        throw missing_input("unknown comment_id " + event.comment_id);
      }
      event.at = now_seconds();
      state->log->append(event, static_cast<std::size_t>(state->raters));
      reply(res, 201, json{{"comment_id", event.comment_id},
                           {"labels", state->log->label_count(event.comment_id)}});
    });
  });

  server.Get(route("/agreement"), [state](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      auto body = to_json(summarize_agreement(*state->log, state->raters));
      body["raters"] = state->raters;
      reply(res, 200, body);
    });
  });

  server.Get(route("/review/queue"), [state](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto limit = size_param(req, "limit", state->default_batch_size);
      json items = json::array();
      for (const auto& item : state->review->pending(limit)) {
        items.push_back(json{{"comment_id", item.comment_id},
                             {"text", item.text},
                             {"stance", to_string(item.stance)},
                             {"entropy", item.entropy}});
      }
      reply(res, 200, json{{"items", items}});
    });
  });

  server.Post(route("/review/decision"),
              [state](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  auto decision = review_decision_from_json(json::parse(req.body));
                  decision.at = now_seconds();
                  state->review->decide(decision);
                  reply(res, 200, to_json(decision));
                });
              });

  if (state->scorer) {
    mount_score_endpoint(server, *state->scorer, route("/score"));
  } else {
    server.Post(route("/score"), [](const httplib::Request&, httplib::Response& res) {
      reply(res, 503, json{{"error", "no scorer configured"}});
    });
  }
}

}  // namespace vaxstance
