// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/annotation.hpp"
#include "vaxstance/scorer.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace httplib {
class Server;
}

namespace vaxstance {

/// Version prefix shared by every route.
inline constexpr const char* kApiPrefix = "/v1";

/// Routes registered by mount_annotation_api, as "METHOD path".
std::vector<std::string> annotation_api_routes();

/// State behind the annotation and review API. Holds references only; the
/// caller keeps the log, queue and scorer alive while the server runs.
struct AnnotationApi {
  /// comment_id -> text for every item annotators may be served, in the
  /// order they should be handed out.
  std::vector<std::pair<std::string, std::string>> items;
  AnnotationLog* log = nullptr;
  ReviewQueue* review = nullptr;
  const Scorer* scorer = nullptr;  // POST /v1/score answers 503 when null
  int raters = 3;
  std::size_t default_batch_size = 20;
};

/// Registers the /v1 endpoints on `server`:
///   GET  /v1/batch?annotator=ID[&size=N]
///   POST /v1/label            {comment_id, annotator_id, stance}
///   GET  /v1/agreement
///   GET  /v1/review/queue[?limit=N]
///   POST /v1/review/decision  {comment_id, verdict, stance?, reviewer?}
///   POST /v1/score            {texts: [...]}
/// Validation failures answer 400, unknown ids 404, repeats 409.
void mount_annotation_api(httplib::Server& server, const AnnotationApi& api);

}  // namespace vaxstance
