// SPDX-License-Identifier: Apache-2.0
// Operator entry point: one subcommand per pipeline stage.

#include "vaxstance/analytics.hpp"
#include "vaxstance/annotation.hpp"
#include "vaxstance/annotation_service.hpp"
#include "vaxstance/config.hpp"
#include "vaxstance/corpus.hpp"
#include "vaxstance/error.hpp"
#include "vaxstance/evaluation.hpp"
#include "vaxstance/ingest.hpp"
#include "vaxstance/jsonl.hpp"
#include "vaxstance/lexicon.hpp"
#include "vaxstance/report.hpp"
#include "vaxstance/run_manifest.hpp"
#include "vaxstance/scorer.hpp"
#include "vaxstance/self_training.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <pthread.h>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace fs = std::filesystem;
using namespace vaxstance;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingInput:
      return 2;
    case ErrorKind::kValidation:
      return 3;
    case ErrorKind::kUnavailable:
    case ErrorKind::kRetryable:
      return 4;
    default:
      return 1;
  }
}

const char* kind_label(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingInput:
      return "missing input";
    case ErrorKind::kValidation:
      return "validation";
    case ErrorKind::kRetryable:
      return "retryable";
    case ErrorKind::kUnavailable:
      return "unavailable";
    case ErrorKind::kConflict:
      return "conflict";
    default:
      return "error";
  }
}

struct Context {
  PipelineConfig config;
  fs::path config_path;
  std::string command;
  std::vector<std::string> args;
  fs::path manifest_path;

  RunManifest manifest() const {
    RunManifest m(command, args, to_json(config));
    if (!config_path.empty()) m.add_input(config_path);
    return m;
  }
  void finish(const RunManifest& m) const {
    const fs::path path =
        manifest_path.empty() ? config.paths.work_dir / "manifests" / (command + ".json")
                              : manifest_path;
    m.write(path);
  }
};

fs::path or_default(const fs::path& flag, const fs::path& fallback) {
  return flag.empty() ? fallback : flag;
}

fs::path lexicon_path(const Context& ctx, const fs::path& flag) {
  if (!flag.empty()) return flag;
  return ctx.config.paths.lexicon.empty() ? default_lexicon_path() : ctx.config.paths.lexicon;
}

void require_exists(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw missing_input(std::string(what) + " not found: " + p.string());
}

MonthRange window_from_flags(const PipelineConfig& cfg, const std::string& first,
                             const std::string& last) {
  MonthRange w = cfg.window;
  if (!first.empty()) w.first = parse_year_month(first);
  if (!last.empty()) w.last = parse_year_month(last);
  if (w.last < w.first) throw validation_error("window ends before it starts");
  return w;
}

std::unique_ptr<Scorer> scorer_from_config(const PipelineConfig& cfg) {
  const auto& s = cfg.scorer;
  if (!s.endpoint.empty()) {
    HttpScorer::Options o;
    o.base_url = s.endpoint;
    o.path = s.path;
    o.batch_size = s.batch_size;
    o.max_in_flight = s.max_in_flight;
    o.timeout = std::chrono::milliseconds(s.timeout_ms);
    return std::make_unique<HttpScorer>(o);
  }
  if (!s.cue_table.empty()) {
    require_exists(s.cue_table, "cue table");
    return std::make_unique<MockScorer>(cue_table_from_json(read_json_file(s.cue_table)),
                                        s.mock_smoothing);
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  fs::path out, fixtures, record, templates, lexicon;
  std::string first, last;
  int parallelism = 0;
};

int cmd_ingest(const Context& ctx, const IngestArgs& a) {
  const auto& cfg = ctx.config;
  auto m = ctx.manifest();
  const fs::path out = or_default(a.out, cfg.paths.corpus);
  const fs::path lex_path = lexicon_path(ctx, a.lexicon);
  const fs::path tmpl_path =
      or_default(a.templates, cfg.paths.templates.empty() ? default_templates_path()
                                                          : cfg.paths.templates);
  const fs::path fixtures = or_default(a.fixtures, cfg.ingest.fixture_dir);
  m.add_input(lex_path);
  m.add_input(tmpl_path);

  const auto lexicon = load_lexicon(lex_path);
  const auto templates = load_templates(tmpl_path);
  const MonthRange window = window_from_flags(cfg, a.first, a.last);
  auto specs = expand_queries(lexicon, templates, window, cfg.ingest.max_results);
  for (auto& s : specs) {
    s.region = cfg.ingest.region;
    s.language = cfg.ingest.language;
  }

  std::unique_ptr<PlatformClient> base;
  if (!fixtures.empty()) {
    require_exists(fixtures, "fixture directory");
    base = std::make_unique<FixtureClient>(fixtures);
    m.add_input(fixtures);
  } else {
    base = std::make_unique<HttpPlatformClient>(cfg.ingest.base_url, api_key_from_env());
  }
  std::unique_ptr<RecordingClient> recorder;
  PlatformClient* client = base.get();
  if (!a.record.empty()) {
    recorder = std::make_unique<RecordingClient>(*base, a.record);
    client = recorder.get();
  }

  const fs::path raw_dir = out / "raw";
  auto store = IngestStore::open(raw_dir);
  IngestOptions opts;
  opts.parallelism = a.parallelism > 0 ? a.parallelism : cfg.ingest.parallelism;
  const auto summary = run_ingest(specs, *client, store, opts);
  store.save(raw_dir, window);

  const auto filtered =
      post_retrieval_title_filter(store.videos(), CompiledLexicon::compile(lexicon));
  const Corpus raw(store.channels(), store.videos(), store.comments());
  const Corpus corpus = prune_corpus(raw, filtered.kept, raw.comments());
  save_corpus(corpus, out, window);

  json failures = json::array();
  for (const auto& f : summary.failures) {
    failures.push_back({{"cell", f.cell_key}, {"kind", kind_label(f.kind)}, {"message", f.message}});
  }
  m.set("cells", summary.cells);
  m.set("cells_skipped", summary.skipped);
  m.set("cells_fetched", summary.fetched);
  m.set("cell_failures", failures);
  m.set("merge_conflicts", store.conflicts());
  m.set("title_filter_dropped", filtered.dropped);
  m.set("corpus", {{"channels", corpus.channels().size()},
                   {"videos", corpus.videos().size()},
                   {"comments", corpus.comments().size()}});
  m.add_output(out);
  ctx.finish(m);
  spdlog::info("ingest: {} cells, {} fetched, {} skipped, {} failed; {} videos, {} comments kept",
               summary.cells, summary.fetched, summary.skipped, summary.failures.size(),
               corpus.videos().size(), corpus.comments().size());
  if (!summary.failures.empty()) {
    const auto& f = summary.failures.front();
    throw Error(f.kind, std::to_string(summary.failures.size()) +
                            " cell(s) failed, rerun to resume; first: " + f.cell_key + ": " +
                            f.message);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
  fs::path in, out;
};

int cmd_preprocess(const Context& ctx, const PreprocessArgs& a) {
  auto m = ctx.manifest();
  require_exists(a.in, "corpus directory");
  m.add_input(a.in);
  const Corpus corpus = load_corpus(a.in);
  const auto window = read_manifest(a.in).window;

  const auto videos = filter_educational_titles(corpus.videos());
  const Corpus titled = prune_corpus(corpus, videos, corpus.comments());

  const StopwordLanguageDetector stopwords;
  const std::vector<const LanguageDetector*> detectors{&stopwords};
  const auto lang = filter_language(titled.comments(), detectors);
  const Corpus out = prune_corpus(titled, titled.videos(), lang.kept);
  save_corpus(out, a.out, window);

  const json summary{
      {"input", {{"videos", corpus.videos().size()}, {"comments", corpus.comments().size()}}},
      {"educational_titles_dropped", corpus.videos().size() - videos.size()},
      {"comments_after_title_filter", titled.comments().size()},
      {"language_dropped", lang.dropped},
      {"language_detector_failures", lang.detector_failures},
      {"language_detectors", json::array({stopwords.name()})},
      {"output", {{"videos", out.videos().size()}, {"comments", out.comments().size()}}}};
  write_json_file(a.out / "preprocess_summary.json", summary);
  m.set("summary", summary);
  m.add_output(a.out);
  ctx.finish(m);
  return 0;
}

// ---------------------------------------------------------------------------

struct SampleArgs {
  fs::path corpus, out;
};

int cmd_sample(const Context& ctx, const SampleArgs& a) {
  const auto& cfg = ctx.config;
  auto m = ctx.manifest();
  const fs::path dir = or_default(a.corpus, cfg.paths.corpus);
  require_exists(dir, "corpus directory");
  m.add_input(dir);
  const Corpus corpus = load_corpus(dir);
  const auto ids = temporal_sample(corpus.comments(), cfg.annotation.per_month,
                                   cfg.annotation.seed, cfg.window);
  std::vector<json> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) {
    const Comment* c = corpus.find_comment(id);
    rows.push_back({{"comment_id", id},
                    {"text", c->text},
                    {"month", year_month_of(c->published_at).to_string()}});
  }
  const fs::path out = or_default(a.out, cfg.paths.work_dir / "sample.jsonl");
  write_jsonl(out, rows);
  m.set("sampled", ids.size());
  m.add_output(out);
  ctx.finish(m);
  return 0;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  fs::path sample, labels, pseudo, corpus, decisions;
  std::string bind;
  int port = -1;
};

std::vector<std::pair<std::string, std::string>> load_sample_items(const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> items;
  for_each_jsonl(path, [&](const json& row, std::size_t) {
    items.emplace_back(row.at("comment_id").get<std::string>(), row.value("text", ""));
  });
  return items;
}

std::vector<ReviewItem> load_review_items(const fs::path& pseudo, const fs::path& corpus_dir) {
  std::unordered_map<std::string, std::string> texts;
  if (!corpus_dir.empty()) {
    for (const auto& c : load_corpus(corpus_dir).comments()) texts.emplace(c.comment_id, c.text);
  }
  std::vector<ReviewItem> items;
  for_each_jsonl(pseudo, [&](const json& row, std::size_t) {
    ReviewItem it;
    it.comment_id = row.at("comment_id").get<std::string>();
    it.stance = require_stance(row.at("stance").get<std::string>());
    it.entropy = row.at("entropy").get<double>();
    if (auto t = texts.find(it.comment_id); t != texts.end()) it.text = t->second;
    items.push_back(std::move(it));
  });
  return items;
}

int cmd_serve(const Context& ctx, const ServeArgs& a) {
  const auto& cfg = ctx.config;
  auto m = ctx.manifest();
  const fs::path sample = or_default(a.sample, cfg.paths.work_dir / "sample.jsonl");
  require_exists(sample, "sample file");
  m.add_input(sample);

  AnnotationApi api;
  api.items = load_sample_items(sample);
  api.raters = cfg.annotation.raters;
  api.default_batch_size = cfg.service.batch_size;

  AnnotationLog log(or_default(a.labels, cfg.paths.work_dir / "annotations.jsonl"));
  api.log = &log;

  std::optional<ReviewQueue> queue;
  if (!a.pseudo.empty()) {
    require_exists(a.pseudo, "pseudo-label file");
    m.add_input(a.pseudo);
    queue.emplace(load_review_items(a.pseudo, a.corpus),
                  or_default(a.decisions, cfg.paths.work_dir / "review_decisions.jsonl"));
  } else {
    queue.emplace(std::vector<ReviewItem>{}, std::nullopt);
  }
  api.review = &*queue;

  const auto scorer = scorer_from_config(cfg);
  api.scorer = scorer.get();

  httplib::Server server;
  mount_annotation_api(server, api);

  const std::string host = a.bind.empty() ? cfg.service.bind : a.bind;
  const int want = a.port >= 0 ? a.port : cfg.service.port;
  int port = want;
  if (want == 0) {
    port = server.bind_to_any_port(host);
    if (port < 0) throw Error(ErrorKind::kGeneric, "cannot bind " + host);
  } else if (!server.bind_to_port(host, want)) {
    throw Error(ErrorKind::kGeneric, "cannot bind " + host + ":" + std::to_string(want));
  }
  m.set("bind", host);
  m.set("port", port);
  m.set("routes", annotation_api_routes());
  m.set("scorer", scorer ? json(scorer->name()) : json(nullptr));
  ctx.finish(m);

  // Signals are taken synchronously on a dedicated thread so the handler
  // can call into the server safely.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    spdlog::info("serve: signal {}, shutting down", sig);
    server.stop();
  });

  std::cout << "listening on " << host << ":" << port << std::endl;
  server.listen_after_bind();
  // listen_after_bind only returns after stop(); make sure the waiter ends.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  fs::path corpus, out, train_cues, cue_out, ids;
};

int cmd_score(const Context& ctx, const ScoreArgs& a) {
  const auto& cfg = ctx.config;
  auto m = ctx.manifest();
  const fs::path dir = or_default(a.corpus, cfg.paths.corpus);
  require_exists(dir, "corpus directory");
  m.add_input(dir);
  const Corpus corpus = load_corpus(dir);

  std::unique_ptr<Scorer> scorer;
  if (!a.train_cues.empty()) {
    require_exists(a.train_cues, "labeled set");
    m.add_input(a.train_cues);
    std::vector<std::pair<std::string, Stance>> examples;
    for (const auto& ex : load_labeled_set(a.train_cues).examples) {
      if (const Comment* c = corpus.find_comment(ex.comment_id)) {
        examples.emplace_back(c->text, ex.stance);
      }
    }
    auto cues = train_cue_table(examples);
    const fs::path cue_out = or_default(a.cue_out, cfg.paths.work_dir / "cue_table.json");
    write_json_file(cue_out, cue_table_to_json(cues));
    m.add_output(cue_out);
    scorer = std::make_unique<MockScorer>(std::move(cues), cfg.scorer.mock_smoothing);
  } else {
    scorer = scorer_from_config(cfg);
  }
  if (!scorer) {
    throw validation_error("no scorer configured: set scorer.endpoint or scorer.cue_table");
  }

  std::optional<std::set<std::string>> only;
  if (!a.ids.empty()) {
    require_exists(a.ids, "id list");
    m.add_input(a.ids);
    only.emplace();
    for_each_jsonl(a.ids, [&](const json& row, std::size_t) {
      only->insert(row.at("comment_id").get<std::string>());
    });
  }

  std::vector<std::string> ids, texts;
  for (const auto& c : corpus.comments()) {
    if (only && !only->count(c.comment_id)) continue;
    ids.push_back(c.comment_id);
    texts.push_back(c.text);
  }
  const auto probs = score_batch(texts, *scorer, cfg.scorer.normalization);
  std::vector<ScoredComment> scored;
  scored.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) scored.push_back({ids[i], probs[i]});

  const fs::path out = or_default(a.out, or_default(cfg.paths.scores, cfg.paths.work_dir / "scores.jsonl"));
  save_scores(out, scored);
  m.set("scorer", scorer->name());
  m.set("scored", scored.size());
  m.add_output(out);
  ctx.finish(m);
  return 0;
}

// ---------------------------------------------------------------------------

struct SelftrainArgs {
  fs::path scores, labels, annotations, decisions, out;
  int round = 1;
};

int cmd_selftrain(const Context& ctx, const SelftrainArgs& a) {
  const auto& cfg = ctx.config;
  auto m = ctx.manifest();
  const fs::path scores_path = or_default(a.scores, cfg.paths.scores);
  if (scores_path.empty()) throw validation_error("no scores file given");
  require_exists(scores_path, "scores file");
  m.add_input(scores_path);
  const fs::path out = or_default(a.out, cfg.paths.work_dir / "selftrain");

  LabeledSet labeled;
  json annotation_summary;
  if (!a.annotations.empty()) {
    require_exists(a.annotations, "annotation log");
    m.add_input(a.annotations);
    const AnnotationLog log(a.annotations);
    std::vector<AnnotationRecord> complete;
    for (auto& r : log.records()) {
      if (static_cast<int>(r.labels.size()) == cfg.annotation.raters) complete.push_back(resolve(std::move(r)));
    }
    const auto ds = labeled_dataset(complete);
    labeled = ds.set;
    annotation_summary = to_json(summarize_agreement(log, cfg.annotation.raters));
    save_labeled_set(out / "labeled.jsonl", labeled);
    m.add_output(out / "labeled.jsonl");
  } else {
    const fs::path labels = or_default(a.labels, cfg.paths.labels);
    require_exists(labels, "labeled set");
    m.add_input(labels);
    labeled = load_labeled_set(labels);
  }

  const auto scored = load_scores(scores_path, cfg.scorer.normalization);
  if (scored.empty()) throw validation_error("no predictions in " + scores_path.string());

  std::set<std::string> excluded;
  for (const auto& ex : labeled.examples) excluded.insert(ex.comment_id);
  std::size_t review_excluded = 0;
  if (!a.decisions.empty()) {
    m.add_input(a.decisions);
    for (const auto& id : exclusion_list(load_review_decisions(a.decisions))) {
      review_excluded += excluded.insert(id).second ? 1 : 0;
    }
  }
  std::vector<ScoredComment> pool;
  for (const auto& s : scored) {
    if (!excluded.count(s.comment_id)) pool.push_back(s);
  }
  if (pool.empty()) throw validation_error("no predictions left after excluding labeled items");

  const auto preds = make_predictions(pool);
  const auto budget = allocate_budget(labeled.counts(), cfg.selftrain.budget, cfg.selftrain.apportionment);
  const auto batch = select_low_entropy(preds, budget);
  const auto merged = merge_datasets(labeled, batch);

  json report = selection_report(budget, batch, preds, a.round);
  report["excluded_labeled"] = labeled.size();
  report["excluded_by_review"] = review_excluded;
  report["merged_size"] = merged.merged.size();
  report["growth_percent"] = merged.growth_percent ? json(*merged.growth_percent) : json(nullptr);
  const auto weights = class_weights(merged.merged.counts());
  json w = json::object();
  for (Stance s : kAllStances) w[std::string(to_string(s))] = weights[index(s)];
  report["train_class_weights"] = w;
  if (!annotation_summary.is_null()) report["annotation"] = annotation_summary;

  save_pseudo_labels(out / "pseudo_labels.jsonl", batch, a.round);
  write_json_file(out / "selection_report.json", report);
  save_labeled_set(out / "train_set.jsonl", merged.merged);
  m.add_output(out / "pseudo_labels.jsonl");
  m.add_output(out / "selection_report.json");
  m.add_output(out / "train_set.jsonl");
  m.set("selected", batch.size());
  ctx.finish(m);
  return 0;
}

// ---------------------------------------------------------------------------

struct PlanArgs {
  fs::path labels, out;
};

int cmd_plan_folds(const Context& ctx, const PlanArgs& a) {
  const auto& cfg = ctx.config;
  auto m = ctx.manifest();
  const fs::path labels = or_default(a.labels, cfg.paths.labels);
  require_exists(labels, "labeled set");
  m.add_input(labels);
  std::vector<std::pair<std::string, Stance>> pairs;
  for (const auto& ex : load_labeled_set(labels).examples) pairs.emplace_back(ex.comment_id, ex.stance);
  const auto plan = make_fold_plan(pairs, cfg.evaluation.folds, cfg.evaluation.seed);
  const fs::path out = or_default(a.out, cfg.paths.work_dir / "plan.json");
  write_json_file(out, to_json(plan));
  m.add_output(out);
  ctx.finish(m);
  return 0;
}

struct EvaluateArgs {
  fs::path plan, preds, out;
};

int cmd_evaluate(const Context& ctx, const EvaluateArgs& a) {
  const auto& cfg = ctx.config;
  auto m = ctx.manifest();
  require_exists(a.plan, "fold plan");
  require_exists(a.preds, "prediction directory");
  m.add_input(a.plan);
  m.add_input(a.preds);
  const auto plan = fold_plan_from_json(read_json_file(a.plan));
  const json report = evaluate_plan(plan, a.preds, cfg.evaluation.confidence);
  const fs::path out = or_default(a.out, cfg.paths.work_dir / "metrics_report.json");
  write_json_file(out, report);
  m.add_output(out);
  ctx.finish(m);
  return 0;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  fs::path corpus, stances, out, lexicon, taxonomy;
  std::vector<std::string> published;
};

// STANCE:metric:value:decimals, e.g. AGAINST:replies_per_comment:0.36:2
RatioReference parse_reference(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t pos; (pos = text.find(':', start)) != std::string::npos; start = pos + 1) {
    parts.push_back(text.substr(start, pos - start));
  }
  parts.push_back(text.substr(start));
  if (parts.size() != 4) {
    throw validation_error("--published-ratio wants STANCE:metric:value:decimals, got " + text);
  }
  RatioReference r;
  r.stance = require_stance(parts[0]);
  r.metric = parts[1];
  if (r.metric != "likes_per_comment" && r.metric != "replies_per_comment") {
    throw validation_error("unknown ratio metric " + r.metric);
  }
  try {
    r.published = std::stod(parts[2]);
    r.decimals = std::stoi(parts[3]);
  } catch (const std::exception&) {
    throw validation_error("bad number in --published-ratio " + text);
  }
  return r;
}

int cmd_analyze(const Context& ctx, const AnalyzeArgs& a) {
  const auto& cfg = ctx.config;
  auto m = ctx.manifest();
  const fs::path dir = or_default(a.corpus, cfg.paths.corpus);
  require_exists(dir, "corpus directory");
  m.add_input(dir);
  Corpus corpus = load_corpus(dir);

  if (!a.stances.empty()) {
    require_exists(a.stances, "scores file");
    m.add_input(a.stances);
    std::unordered_map<std::string, Stance> by_id;
    for (const auto& s : load_scores(a.stances, cfg.scorer.normalization)) {
      by_id.emplace(s.comment_id, s.probs.argmax());
    }
    std::vector<Comment> comments = corpus.comments();
    for (auto& c : comments) {
      if (auto it = by_id.find(c.comment_id); it != by_id.end()) c.stance = it->second;
    }
    corpus = Corpus(corpus.channels(), corpus.videos(), std::move(comments));
  }

  const fs::path lex_path = lexicon_path(ctx, a.lexicon);
  m.add_input(lex_path);
  const auto lexicon = CompiledLexicon::compile(load_lexicon(lex_path));

  std::optional<Taxonomy> taxonomy;
  const fs::path tax_path = or_default(a.taxonomy, cfg.paths.taxonomy);
  if (!tax_path.empty()) {
    require_exists(tax_path, "taxonomy");
    m.add_input(tax_path);
    taxonomy = Taxonomy::load(tax_path);
  }

  AnalysisOptions opts;
  opts.window = read_manifest(dir).window;
  opts.top_n = cfg.analysis.top_n;
  for (const auto& p : a.published) opts.references.push_back(parse_reference(p));

  const auto report = analyze_corpus(corpus, &lexicon, taxonomy ? &*taxonomy : nullptr, opts);
  const fs::path out = or_default(a.out, cfg.paths.work_dir / "report.json");
  write_json_file(out, to_json(report));
  m.add_output(out);
  ctx.finish(m);
  return 0;
}

struct ReportArgs {
  fs::path input, out;
  std::string format = "csv";
};

int cmd_report(const Context& ctx, const ReportArgs& a) {
  auto m = ctx.manifest();
  const fs::path input = or_default(a.input, ctx.config.paths.work_dir / "report.json");
  require_exists(input, "analysis report");
  m.add_input(input);
  const auto fmt = parse_report_format(a.format);
  const auto report = analysis_report_from_json(read_json_file(input));
  const fs::path out = or_default(a.out, ctx.config.paths.work_dir / ("report_" + a.format));
  for (const auto& p : emit_report(report, fmt, out)) m.add_output(p);
  ctx.finish(m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vaxstance: vaccine stance corpus pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Context ctx;
  std::string config_file;
  std::string manifest_file;
  bool verbose = false;
  app.add_option("-c,--config", config_file, "Config file (defaults apply when omitted)");
  app.add_option("--manifest", manifest_file,
                 "Run manifest path (default: <work_dir>/manifests/<command>.json)");
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::function<int()> run;

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Fetch videos and comments per query cell");
  s_ingest->add_option("--out", ingest.out, "Corpus output directory");
  s_ingest->add_option("--fixtures", ingest.fixtures, "Replay recorded responses from this directory");
  s_ingest->add_option("--record", ingest.record, "Record every response into this directory");
  s_ingest->add_option("--templates", ingest.templates, "Query template file");
  s_ingest->add_option("--lexicon", ingest.lexicon, "Vaccine lexicon JSON");
  s_ingest->add_option("--first-month", ingest.first, "Window start, YYYY-MM");
  s_ingest->add_option("--last-month", ingest.last, "Window end, YYYY-MM");
  s_ingest->add_option("--parallelism", ingest.parallelism, "Concurrent cells")->check(CLI::PositiveNumber);
  s_ingest->callback([&] { run = [&] { return cmd_ingest(ctx, ingest); }; });

  PreprocessArgs pre;
  auto* s_pre = app.add_subcommand("preprocess", "Drop course videos and non-Portuguese comments");
  s_pre->add_option("--in", pre.in, "Input corpus directory")->required();
  s_pre->add_option("--out", pre.out, "Output corpus directory")->required();
  s_pre->callback([&] { run = [&] { return cmd_preprocess(ctx, pre); }; });

  SampleArgs sample;
  auto* s_sample = app.add_subcommand("sample", "Draw the per-month annotation sample");
  s_sample->add_option("--corpus", sample.corpus, "Corpus directory");
  s_sample->add_option("--out", sample.out, "sample.jsonl path");
  s_sample->callback([&] { run = [&] { return cmd_sample(ctx, sample); }; });

  ServeArgs serve;
  auto* s_serve = app.add_subcommand("serve", "Run the /v1 annotation and review API");
  s_serve->add_option("--sample", serve.sample, "sample.jsonl with items to label");
  s_serve->add_option("--labels", serve.labels, "Annotation log (JSONL, appended)");
  s_serve->add_option("--pseudo", serve.pseudo, "pseudo_labels.jsonl for the review queue");
  s_serve->add_option("--corpus", serve.corpus, "Corpus used to show review item text");
  s_serve->add_option("--decisions", serve.decisions, "Review decision log (JSONL, appended)");
  s_serve->add_option("--bind", serve.bind, "Bind address");
  s_serve->add_option("--port", serve.port, "Port; 0 picks a free one");
  s_serve->callback([&] { run = [&] { return cmd_serve(ctx, serve); }; });

  ScoreArgs score;
  auto* s_score = app.add_subcommand("score", "Score corpus comments into scores.jsonl");
  s_score->add_option("--corpus", score.corpus, "Corpus directory");
  s_score->add_option("--out", score.out, "scores.jsonl path");
  s_score->add_option("--train-cues", score.train_cues,
                      "Fit the offline cue scorer on this labeled set first");
  s_score->add_option("--cue-out", score.cue_out, "Where to write the fitted cue table");
  s_score->add_option("--ids", score.ids, "Only score comment_ids listed in this JSONL file");
  s_score->callback([&] { run = [&] { return cmd_score(ctx, score); }; });

  SelftrainArgs st;
  auto* s_st = app.add_subcommand("selftrain", "Select low-entropy pseudo-labels and merge");
  s_st->add_option("--scores", st.scores, "scores.jsonl");
  auto* o_labels = s_st->add_option("--labels", st.labels, "Labeled set JSONL");
  s_st->add_option("--annotations", st.annotations, "Annotation log to resolve into labels")
      ->excludes(o_labels);
  s_st->add_option("--decisions", st.decisions, "Review decisions; overridden items are excluded");
  s_st->add_option("--out", st.out, "Output directory");
  s_st->add_option("--round", st.round, "Self-training round number")->check(CLI::PositiveNumber);
  s_st->callback([&] { run = [&] { return cmd_selftrain(ctx, st); }; });

  PlanArgs plan;
  auto* s_plan = app.add_subcommand("plan-folds", "Write the stratified fold plan");
  s_plan->add_option("--labels", plan.labels, "Labeled set JSONL");
  s_plan->add_option("--out", plan.out, "plan.json path");
  s_plan->callback([&] { run = [&] { return cmd_plan_folds(ctx, plan); }; });

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "Score per-fold predictions against a plan");
  s_ev->add_option("--plan", ev.plan, "plan.json")->required();
  s_ev->add_option("--preds", ev.preds, "Directory of fold_<i>.jsonl files")->required();
  s_ev->add_option("--out", ev.out, "metrics_report.json path");
  s_ev->callback([&] { run = [&] { return cmd_evaluate(ctx, ev); }; });

  AnalyzeArgs an;
  auto* s_an = app.add_subcommand("analyze", "Compute discourse tables into report.json");
  s_an->add_option("--corpus", an.corpus, "Corpus directory");
  s_an->add_option("--stances", an.stances, "scores.jsonl; argmax overrides stored stances");
  s_an->add_option("--lexicon", an.lexicon, "Vaccine lexicon JSON");
  s_an->add_option("--taxonomy", an.taxonomy, "Channel taxonomy JSON");
  s_an->add_option("--published-ratio", an.published,
                   "STANCE:metric:value:decimals to cross-check (repeatable)");
  s_an->add_option("--out", an.out, "report.json path");
  s_an->callback([&] { run = [&] { return cmd_analyze(ctx, an); }; });

  ReportArgs rep;
  auto* s_rep = app.add_subcommand("report", "Emit report tables as CSV or JSON files");
  s_rep->add_option("--input", rep.input, "report.json");
  s_rep->add_option("--format", rep.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  s_rep->add_option("--out", rep.out, "Output directory");
  s_rep->callback([&] { run = [&] { return cmd_report(ctx, rep); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("vaxstance"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    ctx.command = app.get_subcommands().front()->get_name();
    ctx.args.assign(argv + 1, argv + argc);
    ctx.manifest_path = manifest_file;
    if (config_file.empty()) {
      ctx.config = parse_config("", fs::current_path());
    } else {
      ctx.config_path = config_file;
      require_exists(ctx.config_path, "config file");
      ctx.config = load_config(ctx.config_path);
    }
    return run();
  } catch (const Error& e) {
    std::cerr << "vaxstance " << ctx.command << ": " << kind_label(e.kind()) << ": " << e.what()
              << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "vaxstance " << ctx.command << ": error: " << e.what() << "\n";
    return 1;
  }
}
