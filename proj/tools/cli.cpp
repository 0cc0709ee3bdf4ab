#include "cli.hpp"

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "medcot/analytics.hpp"
#include "medcot/dataset.hpp"
#include "medcot/error.hpp"
#include "medcot/mock_server.hpp"
#include "medcot/prompts.hpp"
#include "medcot/report.hpp"
#include "medcot/scoring.hpp"
#include "medcot/sft.hpp"
#include "medcot/taxonomy.hpp"
#include "medcot/teacher.hpp"
#include "json.hpp"

namespace medcot::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return fs::weakly_canonical(base / p);
}

void apply_json(RunConfig& c, const json& j, const fs::path& base) {
  auto path_key = [&](const char* key, fs::path& dst) {
    if (j.contains(key) && !j[key].is_null()) dst = resolve(base, j[key].get<std::string>());
  };
  auto str_key = [&](const char* key, std::string& dst) {
    if (j.contains(key) && !j[key].is_null()) dst = j[key].get<std::string>();
  };
  auto num_key = [&](const char* key, auto& dst) {
    if (j.contains(key) && !j[key].is_null()) dst = j[key].get<std::remove_reference_t<decltype(dst)>>();
  };
  path_key("dataset", c.dataset);
  str_key("format", c.format);
  path_key("header_map", c.header_map);
  path_key("manifest", c.manifest);
  path_key("annotations", c.annotations);
  path_key("predictions", c.predictions);
  path_key("image_root", c.image_root);
  path_key("profile", c.profile);
  path_key("keyword_table", c.keyword_table);
  str_key("score_endpoint", c.score_endpoint);
  str_key("generate_endpoint", c.generate_endpoint);
  str_key("api_key_env", c.api_key_env);
  num_key("concurrency", c.concurrency);
  num_key("max_attempts", c.max_attempts);
  num_key("base_delay_ms", c.base_delay_ms);
  num_key("max_delay_ms", c.max_delay_ms);
  num_key("timeout_ms", c.timeout_ms);
  if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
  path_key("out", c.out);
  str_key("family", c.family);
  num_key("include_image", c.include_image);
  str_key("config_kind", c.config_kind);
  num_key("chunks", c.chunks);
  num_key("resamples", c.resamples);
  str_key("model_id", c.model_id);
  str_key("teacher_id", c.teacher_id);
  num_key("teacher_max_tokens", c.teacher_max_tokens);
  num_key("teacher_temperature", c.teacher_temperature);
  num_key("max_skip_fraction", c.max_skip_fraction);
  num_key("failure_threshold", c.failure_threshold);
  str_key("host", c.host);
  num_key("port", c.port);
}

/// Stage context: resolved config plus the counts that end up in run_meta.json.
struct Run {
  std::string stage;
  RunConfig config;
  std::ostream& out;
  std::ostream& err;
  std::string started_at = utc_now();
  ordered_json counts = ordered_json::object();

  void write_meta() const {
    ordered_json j;
    j["stage"] = stage;
    j["config"] = ordered_json::parse(config_to_json(config));
    j["started_at"] = started_at;
    j["finished_at"] = utc_now();
    j["counts"] = counts;
    write_text(config.out / "run_meta.json", j.dump(2) + "\n");
  }
};

std::vector<VqaRecord> load_records(const RunConfig& c) {
  if (c.dataset.empty()) throw Error(ErrorCode::ConfigError, "no dataset given (--dataset)");
  LoadOptions options;
  if (c.format == "csv") {
    options.format = DatasetFormat::Csv;
    if (!c.header_map.empty()) options.csv = CsvHeaderMap::from_json_file(c.header_map);
  } else if (c.format != "jsonl") {
    throw Error(ErrorCode::ConfigError, "format must be csv or jsonl");
  }
  return load_dataset(c.dataset, options);
}

PromptFamily require_family(const std::string& text) {
  auto f = parse_family(text);
  if (!f) throw Error(ErrorCode::ConfigError, "family must be nocaption, caption or cot");
  return *f;
}

std::uint64_t require_seed(const RunConfig& c, std::string_view stage) {
  if (!c.seed) throw Error(ErrorCode::ConfigError, std::string(stage) + " requires --seed");
  return *c.seed;
}

RetryPolicy retry_policy(const RunConfig& c) {
  RetryPolicy p;
  p.max_attempts = c.max_attempts;
  p.base_delay = std::chrono::milliseconds(c.base_delay_ms);
  p.max_delay = std::chrono::milliseconds(c.max_delay_ms);
  p.timeout = std::chrono::milliseconds(c.timeout_ms);
  p.seed = c.seed.value_or(0);
  return p;
}

std::optional<std::string> api_key(const RunConfig& c) {
  if (c.api_key_env.empty()) return std::nullopt;
  const char* value = std::getenv(c.api_key_env.c_str());
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

Taxonomy load_taxonomy(const RunConfig& c) {
  return c.keyword_table.empty() ? Taxonomy() : Taxonomy::from_json_file(c.keyword_table);
}

std::vector<CategoryAssignment> assign_categories(const Taxonomy& taxonomy, std::span<const VqaRecord> records) {
  std::vector<CategoryAssignment> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.id, taxonomy.categorize(r.question)});
  return out;
}

std::string failures_jsonl(std::span<const RecordFailure> failures) {
  std::string s;
  for (const auto& f : failures) {
    ordered_json j;
    j["record_id"] = f.record_id;
    j["error"] = std::string(to_string(f.code));
    j["message"] = f.message;
    s += j.dump() + "\n";
  }
  return s;
}

bool above_threshold(std::size_t failures, std::size_t total, double threshold) {
  return total > 0 && static_cast<double>(failures) / static_cast<double>(total) > threshold;
}

// ---------------------------------------------------------------- stages

int stage_ingest(Run& run) {
  const auto records = load_records(run.config);
  const auto path = run.config.out / "dataset.jsonl";
  save_jsonl(path, records);
  run.counts["records"] = records.size();
  run.out << "wrote " << records.size() << " records to " << path.string() << "\n";
  return kOk;
}

int stage_stats(Run& run) {
  const auto records = load_records(run.config);
  ordered_json all = ordered_json::object();
  for (auto split : {Split::Train, Split::Test}) {
    std::vector<VqaRecord> subset;
    for (const auto& r : records) {
      if (r.split == split) subset.push_back(r);
    }
    if (subset.empty()) continue;
    const auto stats = compute_split_stats(subset);
    run.out << to_string(split) << ": total " << stats.total << "\n";
    ordered_json j;
    j["total"] = stats.total;
    for (Label l : kLabels) {
      char pct[16];
      std::snprintf(pct, sizeof pct, "%.1f", stats.pct(l));
      run.out << "  " << to_char(l) << ": " << stats.count(l) << " (" << pct << "%)\n";
      j["per_label_count"][std::string(1, to_char(l))] = stats.count(l);
      j["per_label_pct"][std::string(1, to_char(l))] = stats.pct(l);
    }
    all[std::string(to_string(split))] = std::move(j);
    run.counts[std::string(to_string(split))] = stats.total;
  }
  write_text(run.config.out / "stats.json", all.dump(2) + "\n");
  return kOk;
}

int stage_chunk(Run& run) {
  // Chunks feed training, so test records never enter them.
  std::vector<VqaRecord> records;
  for (auto& r : load_records(run.config)) {
    if (r.split == Split::Train) records.push_back(std::move(r));
  }
  if (records.empty()) throw Error(ErrorCode::EmptySplit, "no train records to chunk");
  const auto manifests = chunk_dataset(records, run.config.chunks, "chunks/");
  std::unordered_map<std::string_view, const VqaRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);
  for (const auto& m : manifests) {
    std::vector<VqaRecord> chunk;
    chunk.reserve(m.record_ids.size());
    for (const auto& id : m.record_ids) chunk.push_back(*by_id.at(id));
    save_jsonl(run.config.out / m.file_path, chunk);
  }
  write_text(run.config.out / "manifest.json", manifests_to_json(manifests));
  run.counts["records"] = records.size();
  run.counts["chunks"] = manifests.size();
  run.out << "wrote " << manifests.size() << " chunks to " << (run.config.out / "chunks").string() << "\n";
  return kOk;
}

int stage_categorize(Run& run) {
  const auto records = load_records(run.config);
  const auto taxonomy = load_taxonomy(run.config);
  std::map<QuestionCategory, std::size_t> totals;
  std::string lines;
  for (const auto& a : assign_categories(taxonomy, records)) {
    ordered_json j;
    j["record_id"] = a.record_id;
    j["categories"] = ordered_json::array();
    for (auto c : a.categories) {
      j["categories"].push_back(std::string(to_string(c)));
      ++totals[c];
    }
    lines += j.dump() + "\n";
  }
  write_text(run.config.out / "categories.jsonl", lines);
  for (auto c : kCategories) {
    run.out << display_name(c) << ": " << totals[c] << "\n";
    run.counts[std::string(to_string(c))] = totals[c];
  }
  return kOk;
}

int stage_render_prompts(Run& run) {
  VqaRecord sample;
  sample.id = "sample";
  sample.question = "[question text]";
  sample.options = {"[option A]", "[option B]", "[option C]", "[option D]"};
  sample.caption = "[caption text]";
  if (!run.config.dataset.empty()) {
    const auto records = load_records(run.config);
    if (!records.empty()) sample = records.front();
  }
  for (auto family : {PromptFamily::NoCaption, PromptFamily::CaptionAware, PromptFamily::CotTraining}) {
    run.out << "=== " << to_string(family) << " system ===\n" << render_system(family) << "\n";
    run.out << "=== " << to_string(family) << " user ===\n";
    try {
      run.out << render_user(sample, family) << "\n";
    } catch (const Error& e) {
      run.out << "(" << e.what() << ")\n";
    }
  }
  return kOk;
}

int stage_gen_cot(Run& run) {
  const auto& c = run.config;
  const auto records = load_records(c);
  const auto endpoint = c.generate_endpoint.empty() ? c.score_endpoint : c.generate_endpoint;
  if (endpoint.empty()) throw Error(ErrorCode::ConfigError, "no generate endpoint (--endpoint)");

  TeacherOptions options;
  options.endpoint = Endpoint::parse(endpoint);
  options.retry = retry_policy(c);
  options.concurrency = c.concurrency;
  options.api_key = api_key(c);
  options.teacher_id = c.teacher_id;
  options.max_tokens = c.teacher_max_tokens;
  options.temperature = c.teacher_temperature;
  options.checkpoint = c.annotations.empty() ? c.out / "annotations.jsonl" : c.annotations;
  if (!c.image_root.empty()) options.images = file_image_provider(c.image_root);

  const auto result = generate_explanations(records, options);
  write_text(c.out / "gen_failures.jsonl", failures_jsonl(result.failures));
  run.counts["records"] = records.size();
  run.counts["requests"] = result.requests_issued;
  run.counts["resumed"] = result.resumed;
  run.counts["failures"] = result.failures.size();

  ordered_json cov;
  try {
    const auto report = coverage_stats(result.annotations, records.size());
    cov["total"] = report.total;
    cov["succeeded"] = report.succeeded;
    cov["coverage_pct"] = report.coverage_pct;
    cov["words"] = {{"mean", report.words.mean},
                    {"median", report.words.median},
                    {"min", report.words.min},
                    {"max", report.words.max}};
    char pct[16];
    std::snprintf(pct, sizeof pct, "%.2f", report.coverage_pct);
    run.out << "coverage " << report.succeeded << "/" << report.total << " = " << pct << "%; words mean "
            << report.words.mean << ", median " << report.words.median << ", range " << report.words.min << "-"
            << report.words.max << "\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoAnnotations) throw;
    cov["total"] = records.size();
    cov["succeeded"] = 0;
    run.err << "no successful annotations\n";
  }
  write_text(c.out / "coverage.json", cov.dump(2) + "\n");
  return above_threshold(result.failures.size(), records.size(), c.failure_threshold) ? kRecordFailures : kOk;
}

int stage_emit_sft(Run& run) {
  const auto& c = run.config;
  const auto records = load_records(c);
  auto kind = parse_sft_kind(c.config_kind);
  if (!kind) throw Error(ErrorCode::ConfigError, "config_kind must be answer_only_nocaption, answer_only_caption or cot_nocaption");

  std::vector<ChunkManifest> manifests = c.manifest.empty() ? chunk_dataset(records, c.chunks)
                                                            : manifests_from_json(read_text(c.manifest));
  std::vector<CotAnnotation> annotations;
  if (*kind == SftKind::CotNoCaption) {
    if (c.annotations.empty()) throw Error(ErrorCode::ConfigError, "cot_nocaption needs --annotations");
    annotations = load_annotations(c.annotations);
  }
  SftEmitOptions options;
  options.kind = *kind;
  options.out_dir = c.out / "sft";
  options.max_skip_fraction = c.max_skip_fraction;
  const auto summary = emit_sft_chunks(records, annotations, manifests, options);

  TrainConfig train;
  train.n_chunks = static_cast<int>(manifests.size());
  emit_train_config(c.out / "train_config.json", train);

  std::size_t samples = 0;
  for (auto n : summary.samples_per_chunk) samples += n;
  run.counts["chunks"] = summary.files.size();
  run.counts["samples"] = samples;
  run.counts["skipped"] = summary.skipped_ids.size();
  run.out << "wrote " << samples << " samples in " << summary.files.size() << " chunk files ("
          << summary.skipped_ids.size() << " skipped)\n";
  return kOk;
}

struct EvalRun {
  SplitEvaluation evaluation;
  std::vector<Outcome> outcomes;
};

EvalRun run_eval(const RunConfig& c, std::span<const VqaRecord> records, bool include_image, const fs::path& dir) {
  if (c.score_endpoint.empty()) throw Error(ErrorCode::ConfigError, "no score endpoint (--endpoint)");
  ScoringOptions options;
  options.endpoint = Endpoint::parse(c.score_endpoint);
  options.retry = retry_policy(c);
  options.concurrency = c.concurrency;
  options.api_key = api_key(c);
  const auto root = c.image_root.empty() ? c.dataset.parent_path() : c.image_root;

  EvalRun run;
  run.evaluation = evaluate_split(records, require_family(c.family), options, include_image, file_image_provider(root));
  std::string lines;
  for (const auto& s : run.evaluation.results) {
    lines += prediction_to_jsonl_line(s) + "\n";
    run.outcomes.push_back({s.record_id, s.gold, s.prediction.chosen});
  }
  write_text(dir / "predictions.jsonl", lines);
  write_text(dir / "failures.jsonl", failures_jsonl(run.evaluation.failures));
  return run;
}

RunMetadata metadata(const RunConfig& c, bool include_image, std::size_t failures) {
  RunMetadata m;
  m.model_id = c.model_id;
  m.family = c.family;
  m.seed = c.seed.value_or(0);
  m.endpoint = c.score_endpoint;
  m.include_image = include_image;
  m.n_failures = failures;
  return m;
}

BootstrapOptions bootstrap_options(const RunConfig& c) {
  BootstrapOptions b;
  b.n_resamples = c.resamples;
  b.seed = *c.seed;
  return b;
}

int stage_eval(Run& run) {
  const auto& c = run.config;
  require_seed(c, "eval");
  require_family(c.family);
  const auto records = load_records(c);
  const auto taxonomy = load_taxonomy(c);
  const auto assignments = assign_categories(taxonomy, records);

  auto result = run_eval(c, records, c.include_image, c.out);
  run.counts["records"] = records.size();
  run.counts["scored"] = result.evaluation.results.size();
  run.counts["failures"] = result.evaluation.failures.size();
  if (result.outcomes.empty()) throw Error(ErrorCode::EmptyResults, "every record failed");

  const auto report = build_report(result.outcomes, assignments,
                                   metadata(c, c.include_image, result.evaluation.failures.size()),
                                   bootstrap_options(c));
  write_report_files(report, c.out);
  char line[128];
  std::snprintf(line, sizeof line, "accuracy %.1f%% [%.1f, %.1f] over %zu records\n", round_1dp(report.overall.point),
                round_1dp(report.overall.lower), round_1dp(report.overall.upper), report.n);
  run.out << line;
  return above_threshold(result.evaluation.failures.size(), records.size(), c.failure_threshold) ? kRecordFailures
                                                                                                 : kOk;
}

int stage_ablate(Run& run) {
  const auto& c = run.config;
  require_seed(c, "ablate");
  require_family(c.family);
  const auto records = load_records(c);
  const auto assignments = assign_categories(load_taxonomy(c), records);

  auto with = run_eval(c, records, true, c.out / "with_image");
  auto without = run_eval(c, records, false, c.out / "without_image");

  // Both accuracies come from the records scored in both runs.
  std::set<std::string_view> both;
  {
    std::set<std::string_view> scored_without;
    for (const auto& o : without.outcomes) scored_without.insert(o.record_id);
    for (const auto& o : with.outcomes) {
      if (scored_without.contains(o.record_id)) both.insert(o.record_id);
    }
  }
  auto restrict = [&](const std::vector<Outcome>& in) {
    std::vector<Outcome> out;
    for (const auto& o : in) {
      if (both.contains(o.record_id)) out.push_back(o);
    }
    return out;
  };
  const auto with_common = restrict(with.outcomes);
  const auto without_common = restrict(without.outcomes);
  if (with_common.empty()) throw Error(ErrorCode::EmptyResults, "no record scored in both runs");

  const auto failures = with.evaluation.failures.size() + without.evaluation.failures.size();
  const auto bootstrap = bootstrap_options(c);
  auto with_report = build_report(with_common, assignments, metadata(c, true, with.evaluation.failures.size()), bootstrap);
  write_report_files(with_report, c.out / "with_image");
  auto without_report =
      build_report(without_common, assignments, metadata(c, false, without.evaluation.failures.size()), bootstrap);
  write_report_files(without_report, c.out / "without_image");

  AblationSummary ablation;
  ablation.with_image = with_report.overall.point;
  ablation.without_image = without_report.overall.point;
  ablation.delta_pp = ablation_delta(ablation.with_image, ablation.without_image);
  with_report.ablation = ablation;
  with_report.meta.n_failures = failures;
  write_report_files(with_report, c.out);

  run.counts["records"] = records.size();
  run.counts["common"] = with_common.size();
  run.counts["failures"] = failures;
  char line[160];
  std::snprintf(line, sizeof line, "with image %.1f%%, without image %.1f%%, delta %+.1f pp\n",
                round_1dp(ablation.with_image), round_1dp(ablation.without_image), ablation.delta_pp);
  run.out << line;
  return above_threshold(failures, 2 * records.size(), c.failure_threshold) ? kRecordFailures : kOk;
}

int stage_report(Run& run) {
  const auto& c = run.config;
  require_seed(c, "report");
  if (c.predictions.empty()) throw Error(ErrorCode::ConfigError, "report needs --predictions");
  const auto records = load_records(c);
  const auto assignments = assign_categories(load_taxonomy(c), records);
  std::vector<Outcome> outcomes;
  std::istringstream in(read_text(c.predictions));
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto s = scored_record_from_json(line);
    outcomes.push_back({s.record_id, s.gold, s.prediction.chosen});
  }
  const auto report = build_report(outcomes, assignments, metadata(c, c.include_image, 0), bootstrap_options(c));
  write_report_files(report, c.out);
  run.counts["results"] = outcomes.size();
  run.out << "wrote report for " << outcomes.size() << " results to " << c.out.string() << "\n";
  return kOk;
}

MockServer* g_server = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int stage_mock_serve(Run& run) {
  const auto& c = run.config;
  MockModelProfile profile = c.profile.empty() ? MockModelProfile{} : MockModelProfile::from_json_file(c.profile);
  if (!c.dataset.empty()) {
    const auto records = load_records(c);
    const std::array families = {PromptFamily::NoCaption, PromptFamily::CaptionAware, PromptFamily::CotTraining};
    for (auto& [k, v] : build_gold_fixture(records, families)) profile.gold_lookup.emplace(k, v);
  }
  if (c.seed) profile.seed = *c.seed;
  run.counts["gold_entries"] = profile.gold_lookup.size();
  run.write_meta();

  MockServer server(std::move(profile));
  g_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  run.out << "mock server listening on http://" << c.host << ":" << c.port << std::endl;
  server.run(c.host, c.port);
  g_server = nullptr;
  return kOk;
}

}  // namespace

RunConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  if (j.contains("stage") && j.contains("config")) j = j["config"];
  RunConfig c;
  try {
    apply_json(c, j, fs::absolute(path).parent_path());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return c;
}

std::string config_to_json(const RunConfig& c) {
  ordered_json j;
  j["dataset"] = c.dataset.string();
  j["format"] = c.format;
  j["header_map"] = c.header_map.string();
  j["manifest"] = c.manifest.string();
  j["annotations"] = c.annotations.string();
  j["predictions"] = c.predictions.string();
  j["image_root"] = c.image_root.string();
  j["profile"] = c.profile.string();
  j["keyword_table"] = c.keyword_table.string();
  j["score_endpoint"] = c.score_endpoint;
  j["generate_endpoint"] = c.generate_endpoint;
  j["api_key_env"] = c.api_key_env;
  j["concurrency"] = c.concurrency;
  j["max_attempts"] = c.max_attempts;
  j["base_delay_ms"] = c.base_delay_ms;
  j["max_delay_ms"] = c.max_delay_ms;
  j["timeout_ms"] = c.timeout_ms;
  j["seed"] = c.seed ? ordered_json(*c.seed) : ordered_json(nullptr);
  j["out"] = c.out.string();
  j["family"] = c.family;
  j["include_image"] = c.include_image;
  j["config_kind"] = c.config_kind;
  j["chunks"] = c.chunks;
  j["resamples"] = c.resamples;
  j["model_id"] = c.model_id;
  j["teacher_id"] = c.teacher_id;
  j["teacher_max_tokens"] = c.teacher_max_tokens;
  j["teacher_temperature"] = c.teacher_temperature;
  j["max_skip_fraction"] = c.max_skip_fraction;
  j["failure_threshold"] = c.failure_threshold;
  j["host"] = c.host;
  j["port"] = c.port;
  return j.dump(2);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Medical VQA chain-of-thought distillation and evaluation pipeline", "medcot"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, dataset, format, header_map, manifest, annotations, predictions, image_root, profile,
      keyword_table, endpoint, generate_endpoint, out_dir, family, kind, model_id, host;
  std::uint64_t seed = 0;
  std::size_t chunks = 0, resamples = 0, concurrency = 0;
  int port = 0, max_attempts = 0, base_delay_ms = 0, timeout_ms = 0;
  double failure_threshold = 0, max_skip = 0;
  bool no_image = false;

  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  auto* o_seed = app.add_option("--seed", seed, "Seed for bootstrap, retries and the mock model");
  auto* o_endpoint = app.add_option("--endpoint", endpoint, "Inference server base URL");
  auto* o_generate = app.add_option("--generate-endpoint", generate_endpoint, "Teacher server base URL");
  auto* o_family = app.add_option("--family", family, "Prompt family")
                       ->check(CLI::IsMember({"nocaption", "caption", "cot"}));
  app.add_flag("--no-image", no_image, "Withhold images (ablation)");
  auto* o_chunks = app.add_option("--chunks", chunks, "Number of training chunks (default 51)");
  auto* o_resamples = app.add_option("--resamples", resamples, "Bootstrap resamples (default 10000)");
  auto* o_out = app.add_option("--out", out_dir, "Output directory");
  auto* o_dataset = app.add_option("--dataset", dataset, "Dataset file");
  auto* o_format = app.add_option("--format", format, "Dataset format")->check(CLI::IsMember({"csv", "jsonl"}));
  auto* o_header = app.add_option("--header-map", header_map, "CSV header map (JSON)");
  auto* o_manifest = app.add_option("--manifest", manifest, "Chunk manifest");
  auto* o_annotations = app.add_option("--annotations", annotations, "Annotation file");
  auto* o_predictions = app.add_option("--predictions", predictions, "Predictions file");
  auto* o_images = app.add_option("--image-root", image_root, "Directory that image_ref paths are relative to");
  auto* o_profile = app.add_option("--profile", profile, "Mock model profile (JSON)");
  auto* o_table = app.add_option("--keyword-table", keyword_table, "Question category keyword table (JSON)");
  auto* o_kind = app.add_option("--kind", kind, "SFT configuration kind")
                     ->check(CLI::IsMember({"answer_only_nocaption", "answer_only_caption", "cot_nocaption"}));
  auto* o_model = app.add_option("--model-id", model_id, "Model identifier recorded in reports");
  auto* o_concurrency = app.add_option("--concurrency", concurrency, "Requests in flight");
  auto* o_attempts = app.add_option("--max-attempts", max_attempts, "Transport attempts per request");
  auto* o_delay = app.add_option("--base-delay-ms", base_delay_ms, "Base retry delay");
  auto* o_timeout = app.add_option("--timeout-ms", timeout_ms, "Per-request timeout");
  auto* o_threshold = app.add_option("--failure-threshold", failure_threshold, "Tolerated failed-record fraction");
  auto* o_skip = app.add_option("--max-skip-fraction", max_skip, "Tolerated unannotated fraction for SFT export");
  auto* o_host = app.add_option("--host", host, "Mock server bind address");
  auto* o_port = app.add_option("--port", port, "Mock server port");

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"ingest", "Load CSV or JSONL and write the canonical dataset.jsonl"},
      {"stats", "Per-split answer label counts and percentages"},
      {"chunk", "Partition records into contiguous training chunks"},
      {"categorize", "Assign question-type categories"},
      {"render-prompts", "Print the system prompts and a sample user message"},
      {"gen-cot", "Generate teacher explanations for training records"},
      {"emit-sft", "Write SFT chunk files and train_config.json"},
      {"eval", "Score records against an inference endpoint and report"},
      {"ablate", "Evaluate with and without images and report the delta"},
      {"report", "Rebuild report files from a predictions file"},
      {"mock-serve", "Run the synthetic inference server"},
  };
  for (const auto& [name, help] : stages) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    const auto cwd = fs::current_path();
    auto set_path = [&](CLI::Option* opt, const std::string& value, fs::path& dst) {
      if (opt->count() > 0) dst = resolve(cwd, value);
    };
    if (o_seed->count() > 0) c.seed = seed;
    if (o_endpoint->count() > 0) {
      c.score_endpoint = endpoint;
      if (o_generate->count() == 0) c.generate_endpoint = endpoint;
    }
    if (o_generate->count() > 0) c.generate_endpoint = generate_endpoint;
    if (o_family->count() > 0) c.family = family;
    if (no_image) c.include_image = false;
    if (o_chunks->count() > 0) c.chunks = chunks;
    if (o_resamples->count() > 0) c.resamples = resamples;
    set_path(o_out, out_dir, c.out);
    set_path(o_dataset, dataset, c.dataset);
    if (o_format->count() > 0) c.format = format;
    set_path(o_header, header_map, c.header_map);
    set_path(o_manifest, manifest, c.manifest);
    set_path(o_annotations, annotations, c.annotations);
    set_path(o_predictions, predictions, c.predictions);
    set_path(o_images, image_root, c.image_root);
    set_path(o_profile, profile, c.profile);
    set_path(o_table, keyword_table, c.keyword_table);
    if (o_kind->count() > 0) c.config_kind = kind;
    if (o_model->count() > 0) c.model_id = model_id;
    if (o_concurrency->count() > 0) c.concurrency = concurrency;
    if (o_attempts->count() > 0) c.max_attempts = max_attempts;
    if (o_delay->count() > 0) c.base_delay_ms = base_delay_ms;
    if (o_timeout->count() > 0) c.timeout_ms = timeout_ms;
    if (o_threshold->count() > 0) c.failure_threshold = failure_threshold;
    if (o_skip->count() > 0) c.max_skip_fraction = max_skip;
    if (o_host->count() > 0) c.host = host;
    if (o_port->count() > 0) c.port = port;
    if (c.out.is_relative()) c.out = resolve(cwd, c.out);

    Run run{stage, std::move(c), out, err};
    int code = kOk;
    if (stage == "ingest") code = stage_ingest(run);
    else if (stage == "stats") code = stage_stats(run);
    else if (stage == "chunk") code = stage_chunk(run);
    else if (stage == "categorize") code = stage_categorize(run);
    else if (stage == "render-prompts") code = stage_render_prompts(run);
    else if (stage == "gen-cot") code = stage_gen_cot(run);
    else if (stage == "emit-sft") code = stage_emit_sft(run);
    else if (stage == "eval") code = stage_eval(run);
    else if (stage == "ablate") code = stage_ablate(run);
    else if (stage == "report") code = stage_report(run);
    else if (stage == "mock-serve") return stage_mock_serve(run);
    run.counts["exit_code"] = code;
    run.write_meta();
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace medcot::cli
