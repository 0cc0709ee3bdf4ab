#include "medcot/report.hpp"

#include <cstdio>
#include <unordered_map>

#include "csv.hpp"
#include "io_util.hpp"
#include "medcot/error.hpp"
#include "json.hpp"

namespace medcot {

namespace {

std::string fmt1(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", round_1dp(value));
  return buf;
}

std::string fmt_signed1(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f", round_1dp(value));
  return buf;
}

std::string fmt_level(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", level * 100);
  return buf;
}

std::string label_str(Label l) { return std::string(1, to_char(l)); }

}  // namespace

EvalReport build_report(std::span<const Outcome> outcomes,
                        std::span<const CategoryAssignment> assignments, const RunMetadata& meta,
                        const BootstrapOptions& bootstrap) {
  if (outcomes.empty()) throw Error(ErrorCode::EmptyResults, "report over zero results");
  EvalReport r;
  r.meta = meta;
  r.n = outcomes.size();
  std::vector<std::uint8_t> flags;
  flags.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    flags.push_back(o.correct() ? 1 : 0);
    r.correct += o.correct() ? 1 : 0;
    ++r.per_position_n[o.gold];
  }
  r.overall = bootstrap_ci(flags, bootstrap);
  r.per_position = per_position_accuracy(outcomes);
  r.per_category = per_category_accuracy(outcomes, assignments);
  return r;
}

std::string render_markdown(const EvalReport& r) {
  std::string md;
  md += "# Evaluation report\n\n";
  md += "## Overall accuracy\n\n";
  md += "| Model | Accuracy (%) | " + fmt_level(r.overall.level) + "% CI | n |\n";
  md += "|---|---:|---:|---:|\n";
  md += "| " + r.meta.model_id + " | " + fmt1(r.overall.point) + " | [" + fmt1(r.overall.lower) + ", " +
        fmt1(r.overall.upper) + "] | " + std::to_string(r.n) + " |\n\n";

  md += "## Accuracy by gold answer position\n\n";
  md += "| Gold label | n | Accuracy (%) |\n|---|---:|---:|\n";
  for (const auto& [label, pct] : r.per_position) {
    md += "| " + label_str(label) + " | " + std::to_string(r.per_position_n.at(label)) + " | " + fmt1(pct) + " |\n";
  }
  md += "\n## Per-category accuracy\n\n";
  md += "| Category | n | Accuracy (%) |\n|---|---:|---:|\n";
  for (auto category : kCategories) {
    auto it = r.per_category.find(category);
    if (it == r.per_category.end()) continue;
    md += "| " + std::string(display_name(category)) + " | " + std::to_string(it->second.n) + " | " +
          fmt1(it->second.pct) + " |\n";
  }
  if (r.ablation) {
    md += "\n## Image ablation\n\n";
    md += "| Model | With image (%) | Without image (%) | Delta (pp) |\n|---|---:|---:|---:|\n";
    md += "| " + r.meta.model_id + " | " + fmt1(r.ablation->with_image) + " | " + fmt1(r.ablation->without_image) +
          " | " + fmt_signed1(r.ablation->delta_pp) + " |\n";
  }
  md += "\n---\n\n";
  md += "model: `" + r.meta.model_id + "`; family: `" + r.meta.family + "`; image: " +
        (r.meta.include_image ? "yes" : "no") + "; seed: " + std::to_string(r.meta.seed) +
        "; bootstrap resamples: " + std::to_string(r.overall.n_resamples) + "; endpoint: `" + r.meta.endpoint +
        "`; failed records: " + std::to_string(r.meta.n_failures) + "\n";
  return md;
}

std::string render_csv(const EvalReport& r) {
  std::string csv = "section,key,n,value\n";
  auto row = [&](std::string_view section, std::string_view key, const std::string& n, const std::string& value) {
    csv += detail::csv_escape(section) + "," + detail::csv_escape(key) + "," + n + "," + detail::csv_escape(value) + "\n";
  };
  const auto n = std::to_string(r.n);
  row("overall", "accuracy", n, fmt1(r.overall.point));
  row("overall", "ci_lower", n, fmt1(r.overall.lower));
  row("overall", "ci_upper", n, fmt1(r.overall.upper));
  for (const auto& [label, pct] : r.per_position) {
    row("position", label_str(label), std::to_string(r.per_position_n.at(label)), fmt1(pct));
  }
  for (auto category : kCategories) {
    auto it = r.per_category.find(category);
    if (it == r.per_category.end()) continue;
    row("category", to_string(category), std::to_string(it->second.n), fmt1(it->second.pct));
  }
  if (r.ablation) {
    row("ablation", "with_image", n, fmt1(r.ablation->with_image));
    row("ablation", "without_image", n, fmt1(r.ablation->without_image));
    row("ablation", "delta_pp", n, fmt1(r.ablation->delta_pp));
  }
  row("meta", "model_id", "", r.meta.model_id);
  row("meta", "family", "", r.meta.family);
  row("meta", "include_image", "", r.meta.include_image ? "true" : "false");
  row("meta", "seed", "", std::to_string(r.meta.seed));
  row("meta", "n_resamples", "", std::to_string(r.overall.n_resamples));
  row("meta", "endpoint", "", r.meta.endpoint);
  row("meta", "n_failures", "", std::to_string(r.meta.n_failures));
  return csv;
}

std::string render_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["correct"] = r.correct;
  j["overall"] = {{"point", r.overall.point},       {"lower", r.overall.lower},
                  {"upper", r.overall.upper},       {"level", r.overall.level},
                  {"n_resamples", r.overall.n_resamples}, {"seed", r.overall.seed}};
  nlohmann::ordered_json positions = nlohmann::ordered_json::object();
  for (const auto& [label, pct] : r.per_position) {
    positions[label_str(label)] = {{"n", r.per_position_n.at(label)}, {"accuracy", pct}};
  }
  j["per_position"] = std::move(positions);
  nlohmann::ordered_json categories = nlohmann::ordered_json::object();
  for (auto category : kCategories) {
    auto it = r.per_category.find(category);
    if (it == r.per_category.end()) continue;
    categories[std::string(to_string(category))] = {
        {"n", it->second.n}, {"correct", it->second.correct}, {"accuracy", it->second.pct}};
  }
  j["per_category"] = std::move(categories);
  if (r.ablation) {
    j["ablation"] = {{"with_image", r.ablation->with_image},
                     {"without_image", r.ablation->without_image},
                     {"delta_pp", r.ablation->delta_pp}};
  } else {
    j["ablation"] = nullptr;
  }
  j["meta"] = {{"model_id", r.meta.model_id},   {"family", r.meta.family},
               {"include_image", r.meta.include_image}, {"seed", r.meta.seed},
               {"endpoint", r.meta.endpoint},   {"n_failures", r.meta.n_failures}};
  return j.dump(2) + "\n";
}

std::vector<CsvRow> parse_report_csv(std::string_view text) {
  const auto rows = detail::parse_csv(text);
  std::vector<CsvRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 4) throw Error(ErrorCode::ParseError, "report csv row " + std::to_string(i));
    out.push_back({r[0], r[1], r[2], r[3]});
  }
  return out;
}

void write_report_files(const EvalReport& report, const std::filesystem::path& dir) {
  detail::write_file(dir / "report.md", render_markdown(report));
  detail::write_file(dir / "report.csv", render_csv(report));
  detail::write_file(dir / "report.json", render_json(report));
}

}  // namespace medcot
