#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medcot/analytics.hpp"

namespace medcot {

struct AblationSummary {
  double with_image = 0;
  double without_image = 0;
  double delta_pp = 0;
};

struct RunMetadata {
  std::string model_id;
  std::string family;
  std::uint64_t seed = 0;
  std::string endpoint;
  bool include_image = true;
  std::size_t n_failures = 0;
};

struct EvalReport {
  std::size_t n = 0;
  std::size_t correct = 0;
  BootstrapCi overall;
  std::map<Label, double> per_position;
  std::map<Label, std::size_t> per_position_n;
  std::map<QuestionCategory, CategoryAccuracy> per_category;
  std::optional<AblationSummary> ablation;
  RunMetadata meta;
};

EvalReport build_report(std::span<const Outcome> outcomes,
                        std::span<const CategoryAssignment> assignments, const RunMetadata& meta,
                        const BootstrapOptions& bootstrap);

std::string render_markdown(const EvalReport& report);
std::string render_csv(const EvalReport& report);
/// Full-precision values.
std::string render_json(const EvalReport& report);

struct CsvRow {
  std::string section;
  std::string key;
  std::string n;
  std::string value;
};
std::vector<CsvRow> parse_report_csv(std::string_view text);

/// report.md, report.csv and report.json under dir.
void write_report_files(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace medcot
