#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medcot/annotation.hpp"
#include "medcot/http_endpoint.hpp"
#include "medcot/scoring.hpp"
#include "medcot/types.hpp"

namespace medcot {

struct TeacherOptions {
  Endpoint endpoint;
  RetryPolicy retry;
  std::size_t concurrency = 4;
  std::optional<std::string> api_key;
  std::string teacher_id = "teacher";
  int max_tokens = 512;
  double temperature = 0.7;
  /// Attempts per record when the trailing answer disagrees with gold.
  int max_answer_attempts = 3;
  /// Line-delimited annotation file; empty disables checkpointing.
  std::filesystem::path checkpoint;
  /// Optional; when unset no image is attached.
  ImageProvider images;
};

struct GenerationResult {
  /// One per input record, in input order (success or failed).
  std::vector<CotAnnotation> annotations;
  std::vector<RecordFailure> failures;
  std::size_t requests_issued = 0;
  std::size_t resumed = 0;
};

/// User message sent to the teacher: the no-caption user format plus a line
/// revealing the gold label and asking for a justification.
std::string render_teacher_user(const VqaRecord& record);

struct ParsedTeacherText {
  std::string explanation;
  std::optional<Label> answer;
};

/// Splits "Explanation: ...\nAnswer: X" style output. A leading
/// "Explanation:" prefix is dropped; the answer is taken from the last
/// nonempty line if it reads "Answer: <A-D>" (an optional trailing period
/// is allowed).
ParsedTeacherText parse_teacher_text(std::string_view text);

/// Throws TestSplitLeak before any network traffic if a record is not from
/// the training split. Succeeded records found in the checkpoint are not
/// re-queried.
GenerationResult generate_explanations(std::span<const VqaRecord> records,
                                       const TeacherOptions& options);

std::vector<CotAnnotation> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path, std::span<const CotAnnotation> annotations);

struct WordStats {
  double mean = 0;
  std::size_t median = 0;  // lower-middle for even counts
  std::size_t min = 0;
  std::size_t max = 0;
};

struct CoverageReport {
  std::size_t total = 0;
  std::size_t succeeded = 0;
  double coverage_pct = 0;  // floored at two decimals
  WordStats words;
};

/// floor(succeeded / total * 10000) / 100, computed in integers.
double floor_coverage_pct(std::size_t succeeded, std::size_t total);

/// Word stats over successful annotations. Throws NoAnnotations.
CoverageReport coverage_stats(std::span<const CotAnnotation> annotations, std::size_t total);
WordStats word_stats(std::span<const std::size_t> word_counts);

}  // namespace medcot
