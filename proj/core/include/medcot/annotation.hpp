#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace medcot {

enum class AnnotationStatus { Success, Failed };

/// A teacher explanation for one training record.
struct CotAnnotation {
  std::string record_id;
  std::string explanation;
  std::size_t word_count = 0;
  std::string teacher_id;
  AnnotationStatus status = AnnotationStatus::Success;
  std::string failure_reason;  // empty on success

  bool ok() const { return status == AnnotationStatus::Success; }

  friend bool operator==(const CotAnnotation&, const CotAnnotation&) = default;
};

/// Whitespace-split token count.
std::size_t count_words(std::string_view text) noexcept;

std::string annotation_to_jsonl_line(const CotAnnotation& annotation);
CotAnnotation annotation_from_json(std::string_view line);

}  // namespace medcot
