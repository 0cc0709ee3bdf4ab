#include "medcot/annotation.hpp"

#include <cctype>

#include "medcot/error.hpp"
#include "json.hpp"

namespace medcot {

std::size_t count_words(std::string_view text) noexcept {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::string annotation_to_jsonl_line(const CotAnnotation& a) {
  nlohmann::ordered_json j;
  j["record_id"] = a.record_id;
  j["explanation"] = a.explanation;
  j["word_count"] = a.word_count;
  j["teacher_id"] = a.teacher_id;
  j["status"] = a.ok() ? std::string("success") : "failed(" + a.failure_reason + ")";
  return j.dump();
}

CotAnnotation annotation_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    CotAnnotation a;
    a.record_id = j.at("record_id").get<std::string>();
    a.explanation = j.at("explanation").get<std::string>();
    a.word_count = j.at("word_count").get<std::size_t>();
    a.teacher_id = j.at("teacher_id").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status == "success") {
      a.status = AnnotationStatus::Success;
    } else if (status.starts_with("failed(") && status.ends_with(")")) {
      a.status = AnnotationStatus::Failed;
      a.failure_reason = status.substr(7, status.size() - 8);
    } else {
      throw Error(ErrorCode::ParseError, "unknown annotation status \"" + status + "\"");
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("annotation: ") + e.what());
  }
}

}  // namespace medcot
