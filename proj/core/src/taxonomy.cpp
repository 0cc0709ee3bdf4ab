#include "medcot/taxonomy.hpp"

#include <cctype>

#include "io_util.hpp"
#include "medcot/error.hpp"
#include "json.hpp"

namespace medcot {

std::string_view to_string(QuestionCategory c) noexcept {
  switch (c) {
    case QuestionCategory::Modality: return "modality";
    case QuestionCategory::Anatomy: return "anatomy";
    case QuestionCategory::ColorLabel: return "color_label";
    case QuestionCategory::Diagnosis: return "diagnosis";
    case QuestionCategory::Counting: return "counting";
    case QuestionCategory::Comparison: return "comparison";
    case QuestionCategory::Temporal: return "temporal";
    case QuestionCategory::Procedure: return "procedure";
    case QuestionCategory::Other: return "other";
  }
  return "other";
}

std::string_view display_name(QuestionCategory c) noexcept {
  switch (c) {
    case QuestionCategory::Modality: return "Modality";
    case QuestionCategory::Anatomy: return "Anatomy";
    case QuestionCategory::ColorLabel: return "Color/label";
    case QuestionCategory::Diagnosis: return "Diagnosis";
    case QuestionCategory::Counting: return "Counting";
    case QuestionCategory::Comparison: return "Comparison";
    case QuestionCategory::Temporal: return "Temporal";
    case QuestionCategory::Procedure: return "Procedure";
    case QuestionCategory::Other: return "Other";
  }
  return "Other";
}

std::optional<QuestionCategory> parse_category(std::string_view name) noexcept {
  for (auto c : kCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

const std::vector<KeywordRule>& Taxonomy::builtin_rules() {
  static const std::vector<KeywordRule> rules = {
      {QuestionCategory::Modality,
       {"imaging", "modality", "technique", "scan", "MRI", "CT", "X-ray", "radiograph",
        "ultrasound", "microscope", "photograph", "fluorescence", "PET", "SPECT", "endoscope",
        "histology", "pathology"}},
      {QuestionCategory::Anatomy,
       {"organ", "structure", "anatomy", "region", "location", "lobe", "artery", "vein", "nerve",
        "bone", "muscle", "tissue", "cell", "membrane", "cortex", "nucleus", "ventricle"}},
      {QuestionCategory::ColorLabel,
       {"color", "label", "labelled", "labeled", "arrow", "highlight", "indicate", "mark",
        "point"}},
      {QuestionCategory::Diagnosis,
       {"diagnosis", "disease", "condition", "pathological", "abnormal", "finding", "appearance",
        "suggest", "consistent with", "likely"}},
      {QuestionCategory::Counting, {"how many", "number of", "count", "quantity", "multiple"}},
      {QuestionCategory::Comparison,
       {"compare", "difference", "differ", "similar", "versus", "vs", "than", "more", "less",
        "larger", "smaller"}},
      {QuestionCategory::Temporal,
       {"stage", "phase", "progress", "develop", "time", "course", "acute", "chronic", "early",
        "late", "before", "after"}},
      {QuestionCategory::Procedure,
       {"procedure", "treatment", "surgery", "intervention", "therapy", "approach", "technique",
        "method"}},
  };
  return rules;
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Lowercase ASCII, whitespace runs collapsed to one space, ends trimmed.
std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool contains_bounded(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    const bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
    const auto end = pos + needle.size();
    const bool right_ok = end == haystack.size() || !is_word_char(haystack[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

}  // namespace

Taxonomy::Taxonomy() : Taxonomy(builtin_rules()) {}

Taxonomy::Taxonomy(std::vector<KeywordRule> rules) : rules_(std::move(rules)) {
  for (auto& rule : rules_) {
    if (rule.category == QuestionCategory::Other) {
      throw Error(ErrorCode::ConfigError, "'other' cannot carry keywords");
    }
  }
}

Taxonomy Taxonomy::from_json_file(const std::filesystem::path& path) {
  std::vector<KeywordRule> rules;
  try {
    const auto arr = nlohmann::json::parse(detail::read_file(path));
    for (const auto& entry : arr) {
      const auto name = entry.at("category").get<std::string>();
      auto category = parse_category(name);
      if (!category) throw Error(ErrorCode::ConfigError, "unknown category " + name);
      if (*category == QuestionCategory::Other) continue;
      rules.push_back({*category, entry.at("keywords").get<std::vector<std::string>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return Taxonomy(std::move(rules));
}

CategorySet Taxonomy::categorize(std::string_view question) const {
  const auto text = normalize(question);
  if (text.empty()) throw Error(ErrorCode::EmptyQuestion, "question is blank");
  CategorySet out;
  for (const auto& rule : rules_) {
    for (const auto& keyword : rule.keywords) {
      if (contains_bounded(text, normalize(keyword))) {
        out.insert(rule.category);
        break;
      }
    }
  }
  if (out.empty()) out.insert(QuestionCategory::Other);
  return out;
}

std::string rules_to_json(std::span<const KeywordRule> rules) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& rule : rules) {
    nlohmann::ordered_json j;
    j["category"] = std::string(to_string(rule.category));
    j["keywords"] = rule.keywords;
    arr.push_back(std::move(j));
  }
  nlohmann::ordered_json other;
  other["category"] = "other";
  other["keywords"] = nlohmann::ordered_json::array();
  arr.push_back(std::move(other));
  return arr.dump(2) + "\n";
}

}  // namespace medcot
