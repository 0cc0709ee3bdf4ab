#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medcot {

enum class QuestionCategory {
  Modality,
  Anatomy,
  ColorLabel,
  Diagnosis,
  Counting,
  Comparison,
  Temporal,
  Procedure,
  Other,
};

inline constexpr std::array<QuestionCategory, 9> kCategories = {
    QuestionCategory::Modality,   QuestionCategory::Anatomy,    QuestionCategory::ColorLabel,
    QuestionCategory::Diagnosis,  QuestionCategory::Counting,   QuestionCategory::Comparison,
    QuestionCategory::Temporal,   QuestionCategory::Procedure,  QuestionCategory::Other,
};

/// Snake-case identifier ("color_label").
std::string_view to_string(QuestionCategory c) noexcept;
/// Table heading ("Color/label").
std::string_view display_name(QuestionCategory c) noexcept;
std::optional<QuestionCategory> parse_category(std::string_view name) noexcept;

using CategorySet = std::set<QuestionCategory>;

struct CategoryAssignment {
  std::string record_id;
  CategorySet categories;
};

struct KeywordRule {
  QuestionCategory category;
  std::vector<std::string> keywords;
};

/// Case-insensitive keyword matcher. Keywords match as whole words or
/// contiguous phrases: the characters on both sides of a hit must not be
/// ASCII letters or digits.
class Taxonomy {
 public:
  /// The built-in nine-category keyword table.
  Taxonomy();
  explicit Taxonomy(std::vector<KeywordRule> rules);

  /// Loads the shipped JSON table: [{"category": "...", "keywords": [...]}, ...].
  static Taxonomy from_json_file(const std::filesystem::path& path);
  static const std::vector<KeywordRule>& builtin_rules();

  /// Never empty; {Other} iff nothing matched. Throws EmptyQuestion.
  CategorySet categorize(std::string_view question) const;

  const std::vector<KeywordRule>& rules() const { return rules_; }

 private:
  std::vector<KeywordRule> rules_;
};

std::string rules_to_json(std::span<const KeywordRule> rules);

}  // namespace medcot
