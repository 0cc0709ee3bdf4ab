#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace medcot {

enum class Label : int { A = 0, B = 1, C = 2, D = 3 };

inline constexpr std::array<Label, 4> kLabels = {Label::A, Label::B, Label::C,
                                                 Label::D};

constexpr char to_char(Label l) noexcept { return static_cast<char>('A' + static_cast<int>(l)); }
constexpr std::size_t index_of(Label l) noexcept { return static_cast<std::size_t>(l); }

/// Accepts exactly "A".."D" (uppercase, no whitespace).
std::optional<Label> parse_label(std::string_view text) noexcept;

enum class Split { Train, Test };

std::string_view to_string(Split s) noexcept;
std::optional<Split> parse_split(std::string_view text) noexcept;

/// One four-option multiple-choice sample.
struct VqaRecord {
  std::string id;
  std::optional<std::string> image_ref;
  std::string question;
  std::array<std::string, 4> options;  // indexed by Label
  Label answer = Label::A;
  std::optional<std::string> caption;
  Split split = Split::Train;

  const std::string& option(Label l) const { return options[index_of(l)]; }
  bool has_caption() const { return caption.has_value() && !caption->empty(); }

  friend bool operator==(const VqaRecord&, const VqaRecord&) = default;
};

}  // namespace medcot
