#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "medcot/annotation.hpp"
#include "medcot/types.hpp"

namespace medcot {

enum class PromptFamily { NoCaption, CaptionAware, CotTraining };

std::string_view to_string(PromptFamily family) noexcept;
/// Accepts the CLI spellings "nocaption", "caption", "cot".
std::optional<PromptFamily> parse_family(std::string_view text) noexcept;

struct RenderedPrompt {
  std::string system;
  std::string user;
  bool expects_image = true;
};

/// Verbatim system prompt for the family, "\n" line endings, no trailing newline.
std::string_view render_system(PromptFamily family) noexcept;

/// Throws MissingCaption for CaptionAware without a nonempty caption.
std::string render_user(const VqaRecord& record, PromptFamily family);

RenderedPrompt render_prompt(const VqaRecord& record, PromptFamily family);

struct TrainingTarget {
  std::string text;
  bool empty_explanation = false;
};

/// "Explanation: <text>\nAnswer: <gold>". The label always comes from the
/// record, never from the explanation.
TrainingTarget render_training_target(const VqaRecord& record, const CotAnnotation& annotation);

/// Line endings normalized to "\n" and trailing whitespace removed per line.
std::string canonicalize_text(std::string_view text);

}  // namespace medcot
