#include "medcot/prompts.hpp"

#include "medcot/error.hpp"

namespace medcot {

namespace {

constexpr std::string_view kNoCaptionSystem =
    "You are a professional medical scientist. Answer the choice\n"
    "question based strictly on the image.\n"
    "STRICT OUTPUT FORMAT:\n"
    "1. You MUST output ONLY a single uppercase letter: A, B, C, or D.\n"
    "2. DO NOT output the full option text.\n"
    "3. DO NOT output phrases like 'The answer is'.\n"
    "4. NO explanation, NO reasoning, NO punctuation.\n"
    "Example Output:\n"
    "A";

constexpr std::string_view kCaptionAwareSystem =
    "You are a professional medical scientist. Answer the choice\n"
    "question based strictly on the image and the caption.\n"
    "STRICT OUTPUT FORMAT:\n"
    "1. You MUST output ONLY a single uppercase letter: A, B, C, or D.\n"
    "2. DO NOT output the full option text.\n"
    "3. DO NOT output phrases like 'The answer is'.\n"
    "4. NO explanation, NO reasoning, NO punctuation.\n"
    "Example Output:\n"
    "A";

constexpr std::string_view kCotTrainingSystem =
    "You are a professional medical scientist. Answer the choice\n"
    "question based strictly on the image.\n"
    "OUTPUT FORMAT:\n"
    "1. First, provide your reasoning and analysis based on the image.\n"
    "2. Then output on a new line exactly: Answer: <LETTER>.\n"
    "3. The letter MUST be A, B, C, or D.\n"
    "Example Output:\n"
    "Explanation: [Your detailed analysis of the image findings]\n"
    "Answer: A";

}  // namespace

std::string_view to_string(PromptFamily family) noexcept {
  switch (family) {
    case PromptFamily::NoCaption: return "nocaption";
    case PromptFamily::CaptionAware: return "caption";
    case PromptFamily::CotTraining: return "cot";
  }
  return "nocaption";
}

std::optional<PromptFamily> parse_family(std::string_view text) noexcept {
  if (text == "nocaption") return PromptFamily::NoCaption;
  if (text == "caption") return PromptFamily::CaptionAware;
  if (text == "cot") return PromptFamily::CotTraining;
  return std::nullopt;
}

std::string_view render_system(PromptFamily family) noexcept {
  switch (family) {
    case PromptFamily::NoCaption: return kNoCaptionSystem;
    case PromptFamily::CaptionAware: return kCaptionAwareSystem;
    case PromptFamily::CotTraining: return kCotTrainingSystem;
  }
  return kNoCaptionSystem;
}

std::string canonicalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    const bool last = nl == std::string_view::npos;
    if (last) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    const auto end = line.find_last_not_of(" \t\r\f\v");
    line = end == std::string_view::npos ? std::string_view{} : line.substr(0, end + 1);
    out += line;
    if (last) break;
    out += '\n';
    pos = nl + 1;
  }
  return out;
}

std::string render_user(const VqaRecord& record, PromptFamily family) {
  std::string out;
  if (family == PromptFamily::CaptionAware) {
    if (!record.has_caption()) throw Error(ErrorCode::MissingCaption, record.id);
    out += "Image caption: ";
    out += *record.caption;
    out += '\n';
  }
  out += "Question: ";
  out += record.question;
  out += "\nOptions:";
  for (Label l : kLabels) {
    out += '\n';
    out += to_char(l);
    out += ". ";
    out += record.option(l);
  }
  return canonicalize_text(out);
}

RenderedPrompt render_prompt(const VqaRecord& record, PromptFamily family) {
  return RenderedPrompt{std::string(render_system(family)), render_user(record, family), true};
}

TrainingTarget render_training_target(const VqaRecord& record, const CotAnnotation& annotation) {
  if (annotation.record_id != record.id) {
    throw Error(ErrorCode::AnnotationMismatch,
                "annotation for " + annotation.record_id + " applied to " + record.id);
  }
  TrainingTarget t;
  std::string body = canonicalize_text(annotation.explanation);
  while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
  t.empty_explanation = body.empty();
  t.text = "Explanation: " + body + "\nAnswer: " + to_char(record.answer);
  return t;
}

}  // namespace medcot
