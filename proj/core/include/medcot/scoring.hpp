#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medcot/error.hpp"
#include "medcot/http_endpoint.hpp"
#include "medcot/prompts.hpp"
#include "medcot/types.hpp"

namespace medcot {

/// Bare and space-prefixed token strings for each label.
struct CandidateSet {
  std::array<std::array<std::string, 2>, 4> variants;

  /// ["A", " A", "B", " B", "C", " C", "D", " D"]
  std::vector<std::string> flat() const;
  static constexpr std::size_t kSize = 8;
};

CandidateSet build_candidates();

struct ScoreResponse {
  std::string request_id;
  std::vector<double> logits;  // in CandidateSet::flat() order
};

struct Prediction {
  std::string record_id;
  std::array<double, 4> per_label_score{};
  Label chosen = Label::A;
  bool tie = false;

  double score(Label l) const { return per_label_score[index_of(l)]; }
};

/// Label score is the max over its variants; argmax with ties broken toward
/// the earliest label. Throws CandidateCountMismatch or NonFiniteLogit.
Prediction predict(const ScoreResponse& response);

struct ScoringOptions {
  Endpoint endpoint;
  RetryPolicy retry;
  std::size_t concurrency = 4;
  std::optional<std::string> api_key;
};

std::string score_request_json(const std::string& request_id, const RenderedPrompt& prompt,
                               const std::optional<std::string>& image_bytes,
                               const CandidateSet& candidates);

/// Validates id echo and candidate count; throws MalformedResponse,
/// CandidateCountMismatch or NonFiniteLogit.
ScoreResponse parse_score_response(std::string_view body, const std::string& expected_id,
                                   std::size_t n_candidates);

/// One POST /v1/score round trip.
ScoreResponse score_one(const ScoringOptions& options, const std::string& request_id,
                        const RenderedPrompt& prompt, const std::optional<std::string>& image_bytes,
                        const CandidateSet& candidates);

/// Returns the raw image bytes for a record, or nullopt when unavailable.
using ImageProvider = std::function<std::optional<std::string>(const VqaRecord&)>;

/// Reads `root / record.image_ref`.
ImageProvider file_image_provider(std::filesystem::path root);

struct ScoredRecord {
  std::string record_id;
  Label gold = Label::A;
  Prediction prediction;

  bool correct() const { return prediction.chosen == gold; }
};

struct RecordFailure {
  std::string record_id;
  ErrorCode code = ErrorCode::Transport;
  std::string message;
};

struct SplitEvaluation {
  std::vector<ScoredRecord> results;    // sorted by record_id
  std::vector<RecordFailure> failures;  // sorted by record_id
};

/// Scores every record with up to `options.concurrency` requests in flight.
/// With include_image=false the prompts are unchanged and no image is sent.
/// Per-record errors land in `failures`; configuration errors throw.
SplitEvaluation evaluate_split(std::span<const VqaRecord> records, PromptFamily family,
                               const ScoringOptions& options, bool include_image,
                               const ImageProvider& images);

std::string prediction_to_jsonl_line(const ScoredRecord& scored);
ScoredRecord scored_record_from_json(std::string_view line);

// Chat-completion adapter. Maps the score call onto an OpenAI-style
// /chat/completions endpoint that returns top_logprobs for the first
// generated token.

std::string chat_logprob_request_json(const RenderedPrompt& prompt,
                                      const std::optional<std::string>& image_bytes,
                                      const std::string& model, int top_logprobs);

/// Throws CapabilityError when any of the candidates is absent from the
/// first token's top_logprobs.
ScoreResponse score_from_chat_logprobs(std::string_view response_body,
                                       const std::string& request_id,
                                       const CandidateSet& candidates);

}  // namespace medcot
