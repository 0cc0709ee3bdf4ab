#include "medcot/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <variant>

#include "medcot/encoding.hpp"
#include "json.hpp"

namespace medcot {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<std::string> CandidateSet::flat() const {
  std::vector<std::string> out;
  out.reserve(kSize);
  for (const auto& pair : variants) {
    out.push_back(pair[0]);
    out.push_back(pair[1]);
  }
  return out;
}

CandidateSet build_candidates() {
  CandidateSet c;
  for (Label l : kLabels) {
    const std::string bare(1, to_char(l));
    c.variants[index_of(l)] = {bare, " " + bare};
  }
  return c;
}

Prediction predict(const ScoreResponse& response) {
  if (response.logits.size() != CandidateSet::kSize) {
    throw Error(ErrorCode::CandidateCountMismatch,
                response.request_id + ": " + std::to_string(response.logits.size()) + " logits");
  }
  for (double v : response.logits) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteLogit, response.request_id);
  }
  Prediction p;
  p.record_id = response.request_id;
  for (std::size_t i = 0; i < 4; ++i) {
    p.per_label_score[i] = std::max(response.logits[2 * i], response.logits[2 * i + 1]);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (p.per_label_score[i] > p.per_label_score[best]) best = i;
  }
  p.chosen = static_cast<Label>(best);
  p.tie = std::count(p.per_label_score.begin(), p.per_label_score.end(), p.per_label_score[best]) > 1;
  return p;
}

std::string score_request_json(const std::string& request_id, const RenderedPrompt& prompt,
                               const std::optional<std::string>& image_bytes,
                               const CandidateSet& candidates) {
  ordered_json j;
  j["request_id"] = request_id;
  j["system"] = prompt.system;
  j["user"] = prompt.user;
  j["image"] = image_bytes ? ordered_json(base64_encode(*image_bytes)) : ordered_json(nullptr);
  j["candidates"] = candidates.flat();
  return j.dump();
}

ScoreResponse parse_score_response(std::string_view body, const std::string& expected_id,
                                   std::size_t n_candidates) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, expected_id + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("request_id") || !j["request_id"].is_string() ||
      !j.contains("logits") || !j["logits"].is_array()) {
    throw Error(ErrorCode::MalformedResponse, expected_id + ": missing request_id or logits");
  }
  ScoreResponse r;
  r.request_id = j["request_id"].get<std::string>();
  if (r.request_id != expected_id) {
    throw Error(ErrorCode::MalformedResponse,
                "request id echo mismatch: sent " + expected_id + ", got " + r.request_id);
  }
  for (const auto& v : j["logits"]) {
    if (!v.is_number()) {
      // JSON has no NaN/Inf literals; servers that emit null for them get this.
      throw Error(ErrorCode::NonFiniteLogit, expected_id + ": non-numeric logit");
    }
    r.logits.push_back(v.get<double>());
  }
  if (r.logits.size() != n_candidates) {
    throw Error(ErrorCode::CandidateCountMismatch,
                expected_id + ": expected " + std::to_string(n_candidates) + " logits, got " +
                    std::to_string(r.logits.size()));
  }
  for (double v : r.logits) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteLogit, expected_id);
  }
  return r;
}

ScoreResponse score_one(const ScoringOptions& options, const std::string& request_id,
                        const RenderedPrompt& prompt, const std::optional<std::string>& image_bytes,
                        const CandidateSet& candidates) {
  const auto body = score_request_json(request_id, prompt, image_bytes, candidates);
  const auto response =
      post_json(options.endpoint, "/v1/score", body, options.retry, request_id, options.api_key);
  return parse_score_response(response, request_id, CandidateSet::kSize);
}

ImageProvider file_image_provider(std::filesystem::path root) {
  return [root = std::move(root)](const VqaRecord& record) -> std::optional<std::string> {
    if (!record.image_ref) return std::nullopt;
    std::ifstream in(root / *record.image_ref, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
}

SplitEvaluation evaluate_split(std::span<const VqaRecord> records, PromptFamily family,
                               const ScoringOptions& options, bool include_image,
                               const ImageProvider& images) {
  if (records.empty()) throw Error(ErrorCode::ConfigError, "no records to evaluate");
  if (options.concurrency == 0) throw Error(ErrorCode::ConfigError, "concurrency must be positive");
  if (include_image && !images) throw Error(ErrorCode::ConfigError, "include_image set without an image source");

  const auto candidates = build_candidates();
  std::vector<std::variant<std::monostate, ScoredRecord, RecordFailure>> slots(records.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= records.size()) return;
      const auto& record = records[i];
      try {
        const auto prompt = render_prompt(record, family);
        std::optional<std::string> image;
        if (include_image && prompt.expects_image) {
          image = images(record);
          if (!image) throw Error(ErrorCode::ImageUnavailable, record.id);
        }
        const auto response = score_one(options, record.id, prompt, image, candidates);
        slots[i] = ScoredRecord{record.id, record.answer, predict(response)};
      } catch (const Error& e) {
        slots[i] = RecordFailure{record.id, e.code(), e.what()};
      }
    }
  };

  const auto n_threads = std::min(options.concurrency, records.size());
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  SplitEvaluation out;
  for (auto& slot : slots) {
    if (auto* s = std::get_if<ScoredRecord>(&slot)) out.results.push_back(std::move(*s));
    if (auto* f = std::get_if<RecordFailure>(&slot)) out.failures.push_back(std::move(*f));
  }
  std::sort(out.results.begin(), out.results.end(),
            [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
  std::sort(out.failures.begin(), out.failures.end(),
            [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
  return out;
}

std::string prediction_to_jsonl_line(const ScoredRecord& s) {
  ordered_json j;
  j["record_id"] = s.record_id;
  j["gold"] = std::string(1, to_char(s.gold));
  j["chosen"] = std::string(1, to_char(s.prediction.chosen));
  j["tie"] = s.prediction.tie;
  ordered_json scores;
  for (Label l : kLabels) scores[std::string(1, to_char(l))] = s.prediction.score(l);
  j["scores"] = std::move(scores);
  return j.dump();
}

ScoredRecord scored_record_from_json(std::string_view line) {
  try {
    const auto j = json::parse(line);
    ScoredRecord s;
    s.record_id = j.at("record_id").get<std::string>();
    auto gold = parse_label(j.at("gold").get<std::string>());
    auto chosen = parse_label(j.at("chosen").get<std::string>());
    if (!gold || !chosen) throw Error(ErrorCode::InvalidAnswerLabel, s.record_id);
    s.gold = *gold;
    s.prediction.record_id = s.record_id;
    s.prediction.chosen = *chosen;
    s.prediction.tie = j.at("tie").get<bool>();
    const auto& scores = j.at("scores");
    for (Label l : kLabels) {
      s.prediction.per_label_score[index_of(l)] = scores.at(std::string(1, to_char(l))).get<double>();
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("prediction: ") + e.what());
  }
}

std::string chat_logprob_request_json(const RenderedPrompt& prompt,
                                      const std::optional<std::string>& image_bytes,
                                      const std::string& model, int top_logprobs) {
  ordered_json user_content = ordered_json::array();
  if (image_bytes) {
    ordered_json image;
    image["type"] = "image_url";
    image["image_url"]["url"] = "data:image/png;base64," + base64_encode(*image_bytes);
    user_content.push_back(std::move(image));
  }
  ordered_json text;
  text["type"] = "text";
  text["text"] = prompt.user;
  user_content.push_back(std::move(text));

  ordered_json j;
  j["model"] = model;
  j["messages"] = ordered_json::array();
  j["messages"].push_back({{"role", "system"}, {"content", prompt.system}});
  j["messages"].push_back({{"role", "user"}, {"content", std::move(user_content)}});
  j["max_tokens"] = 1;
  j["temperature"] = 0;
  j["logprobs"] = true;
  j["top_logprobs"] = top_logprobs;
  return j.dump();
}

ScoreResponse score_from_chat_logprobs(std::string_view response_body, const std::string& request_id,
                                       const CandidateSet& candidates) {
  json j;
  try {
    j = json::parse(response_body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, request_id + ": " + e.what());
  }
  const json* top = nullptr;
  try {
    const auto& content = j.at("choices").at(0).at("logprobs").at("content");
    if (!content.is_array() || content.empty()) {
      throw Error(ErrorCode::CapabilityError, request_id + ": endpoint returned no token logprobs");
    }
    top = &content.at(0).at("top_logprobs");
  } catch (const json::exception&) {
    throw Error(ErrorCode::CapabilityError, request_id + ": endpoint does not expose top_logprobs");
  }

  ScoreResponse r;
  r.request_id = request_id;
  for (const auto& want : candidates.flat()) {
    std::optional<double> found;
    for (const auto& entry : *top) {
      if (entry.value("token", std::string{}) == want && entry.contains("logprob") &&
          entry["logprob"].is_number()) {
        found = entry["logprob"].get<double>();
        break;
      }
    }
    if (!found) {
      throw Error(ErrorCode::CapabilityError,
                  request_id + ": candidate \"" + want + "\" absent from top_logprobs");
    }
    r.logits.push_back(*found);
  }
  return r;
}

}  // namespace medcot
