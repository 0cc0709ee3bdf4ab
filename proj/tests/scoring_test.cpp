#include "medcot/scoring.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"
#include "medcot/encoding.hpp"
#include "support.hpp"

namespace medcot {
namespace {

ScoreResponse response(std::vector<double> logits) { return ScoreResponse{"r1", std::move(logits)}; }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no medcot::Error thrown";
  return ErrorCode::IoError;
}

TEST(Candidates, EightDistinctStrings) {
  const auto flat = build_candidates().flat();
  EXPECT_EQ(flat, (std::vector<std::string>{"A", " A", "B", " B", "C", " C", "D", " D"}));
  EXPECT_EQ(std::set<std::string>(flat.begin(), flat.end()).size(), 8u);
  for (const auto& pair : build_candidates().variants) EXPECT_EQ(pair.size(), 2u);
}

TEST(Predict, UniqueMax) {
  const auto p = predict(response({0, 0, 0, 0, 0, 0, 0, 1}));
  EXPECT_EQ(p.chosen, Label::D);
  EXPECT_FALSE(p.tie);
}

TEST(Predict, AllEqualTieGoesToA) {
  const auto p = predict(response({0, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(p.chosen, Label::A);
  EXPECT_TRUE(p.tie);
}

TEST(Predict, SpacedVariantWins) {
  const auto p = predict(response({0.1, 3.0, 2.5, 2.0, 1.0, 2.0, 1.5, 0.5}));
  EXPECT_EQ(p.chosen, Label::A);
  EXPECT_DOUBLE_EQ(p.score(Label::A), 3.0);
  EXPECT_DOUBLE_EQ(p.score(Label::B), 2.5);
  EXPECT_FALSE(p.tie);
}

TEST(Predict, TieBetweenLaterLabels) {
  const auto p = predict(response({0, 0, 0, 2, 2, 0, 0, 0}));
  EXPECT_EQ(p.chosen, Label::B);
  EXPECT_TRUE(p.tie);
}

TEST(Predict, WrongCountAndNonFinite) {
  EXPECT_EQ(code_of([] { predict(response({0, 0, 0, 0, 0, 0, 0})); }), ErrorCode::CandidateCountMismatch);
  EXPECT_EQ(code_of([] { predict(response({0, 0, 0, 0, 0, 0, 0, 0, 0})); }), ErrorCode::CandidateCountMismatch);
  EXPECT_EQ(code_of([] { predict(response({0, std::nan(""), 0, 0, 0, 0, 0, 0})); }), ErrorCode::NonFiniteLogit);
  EXPECT_EQ(code_of([] { predict(response({0, 0, 0, 0, std::numeric_limits<double>::infinity(), 0, 0, 0})); }),
            ErrorCode::NonFiniteLogit);
}

// Straightforward reference: score every label, then scan for the first
// label holding the maximum.
Label brute_force(const std::vector<double>& logits) {
  std::array<double, 4> score{};
  for (int l = 0; l < 4; ++l) score[l] = logits[2 * l] > logits[2 * l + 1] ? logits[2 * l] : logits[2 * l + 1];
  double best = score[0];
  for (double s : score) best = s > best ? s : best;
  for (int l = 0; l < 4; ++l) {
    if (score[l] == best) return static_cast<Label>(l);
  }
  return Label::A;
}

TEST(Predict, MatchesBruteForceAndShiftInvariant) {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> logits(8);
    // Coarse values make ties common.
    for (auto& v : logits) v = trial % 2 ? static_cast<double>(rng.next_below(4)) : rng.next_unit() * 20 - 10;
    const auto p = predict(response(logits));
    ASSERT_EQ(p.chosen, brute_force(logits));
    const double shift = static_cast<double>(rng.next_below(64)) - 32;
    auto shifted = logits;
    for (auto& v : shifted) v += shift;
    ASSERT_EQ(predict(response(shifted)).chosen, p.chosen);
    ASSERT_EQ(predict(response(logits)).tie, p.tie);
  }
}

TEST(ScoreRequest, WireShape) {
  RenderedPrompt prompt{"sys", "user", true};
  const auto body = score_request_json("id-1", prompt, std::string("abc"), build_candidates());
  const auto j = nlohmann::json::parse(body);
  EXPECT_EQ(j["request_id"], "id-1");
  EXPECT_EQ(j["system"], "sys");
  EXPECT_EQ(j["user"], "user");
  EXPECT_EQ(j["image"], "YWJj");
  EXPECT_EQ(j["candidates"].size(), 8u);
  const auto no_image = nlohmann::json::parse(score_request_json("id-1", prompt, std::nullopt, build_candidates()));
  EXPECT_TRUE(no_image["image"].is_null());
}

TEST(ScoreResponseParse, Validation) {
  const std::string ok = R"({"request_id":"x","logits":[1,2,3,4,5,6,7,8]})";
  EXPECT_EQ(parse_score_response(ok, "x", 8).logits.size(), 8u);
  EXPECT_EQ(code_of([&] { parse_score_response(ok, "y", 8); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_score_response(R"({"request_id":"x","logits":[1,2,3,4,5,6,7]})", "x", 8); }),
            ErrorCode::CandidateCountMismatch);
  EXPECT_EQ(code_of([] { parse_score_response(R"({"request_id":"x","logits":[1,2,3,null,5,6,7,8]})", "x", 8); }),
            ErrorCode::NonFiniteLogit);
  EXPECT_EQ(code_of([] { parse_score_response("not json", "x", 8); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_score_response(R"({"logits":[]})", "x", 8); }), ErrorCode::MalformedResponse);
}

TEST(PredictionLine, RoundTrip) {
  ScoredRecord s{"rec", Label::C, predict(response({0, 1, 2, 3, 4, 5, 6, 7}))};
  s.prediction.record_id = "rec";
  const auto back = scored_record_from_json(prediction_to_jsonl_line(s));
  EXPECT_EQ(back.record_id, "rec");
  EXPECT_EQ(back.gold, Label::C);
  EXPECT_EQ(back.prediction.chosen, Label::D);
  EXPECT_EQ(back.prediction.per_label_score, s.prediction.per_label_score);
  EXPECT_FALSE(back.correct());
}

TEST(ImageProvider, ReadsRelativeToRoot) {
  testing::TempDir dir;
  testing::spit(dir / "images/a.jpg", "bytes");
  auto images = file_image_provider(dir.path());
  auto r = testing::make_record("a", Label::A);
  EXPECT_EQ(images(r).value(), "bytes");
  r.image_ref = "images/missing.jpg";
  EXPECT_FALSE(images(r).has_value());
  r.image_ref.reset();
  EXPECT_FALSE(images(r).has_value());
}

TEST(ChatAdapter, RequestShape) {
  RenderedPrompt prompt{"sys", "user", true};
  const auto j = nlohmann::json::parse(chat_logprob_request_json(prompt, std::string("img"), "m", 20));
  EXPECT_EQ(j["max_tokens"], 1);
  EXPECT_EQ(j["top_logprobs"], 20);
  EXPECT_EQ(j["messages"][0]["content"], "sys");
  EXPECT_EQ(j["messages"][1]["content"][0]["type"], "image_url");
  EXPECT_EQ(j["messages"][1]["content"][1]["text"], "user");
}

std::string chat_body(const std::vector<std::pair<std::string, double>>& top) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [t, lp] : top) entries.push_back({{"token", t}, {"logprob", lp}});
  nlohmann::json j;
  j["choices"] = nlohmann::json::array({{{"logprobs", {{"content", nlohmann::json::array({{{"top_logprobs", entries}}})}}}}});
  return j.dump();
}

TEST(ChatAdapter, MapsTopLogprobsToCandidates) {
  const auto body = chat_body({{"B", -0.1}, {" B", -2.0}, {"A", -3.0}, {" A", -4.0}, {"C", -5.0},
                               {" C", -6.0}, {"D", -7.0}, {" D", -8.0}, {"The", -9.0}});
  const auto r = score_from_chat_logprobs(body, "q", build_candidates());
  EXPECT_EQ(r.logits, (std::vector<double>{-3.0, -4.0, -0.1, -2.0, -5.0, -6.0, -7.0, -8.0}));
  EXPECT_EQ(predict(r).chosen, Label::B);
}

TEST(ChatAdapter, MissingCandidateIsCapabilityError) {
  const auto body = chat_body({{"B", -0.1}, {" B", -2.0}, {"A", -3.0}});
  EXPECT_EQ(code_of([&] { score_from_chat_logprobs(body, "q", build_candidates()); }), ErrorCode::CapabilityError);
  EXPECT_EQ(code_of([] { score_from_chat_logprobs(R"({"choices":[{"message":{}}]})", "q", build_candidates()); }),
            ErrorCode::CapabilityError);
}

TEST(EvaluateSplit, ConfigurationErrors) {
  ScoringOptions options;
  options.endpoint = Endpoint::parse("http://127.0.0.1:9");
  auto records = testing::records_with_counts({1, 0, 0, 0});
  EXPECT_EQ(code_of([&] { evaluate_split({}, PromptFamily::NoCaption, options, false, {}); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { evaluate_split(records, PromptFamily::NoCaption, options, true, {}); }),
            ErrorCode::ConfigError);
  options.concurrency = 0;
  EXPECT_EQ(code_of([&] { evaluate_split(records, PromptFamily::NoCaption, options, false, {}); }),
            ErrorCode::ConfigError);
}

}  // namespace
}  // namespace medcot
