#include "medcot/teacher.hpp"

#include <gtest/gtest.h>

#include "medcot/error.hpp"
#include "medcot/mock_server.hpp"
#include "support.hpp"

namespace medcot {
namespace {

const std::array<PromptFamily, 1> kNoCaption = {PromptFamily::NoCaption};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no medcot::Error thrown";
  return ErrorCode::IoError;
}

struct Harness {
  std::vector<VqaRecord> records;
  MockModelProfile profile;
  std::unique_ptr<MockServer> server;
  TeacherOptions options;

  Harness(std::size_t n, std::size_t n_failing) {
    records = testing::records_with_counts({n / 4, n / 4, n / 4, n - 3 * (n / 4)}, Split::Train);
    profile.generate_word_count = 12;
    profile.gold_lookup = build_gold_fixture(records, kNoCaption);
    for (std::size_t i = 0; i < n_failing; ++i) {
      profile.generate_fail_keys.insert(user_key(render_teacher_user(records[i * 7 % n])));
    }
    server = std::make_unique<MockServer>(profile);
    server->start();
    options.endpoint = Endpoint::parse(server->url());
    options.retry.max_attempts = 1;
    options.concurrency = 4;
    options.teacher_id = "mock-teacher";
  }
};

TEST(ParseTeacherText, Variants) {
  auto p = parse_teacher_text("Explanation: red vesicles near the nucleus.\nAnswer: B");
  EXPECT_EQ(p.explanation, "red vesicles near the nucleus.");
  EXPECT_EQ(p.answer, Label::B);
  p = parse_teacher_text("Some reasoning.\n\nAnswer: C.\n");
  EXPECT_EQ(p.explanation, "Some reasoning.");
  EXPECT_EQ(p.answer, Label::C);
  p = parse_teacher_text("Reasoning that never concludes.");
  EXPECT_FALSE(p.answer.has_value());
  EXPECT_EQ(p.explanation, "Reasoning that never concludes.");
  p = parse_teacher_text("Answer: A is tempting.\nAnswer: E");
  EXPECT_FALSE(p.answer.has_value());
}

TEST(TeacherPrompt, RevealsGoldAfterNoCaptionMessage) {
  auto r = testing::make_record("x", Label::C, Split::Train);
  const auto user = render_teacher_user(r);
  const auto base = render_user(r, PromptFamily::NoCaption);
  EXPECT_EQ(user.rfind(base, 0), 0u);
  EXPECT_NE(user.find("The correct answer is C."), std::string::npos);
  EXPECT_EQ(user.substr(user.size() - 10), "Answer: C.");
}

TEST(Generate, InjectedFailures) {
  Harness h(100, 2);
  const auto result = generate_explanations(h.records, h.options);
  ASSERT_EQ(result.annotations.size(), 100u);
  ASSERT_EQ(result.failures.size(), 2u);
  for (const auto& f : result.failures) EXPECT_EQ(f.code, ErrorCode::AnswerMismatch);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < h.records.size(); ++i) {
    EXPECT_EQ(result.annotations[i].record_id, h.records[i].id);
    EXPECT_EQ(result.annotations[i].teacher_id, "mock-teacher");
    if (result.annotations[i].ok()) {
      ++ok;
      EXPECT_EQ(result.annotations[i].word_count, 12u);
    } else {
      EXPECT_EQ(result.annotations[i].failure_reason, "AnswerMismatch");
    }
  }
  EXPECT_EQ(ok, 98u);
  EXPECT_EQ(result.requests_issued, 98u + 2u * 3u);
  const auto cov = coverage_stats(result.annotations, h.records.size());
  EXPECT_DOUBLE_EQ(cov.coverage_pct, 98.00);
  EXPECT_EQ(cov.succeeded, 98u);
}

TEST(Generate, TestSplitLeakBeforeAnyRequest) {
  Harness h(8, 0);
  h.records[5].split = Split::Test;
  EXPECT_EQ(code_of([&] { generate_explanations(h.records, h.options); }), ErrorCode::TestSplitLeak);
  EXPECT_EQ(h.server->request_count(), 0u);
}

TEST(Generate, ResumesFromCheckpoint) {
  Harness h(40, 2);
  testing::TempDir dir;
  h.options.checkpoint = dir / "annotations.jsonl";
  const auto first = generate_explanations(h.records, h.options);
  EXPECT_EQ(first.resumed, 0u);
  const auto on_disk = load_annotations(h.options.checkpoint);
  EXPECT_EQ(on_disk, first.annotations);

  const auto before = h.server->request_count();
  const auto second = generate_explanations(h.records, h.options);
  EXPECT_EQ(second.resumed, 38u);
  EXPECT_EQ(second.requests_issued, 2u * 3u);
  EXPECT_EQ(h.server->request_count() - before, 6u);
  EXPECT_EQ(second.annotations, first.annotations);
}

TEST(Generate, PartialCheckpointIsCompletedInInputOrder) {
  Harness h(20, 0);
  testing::TempDir dir;
  h.options.checkpoint = dir / "ck.jsonl";
  const auto full = generate_explanations(h.records, h.options);
  // Simulate an interrupted run that finished a scattered subset.
  std::vector<CotAnnotation> partial = {full.annotations[13], full.annotations[2], full.annotations[7]};
  save_annotations(h.options.checkpoint, partial);
  const auto resumed = generate_explanations(h.records, h.options);
  EXPECT_EQ(resumed.resumed, 3u);
  EXPECT_EQ(resumed.requests_issued, 17u);
  EXPECT_EQ(load_annotations(h.options.checkpoint), full.annotations);
}

TEST(Generate, TransportFailureRecorded) {
  Harness h(4, 0);
  h.options.endpoint = Endpoint::parse("http://127.0.0.1:1");
  h.options.retry.base_delay = std::chrono::milliseconds(1);
  const auto result = generate_explanations(h.records, h.options);
  ASSERT_EQ(result.failures.size(), 4u);
  for (const auto& a : result.annotations) {
    EXPECT_FALSE(a.ok());
    EXPECT_EQ(a.failure_reason, "Transport");
  }
}

TEST(Coverage, FloorNeverRoundsUpTo100) {
  EXPECT_DOUBLE_EQ(floor_coverage_pct(152601, 152603), 99.99);
  EXPECT_DOUBLE_EQ(floor_coverage_pct(152602, 152603), 99.99);
  EXPECT_DOUBLE_EQ(floor_coverage_pct(152603, 152603), 100.00);
  EXPECT_DOUBLE_EQ(floor_coverage_pct(98, 100), 98.00);
  EXPECT_DOUBLE_EQ(floor_coverage_pct(2, 3), 66.66);
  EXPECT_EQ(code_of([] { floor_coverage_pct(0, 0); }), ErrorCode::EmptyResults);
}

TEST(WordStatsTest, Fixtures) {
  std::vector<std::size_t> three = {438, 5, 139};
  auto s = word_stats(three);
  EXPECT_EQ(s.min, 5u);
  EXPECT_EQ(s.median, 139u);
  EXPECT_EQ(s.max, 438u);
  std::vector<std::size_t> two = {200, 100};
  s = word_stats(two);
  EXPECT_DOUBLE_EQ(s.mean, 150.0);
  EXPECT_EQ(s.median, 100u);
}

TEST(CoverageStats, NoSuccesses) {
  std::vector<CotAnnotation> failed = {CotAnnotation{"a", "", 0, "t", AnnotationStatus::Failed, "Transport"}};
  EXPECT_EQ(code_of([&] { coverage_stats(failed, 1); }), ErrorCode::NoAnnotations);
  EXPECT_EQ(code_of([] { coverage_stats({}, 5); }), ErrorCode::NoAnnotations);
}

TEST(AnnotationLine, RoundTripAndStatus) {
  CotAnnotation ok{"r1", "Dense consolidation.", 2, "t", AnnotationStatus::Success, ""};
  CotAnnotation bad{"r2", "", 0, "t", AnnotationStatus::Failed, "AnswerMismatch"};
  EXPECT_EQ(annotation_from_json(annotation_to_jsonl_line(ok)), ok);
  EXPECT_EQ(annotation_from_json(annotation_to_jsonl_line(bad)), bad);
  EXPECT_NE(annotation_to_jsonl_line(ok).find(R"("status":"success")"), std::string::npos);
  EXPECT_NE(annotation_to_jsonl_line(bad).find(R"x("status":"failed(AnswerMismatch)")x"), std::string::npos);
  EXPECT_EQ(count_words("  a\tb\n c  "), 3u);
  EXPECT_EQ(count_words(""), 0u);
}

}  // namespace
}  // namespace medcot
