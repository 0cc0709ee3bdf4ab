#include "medcot/report.hpp"

#include <gtest/gtest.h>

#include "json.hpp"
#include "support.hpp"

namespace medcot {
namespace {

std::size_t count_rows(const std::string& md, const std::string& heading) {
  auto pos = md.find(heading);
  if (pos == std::string::npos) return 0;
  pos = md.find("|---", pos);
  pos = md.find('\n', pos) + 1;
  std::size_t rows = 0;
  while (pos < md.size() && md[pos] == '|') {
    ++rows;
    pos = md.find('\n', pos) + 1;
  }
  return rows;
}

struct Fixture {
  std::vector<Outcome> outcomes = {
      {"1", Label::A, Label::A}, {"2", Label::B, Label::B}, {"3", Label::B, Label::C},
      {"4", Label::C, Label::C}, {"5", Label::D, Label::A},
  };
  std::vector<CategoryAssignment> assignments = {
      {"1", {QuestionCategory::Modality}},
      {"2", {QuestionCategory::Modality, QuestionCategory::Anatomy}},
      {"3", {QuestionCategory::Anatomy}},
      {"4", {QuestionCategory::Other}},
      {"5", {QuestionCategory::Other}},
  };
  RunMetadata meta{"student", "nocaption", 11, "http://127.0.0.1:9", true, 0};

  EvalReport build() const { return build_report(outcomes, assignments, meta, {500, 0.95, 11, 1}); }
};

TEST(BuildReport, Fields) {
  const auto r = Fixture{}.build();
  EXPECT_EQ(r.n, 5u);
  EXPECT_EQ(r.correct, 3u);
  EXPECT_DOUBLE_EQ(r.overall.point, 60.0);
  EXPECT_EQ(r.overall.seed, 11u);
  EXPECT_EQ(r.per_position_n.at(Label::B), 2u);
  EXPECT_DOUBLE_EQ(r.per_position.at(Label::B), 50.0);
  EXPECT_EQ(r.per_category.size(), 3u);
  EXPECT_FALSE(r.ablation.has_value());
}

TEST(Markdown, OneRowPerCategoryWithData) {
  const auto md = render_markdown(Fixture{}.build());
  EXPECT_EQ(count_rows(md, "## Per-category accuracy"), 3u);
  EXPECT_EQ(count_rows(md, "## Accuracy by gold answer position"), 4u);
  EXPECT_EQ(count_rows(md, "## Overall accuracy"), 1u);
  EXPECT_NE(md.find("95% CI"), std::string::npos);
  EXPECT_EQ(md.find("## Image ablation"), std::string::npos);
}

TEST(Markdown, AblationSection) {
  auto r = Fixture{}.build();
  r.ablation = AblationSummary{48.7, 32.9, ablation_delta(48.7, 32.9)};
  const auto md = render_markdown(r);
  EXPECT_EQ(count_rows(md, "## Image ablation"), 1u);
  EXPECT_NE(md.find("| 48.7 | 32.9 | -15.8 |"), std::string::npos);
  const auto rows = parse_report_csv(render_csv(r));
  bool found = false;
  for (const auto& row : rows) {
    if (row.section == "ablation" && row.key == "delta_pp") {
      EXPECT_EQ(row.value, "-15.8");
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Render, ByteIdenticalAcrossBuilds) {
  const Fixture f;
  const auto a = f.build();
  const auto b = f.build();
  EXPECT_EQ(render_markdown(a), render_markdown(b));
  EXPECT_EQ(render_csv(a), render_csv(b));
  EXPECT_EQ(render_json(a), render_json(b));
}

TEST(Csv, RoundTripsValues) {
  Fixture f;
  f.meta.model_id = "model, with \"quotes\"";
  const auto r = f.build();
  const auto rows = parse_report_csv(render_csv(r));
  ASSERT_FALSE(rows.empty());
  std::map<std::string, CsvRow> by_key;
  for (const auto& row : rows) by_key[row.section + "/" + row.key] = row;
  EXPECT_EQ(by_key.at("overall/accuracy").value, "60.0");
  EXPECT_EQ(by_key.at("overall/accuracy").n, "5");
  EXPECT_EQ(by_key.at("position/B").n, "2");
  EXPECT_EQ(by_key.at("position/B").value, "50.0");
  EXPECT_EQ(by_key.at("category/anatomy").n, "2");
  EXPECT_EQ(by_key.at("meta/model_id").value, "model, with \"quotes\"");
  EXPECT_EQ(by_key.at("meta/seed").value, "11");
}

TEST(Json, FullPrecision) {
  const auto j = nlohmann::json::parse(render_json(Fixture{}.build()));
  EXPECT_EQ(j["n"], 5);
  EXPECT_DOUBLE_EQ(j["overall"]["point"].get<double>(), 60.0);
}

TEST(Files, WritesThreeReports) {
  testing::TempDir dir;
  const auto r = Fixture{}.build();
  write_report_files(r, dir / "nested");
  EXPECT_EQ(testing::slurp(dir / "nested/report.md"), render_markdown(r));
  EXPECT_EQ(testing::slurp(dir / "nested/report.csv"), render_csv(r));
  EXPECT_EQ(testing::slurp(dir / "nested/report.json"), render_json(r));
}

}  // namespace
}  // namespace medcot
