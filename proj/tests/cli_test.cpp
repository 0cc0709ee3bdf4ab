#include "cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "medcot/dataset.hpp"
#include "medcot/mock_server.hpp"
#include "medcot/report.hpp"
#include "support.hpp"

namespace medcot {
namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    records = testing::records_with_counts({3, 4, 2, 1});
    const Label train_gold[] = {Label::A, Label::B, Label::B, Label::C, Label::C, Label::D};
    for (std::size_t i = 0; i < 6; ++i) {
      records.push_back(testing::make_record("t" + std::to_string(i), train_gold[i], Split::Train));
    }
    save_jsonl(dir / "data.jsonl", records);
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  std::unique_ptr<MockServer> start_mock(double visual_reliance) {
    MockModelProfile profile;
    profile.competence = 5;
    profile.visual_reliance = visual_reliance;
    const std::array<PromptFamily, 1> families = {PromptFamily::NoCaption};
    profile.gold_lookup = build_gold_fixture(records, families);
    auto server = std::make_unique<MockServer>(profile);
    server->start();
    return server;
  }

  testing::TempDir dir;
  std::vector<VqaRecord> records;
};

TEST_F(CliTest, UnknownFlagIsUsageError) {
  const auto r = run({"eval", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"eval", "--family", "nope"}).code, 2);
}

TEST_F(CliTest, IngestThenStats) {
  auto r = run({"ingest", "--dataset", path("data.jsonl"), "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(testing::slurp(dir / "out/dataset.jsonl"), testing::slurp(dir / "data.jsonl"));
  r = run({"stats", "--dataset", path("out/dataset.jsonl"), "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("test: total 10"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("B: 4 (40.0%)"), std::string::npos) << r.out;
  const auto stats = nlohmann::json::parse(testing::slurp(dir / "out/stats.json"));
  EXPECT_EQ(stats["train"]["total"], 6);
  EXPECT_EQ(stats["test"]["per_label_count"]["A"], 3);
}

TEST_F(CliTest, EvalWithoutSeedIsUsageError) {
  const auto r = run({"eval", "--dataset", path("data.jsonl"), "--endpoint", "http://127.0.0.1:1", "--out",
                      path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingDatasetIsUsageError) {
  EXPECT_EQ(run({"stats", "--dataset", path("absent.jsonl"), "--out", path("out")}).code, 2);
}

TEST_F(CliTest, RunMetaRecordsConfigAndReloads) {
  ASSERT_EQ(run({"chunk", "--dataset", path("data.jsonl"), "--chunks", "3", "--seed", "9", "--out", path("c")}).code,
            0);
  const auto meta = nlohmann::json::parse(testing::slurp(dir / "c/run_meta.json"));
  EXPECT_EQ(meta["stage"], "chunk");
  EXPECT_EQ(meta["config"]["chunks"], 3);
  EXPECT_TRUE(meta.contains("started_at"));
  const auto reloaded = cli::load_config(dir / "c/run_meta.json");
  EXPECT_EQ(reloaded.chunks, 3u);
  EXPECT_EQ(reloaded.seed, std::optional<std::uint64_t>(9));
  EXPECT_EQ(reloaded.dataset, dir / "data.jsonl");

  const auto manifests = manifests_from_json(testing::slurp(dir / "c/manifest.json"));
  ASSERT_EQ(manifests.size(), 3u);
  EXPECT_EQ(manifests[0].record_ids.size() + manifests[1].record_ids.size() + manifests[2].record_ids.size(), 6u);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  testing::spit(dir / "cfg/run.json", R"({"dataset": "../data.jsonl", "chunks": 2, "seed": 4})");
  ASSERT_EQ(run({"chunk", "--config", path("cfg/run.json"), "--chunks", "4", "--out", path("c")}).code, 0);
  EXPECT_EQ(manifests_from_json(testing::slurp(dir / "c/manifest.json")).size(), 4u);
}

TEST_F(CliTest, EvalAgainstMockWithoutImages) {
  auto server = start_mock(0);
  const auto r = run({"eval", "--dataset", path("data.jsonl"), "--endpoint", server->url(), "--seed", "3",
                      "--no-image", "--resamples", "200", "--out", path("e")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accuracy 100.0%"), std::string::npos) << r.out;
  const auto rows = parse_report_csv(testing::slurp(dir / "e/report.csv"));
  EXPECT_EQ(rows.front().value, "100.0");
  EXPECT_EQ(rows.front().n, "16");
  EXPECT_TRUE(std::filesystem::exists(dir / "e/report.md"));
  EXPECT_EQ(testing::slurp(dir / "e/failures.jsonl"), "");

  const auto again = run({"report", "--dataset", path("data.jsonl"), "--predictions", path("e/predictions.jsonl"),
                          "--seed", "3", "--resamples", "200", "--no-image", "--endpoint", server->url(), "--out",
                          path("r")});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(testing::slurp(dir / "r/report.md"), testing::slurp(dir / "e/report.md"));
}

TEST_F(CliTest, MissingImagesExceedFailureThreshold) {
  auto server = start_mock(0);
  const auto r = run({"eval", "--dataset", path("data.jsonl"), "--endpoint", server->url(), "--seed", "3",
                      "--resamples", "50", "--out", path("e")});
  EXPECT_EQ(r.code, 2) << r.out;
  for (const auto& rec : records) testing::spit(dir / *rec.image_ref, "img");
  for (int i = 0; i < 2; ++i) std::filesystem::remove(dir / *records[i].image_ref);
  const auto partial = run({"eval", "--dataset", path("data.jsonl"), "--endpoint", server->url(), "--seed", "3",
                            "--resamples", "50", "--out", path("p")});
  EXPECT_EQ(partial.code, 1) << partial.err;
  const auto failures = testing::slurp(dir / "p/failures.jsonl");
  EXPECT_EQ(std::count(failures.begin(), failures.end(), '\n'), 2);
  EXPECT_NE(failures.find("ImageUnavailable"), std::string::npos);
}

TEST_F(CliTest, AblateReportsDelta) {
  for (const auto& rec : records) testing::spit(dir / *rec.image_ref, "img");
  auto server = start_mock(1);
  const auto r = run({"ablate", "--dataset", path("data.jsonl"), "--endpoint", server->url(), "--seed", "3",
                      "--resamples", "100", "--out", path("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  // Uniform bias without image: every record ties and resolves to A (4 of 16 gold A).
  EXPECT_NE(r.out.find("with image 100.0%, without image 25.0%, delta -75.0 pp"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "a/with_image/report.md"));
  EXPECT_TRUE(std::filesystem::exists(dir / "a/without_image/report.md"));
  EXPECT_NE(testing::slurp(dir / "a/report.md").find("## Image ablation"), std::string::npos);
}

}  // namespace
}  // namespace medcot
