#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "medcot/analytics.hpp"
#include "medcot/prompts.hpp"
#include "medcot/scoring.hpp"
#include "medcot/taxonomy.hpp"

namespace {

void BM_BootstrapCi(benchmark::State& state) {
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(state.range(0)), 0);
  for (std::size_t i = 0; i < flags.size(); i += 2) flags[i] = 1;
  medcot::BootstrapOptions options;
  options.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(medcot::bootstrap_ci(flags, options));
}
BENCHMARK(BM_BootstrapCi)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> value(-10, 10);
  std::vector<medcot::ScoreResponse> responses(1024);
  for (auto& r : responses) {
    r.request_id = "r";
    r.logits.resize(medcot::CandidateSet::kSize);
    for (auto& x : r.logits) x = value(rng);
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(medcot::predict(responses[i++ % responses.size()]));
}
BENCHMARK(BM_Predict);

void BM_Categorize(benchmark::State& state) {
  const medcot::Taxonomy taxonomy;
  const std::vector<std::string> questions = {
      "What imaging modality was used to acquire this image?",
      "Which part of the left ventricle shows the lesion indicated by the arrow?",
      "How many nodules are visible in the right lung?",
      "What is the most likely diagnosis based on the histology?",
      "Compared with the previous scan, is the mass larger?",
  };
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(taxonomy.categorize(questions[i++ % questions.size()]));
}
BENCHMARK(BM_Categorize);

void BM_RenderPrompt(benchmark::State& state) {
  medcot::VqaRecord r;
  r.id = "x";
  r.question = "What imaging modality was used to acquire this image?";
  r.options = {"CT", "MRI", "Ultrasound", "X-ray"};
  for (auto _ : state) benchmark::DoNotOptimize(medcot::render_prompt(r, medcot::PromptFamily::NoCaption));
}
BENCHMARK(BM_RenderPrompt);

}  // namespace
BENCHMARK_MAIN();
