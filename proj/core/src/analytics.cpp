#include "medcot/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "medcot/encoding.hpp"
#include "medcot/error.hpp"

namespace medcot {

double round_1dp(double value) noexcept {
  const double scaled = std::abs(value) * 10.0;
  double whole = std::floor(scaled);
  const double frac = scaled - whole;
  // 1e-9 absorbs binary representation error around exact halves.
  if (frac >= 0.5 - 1e-9) whole += 1.0;
  const double out = whole / 10.0;
  return value < 0 ? -out : out;
}

double accuracy_from_counts(std::size_t correct, std::size_t total) {
  if (total == 0) throw Error(ErrorCode::EmptyResults, "accuracy over zero results");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

double accuracy(std::span<const Outcome> outcomes) {
  const auto correct = std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.correct(); });
  return accuracy_from_counts(static_cast<std::size_t>(correct), outcomes.size());
}

namespace {

double quantile_sorted(const std::vector<std::uint32_t>& sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (static_cast<double>(sorted[hi]) - sorted[lo]);
}

}  // namespace

BootstrapCi bootstrap_ci(std::span<const std::uint8_t> correct_flags, const BootstrapOptions& options) {
  if (correct_flags.empty()) throw Error(ErrorCode::EmptyResults, "bootstrap over zero results");
  if (options.n_resamples == 0) throw Error(ErrorCode::ConfigError, "n_resamples must be positive");
  if (!(options.level > 0 && options.level < 1)) throw Error(ErrorCode::ConfigError, "level must be in (0, 1)");

  const std::uint64_t n = correct_flags.size();
  const std::uint64_t ones =
      static_cast<std::uint64_t>(std::count_if(correct_flags.begin(), correct_flags.end(), [](auto f) { return f != 0; }));

  // Resampled correct counts; index i < ones stands for a correct record.
  std::vector<std::uint32_t> counts(options.n_resamples);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      SplitMix64 rng(derive_seed(options.seed, r));
      std::uint32_t hits = 0;
      for (std::uint64_t i = 0; i < n; ++i) hits += rng.next_below(n) < ones ? 1U : 0U;
      counts[r] = hits;
    }
  };

  unsigned threads = options.threads != 0 ? options.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, options.n_resamples));
  if (threads <= 1) {
    run(0, options.n_resamples);
  } else {
    std::vector<std::thread> pool;
    const std::size_t per = (options.n_resamples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const auto begin = std::min<std::size_t>(t * per, options.n_resamples);
      const auto end = std::min<std::size_t>(begin + per, options.n_resamples);
      pool.emplace_back(run, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  std::sort(counts.begin(), counts.end());

  const double alpha = 1.0 - options.level;
  const double scale = 100.0 / static_cast<double>(n);
  BootstrapCi ci;
  ci.point = accuracy_from_counts(ones, n);
  ci.lower = quantile_sorted(counts, alpha / 2) * scale;
  ci.upper = quantile_sorted(counts, 1 - alpha / 2) * scale;
  ci.n_resamples = options.n_resamples;
  ci.level = options.level;
  ci.seed = options.seed;
  return ci;
}

std::map<Label, double> per_position_accuracy(std::span<const Outcome> outcomes) {
  std::array<std::size_t, 4> total{};
  std::array<std::size_t, 4> correct{};
  for (const auto& o : outcomes) {
    ++total[index_of(o.gold)];
    if (o.correct()) ++correct[index_of(o.gold)];
  }
  std::map<Label, double> out;
  for (Label l : kLabels) {
    if (total[index_of(l)] > 0) out[l] = accuracy_from_counts(correct[index_of(l)], total[index_of(l)]);
  }
  return out;
}

double weighted_overall(const std::map<Label, double>& per_position,
                        const std::array<std::size_t, 4>& gold_counts) {
  double weighted = 0;
  std::size_t total = 0;
  for (const auto& [label, pct] : per_position) {
    weighted += pct * static_cast<double>(gold_counts[index_of(label)]);
    total += gold_counts[index_of(label)];
  }
  if (total == 0) throw Error(ErrorCode::EmptyResults, "no weighted positions");
  return weighted / static_cast<double>(total);
}

std::map<QuestionCategory, CategoryAccuracy> per_category_accuracy(
    std::span<const Outcome> outcomes, std::span<const CategoryAssignment> assignments) {
  std::unordered_map<std::string_view, const CategorySet*> by_id;
  for (const auto& a : assignments) by_id[a.record_id] = &a.categories;

  std::map<QuestionCategory, CategoryAccuracy> out;
  for (const auto& o : outcomes) {
    auto it = by_id.find(o.record_id);
    if (it == by_id.end()) throw Error(ErrorCode::MissingAssignment, o.record_id);
    for (auto category : *it->second) {
      auto& acc = out[category];
      ++acc.n;
      if (o.correct()) ++acc.correct;
    }
  }
  for (auto& [category, acc] : out) acc.pct = accuracy_from_counts(acc.correct, acc.n);
  return out;
}

double ablation_delta(double with_image, double without_image) noexcept {
  return round_1dp(without_image - with_image);
}

}  // namespace medcot
