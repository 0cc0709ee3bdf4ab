#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medcot/taxonomy.hpp"
#include "medcot/types.hpp"

namespace medcot {

struct Outcome {
  std::string record_id;
  Label gold = Label::A;
  Label chosen = Label::A;

  bool correct() const { return gold == chosen; }
};

/// Half-up (away from zero) rounding to one decimal, tolerant of binary
/// representation error (48.7 - 32.9 rounds to -15.8, 21.85 to 21.9).
double round_1dp(double value) noexcept;

/// correct / total * 100. Throws EmptyResults.
double accuracy(std::span<const Outcome> outcomes);
double accuracy_from_counts(std::size_t correct, std::size_t total);

struct BootstrapCi {
  double point = 0;
  double lower = 0;
  double upper = 0;
  std::size_t n_resamples = 10000;
  double level = 0.95;
  std::uint64_t seed = 0;
};

struct BootstrapOptions {
  std::size_t n_resamples = 10000;
  double level = 0.95;
  std::uint64_t seed = 0;
  /// 0 picks hardware concurrency. The result does not depend on it.
  unsigned threads = 0;
};

/// Percentile bootstrap over 0/1 correctness flags. Resample r draws from
/// its own SplitMix64 stream seeded by (seed, r); endpoints are linearly
/// interpolated empirical quantiles of the resampled accuracies. Depends
/// only on the number of ones, so any permutation of the flags gives the
/// same interval. Throws EmptyResults.
BootstrapCi bootstrap_ci(std::span<const std::uint8_t> correct_flags,
                         const BootstrapOptions& options = {});

/// Accuracy among records whose gold label is L; labels with no gold
/// records are absent.
std::map<Label, double> per_position_accuracy(std::span<const Outcome> outcomes);

/// sum_L acc_L * n_L / sum_L n_L.
double weighted_overall(const std::map<Label, double>& per_position,
                        const std::array<std::size_t, 4>& gold_counts);

struct CategoryAccuracy {
  std::size_t n = 0;
  std::size_t correct = 0;
  double pct = 0;
};

/// A record counts once toward every category it matched. Throws
/// MissingAssignment when an outcome has no assignment.
std::map<QuestionCategory, CategoryAccuracy> per_category_accuracy(
    std::span<const Outcome> outcomes, std::span<const CategoryAssignment> assignments);

/// without - with, rounded to one decimal.
double ablation_delta(double with_image, double without_image) noexcept;

}  // namespace medcot
