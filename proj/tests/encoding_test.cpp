#include "medcot/encoding.hpp"

#include <gtest/gtest.h>

#include <array>
#include <set>

namespace medcot {
namespace {

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Fnv1a, ChainingEqualsConcatenation) {
  EXPECT_EQ(fnv1a64("bar", fnv1a64("foo")), fnv1a64("foobar"));
}

TEST(Hex64, FixedWidthLowercase) {
  EXPECT_EQ(hex64(0), "0000000000000000");
  EXPECT_EQ(hex64(0xABCDEF0123456789ULL), "abcdef0123456789");
}

TEST(Base64, Rfc4648Vectors) {
  const std::array<std::pair<const char*, const char*>, 7> cases = {{
      {"", ""},
      {"f", "Zg=="},
      {"fo", "Zm8="},
      {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="},
      {"fooba", "Zm9vYmE="},
      {"foobar", "Zm9vYmFy"},
  }};
  for (const auto& [in, out] : cases) EXPECT_EQ(base64_encode(in), out) << in;
  EXPECT_EQ(base64_encode(std::string("\xff\xfe\x00", 3)), "//4A");
}

TEST(SplitMix, ReferenceSequence) {
  // Reference output of the published splitmix64.c for seed 0.
  SplitMix64 rng(0);
  EXPECT_EQ(rng(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng(), 0x06c45d188009454fULL);
}

TEST(SplitMix, UnitInterval) {
  SplitMix64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(SplitMix, NextBelowRangeAndCoverage) {
  SplitMix64 rng(17);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.next_below(7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_EQ(rng.next_below(1), 0u);
}

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(derive_seed(s, k));
  }
  EXPECT_EQ(seen.size(), 4000u);
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
}

}  // namespace
}  // namespace medcot
