#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "medcot/prompts.hpp"
#include "medcot/types.hpp"

namespace medcot {

/// Synthetic model behind the mock server. Logit for a candidate of label L:
///   bias[L] + competence * (1 - visual_reliance * [no image]) * [L == gold]
///   + noise_scale * N(0,1)  (deterministic in seed and request content)
/// and space-prefixed candidates score 0.01 below their bare variant.
struct MockModelProfile {
  std::array<double, 4> bias{};
  double competence = 0;
  double visual_reliance = 0;
  double noise_scale = 0;
  std::uint64_t seed = 0;
  /// user-message hash (see user_key) -> gold label
  std::map<std::string, Label> gold_lookup;
  std::size_t generate_word_count = 40;
  double generate_fail_rate = 0;
  /// user-message hashes whose generate call always fails.
  std::set<std::string> generate_fail_keys;

  static MockModelProfile from_json(std::string_view text);
  static MockModelProfile from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
};

inline constexpr double kSpacedVariantOffset = 0.01;

/// Hash of a user message used to key gold labels: FNV-1a 64, hex.
std::string user_key(std::string_view user);

/// Gold fixture entries for every record under each family's user format,
/// plus the teacher-request format.
std::map<std::string, Label> build_gold_fixture(std::span<const VqaRecord> records,
                                                std::span<const PromptFamily> families,
                                                bool include_teacher = true);

std::vector<double> mock_logits(const MockModelProfile& profile, std::string_view system,
                                std::string_view user, bool has_image,
                                std::span<const std::string> candidates, Label gold);

bool mock_generate_fails(const MockModelProfile& profile, std::string_view user);
/// generate_word_count words of filler, then "\nAnswer: <L>". Failures
/// answer with the label after gold.
std::string mock_generate_text(const MockModelProfile& profile, std::string_view user, Label gold);

/// Noise-free closed form: percent of records the profile answers correctly
/// given gold-label counts, with ties broken toward the earliest label.
double mock_expected_accuracy(const MockModelProfile& profile,
                              const std::array<std::size_t, 4>& gold_counts, bool image_present);

/// Serves POST /v1/score and POST /v1/generate on 127.0.0.1.
class MockServer {
 public:
  explicit MockServer(MockModelProfile profile);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds (port 0 picks a free port) and starts serving on a background
  /// thread. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks the calling thread.
  void run(const std::string& host, int port);
  void stop();

  int port() const { return port_; }
  std::string url() const;
  std::size_t request_count() const { return requests_.load(); }

 private:
  struct Impl;
  MockModelProfile profile_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  std::atomic<std::size_t> requests_{0};
  int port_ = -1;
  std::string host_ = "127.0.0.1";
};

}  // namespace medcot
