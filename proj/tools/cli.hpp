#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace medcot::cli {

/// Everything a pipeline stage needs. Loaded from a JSON config file, then
/// overridden per key by command-line flags.
struct RunConfig {
  std::filesystem::path dataset;
  std::string format = "jsonl";
  std::filesystem::path header_map;
  std::filesystem::path manifest;
  std::filesystem::path annotations;
  std::filesystem::path predictions;
  std::filesystem::path image_root;
  std::filesystem::path profile;
  std::filesystem::path keyword_table;
  std::string score_endpoint;
  std::string generate_endpoint;
  std::string api_key_env = "MEDCOT_API_KEY";
  std::size_t concurrency = 4;
  int max_attempts = 3;
  int base_delay_ms = 100;
  int max_delay_ms = 5000;
  int timeout_ms = 30000;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  std::string family = "nocaption";
  bool include_image = true;
  std::string config_kind = "cot_nocaption";
  std::size_t chunks = 51;
  std::size_t resamples = 10000;
  std::string model_id = "model";
  std::string teacher_id = "teacher";
  int teacher_max_tokens = 512;
  double teacher_temperature = 0.7;
  double max_skip_fraction = 0.001;
  double failure_threshold = 0.001;
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// Reads a config file. Relative paths resolve against the file's directory.
/// A run metadata file (with "stage" and "config" keys) is accepted too.
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

enum ExitCode : int { kOk = 0, kRecordFailures = 1, kUsage = 2 };

/// Runs one subcommand. args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace medcot::cli
