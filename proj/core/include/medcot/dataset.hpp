#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "medcot/types.hpp"

namespace medcot {

enum class DatasetFormat { Csv, Jsonl };

/// Maps CSV column names onto the canonical record fields. The defaults
/// follow the public PMC-VQA release. An empty `id` column means ids are
/// synthesized as "<split>-<row>" with a 0-based data row index.
struct CsvHeaderMap {
  std::string id;
  std::string image_ref = "Figure_path";
  std::string question = "Question";
  std::array<std::string, 4> options = {"Choice A", "Choice B", "Choice C", "Choice D"};
  std::string answer = "Answer_label";
  std::string caption = "Caption";
  std::string split = "split";
  /// PMC-VQA choice cells look like "A:Red"; strip that prefix.
  bool strip_option_prefix = true;
  /// Used when the split column is absent.
  Split default_split = Split::Train;

  static CsvHeaderMap from_json_file(const std::filesystem::path& path);
};

struct LoadOptions {
  DatasetFormat format = DatasetFormat::Jsonl;
  CsvHeaderMap csv;
};

std::vector<VqaRecord> load_dataset(const std::filesystem::path& path,
                                    const LoadOptions& options = {});
std::vector<VqaRecord> parse_jsonl_records(std::string_view text);
std::vector<VqaRecord> parse_csv_records(std::string_view text, const CsvHeaderMap& map);

/// Canonical line-delimited JSON. Keys in fixed order.
std::string to_jsonl_line(const VqaRecord& record);
void save_jsonl(const std::filesystem::path& path, std::span<const VqaRecord> records);

/// Throws DuplicateId if any (split, id) pair repeats.
void check_unique_ids(std::span<const VqaRecord> records);

struct SplitStats {
  std::size_t total = 0;
  std::array<std::size_t, 4> per_label_count{};
  /// count/total*100, rounded half-up to one decimal.
  std::array<double, 4> per_label_pct{};

  std::size_t count(Label l) const { return per_label_count[index_of(l)]; }
  double pct(Label l) const { return per_label_pct[index_of(l)]; }
};

SplitStats compute_split_stats(std::span<const VqaRecord> records);
SplitStats stats_from_counts(const std::array<std::size_t, 4>& counts);

struct ChunkManifest {
  std::size_t chunk_index = 0;
  std::vector<std::string> record_ids;
  std::string file_path;

  friend bool operator==(const ChunkManifest&, const ChunkManifest&) = default;
};

/// Size of each chunk under the balanced contiguous rule: the first N mod k
/// chunks get ceil(N/k) records, the rest floor(N/k).
std::vector<std::size_t> balanced_chunk_sizes(std::size_t n_records, std::size_t n_chunks);

/// file_path of each manifest is `path_prefix + chunk_file_name(i)`.
std::vector<ChunkManifest> chunk_dataset(std::span<const VqaRecord> records, std::size_t n_chunks,
                                         const std::string& path_prefix = "");

/// "chunk_007.jsonl" style name for a chunk index.
std::string chunk_file_name(std::size_t chunk_index);

std::string manifests_to_json(std::span<const ChunkManifest> manifests);
std::vector<ChunkManifest> manifests_from_json(std::string_view text);

}  // namespace medcot
