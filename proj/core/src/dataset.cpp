#include "medcot/dataset.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <utility>

#include "csv.hpp"
#include "io_util.hpp"
#include "medcot/error.hpp"
#include "json.hpp"

namespace medcot {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

std::optional<Label> parse_label(std::string_view text) noexcept {
  if (text.size() != 1) return std::nullopt;
  if (text[0] < 'A' || text[0] > 'D') return std::nullopt;
  return static_cast<Label>(text[0] - 'A');
}

std::string_view to_string(Split s) noexcept { return s == Split::Train ? "train" : "test"; }

std::optional<Split> parse_split(std::string_view text) noexcept {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string row_tag(std::size_t row) { return "row " + std::to_string(row); }

[[noreturn]] void missing(std::size_t row, std::string_view field) {
  throw Error(ErrorCode::MissingField, row_tag(row) + ": " + std::string(field));
}

Label require_label(std::size_t row, std::string_view value) {
  auto label = parse_label(value);
  if (!label) {
    throw Error(ErrorCode::InvalidAnswerLabel, row_tag(row) + ": \"" + std::string(value) + "\"");
  }
  return *label;
}

std::string required_string(const json& obj, std::size_t row, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) missing(row, key);
  if (!it->is_string()) {
    throw Error(ErrorCode::ParseError, row_tag(row) + ": field " + key + " is not a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, std::size_t row, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::ParseError, row_tag(row) + ": field " + key + " is not a string");
  }
  return it->get<std::string>();
}

void validate_question(const VqaRecord& r, std::size_t row) {
  if (trim(r.question).empty()) missing(row, "question");
}

VqaRecord record_from_json(const json& obj, std::size_t row) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, row_tag(row) + ": not a JSON object");
  VqaRecord r;
  r.id = required_string(obj, row, "id");
  r.image_ref = optional_string(obj, row, "image_ref");
  r.question = required_string(obj, row, "question");
  validate_question(r, row);

  auto opts = obj.find("options");
  if (opts == obj.end() || opts->is_null()) missing(row, "options");
  if (!opts->is_object()) throw Error(ErrorCode::ParseError, row_tag(row) + ": options is not an object");
  if (opts->size() != 4) {
    throw Error(ErrorCode::ParseError, row_tag(row) + ": expected exactly four options");
  }
  for (Label l : kLabels) {
    const std::string key(1, to_char(l));
    r.options[index_of(l)] = required_string(*opts, row, key.c_str());
  }

  r.answer = require_label(row, required_string(obj, row, "answer"));
  r.caption = optional_string(obj, row, "caption");
  const auto split = required_string(obj, row, "split");
  auto parsed = parse_split(split);
  if (!parsed) throw Error(ErrorCode::ParseError, row_tag(row) + ": unknown split \"" + split + "\"");
  r.split = *parsed;
  return r;
}

std::string strip_option_prefix(std::string_view cell, Label label) {
  auto t = trim(cell);
  if (t.size() >= 2 && t[0] == to_char(label) && t[1] == ':') t = trim(t.substr(2));
  return std::string(t);
}

}  // namespace

CsvHeaderMap CsvHeaderMap::from_json_file(const std::filesystem::path& path) {
  CsvHeaderMap m;
  json j;
  try {
    j = json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  auto get = [&](const char* key, std::string& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
  };
  get("id", m.id);
  get("image_ref", m.image_ref);
  get("question", m.question);
  get("answer", m.answer);
  get("caption", m.caption);
  get("split", m.split);
  if (j.contains("options")) {
    const auto& o = j.at("options");
    for (Label l : kLabels) m.options[index_of(l)] = o.at(std::string(1, to_char(l))).get<std::string>();
  }
  if (j.contains("strip_option_prefix")) m.strip_option_prefix = j.at("strip_option_prefix").get<bool>();
  if (j.contains("default_split")) {
    auto s = parse_split(j.at("default_split").get<std::string>());
    if (!s) throw Error(ErrorCode::ConfigError, "default_split must be train or test");
    m.default_split = *s;
  }
  return m;
}

std::vector<VqaRecord> parse_jsonl_records(std::string_view text) {
  std::vector<VqaRecord> records;
  std::size_t row = 0;
  for (auto line : detail::nonempty_lines(text)) {
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, row_tag(row) + ": " + e.what());
    }
    records.push_back(record_from_json(obj, row));
    ++row;
  }
  check_unique_ids(records);
  return records;
}

std::vector<VqaRecord> parse_csv_records(std::string_view text, const CsvHeaderMap& map) {
  const auto rows = detail::parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::ParseError, "row 0: missing header");

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < rows[0].size(); ++i) column.emplace(std::string(trim(rows[0][i])), i);

  auto locate = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    if (name.empty()) return std::nullopt;
    auto it = column.find(name);
    if (it == column.end()) {
      if (required) missing(0, name);
      return std::nullopt;
    }
    return it->second;
  };

  const auto id_col = locate(map.id, !map.id.empty());
  const auto image_col = locate(map.image_ref, false);
  const auto question_col = *locate(map.question, true);
  std::array<std::size_t, 4> option_cols{};
  for (Label l : kLabels) option_cols[index_of(l)] = *locate(map.options[index_of(l)], true);
  const auto answer_col = *locate(map.answer, true);
  const auto caption_col = locate(map.caption, false);
  const auto split_col = locate(map.split, false);

  std::vector<VqaRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t row = r - 1;
    const auto& cells = rows[r];
    auto cell = [&](std::size_t col, std::string_view name) -> const std::string& {
      if (col >= cells.size()) {
        throw Error(ErrorCode::ParseError, row_tag(row) + ": short row, no column " + std::string(name));
      }
      return cells[col];
    };

    VqaRecord rec;
    rec.split = map.default_split;
    if (split_col) {
      const auto s = trim(cell(*split_col, map.split));
      if (!s.empty()) {
        auto parsed = parse_split(s);
        if (!parsed) throw Error(ErrorCode::ParseError, row_tag(row) + ": unknown split \"" + std::string(s) + "\"");
        rec.split = *parsed;
      }
    }
    if (id_col) {
      rec.id = std::string(trim(cell(*id_col, map.id)));
      if (rec.id.empty()) missing(row, map.id);
    } else {
      rec.id = std::string(to_string(rec.split)) + "-" + std::to_string(row);
    }
    if (image_col) {
      auto v = trim(cell(*image_col, map.image_ref));
      if (!v.empty()) rec.image_ref = std::string(v);
    }
    rec.question = std::string(trim(cell(question_col, map.question)));
    validate_question(rec, row);
    for (Label l : kLabels) {
      const auto& raw = cell(option_cols[index_of(l)], map.options[index_of(l)]);
      rec.options[index_of(l)] =
          map.strip_option_prefix ? strip_option_prefix(raw, l) : std::string(trim(raw));
    }
    rec.answer = require_label(row, trim(cell(answer_col, map.answer)));
    if (caption_col) {
      auto v = trim(cell(*caption_col, map.caption));
      if (!v.empty()) rec.caption = std::string(v);
    }
    records.push_back(std::move(rec));
  }
  check_unique_ids(records);
  return records;
}

std::vector<VqaRecord> load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  const auto text = detail::read_file(path);
  return options.format == DatasetFormat::Csv ? parse_csv_records(text, options.csv)
                                              : parse_jsonl_records(text);
}

void check_unique_ids(std::span<const VqaRecord> records) {
  std::set<std::pair<Split, std::string_view>> seen;
  for (const auto& r : records) {
    if (!seen.emplace(r.split, r.id).second) throw Error(ErrorCode::DuplicateId, r.id);
  }
}

std::string to_jsonl_line(const VqaRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["image_ref"] = r.image_ref ? ordered_json(*r.image_ref) : ordered_json(nullptr);
  j["question"] = r.question;
  ordered_json opts;
  for (Label l : kLabels) opts[std::string(1, to_char(l))] = r.option(l);
  j["options"] = std::move(opts);
  j["answer"] = std::string(1, to_char(r.answer));
  j["caption"] = r.caption ? ordered_json(*r.caption) : ordered_json(nullptr);
  j["split"] = std::string(to_string(r.split));
  return j.dump();
}

void save_jsonl(const std::filesystem::path& path, std::span<const VqaRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += to_jsonl_line(r);
    out += '\n';
  }
  detail::write_file(path, out);
}

SplitStats stats_from_counts(const std::array<std::size_t, 4>& counts) {
  SplitStats s;
  s.per_label_count = counts;
  for (auto c : counts) s.total += c;
  if (s.total == 0) throw Error(ErrorCode::EmptySplit, "no records");
  for (std::size_t i = 0; i < 4; ++i) {
    // tenths of a percent, half-up: floor((2000c + total) / (2 total))
    const auto tenths = (2000 * counts[i] + s.total) / (2 * s.total);
    s.per_label_pct[i] = static_cast<double>(tenths) / 10.0;
  }
  return s;
}

SplitStats compute_split_stats(std::span<const VqaRecord> records) {
  std::array<std::size_t, 4> counts{};
  for (const auto& r : records) ++counts[index_of(r.answer)];
  return stats_from_counts(counts);
}

std::vector<std::size_t> balanced_chunk_sizes(std::size_t n_records, std::size_t n_chunks) {
  if (n_chunks == 0) throw Error(ErrorCode::ConfigError, "chunk count must be positive");
  if (n_chunks > n_records) {
    throw Error(ErrorCode::ChunkCountExceedsRecords,
                std::to_string(n_chunks) + " chunks for " + std::to_string(n_records) + " records");
  }
  const auto base = n_records / n_chunks;
  const auto extra = n_records % n_chunks;
  std::vector<std::size_t> sizes(n_chunks, base);
  for (std::size_t i = 0; i < extra; ++i) ++sizes[i];
  return sizes;
}

std::string chunk_file_name(std::size_t chunk_index) {
  auto digits = std::to_string(chunk_index);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "chunk_" + digits + ".jsonl";
}

std::vector<ChunkManifest> chunk_dataset(std::span<const VqaRecord> records, std::size_t n_chunks,
                                         const std::string& path_prefix) {
  const auto sizes = balanced_chunk_sizes(records.size(), n_chunks);
  std::vector<ChunkManifest> out;
  out.reserve(n_chunks);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < n_chunks; ++k) {
    ChunkManifest m;
    m.chunk_index = k;
    m.file_path = path_prefix + chunk_file_name(k);
    m.record_ids.reserve(sizes[k]);
    for (std::size_t i = 0; i < sizes[k]; ++i) m.record_ids.push_back(records[pos + i].id);
    pos += sizes[k];
    out.push_back(std::move(m));
  }
  return out;
}

std::string manifests_to_json(std::span<const ChunkManifest> manifests) {
  ordered_json arr = ordered_json::array();
  for (const auto& m : manifests) {
    ordered_json j;
    j["chunk_index"] = m.chunk_index;
    j["file_path"] = m.file_path;
    j["record_ids"] = m.record_ids;
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::vector<ChunkManifest> manifests_from_json(std::string_view text) {
  std::vector<ChunkManifest> out;
  try {
    const auto arr = json::parse(text);
    if (!arr.is_array()) throw Error(ErrorCode::ParseError, "manifest is not a JSON array");
    for (const auto& j : arr) {
      ChunkManifest m;
      m.chunk_index = j.at("chunk_index").get<std::size_t>();
      m.file_path = j.at("file_path").get<std::string>();
      m.record_ids = j.at("record_ids").get<std::vector<std::string>>();
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  return out;
}

}  // namespace medcot
