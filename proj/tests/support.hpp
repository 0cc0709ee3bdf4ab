#pragma once

#include <array>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "medcot/types.hpp"

namespace medcot::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("medcot-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

inline VqaRecord make_record(std::string id, Label answer, Split split = Split::Test,
                             std::string question = "") {
  VqaRecord r;
  r.question = question.empty() ? "Which finding is shown in case " + id + "?" : std::move(question);
  r.id = std::move(id);
  r.image_ref = "images/" + r.id + ".jpg";
  r.options = {"first " + r.id, "second " + r.id, "third " + r.id, "fourth " + r.id};
  r.answer = answer;
  r.split = split;
  return r;
}

/// counts[L] records with gold L, interleaved so labels are not contiguous.
inline std::vector<VqaRecord> records_with_counts(const std::array<std::size_t, 4>& counts,
                                                  Split split = Split::Test) {
  std::vector<VqaRecord> out;
  std::array<std::size_t, 4> left = counts;
  std::size_t i = 0;
  for (bool any = true; any;) {
    any = false;
    for (Label l : kLabels) {
      if (left[index_of(l)] == 0) continue;
      --left[index_of(l)];
      any = true;
      char id[16];
      std::snprintf(id, sizeof id, "r%05zu", i++);
      out.push_back(make_record(id, l, split));
    }
  }
  return out;
}

}  // namespace medcot::testing
