#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace medcot::detail {

std::string read_file(const std::filesystem::path& path);
/// Writes via a sibling temp file and rename, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);
/// Splits on '\n', dropping a trailing '\r' and skipping blank lines.
std::vector<std::string_view> nonempty_lines(std::string_view text);

}  // namespace medcot::detail
