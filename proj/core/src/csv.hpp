#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace medcot::detail {

/// RFC 4180: quoted fields may contain separators, newlines and doubled
/// quotes. Returns rows of fields; blank lines are skipped. Throws
/// ParseError on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, char sep = ',');

std::string csv_escape(std::string_view field);

}  // namespace medcot::detail
