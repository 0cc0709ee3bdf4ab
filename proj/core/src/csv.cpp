#include "csv.hpp"

#include "medcot/error.hpp"

namespace medcot::detail {

std::vector<std::vector<std::string>> parse_csv(std::string_view text, char sep) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t quote_row = 0;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
      quote_row = rows.size();
    } else if (c == sep) {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // swallowed; "\r\n" ends the row on '\n'
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::ParseError, "row " + std::to_string(quote_row) + ": unterminated quote");
  }
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace medcot::detail
