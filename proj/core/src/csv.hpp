#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace semgeo::detail {

// Minimal RFC 4180 reader/writer. Records never span lines in our formats,
// so a quoted field containing a newline is rejected.
std::vector<std::string> split_csv_record(std::string_view line, std::size_t line_no);

// True when `text` ends inside a quoted field, i.e. the record continues on
// the next physical line.
bool has_open_quote(std::string_view text);
std::string quote_csv_field(std::string_view field);
std::string join_csv_record(const std::vector<std::string>& fields);

}  // namespace semgeo::detail
