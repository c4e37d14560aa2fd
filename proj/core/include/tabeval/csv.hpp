#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabeval::csv {

using Record = std::vector<std::string>;

/// Parses RFC-4180 text: comma separated, optional double-quoted fields with
/// "" escapes, LF or CRLF line endings. A leading UTF-8 BOM is skipped and
/// blank lines are ignored. Throws Error(ParseFailure) on an unterminated quote.
std::vector<Record> parse(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape_field(std::string_view field);

std::string format_record(const Record& record);

}  // namespace tabeval::csv
