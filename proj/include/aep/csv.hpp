#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aep::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

// Quotes the field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

// Strips a trailing '\r' left over from CRLF input.
std::string_view chomp(std::string_view line);

}  // namespace aep::csv
