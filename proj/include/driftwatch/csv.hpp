#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace driftwatch::csv {

// Minimal RFC 4180 reader: comma separated, double-quoted fields with ""
// escapes. Records must fit on one line.
std::vector<std::string> parse_record(std::string_view line);

// Reads every non-empty record (header included) from the stream.
std::vector<std::vector<std::string>> read_all(std::istream& in);

std::string escape(std::string_view field);

// Shortest round-trip decimal for a double.
std::string format_double(double value);

double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

}  // namespace driftwatch::csv
