#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pros::csv {

//! Shortest decimal form that round-trips to the same double.
std::string format(double value);

//! Split one line on commas, honoring double-quoted fields; trims surrounding
//! whitespace and a trailing '\r'.
std::vector<std::string> split_line(std::string_view line);

//! Strict full-string parse; false on trailing garbage or non-finite values.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, int& out);

} // namespace pros::csv
