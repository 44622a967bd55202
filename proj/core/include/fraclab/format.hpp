#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fraclab {

/// Decimal text with 17 significant digits (round-trips every double).
std::string format_real(double value);

/// Shortest decimal text that parses back to the same double.
std::string format_shortest(double value);

/// Whole-string parse; throws DataError naming `what` on failure.
double parse_real(std::string_view text, std::string_view what = "value");
long long parse_integer(std::string_view text, std::string_view what = "value");

/// Splits on commas; no quoting (none of our formats need it).
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace fraclab
