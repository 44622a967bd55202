#include "fraclab/format.hpp"

#include <charconv>

#include <fmt/format.h>

#include "fraclab/errors.hpp"

namespace fraclab {

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

std::string format_shortest(double value) { return fmt::format("{}", value); }

double parse_real(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DataError(fmt::format("cannot parse {} '{}' as a real", what, text));
  }
  return v;
}

long long parse_integer(std::string_view text, std::string_view what) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DataError(
        fmt::format("cannot parse {} '{}' as an integer", what, text));
  }
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace fraclab
