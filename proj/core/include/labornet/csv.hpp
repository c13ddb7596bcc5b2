#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace labornet::csv {

// Splits one line on commas. Double-quoted fields may contain commas and
// doubled quotes. A trailing carriage return is ignored.
std::vector<std::string> split_line(std::string_view line);

// Line reader that tracks 1-based line numbers and skips blank lines.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::optional<std::vector<std::string>> next();
  std::size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

// Shortest round-trip decimal form.
std::string format_double(double value);
std::string quote_if_needed(std::string_view field);

double parse_double(std::string_view text, std::string_view what, std::size_t line);
long long parse_int(std::string_view text, std::string_view what, std::size_t line);

}  // namespace labornet::csv
