#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "ltlac/model.hpp"

namespace ltlac::detail {

/// Splits text into lines with '#' comments stripped; keeps 1-based numbers.
struct Line {
  int number;
  std::string_view text;
};

std::vector<Line> logical_lines(std::string_view text);
std::vector<std::string_view> split_ws(std::string_view s);
std::string_view trim(std::string_view s);

template <typename T>
T parse_number(std::string_view tok, int line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(line, std::string("expected ") + what + ", got '" + std::string(tok) + "'");
  }
  return value;
}

/// Parses "{a,b,c}" into its comma-separated, trimmed members.
std::vector<std::string> parse_brace_set(std::string_view tok, int line);

}  // namespace ltlac::detail
