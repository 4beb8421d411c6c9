#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "n2s3/errors.hpp"

namespace n2s3 {

/// Shortest decimal form that parses back to the exact same double
/// (up to 17 significant digits). Locale independent.
inline std::string to_text(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Strict double parse of the whole token. Locale independent.
inline double parse_double(std::string_view token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ParseError("not a number: '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace n2s3
