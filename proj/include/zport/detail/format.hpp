#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace zport::detail {

/// Shortest decimal-notation string that parses back to exactly `v`.
/// Used everywhere golden-file stability matters.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";  // normalizes -0
  char buf[768];             // fixed notation of subnormals needs room
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

/// 17 significant digits, general notation. Round-trips any double.
inline std::string format_sig17(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);  // from_chars rejects '+'
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

}  // namespace zport::detail
