#ifndef MSWE_NUMBER_FORMAT_HPP
#define MSWE_NUMBER_FORMAT_HPP

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

// Locale-independent number <-> text conversion used by every file format.

namespace mswe {

/// Shortest representation that parses back to the identical double.
inline void append_exact(std::string& out, double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  out.append(buf, end);
}

/// Nine significant digits; exact round trip for float.
inline void append_sig9(std::string& out, float value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 9);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  out.append(buf, end);
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::runtime_error("malformed " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace mswe

#endif  // MSWE_NUMBER_FORMAT_HPP
