#pragma once

// Unit-bearing scalar inputs of scenario files. Frequencies are given either
// as a bare number (rad/s) or as "<value> <unit>" with unit one of Hz, kHz,
// MHz, GHz, THz (cyclic, multiplied by 2 pi) or rad/s; durations as a bare
// number (s) or "<value> <unit>" with s, ms, us, ns, ps.

#include "steerkit/errors.hpp"
#include "steerkit/quadrature.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>
#include <utility>

namespace steerkit::cli {

namespace units_detail {

inline std::pair<double, std::string> split_quantity(const std::string& text, const std::string& where) {
  std::size_t pos = 0;
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  const char* begin = text.data() + pos;
  const char* end = text.data() + text.size();
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc()) fail(ErrorKind::ConfigError, where + ": cannot parse a number from '" + text + "'");
  std::string unit(res.ptr, end);
  const auto first = unit.find_first_not_of(' ');
  const auto last = unit.find_last_not_of(' ');
  unit = first == std::string::npos ? std::string() : unit.substr(first, last - first + 1);
  return {value, unit};
}

}  // namespace units_detail

inline double parse_frequency(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) fail(ErrorKind::ConfigError, where + ": expected a number (rad/s) or a string with a unit");
  const auto [value, unit] = units_detail::split_quantity(j.get<std::string>(), where);
  if (unit == "rad/s" || unit.empty()) return value;
  if (unit == "Hz") return two_pi * value;
  if (unit == "kHz") return two_pi * value * 1e3;
  if (unit == "MHz") return two_pi * value * 1e6;
  if (unit == "GHz") return two_pi * value * 1e9;
  if (unit == "THz") return two_pi * value * 1e12;
  fail(ErrorKind::ConfigError, where + ": unknown frequency unit '" + unit + "'");
}

inline double parse_duration(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) fail(ErrorKind::ConfigError, where + ": expected a number (s) or a string with a unit");
  const auto [value, unit] = units_detail::split_quantity(j.get<std::string>(), where);
  if (unit == "s" || unit.empty()) return value;
  if (unit == "ms") return value * 1e-3;
  if (unit == "us") return value * 1e-6;
  if (unit == "ns") return value * 1e-9;
  if (unit == "ps") return value * 1e-12;
  fail(ErrorKind::ConfigError, where + ": unknown time unit '" + unit + "'");
}

}  // namespace steerkit::cli
