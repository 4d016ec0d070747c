#pragma once

// Canonical text encoding used for memos and reports: sorted keys, no
// insignificant whitespace, UTF-8, reals with at most six fractional digits
// and no trailing zeros. Hashes are defined over exactly these bytes.

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "roma/error.hpp"

namespace roma {

using Json = nlohmann::json;

/// Nearest double to round(x * 1e6) / 1e6. Values stored in memos are
/// quantized so they survive a text round trip unchanged.
inline double quantize6(double x) {
  const double q = std::round(x * 1e6) / 1e6;
  return q == 0.0 ? 0.0 : q;
}

inline std::string format_canonical_number(double x) {
  if (!std::isfinite(x)) fail(ErrorKind::kValidation, "non-finite number in canonical encoding");
  if (std::abs(x) >= 1e15) fail(ErrorKind::kValidation, "number too large to encode");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, quantize6(x), std::chars_format::fixed, 6);
  if (res.ec != std::errc{}) fail(ErrorKind::kValidation, "number too large to encode");
  std::string s(buf, res.ptr);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

namespace detail {

inline void canonical_dump_into(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out.push_back('{');
      bool first = true;
      // nlohmann's default object type is std::map, so iteration is key-sorted.
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        out += Json(it.key()).dump();
        out.push_back(':');
        canonical_dump_into(it.value(), out);
      }
      out.push_back('}');
      return;
    }
    case Json::value_t::array: {
      out.push_back('[');
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out.push_back(',');
        canonical_dump_into(j[i], out);
      }
      out.push_back(']');
      return;
    }
    case Json::value_t::number_float:
      out += format_canonical_number(j.get<double>());
      return;
    case Json::value_t::string:
      try {
        out += j.dump();
      } catch (const Json::type_error&) {
        fail(ErrorKind::kValidation, "string is not valid UTF-8");
      }
      return;
    case Json::value_t::discarded:
      fail(ErrorKind::kValidation, "cannot encode a discarded value");
    default:
      out += j.dump();
      return;
  }
}

}  // namespace detail

inline std::string canonical_dump(const Json& j) {
  std::string out;
  detail::canonical_dump_into(j, out);
  return out;
}

/// Parses bytes as JSON, raising ParseError with the failing byte offset.
inline Json parse_json_bytes(std::string_view bytes) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON", e.byte);
  }
}

inline bool is_valid_utf8(std::string_view s) {
  try {
    (void)Json(std::string(s)).dump();
    return true;
  } catch (const Json::type_error&) {
    return false;
  }
}

}  // namespace roma
