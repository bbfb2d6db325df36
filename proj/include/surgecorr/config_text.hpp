#pragma once

// Line-oriented "key = value" text with '#' comments and optional
// "[section]" headers. Used for scenario configs and synthetic storm specs.

#include "surgecorr/core.hpp"

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace surgecorr {

struct KeyValueSection {
  std::string name;  // empty for keys before the first header
  std::map<std::string, std::string> values;
  std::map<std::string, std::size_t> lines;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<KeyValueSection> parse_key_values(std::istream& in, const std::string& context) {
  std::vector<KeyValueSection> sections(1);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(context + ":" + std::to_string(line_no) + ": malformed section header");
      sections.push_back({trim(std::string_view(line).substr(1, line.size() - 2)), {}, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(context + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw Error(context + ":" + std::to_string(line_no) + ": empty key");
    auto& sec = sections.back();
    if (sec.values.count(key)) throw Error(context + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    sec.values[key] = trim(std::string_view(line).substr(eq + 1));
    sec.lines[key] = line_no;
  }
  return sections;
}

inline double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw Error(what + ": '" + s + "' is not a number");
  return v;
}

inline std::uint64_t parse_unsigned(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw Error(what + ": '" + s + "' is not a non-negative integer");
  return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// 64-bit FNV-1a, used for config hashes.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  static constexpr char digits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xf];
    v >>= 4;
  }
  buf[16] = 0;
  return buf;
}

}  // namespace surgecorr
