#include "tlsgate/subscription_header.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>

#include "tlsgate/error.hpp"

namespace tlsgate {

namespace {

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::uint64_t parse_max_age(std::string_view raw) {
  std::string_view v = trim(raw);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::kParse, "max-age must be a non-negative integer, got '" +
                                       std::string(raw) + "'");
  }
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::kParse, "max-age out of range");
  }
  return out;
}

}  // namespace

HeaderDirective parse_subscription_header(std::string_view value) {
  HeaderDirective out;
  out.present = true;
  bool seen_max_age = false;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t end = value.find(';', pos);
    if (end == std::string_view::npos) end = value.size();
    std::string_view directive = trim(value.substr(pos, end - pos));
    pos = end + 1;
    if (directive.empty()) continue;

    std::string_view name = directive;
    std::string_view arg;
    bool has_arg = false;
    if (auto eq = directive.find('='); eq != std::string_view::npos) {
      name = trim(directive.substr(0, eq));
      arg = directive.substr(eq + 1);
      has_arg = true;
    }
    if (!iequals(name, "max-age")) continue;
    if (seen_max_age) throw Error(ErrorCode::kParse, "max-age given more than once");
    if (!has_arg) throw Error(ErrorCode::kParse, "max-age without a value");
    seen_max_age = true;
    out.max_age_seconds = parse_max_age(arg);
  }
  return out;
}

}  // namespace tlsgate
