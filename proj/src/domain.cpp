#include "tlsgate/domain.hpp"

#include <algorithm>
#include <cctype>

#include "tlsgate/error.hpp"

namespace tlsgate {

namespace {

constexpr std::size_t kMaxLabel = 63;
constexpr std::size_t kMaxName = 253;

[[noreturn]] void reject(std::string_view input, const std::string& why) {
  throw Error(ErrorCode::kNormalization,
              "invalid domain '" + std::string(input) + "': " + why);
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string normalize_domain(std::string_view input) {
  std::string_view view = trim(input);
  std::string s;
  s.reserve(view.size());
  for (char c : view) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  if (auto scheme = s.find("://"); scheme != std::string::npos) {
    bool scheme_ok = scheme > 0 && std::all_of(s.begin(), s.begin() + static_cast<long>(scheme), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
    });
    if (!scheme_ok) reject(input, "malformed scheme");
    s.erase(0, scheme + 3);
  }
  if (auto cut = s.find_first_of("/?#"); cut != std::string::npos) s.erase(cut);
  if (auto at = s.rfind('@'); at != std::string::npos) s.erase(0, at + 1);
  if (auto colon = s.find(':'); colon != std::string::npos) {
    std::string_view port = std::string_view(s).substr(colon + 1);
    if (port.empty() || port.size() > 5 ||
        !std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      reject(input, "bad port");
    }
    s.erase(colon);
  }
  if (!s.empty() && s.back() == '.') s.pop_back();

  if (s.empty()) reject(input, "empty host");
  if (s.size() > kMaxName) reject(input, "name too long");
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
    if (!ok) reject(input, std::string("character '") + c + "' not allowed");
  }

  std::size_t labels = 0;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find('.', start);
    if (end == std::string::npos) end = s.size();
    std::string_view label = std::string_view(s).substr(start, end - start);
    if (label.empty()) reject(input, "empty label");
    if (label.size() > kMaxLabel) reject(input, "label too long");
    if (label.front() == '-' || label.back() == '-') reject(input, "label starts or ends with '-'");
    ++labels;
    start = end + 1;
  }
  if (labels < 2) reject(input, "needs at least two labels");
  return s;
}

bool is_dot_suffix(std::string_view host, std::string_view domain) {
  if (host.size() == domain.size()) return host == domain;
  return host.size() > domain.size() && host.ends_with(domain) &&
         host[host.size() - domain.size() - 1] == '.';
}

}  // namespace tlsgate
