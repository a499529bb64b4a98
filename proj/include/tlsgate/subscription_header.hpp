#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace tlsgate {

inline constexpr std::string_view kSubscriptionHeader = "strict-transport-security-config";

struct HeaderDirective {
  bool present = false;
  std::optional<std::uint64_t> max_age_seconds;  // set only when present

  friend bool operator==(const HeaderDirective&, const HeaderDirective&) = default;
};

// Grammar (case-insensitive, HSTS-like):
//   value     = [ directive *( ";" [ directive ] ) ]
//   directive = token [ "=" ( token | quoted-string ) ]
// An empty value is the name-only form. Unknown directives are ignored.
// Throws Error(kParse) for a malformed or repeated max-age.
HeaderDirective parse_subscription_header(std::string_view value);

}  // namespace tlsgate
