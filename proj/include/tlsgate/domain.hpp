#pragma once

#include <string>
#include <string_view>

namespace tlsgate {

/// Reduces a host, URL or domain to "label.label" form: trims whitespace,
/// lowercases, drops scheme, userinfo, port, path/query/fragment and one
/// trailing dot. Throws Error(kNormalization) with the reason if the result
/// has fewer than two labels or characters outside [a-z0-9.-].
std::string normalize_domain(std::string_view input);

/// True when host equals domain or ends with "." + domain.
bool is_dot_suffix(std::string_view host, std::string_view domain);

}  // namespace tlsgate
