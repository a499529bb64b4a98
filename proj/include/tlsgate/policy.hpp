#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "tlsgate/tls_model.hpp"

namespace tlsgate {

enum class PolicyLevel { kStrict, kDefault };

std::string_view to_string(PolicyLevel level);  // "strict" / "default"
std::optional<PolicyLevel> parse_policy_level(std::string_view text);

// Concrete versions and suites a level permits. Both lists are in
// descending preference order.
struct PolicySpec {
  PolicyLevel level = PolicyLevel::kDefault;
  std::vector<TlsVersion> allowed_versions;
  std::vector<CipherSuite> allowed_suites;

  VersionSet version_set() const;
  bool allows_version(TlsVersion v) const;
  const CipherSuite* find_suite(SuiteId id) const;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

// What a client puts on the wire: versions highest first, suites in
// preference order, each suite usable at one of the versions at least.
struct OfferedParams {
  std::vector<TlsVersion> versions;
  std::vector<CipherSuite> suites;

  bool empty() const { return versions.empty() || suites.empty(); }
  friend bool operator==(const OfferedParams&, const OfferedParams&) = default;
};

/// Strict: TLS1.3 only, Strong suites whose min_version is TLS1.3.
/// Default: every version and the whole catalog, in catalog order.
/// Throws Error(kConfiguration) when Strict would be empty.
PolicySpec spec_of(PolicyLevel level, const SuiteCatalog& catalog);

bool is_compliant(const PolicySpec& spec, TlsVersion version, const CipherSuite& suite);

OfferedParams offer_of(const PolicySpec& spec);

/// Offer restricted to versions <= cap; suites no longer usable are pruned.
OfferedParams cap_offer(const OfferedParams& offer, TlsVersion cap);

// Both built-in levels, resolved once against a catalog.
class PolicySet {
 public:
  explicit PolicySet(const SuiteCatalog& catalog)
      : strict_(spec_of(PolicyLevel::kStrict, catalog)),
        default_(spec_of(PolicyLevel::kDefault, catalog)) {}

  const PolicySpec& operator[](PolicyLevel level) const {
    return level == PolicyLevel::kStrict ? strict_ : default_;
  }
  const PolicySpec& strict() const { return strict_; }
  const PolicySpec& fallback() const { return default_; }

 private:
  PolicySpec strict_;
  PolicySpec default_;
};

}  // namespace tlsgate
