#include "tlsgate/policy.hpp"

#include <algorithm>

#include "tlsgate/error.hpp"

namespace tlsgate {

std::string_view to_string(PolicyLevel level) {
  return level == PolicyLevel::kStrict ? "strict" : "default";
}

std::optional<PolicyLevel> parse_policy_level(std::string_view text) {
  if (text == "strict") return PolicyLevel::kStrict;
  if (text == "default") return PolicyLevel::kDefault;
  return std::nullopt;
}

VersionSet PolicySpec::version_set() const {
  VersionSet s;
  for (TlsVersion v : allowed_versions) s.insert(v);
  return s;
}

bool PolicySpec::allows_version(TlsVersion v) const {
  return std::find(allowed_versions.begin(), allowed_versions.end(), v) != allowed_versions.end();
}

const CipherSuite* PolicySpec::find_suite(SuiteId id) const {
  auto it = std::find_if(allowed_suites.begin(), allowed_suites.end(),
                         [id](const CipherSuite& s) { return s.id == id; });
  return it == allowed_suites.end() ? nullptr : &*it;
}

PolicySpec spec_of(PolicyLevel level, const SuiteCatalog& catalog) {
  PolicySpec spec;
  spec.level = level;
  if (level == PolicyLevel::kStrict) {
    spec.allowed_versions = {TlsVersion::kTls1_3};
    for (const CipherSuite& s : catalog.suites()) {
      if (classify_suite(s) == SecurityClass::kStrong && s.min_version == TlsVersion::kTls1_3) {
        spec.allowed_suites.push_back(s);
      }
    }
    if (spec.allowed_suites.empty()) {
      throw Error(ErrorCode::kConfiguration,
                  "catalog has no strong TLS1.3 suite; strict policy would be empty");
    }
  } else {
    spec.allowed_versions = VersionSet::all().descending();
    spec.allowed_suites.assign(catalog.suites().begin(), catalog.suites().end());
  }
  return spec;
}

bool is_compliant(const PolicySpec& spec, TlsVersion version, const CipherSuite& suite) {
  return spec.allows_version(version) && spec.find_suite(suite.id) != nullptr &&
         suite.usable_at(version);
}

OfferedParams offer_of(const PolicySpec& spec) {
  OfferedParams offer;
  offer.versions = spec.version_set().descending();
  for (const CipherSuite& s : spec.allowed_suites) {
    bool usable = std::any_of(offer.versions.begin(), offer.versions.end(),
                              [&s](TlsVersion v) { return s.usable_at(v); });
    if (usable) offer.suites.push_back(s);
  }
  return offer;
}

OfferedParams cap_offer(const OfferedParams& offer, TlsVersion cap) {
  OfferedParams out;
  for (TlsVersion v : offer.versions) {
    if (v <= cap) out.versions.push_back(v);
  }
  for (const CipherSuite& s : offer.suites) {
    bool usable = std::any_of(out.versions.begin(), out.versions.end(),
                              [&s](TlsVersion v) { return s.usable_at(v); });
    if (usable) out.suites.push_back(s);
  }
  return out;
}

}  // namespace tlsgate
