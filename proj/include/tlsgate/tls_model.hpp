#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tlsgate {

// Chronological order; comparison operators give the protocol order.
enum class TlsVersion : std::uint8_t { kTls1_0 = 0, kTls1_1 = 1, kTls1_2 = 2, kTls1_3 = 3 };

inline constexpr TlsVersion kAllVersions[] = {TlsVersion::kTls1_0, TlsVersion::kTls1_1,
                                              TlsVersion::kTls1_2, TlsVersion::kTls1_3};

/// Canonical display form: "TLS1.0" .. "TLS1.3".
std::string_view to_string(TlsVersion v);

/// Accepts "TLS1.2", "tls1.2", "TLS1_2" and bare "1.2".
std::optional<TlsVersion> parse_version(std::string_view text);

/// Next lower version, or nullopt at TLS1.0.
std::optional<TlsVersion> step_down(TlsVersion v);

// Set of versions as a 4-bit mask. Iteration is ascending.
class VersionSet {
 public:
  constexpr VersionSet() = default;
  constexpr VersionSet(std::initializer_list<TlsVersion> versions) {
    for (TlsVersion v : versions) insert(v);
  }

  static constexpr VersionSet from_mask(std::uint8_t mask) {
    VersionSet s;
    s.bits_ = mask & 0x0F;
    return s;
  }
  static constexpr VersionSet all() { return from_mask(0x0F); }
  /// Every version <= max.
  static constexpr VersionSet up_to(TlsVersion max) {
    return from_mask(static_cast<std::uint8_t>((1u << (static_cast<unsigned>(max) + 1)) - 1));
  }

  constexpr void insert(TlsVersion v) { bits_ |= bit(v); }
  constexpr void erase(TlsVersion v) { bits_ &= static_cast<std::uint8_t>(~bit(v)); }
  constexpr bool contains(TlsVersion v) const { return (bits_ & bit(v)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t mask() const { return bits_; }
  int size() const;

  std::optional<TlsVersion> max() const;
  std::optional<TlsVersion> min() const;
  /// Members, highest first.
  std::vector<TlsVersion> descending() const;

  friend constexpr VersionSet operator&(VersionSet a, VersionSet b) {
    return from_mask(a.bits_ & b.bits_);
  }
  friend constexpr VersionSet operator|(VersionSet a, VersionSet b) {
    return from_mask(a.bits_ | b.bits_);
  }
  friend constexpr bool operator==(VersionSet, VersionSet) = default;

 private:
  static constexpr std::uint8_t bit(TlsVersion v) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v));
  }
  std::uint8_t bits_ = 0;
};

using SuiteId = std::uint16_t;

std::string format_suite_id(SuiteId id);          // "0x1301"
std::optional<SuiteId> parse_suite_id(std::string_view text);

struct CipherSuite {
  SuiteId id = 0;
  std::string name;
  TlsVersion min_version = TlsVersion::kTls1_0;
  TlsVersion max_version = TlsVersion::kTls1_3;
  bool forward_secret = false;
  bool authenticated_encryption = false;

  bool usable_at(TlsVersion v) const { return min_version <= v && v <= max_version; }

  friend bool operator==(const CipherSuite&, const CipherSuite&) = default;
};

enum class SecurityClass { kStrong, kWeak };

std::string_view to_string(SecurityClass c);

/// Strong iff the suite offers both forward secrecy and authenticated encryption.
constexpr SecurityClass classify_suite(const CipherSuite& suite) {
  return suite.forward_secret && suite.authenticated_encryption ? SecurityClass::kStrong
                                                                : SecurityClass::kWeak;
}

/// Highest version present in both sets.
std::optional<TlsVersion> max_common_version(VersionSet client, VersionSet server);

// Ordered, validated list of suites with lookup by id and by name.
// Immutable once built.
class SuiteCatalog {
 public:
  /// Validates: non-empty, unique ids and names, min <= max, and TLS1.3-only
  /// suites classified Strong. Throws Error(kValidation).
  explicit SuiteCatalog(std::vector<CipherSuite> suites);

  std::span<const CipherSuite> suites() const { return suites_; }
  std::size_t size() const { return suites_.size(); }

  const CipherSuite* find(SuiteId id) const;
  const CipherSuite* find(std::string_view name) const;
  /// Resolves either "0x1301" or a registry name. Throws Error(kNotFound).
  const CipherSuite& resolve(std::string_view id_or_name) const;

  friend bool operator==(const SuiteCatalog& a, const SuiteCatalog& b) {
    return a.suites_ == b.suites_;
  }

 private:
  std::vector<CipherSuite> suites_;
  std::unordered_map<SuiteId, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

/// Parses a catalog document (JSON). Throws Error(kParse) naming the
/// offending entry, or Error(kValidation) for invariant violations.
SuiteCatalog load_catalog(std::string_view document);
SuiteCatalog load_catalog_file(const std::string& path);

/// The catalog compiled into the library from data/catalog.json.
const SuiteCatalog& default_catalog();
std::string_view default_catalog_document();

}  // namespace tlsgate
