#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "tlsgate/policy.hpp"
#include "tlsgate/subscription_header.hpp"

namespace tlsgate {

using UnixSeconds = std::int64_t;

enum class ErrorHandling { kBlocking, kActiveWarning };
enum class SubscriptionSource { kClientSide, kServerHeader };

std::string_view to_string(ErrorHandling h);       // "blocking" / "active_warning"
std::string_view to_string(SubscriptionSource s);  // "client" / "header"
std::optional<ErrorHandling> parse_error_handling(std::string_view text);
std::optional<SubscriptionSource> parse_subscription_source(std::string_view text);

struct DomainEntry {
  std::string domain;
  PolicyLevel level = PolicyLevel::kStrict;
  ErrorHandling handling = ErrorHandling::kActiveWarning;
  SubscriptionSource source = SubscriptionSource::kClientSide;
  UnixSeconds added_at = 0;
  std::optional<UnixSeconds> expires_at;

  friend bool operator==(const DomainEntry&, const DomainEntry&) = default;
};

/// Throws Error(kValidation) unless the entry is normalized, header entries
/// are Blocking, and expires_at > added_at.
void validate_entry(const DomainEntry& entry);

struct StoreSnapshot {
  std::uint64_t revision = 0;
  std::map<std::string, DomainEntry> entries;  // keyed by domain

  friend bool operator==(const StoreSnapshot&, const StoreSnapshot&) = default;
};

// The domain list. Readers share a lock; every mutation is exclusive and
// bumps the revision by exactly one.
class WhitelistStore {
 public:
  WhitelistStore() = default;
  explicit WhitelistStore(StoreSnapshot snapshot);

  WhitelistStore(const WhitelistStore&) = delete;
  WhitelistStore& operator=(const WhitelistStore&) = delete;

  /// Inserts {Strict, handling, ClientSide}. Throws kNormalization or
  /// kDuplicate; an existing record is never overwritten.
  DomainEntry add_client_side(std::string_view domain, UnixSeconds now,
                              ErrorHandling handling = ErrorHandling::kActiveWarning);

  /// Inserts {Strict, Blocking, ServerHeader} with optional expiry. Returns
  /// nullopt and leaves the store untouched when the domain is already
  /// listed, or when max-age is zero.
  std::optional<DomainEntry> subscribe_from_header(std::string_view host,
                                                   const HeaderDirective& directive,
                                                   UnixSeconds now);

  /// Longest entry whose domain equals host or is a dot-boundary suffix.
  std::optional<DomainEntry> lookup(std::string_view host) const;
  std::optional<DomainEntry> get(std::string_view domain) const;

  /// Sets level to Default. Throws kNotFound, or kState for header-sourced
  /// entries (those can only be removed).
  DomainEntry relax(std::string_view domain);
  DomainEntry remove(std::string_view domain);
  std::vector<std::string> purge_expired(UnixSeconds now);

  /// Replaces every entry (import). Counts as one mutation.
  void replace_entries(const StoreSnapshot& incoming);

  StoreSnapshot snapshot() const;
  std::uint64_t revision() const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  StoreSnapshot state_;
};

inline constexpr int kStoreSchemaVersion = 1;

/// Canonical document: entries sorted by domain, two-space indentation,
/// trailing newline. Equal snapshots serialize to identical bytes.
std::string serialize_store(const StoreSnapshot& snapshot);
/// Throws kParse / kSchemaVersion / kValidation naming the bad record.
StoreSnapshot parse_store(std::string_view document);

/// Atomic write (temp file + rename). Throws kIo.
void save_store(const WhitelistStore& store, const std::string& path);
StoreSnapshot load_store(const std::string& path);

}  // namespace tlsgate
