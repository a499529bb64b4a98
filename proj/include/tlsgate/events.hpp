#pragma once

#include <cstdint>
#include <deque>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tlsgate/whitelist.hpp"

namespace tlsgate {

enum class ErrorKind { kUnsupportedVersion, kNoCipherOverlap };

/// "SSL_ERROR_UNSUPPORTED_VERSION" / "SSL_ERROR_NO_CYPHER_OVERLAP".
std::string_view error_code(ErrorKind kind);
std::optional<ErrorKind> parse_error_code(std::string_view code);

struct BypassToken {
  std::string value;  // 128 random bits, lowercase hex
  std::string domain;
  UnixSeconds created_at = 0;
  bool used = false;

  friend bool operator==(const BypassToken&, const BypassToken&) = default;
};

enum class EventStatus { kPending, kBypassed, kClosed, kBlocked };

std::string_view to_string(EventStatus status);
std::optional<EventStatus> parse_event_status(std::string_view text);

struct WarningEvent {
  std::uint64_t id = 0;
  std::string url;
  std::string domain;
  ErrorKind kind = ErrorKind::kUnsupportedVersion;
  ErrorHandling handling = ErrorHandling::kBlocking;
  EventStatus status = EventStatus::kBlocked;
  std::optional<BypassToken> token;
  UnixSeconds created_at = 0;

  friend bool operator==(const WarningEvent&, const WarningEvent&) = default;
};

// Bounded diagnostic log (TOFU notes, rejected headers).
class AuditLog {
 public:
  explicit AuditLog(std::size_t capacity = 256) : capacity_(capacity) {}
  void note(std::string line);
  std::vector<std::string> lines() const;

 private:
  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::deque<std::string> lines_;
};

// In-memory store of policy-violation events. All operations are atomic;
// a token is consumed by at most one caller.
class EventRegistry {
 public:
  static constexpr std::size_t kDefaultCapacity = 1024;

  explicit EventRegistry(std::size_t capacity = kDefaultCapacity);

  WarningEvent record_blocked(std::string url, std::string domain, ErrorKind kind,
                              UnixSeconds now);
  /// Pending event carrying a fresh single-use token.
  WarningEvent record_warning(std::string url, std::string domain, ErrorKind kind,
                              UnixSeconds now);

  std::optional<WarningEvent> get(std::uint64_t id) const;
  /// Oldest first; all events when status is nullopt.
  std::vector<WarningEvent> list(std::optional<EventStatus> status = std::nullopt) const;

  /// Marks the token used and its event Bypassed. Throws kNotFound (unknown
  /// token, or event id mismatch), kReplay (already bypassed) or kState
  /// (event closed or evicted state).
  WarningEvent consume_token(std::string_view token,
                             std::optional<std::uint64_t> expected_event = std::nullopt);

  /// Pending -> Closed, token invalidated. Throws kNotFound / kState.
  WarningEvent close(std::uint64_t id);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

  AuditLog& audit() { return audit_; }

 private:
  WarningEvent& insert_locked(WarningEvent event);
  void evict_locked();

  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::uint64_t next_id_ = 1;
  std::list<WarningEvent> events_;  // insertion order
  std::unordered_map<std::uint64_t, std::list<WarningEvent>::iterator> by_id_;
  std::unordered_map<std::string, std::uint64_t> by_token_;
  AuditLog audit_;
};

/// Structured error page: {event_id, domain, url, error_code, handling,
/// status, bypass_token?}. Shared by the interstitial and the dashboard.
std::string render_error_payload(const WarningEvent& event);

}  // namespace tlsgate
