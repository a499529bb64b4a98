#pragma once

#include <optional>
#include <string>
#include <variant>

#include "tlsgate/events.hpp"
#include "tlsgate/handshake.hpp"
#include "tlsgate/policy.hpp"
#include "tlsgate/transport.hpp"
#include "tlsgate/whitelist.hpp"

namespace tlsgate {

struct PolicyDecision {
  PolicyLevel level = PolicyLevel::kDefault;
  PolicySpec spec;
  std::optional<std::string> matched;  // whitelisted domain, if any
  std::string host;
};

/// Before-request observer. Purges expired entries, then picks the matched
/// entry's level or Default. Holds no state between requests.
PolicyDecision decide_policy(WhitelistStore& store, const PolicySet& policies,
                             const std::string& url, UnixSeconds now);

/// Response-header observer. Subscribes the host when the subscription
/// header is present and parses; returns the new entry.
std::optional<DomainEntry> observe_response_headers(WhitelistStore& store, const std::string& url,
                                                    const HeaderList& headers, UnixSeconds now,
                                                    AuditLog* log = nullptr);

/// Maps a terminal transcript to the browser error it would raise; nullopt
/// when the session was established. Throws kContract if not terminal.
std::optional<ErrorKind> classify_handshake_error(const SessionTranscript& transcript);

struct DefaultError {};
struct BlockPage {
  std::string domain;
  ErrorKind kind;
  WarningEvent event;
};
struct WarnPage {
  std::string domain;
  ErrorKind kind;
  BypassToken token;
  WarningEvent event;
};
using ErrorDecision = std::variant<DefaultError, BlockPage, WarnPage>;

/// Error observer. Strict whitelisted entries get a block or warning page
/// (and a recorded event); anything else keeps the generic failure.
ErrorDecision on_error(const WhitelistStore& store, EventRegistry& registry, const std::string& url,
                       ErrorKind kind, UnixSeconds now);

struct RetryDirective {
  std::uint64_t event_id = 0;
  std::string domain;
  std::string url;
  PolicyLevel new_level = PolicyLevel::kDefault;
};

/// "Restore Defaults": consumes the token, relaxes the event's domain and
/// tells the caller to re-issue the original request.
RetryDirective bypass(WhitelistStore& store, EventRegistry& registry, std::string_view token,
                      std::optional<std::uint64_t> expected_event = std::nullopt);

/// "Close": no policy change.
WarningEvent close_event(EventRegistry& registry, std::uint64_t event_id);

struct FetchSuccess {
  std::string url;
  PolicyLevel level;
  std::optional<std::string> matched;
  TlsVersion version;
  SuiteId suite;
  int status = 0;
  std::optional<DomainEntry> subscribed;
  SessionTranscript transcript;
};
struct FetchBlocked {
  WarningEvent event;
  SessionTranscript transcript;
};
struct FetchWarned {
  WarningEvent event;
  SessionTranscript transcript;
};
struct FetchFailed {
  std::string reason;  // canonical error code, or "transport"
  SessionTranscript transcript;
};
using FetchResult = std::variant<FetchSuccess, FetchBlocked, FetchWarned, FetchFailed>;

/// Full pipeline for one request. Never changes a policy level.
FetchResult fetch(WhitelistStore& store, EventRegistry& registry, const PolicySet& policies,
                  const std::string& url, TransportAdapter& transport, UnixSeconds now);

}  // namespace tlsgate
