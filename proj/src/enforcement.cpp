#include "tlsgate/enforcement.hpp"

#include <algorithm>
#include <cctype>

#include "tlsgate/domain.hpp"
#include "tlsgate/error.hpp"

namespace tlsgate {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string host_of(const std::string& url) {
  try {
    return normalize_domain(url);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, std::string("malformed url: ") + e.what());
  }
}

}  // namespace

PolicyDecision decide_policy(WhitelistStore& store, const PolicySet& policies,
                             const std::string& url, UnixSeconds now) {
  PolicyDecision d;
  d.host = host_of(url);
  store.purge_expired(now);
  if (auto entry = store.lookup(d.host)) {
    d.level = entry->level;
    d.matched = entry->domain;
  } else {
    d.level = PolicyLevel::kDefault;
  }
  d.spec = policies[d.level];
  return d;
}

std::optional<DomainEntry> observe_response_headers(WhitelistStore& store, const std::string& url,
                                                    const HeaderList& headers, UnixSeconds now,
                                                    AuditLog* log) {
  auto it = std::find_if(headers.begin(), headers.end(), [](const auto& h) {
    return iequals(h.first, kSubscriptionHeader);
  });
  if (it == headers.end()) return std::nullopt;

  std::string host = host_of(url);
  HeaderDirective directive;
  try {
    directive = parse_subscription_header(it->second);
  } catch (const Error& e) {
    if (log) log->note("ignored " + std::string(kSubscriptionHeader) + " from " + host + ": " + e.what());
    return std::nullopt;
  }
  auto entry = store.subscribe_from_header(host, directive, now);
  if (entry && log) {
    log->note("subscribed " + host + " from response header (trust on first use)");
  }
  return entry;
}

std::optional<ErrorKind> classify_handshake_error(const SessionTranscript& transcript) {
  if (!transcript.is_terminal()) {
    throw Error(ErrorCode::kContract, "transcript has no terminal event");
  }
  const TranscriptEvent& last = transcript.events.back();
  if (std::holds_alternative<event::Established>(last)) return std::nullopt;

  auto from_reason = [](std::string_view r) -> std::optional<ErrorKind> {
    if (r == reason::kVersionNotOffered || r == reason::kNoCommonVersion) {
      return ErrorKind::kUnsupportedVersion;
    }
    if (r == reason::kSuiteNotOffered || r == reason::kNoCommonSuite) {
      return ErrorKind::kNoCipherOverlap;
    }
    return std::nullopt;
  };

  if (const auto* alert = std::get_if<event::FailureAlert>(&last)) {
    return from_reason(alert->reason).value_or(ErrorKind::kUnsupportedVersion);
  }
  const auto& aborted = std::get<event::ClientAborted>(last);
  if (auto kind = from_reason(aborted.reason)) return kind;
  // Generic abort: use the latest alert the server sent, if any.
  for (auto e = transcript.events.rbegin(); e != transcript.events.rend(); ++e) {
    if (const auto* alert = std::get_if<event::FailureAlert>(&*e)) {
      if (auto kind = from_reason(alert->reason)) return kind;
    }
  }
  return ErrorKind::kUnsupportedVersion;
}

ErrorDecision on_error(const WhitelistStore& store, EventRegistry& registry, const std::string& url,
                       ErrorKind kind, UnixSeconds now) {
  auto entry = store.lookup(host_of(url));
  // A relaxed entry is not enforcing anything; its failures are ordinary ones.
  if (!entry || entry->level != PolicyLevel::kStrict) return DefaultError{};
  if (entry->handling == ErrorHandling::kBlocking) {
    WarningEvent e = registry.record_blocked(url, entry->domain, kind, now);
    return BlockPage{entry->domain, kind, std::move(e)};
  }
  WarningEvent e = registry.record_warning(url, entry->domain, kind, now);
  BypassToken token = *e.token;
  return WarnPage{entry->domain, kind, std::move(token), std::move(e)};
}

RetryDirective bypass(WhitelistStore& store, EventRegistry& registry, std::string_view token,
                      std::optional<std::uint64_t> expected_event) {
  WarningEvent e = registry.consume_token(token, expected_event);
  DomainEntry relaxed = store.relax(e.domain);
  return RetryDirective{e.id, relaxed.domain, e.url, relaxed.level};
}

WarningEvent close_event(EventRegistry& registry, std::uint64_t event_id) {
  return registry.close(event_id);
}

FetchResult fetch(WhitelistStore& store, EventRegistry& registry, const PolicySet& policies,
                  const std::string& url, TransportAdapter& transport, UnixSeconds now) {
  PolicyDecision decision = decide_policy(store, policies, url, now);

  TransportResult result;
  try {
    result = transport.connect(url, decision.host, decision.spec);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kTransport) throw;
    return FetchFailed{"transport", {}};
  }

  std::optional<ErrorKind> kind;
  if (auto est = result.transcript.established()) {
    const CipherSuite* suite = decision.spec.find_suite(est->suite);
    if (!decision.spec.allows_version(est->version)) {
      kind = ErrorKind::kUnsupportedVersion;
    } else if (suite == nullptr || !is_compliant(decision.spec, est->version, *suite)) {
      kind = ErrorKind::kNoCipherOverlap;
    } else {
      FetchSuccess ok{url,        decision.level, decision.matched, est->version, est->suite,
                      result.status, std::nullopt, std::move(result.transcript)};
      ok.subscribed =
          observe_response_headers(store, url, result.response_headers, now, &registry.audit());
      return ok;
    }
  } else {
    kind = classify_handshake_error(result.transcript);
  }

  ErrorDecision page = on_error(store, registry, url, *kind, now);
  if (auto* block = std::get_if<BlockPage>(&page)) {
    return FetchBlocked{std::move(block->event), std::move(result.transcript)};
  }
  if (auto* warn = std::get_if<WarnPage>(&page)) {
    return FetchWarned{std::move(warn->event), std::move(result.transcript)};
  }
  return FetchFailed{std::string(error_code(*kind)), std::move(result.transcript)};
}

}  // namespace tlsgate
