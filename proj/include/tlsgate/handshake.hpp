#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tlsgate/policy.hpp"
#include "tlsgate/tls_model.hpp"

namespace tlsgate {

// Reason strings carried by FailureAlert / ClientAborted events.
namespace reason {
inline constexpr std::string_view kNoCommonVersion = "no_common_version";
inline constexpr std::string_view kNoCommonSuite = "no_common_suite";
inline constexpr std::string_view kVersionNotOffered = "version_not_offered";
inline constexpr std::string_view kSuiteNotOffered = "suite_not_offered";
inline constexpr std::string_view kHandshakeFailed = "handshake_failed";
inline constexpr std::string_view kExhausted = "exhausted";
}  // namespace reason

struct ClientHello {
  TlsVersion legacy_max_version = TlsVersion::kTls1_2;
  std::vector<SuiteId> suites;
  std::optional<std::vector<TlsVersion>> supported_versions;

  /// What a server reads as offered: the supported_versions list when
  /// present, otherwise every version up to legacy_max_version.
  VersionSet offered_versions() const;

  friend bool operator==(const ClientHello&, const ClientHello&) = default;
};

struct ServerHello {
  TlsVersion selected_version = TlsVersion::kTls1_2;
  SuiteId selected_suite = 0;

  friend bool operator==(const ServerHello&, const ServerHello&) = default;
};

enum class SelectionRule { kServerPreference, kClientPreference };

std::string_view to_string(SelectionRule rule);
std::optional<SelectionRule> parse_selection_rule(std::string_view text);

struct ServerConfig {
  VersionSet versions;
  std::vector<CipherSuite> suites;  // server preference order
  SelectionRule selection_rule = SelectionRule::kServerPreference;
};

struct NoAttacker {
  friend bool operator==(NoAttacker, NoAttacker) = default;
};
// Server perceives a TLS1.0-max hello (record fragmentation effect).
struct FragmentationRollback {
  friend bool operator==(FragmentationRollback, FragmentationRollback) = default;
};
// Drops the first fail_count handshake attempts of a session.
struct HandshakeFailureInjection {
  int fail_count = 1;
  friend bool operator==(HandshakeFailureInjection, HandshakeFailureInjection) = default;
};
// Rewrites the hello so the server only sees target_version (and target_suite).
struct ParameterTamper {
  TlsVersion target_version = TlsVersion::kTls1_0;
  std::optional<SuiteId> target_suite;
  friend bool operator==(const ParameterTamper&, const ParameterTamper&) = default;
};

using AttackerModel =
    std::variant<NoAttacker, FragmentationRollback, HandshakeFailureInjection, ParameterTamper>;

/// Text form: "none", "fragmentation", "drop:N", "tamper:TLS1.0[:0x002F]".
std::string format_attacker(const AttackerModel& model);
/// Throws Error(kParse) on unknown syntax, kValidation for fail_count < 1.
AttackerModel parse_attacker(std::string_view text);

// Suite appended by FragmentationRollback when nothing in the client's list
// is usable at TLS1.0 (TLS_RSA_WITH_AES_128_CBC_SHA, the TLS 1.2 MTI suite).
inline constexpr SuiteId kRollbackInjectedSuite = 0x002F;

struct PassThrough {};
struct PerceivedHello {
  ClientHello hello;
  std::string description;
};
struct DropConnection {};
using AttackEffect = std::variant<PassThrough, PerceivedHello, DropConnection>;

enum class ClientMode { kPolicyEnforced, kDefaultFallback };

struct ClientBehavior {
  ClientMode mode = ClientMode::kPolicyEnforced;
  PolicySpec spec;

  static ClientBehavior policy_enforced(PolicySpec spec) {
    return {ClientMode::kPolicyEnforced, std::move(spec)};
  }
  static ClientBehavior default_fallback(PolicySpec spec) {
    return {ClientMode::kDefaultFallback, std::move(spec)};
  }
};

namespace event {
struct HelloSent {
  ClientHello hello;
};
struct AttackerTransformed {
  std::string description;
};
struct HelloReceived {
  ServerHello hello;
};
struct FailureAlert {
  std::string reason;
};
struct ClientAborted {
  std::string reason;
};
struct RetryStarted {
  TlsVersion new_max_version;
};
struct Established {
  TlsVersion version;
  SuiteId suite;
};
}  // namespace event

using TranscriptEvent =
    std::variant<event::HelloSent, event::AttackerTransformed, event::HelloReceived,
                 event::FailureAlert, event::ClientAborted, event::RetryStarted,
                 event::Established>;

struct SessionTranscript {
  std::vector<TranscriptEvent> events;

  /// Last event is Established, ClientAborted or FailureAlert.
  bool is_terminal() const;
  /// Terminal-class events only as the last event, strictly decreasing retries.
  bool is_well_formed() const;
  std::optional<event::Established> established() const;
  std::optional<std::string> abort_reason() const;
  int retry_count() const;
  int count_established() const;
};

/// Throws Error(kContract) for an empty offer.
ClientHello build_client_hello(const OfferedParams& offer);

AttackEffect apply_attacker(const AttackerModel& model, const ClientHello& hello,
                            int attempt_index);

using ServerResponse = std::variant<ServerHello, event::FailureAlert>;

/// Picks the highest shared version that has a shared suite usable at it,
/// then the most preferred such suite under the configured rule.
ServerResponse server_select(const ServerConfig& config, const ClientHello& perceived);

struct Accept {};
struct Abort {
  std::string reason;
};
using ClientVerdict = std::variant<Accept, Abort>;

ClientVerdict client_validate(const ClientBehavior& behavior, const ServerHello& hello);

/// Deterministic simulation of one connection including any downgrade dance.
SessionTranscript run_session(const ClientBehavior& behavior, const ServerConfig& server,
                              const AttackerModel& attacker);

// Transcript export (one event per line / per JSON record).
std::string transcript_to_text(const SessionTranscript& transcript);
std::string transcript_to_json(const SessionTranscript& transcript);

}  // namespace tlsgate
