#include "tlsgate/handshake.hpp"

#include <algorithm>
#include <charconv>

#include "tlsgate/error.hpp"

namespace tlsgate {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_terminal_event(const TranscriptEvent& e) {
  return std::holds_alternative<event::Established>(e) ||
         std::holds_alternative<event::ClientAborted>(e) ||
         std::holds_alternative<event::FailureAlert>(e);
}

}  // namespace

VersionSet ClientHello::offered_versions() const {
  if (supported_versions) {
    VersionSet s;
    for (TlsVersion v : *supported_versions) s.insert(v);
    return s;
  }
  return VersionSet::up_to(legacy_max_version);
}

std::string_view to_string(SelectionRule rule) {
  return rule == SelectionRule::kServerPreference ? "server_preference" : "client_preference";
}

std::optional<SelectionRule> parse_selection_rule(std::string_view text) {
  if (text == "server_preference") return SelectionRule::kServerPreference;
  if (text == "client_preference") return SelectionRule::kClientPreference;
  return std::nullopt;
}

std::string format_attacker(const AttackerModel& model) {
  return std::visit(
      Overloaded{
          [](NoAttacker) -> std::string { return "none"; },
          [](FragmentationRollback) -> std::string { return "fragmentation"; },
          [](HandshakeFailureInjection m) { return "drop:" + std::to_string(m.fail_count); },
          [](const ParameterTamper& m) {
            std::string out = "tamper:" + std::string(to_string(m.target_version));
            if (m.target_suite) out += ":" + format_suite_id(*m.target_suite);
            return out;
          },
      },
      model);
}

AttackerModel parse_attacker(std::string_view text) {
  auto bad = [text]() {
    return Error(ErrorCode::kParse, "unknown attacker model '" + std::string(text) + "'");
  };
  if (text == "none") return NoAttacker{};
  if (text == "fragmentation" || text == "fragmentation_rollback") return FragmentationRollback{};
  if (text.starts_with("drop:")) {
    std::string_view n = text.substr(5);
    int count = 0;
    auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), count);
    if (n.empty() || ec != std::errc{} || ptr != n.data() + n.size()) throw bad();
    if (count < 1) throw Error(ErrorCode::kValidation, "drop count must be >= 1");
    return HandshakeFailureInjection{count};
  }
  if (text.starts_with("tamper:")) {
    std::string_view rest = text.substr(7);
    std::string_view version_text = rest;
    std::optional<SuiteId> suite;
    if (auto colon = rest.find(':'); colon != std::string_view::npos) {
      version_text = rest.substr(0, colon);
      suite = parse_suite_id(rest.substr(colon + 1));
      if (!suite) throw bad();
    }
    auto version = parse_version(version_text);
    if (!version) throw bad();
    return ParameterTamper{*version, suite};
  }
  throw bad();
}

bool SessionTranscript::is_terminal() const {
  return !events.empty() && is_terminal_event(events.back());
}

bool SessionTranscript::is_well_formed() const {
  if (!is_terminal()) return false;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    if (std::holds_alternative<event::Established>(events[i]) ||
        std::holds_alternative<event::ClientAborted>(events[i])) {
      return false;
    }
  }
  std::optional<TlsVersion> last_retry;
  for (const auto& e : events) {
    if (const auto* r = std::get_if<event::RetryStarted>(&e)) {
      if (last_retry && !(r->new_max_version < *last_retry)) return false;
      last_retry = r->new_max_version;
    }
  }
  return true;
}

std::optional<event::Established> SessionTranscript::established() const {
  if (events.empty()) return std::nullopt;
  if (const auto* e = std::get_if<event::Established>(&events.back())) return *e;
  return std::nullopt;
}

std::optional<std::string> SessionTranscript::abort_reason() const {
  if (events.empty()) return std::nullopt;
  if (const auto* e = std::get_if<event::ClientAborted>(&events.back())) return e->reason;
  return std::nullopt;
}

int SessionTranscript::retry_count() const {
  return static_cast<int>(std::count_if(events.begin(), events.end(), [](const auto& e) {
    return std::holds_alternative<event::RetryStarted>(e);
  }));
}

int SessionTranscript::count_established() const {
  return static_cast<int>(std::count_if(events.begin(), events.end(), [](const auto& e) {
    return std::holds_alternative<event::Established>(e);
  }));
}

ClientHello build_client_hello(const OfferedParams& offer) {
  if (offer.empty()) throw Error(ErrorCode::kContract, "cannot build a hello from an empty offer");
  ClientHello ch;
  std::vector<TlsVersion> versions = offer.versions;
  std::sort(versions.begin(), versions.end(), std::greater<>());
  versions.erase(std::unique(versions.begin(), versions.end()), versions.end());
  if (versions.front() == TlsVersion::kTls1_3) {
    ch.legacy_max_version = TlsVersion::kTls1_2;
    ch.supported_versions = versions;
  } else {
    ch.legacy_max_version = versions.front();
  }
  for (const CipherSuite& s : offer.suites) ch.suites.push_back(s.id);
  return ch;
}

AttackEffect apply_attacker(const AttackerModel& model, const ClientHello& hello,
                            int attempt_index) {
  return std::visit(
      Overloaded{
          [](NoAttacker) -> AttackEffect { return PassThrough{}; },
          [&hello](FragmentationRollback) -> AttackEffect {
            PerceivedHello out{hello, "ClientHello fragmented; server parses max version TLS1.0"};
            out.hello.supported_versions.reset();
            out.hello.legacy_max_version = TlsVersion::kTls1_0;
            // Only TLS1.3 suites on offer: the mangled record also carries the
            // MTI suite so the server can still answer at TLS1.0.
            bool has_legacy = std::any_of(hello.suites.begin(), hello.suites.end(), [](SuiteId id) {
              return id < 0x1300 || id > 0x13FF;
            });
            if (!has_legacy) {
              out.hello.suites.push_back(kRollbackInjectedSuite);
              out.description += " (injected suite " + format_suite_id(kRollbackInjectedSuite) + ")";
            }
            return out;
          },
          [attempt_index](HandshakeFailureInjection m) -> AttackEffect {
            if (attempt_index <= m.fail_count) return DropConnection{};
            return PassThrough{};
          },
          [&hello](const ParameterTamper& m) -> AttackEffect {
            PerceivedHello out{hello, "hello rewritten to offer only " +
                                          std::string(to_string(m.target_version))};
            out.hello.legacy_max_version = std::min(m.target_version, TlsVersion::kTls1_2);
            out.hello.supported_versions = std::vector<TlsVersion>{m.target_version};
            if (m.target_suite) {
              out.hello.suites = {*m.target_suite};
              out.description += " with suite " + format_suite_id(*m.target_suite);
            }
            return out;
          },
      },
      model);
}

ServerResponse server_select(const ServerConfig& config, const ClientHello& perceived) {
  VersionSet common = perceived.offered_versions() & config.versions;
  if (common.empty()) return event::FailureAlert{std::string(reason::kNoCommonVersion)};

  auto client_offers = [&perceived](SuiteId id) {
    return std::find(perceived.suites.begin(), perceived.suites.end(), id) != perceived.suites.end();
  };
  auto server_suite = [&config](SuiteId id) -> const CipherSuite* {
    auto it = std::find_if(config.suites.begin(), config.suites.end(),
                           [id](const CipherSuite& s) { return s.id == id; });
    return it == config.suites.end() ? nullptr : &*it;
  };

  for (TlsVersion v : common.descending()) {
    if (config.selection_rule == SelectionRule::kServerPreference) {
      for (const CipherSuite& s : config.suites) {
        if (s.usable_at(v) && client_offers(s.id)) return ServerHello{v, s.id};
      }
    } else {
      for (SuiteId id : perceived.suites) {
        const CipherSuite* s = server_suite(id);
        if (s != nullptr && s->usable_at(v)) return ServerHello{v, id};
      }
    }
  }
  return event::FailureAlert{std::string(reason::kNoCommonSuite)};
}

ClientVerdict client_validate(const ClientBehavior& behavior, const ServerHello& hello) {
  if (!behavior.spec.allows_version(hello.selected_version)) {
    return Abort{std::string(reason::kVersionNotOffered)};
  }
  const CipherSuite* suite = behavior.spec.find_suite(hello.selected_suite);
  if (suite == nullptr || !is_compliant(behavior.spec, hello.selected_version, *suite)) {
    return Abort{std::string(reason::kSuiteNotOffered)};
  }
  return Accept{};
}

SessionTranscript run_session(const ClientBehavior& behavior, const ServerConfig& server,
                              const AttackerModel& attacker) {
  SessionTranscript t;
  const OfferedParams full = offer_of(behavior.spec);
  if (full.empty()) {
    t.events.push_back(event::ClientAborted{std::string(reason::kExhausted)});
    return t;
  }
  TlsVersion cap = full.versions.front();
  const bool dance = behavior.mode == ClientMode::kDefaultFallback;

  // Returns false when the client has nowhere left to go.
  auto lower_cap = [&]() {
    while (auto next = step_down(cap)) {
      cap = *next;
      if (!cap_offer(full, cap).empty()) {
        t.events.push_back(event::RetryStarted{cap});
        return true;
      }
    }
    return false;
  };

  for (int attempt = 1;; ++attempt) {
    ClientHello hello = build_client_hello(cap_offer(full, cap));
    t.events.push_back(event::HelloSent{hello});

    AttackEffect effect = apply_attacker(attacker, hello, attempt);
    bool failed = false;
    if (std::holds_alternative<DropConnection>(effect)) {
      t.events.push_back(event::AttackerTransformed{"connection dropped"});
      failed = true;
    } else {
      const ClientHello* perceived = &hello;
      if (const auto* p = std::get_if<PerceivedHello>(&effect)) {
        t.events.push_back(event::AttackerTransformed{p->description});
        perceived = &p->hello;
      }
      ServerResponse response = server_select(server, *perceived);
      if (const auto* alert = std::get_if<event::FailureAlert>(&response)) {
        t.events.push_back(*alert);
        failed = true;
      } else {
        const ServerHello& sh = std::get<ServerHello>(response);
        t.events.push_back(event::HelloReceived{sh});
        ClientVerdict verdict = client_validate(behavior, sh);
        if (const auto* abort = std::get_if<Abort>(&verdict)) {
          t.events.push_back(event::ClientAborted{abort->reason});
        } else {
          t.events.push_back(event::Established{sh.selected_version, sh.selected_suite});
        }
        return t;
      }
    }

    if (failed) {
      if (!dance) {
        t.events.push_back(event::ClientAborted{std::string(reason::kHandshakeFailed)});
        return t;
      }
      if (!lower_cap()) {
        t.events.push_back(event::ClientAborted{std::string(reason::kExhausted)});
        return t;
      }
    }
  }
}

}  // namespace tlsgate
