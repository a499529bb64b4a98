#pragma once

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "tlsgate/handshake.hpp"
#include "tlsgate/policy.hpp"
#include "tlsgate/tls_model.hpp"

namespace tlsgate::testing {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("tlsgate-test-" + std::to_string(rd()));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Six suites spanning every security class and version range.
inline SuiteCatalog sweep_catalog() {
  SuiteCatalog full = default_catalog();
  std::vector<CipherSuite> suites;
  for (SuiteId id : {0x1301, 0x1302, 0xC02F, 0xC013, 0x009C, 0x002F}) {
    suites.push_back(*full.find(static_cast<SuiteId>(id)));
  }
  return SuiteCatalog(std::move(suites));
}

inline std::vector<std::vector<SuiteId>> sweep_suite_subsets() {
  return {{0x1301, 0x1302, 0xC02F, 0xC013, 0x009C, 0x002F},
          {0x1301, 0x1302},
          {0x1301},
          {0xC02F, 0xC013, 0x009C, 0x002F},
          {0x002F},
          {0xC013, 0x002F},
          {0x1302, 0x009C},
          {0xC02F}};
}

inline std::vector<AttackerModel> sweep_attackers() {
  return {NoAttacker{}, FragmentationRollback{}, HandshakeFailureInjection{2},
          ParameterTamper{TlsVersion::kTls1_0, SuiteId{0x002F}}};
}

inline std::vector<ServerConfig> sweep_servers(const SuiteCatalog& catalog,
                                               SelectionRule rule = SelectionRule::kServerPreference) {
  std::vector<ServerConfig> out;
  for (unsigned mask = 1; mask < 16; ++mask) {
    for (const auto& ids : sweep_suite_subsets()) {
      ServerConfig c;
      c.versions = VersionSet::from_mask(static_cast<std::uint8_t>(mask));
      for (SuiteId id : ids) c.suites.push_back(*catalog.find(id));
      c.selection_rule = rule;
      out.push_back(std::move(c));
    }
  }
  return out;
}

// Exhaustive negotiation: every (version, suite) pair both sides share and
// the suite can run at, ranked by version and then by preference position.
inline ServerResponse oracle_select(const ServerConfig& server, const ClientHello& hello) {
  VersionSet client = hello.offered_versions();
  bool any_version = false;
  bool found = false;
  int best_version = -1;
  std::size_t best_rank = 0;
  SuiteId best_suite = 0;
  for (TlsVersion v : kAllVersions) {
    if (!server.versions.contains(v) || !client.contains(v)) continue;
    any_version = true;
    for (std::size_t si = 0; si < server.suites.size(); ++si) {
      const CipherSuite& s = server.suites[si];
      auto at = std::find(hello.suites.begin(), hello.suites.end(), s.id);
      if (at == hello.suites.end() || !s.usable_at(v)) continue;
      std::size_t rank = server.selection_rule == SelectionRule::kServerPreference
                             ? si
                             : static_cast<std::size_t>(at - hello.suites.begin());
      int vi = static_cast<int>(v);
      if (!found || vi > best_version || (vi == best_version && rank < best_rank)) {
        found = true;
        best_version = vi;
        best_rank = rank;
        best_suite = s.id;
      }
    }
  }
  if (!any_version) return event::FailureAlert{std::string(reason::kNoCommonVersion)};
  if (!found) return event::FailureAlert{std::string(reason::kNoCommonSuite)};
  return ServerHello{static_cast<TlsVersion>(best_version), best_suite};
}

inline bool same_response(const ServerResponse& a, const ServerResponse& b) {
  if (a.index() != b.index()) return false;
  if (auto* ha = std::get_if<ServerHello>(&a)) return *ha == std::get<ServerHello>(b);
  return std::get<event::FailureAlert>(a).reason == std::get<event::FailureAlert>(b).reason;
}

// Every hello a client of this spec can put on the wire, one per version cap.
inline std::vector<ClientHello> hellos_for(const PolicySpec& spec) {
  std::vector<ClientHello> out;
  OfferedParams offer = offer_of(spec);
  for (TlsVersion cap : offer.versions) {
    OfferedParams capped = cap_offer(offer, cap);
    if (!capped.empty()) out.push_back(build_client_hello(capped));
  }
  return out;
}

// The hello the server actually reads, or nothing when the attempt is dropped.
inline std::optional<ClientHello> perceived(const AttackerModel& attacker, const ClientHello& hello,
                                            int attempt) {
  AttackEffect effect = apply_attacker(attacker, hello, attempt);
  if (std::holds_alternative<DropConnection>(effect)) return std::nullopt;
  if (auto* p = std::get_if<PerceivedHello>(&effect)) return p->hello;
  return hello;
}

}  // namespace tlsgate::testing
