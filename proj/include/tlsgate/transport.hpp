#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tlsgate/handshake.hpp"
#include "tlsgate/policy.hpp"

namespace tlsgate {

using HeaderList = std::vector<std::pair<std::string, std::string>>;

struct TransportResult {
  SessionTranscript transcript;
  HeaderList response_headers;  // only meaningful after Established
  int status = 0;
};

// Carries one request's TLS negotiation under a given policy. Strict specs
// get a policy-enforcing client; Default specs get the fallback client.
// Throws Error(kTransport) when the peer cannot be reached at all.
class TransportAdapter {
 public:
  virtual ~TransportAdapter() = default;
  virtual TransportResult connect(const std::string& url, const std::string& host,
                                  const PolicySpec& spec) = 0;
  virtual std::string_view mode() const = 0;
};

ClientBehavior behavior_for(const PolicySpec& spec);

struct SimulatedHost {
  ServerConfig server;
  AttackerModel attacker;
  HeaderList response_headers;
  int status = 200;
};

// In-process transport over the handshake simulator. Immutable after
// construction, so concurrent connects are safe.
class SimulatedTransport final : public TransportAdapter {
 public:
  SimulatedTransport() = default;
  explicit SimulatedTransport(std::map<std::string, SimulatedHost> hosts);

  /// Host must already be normalized.
  void add_host(const std::string& host, SimulatedHost config);

  TransportResult connect(const std::string& url, const std::string& host,
                          const PolicySpec& spec) override;
  std::string_view mode() const override { return "simulated"; }

 private:
  std::map<std::string, SimulatedHost> hosts_;
};

// Real TLS over the host OpenSSL stack: the spec's versions and suites are
// mapped onto the client context. Best effort; not used by the test suites
// beyond the unreachable-host path.
class LiveTransport final : public TransportAdapter {
 public:
  explicit LiveTransport(int timeout_seconds = 10) : timeout_seconds_(timeout_seconds) {}

  TransportResult connect(const std::string& url, const std::string& host,
                          const PolicySpec& spec) override;
  std::string_view mode() const override { return "live"; }

 private:
  int timeout_seconds_;
};

}  // namespace tlsgate
