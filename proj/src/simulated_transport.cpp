#include "tlsgate/error.hpp"
#include "tlsgate/transport.hpp"

namespace tlsgate {

ClientBehavior behavior_for(const PolicySpec& spec) {
  return spec.level == PolicyLevel::kStrict ? ClientBehavior::policy_enforced(spec)
                                            : ClientBehavior::default_fallback(spec);
}

SimulatedTransport::SimulatedTransport(std::map<std::string, SimulatedHost> hosts)
    : hosts_(std::move(hosts)) {}

void SimulatedTransport::add_host(const std::string& host, SimulatedHost config) {
  hosts_.insert_or_assign(host, std::move(config));
}

TransportResult SimulatedTransport::connect(const std::string& /*url*/, const std::string& host,
                                            const PolicySpec& spec) {
  auto it = hosts_.find(host);
  if (it == hosts_.end()) {
    throw Error(ErrorCode::kTransport, "no simulated server for host '" + host + "'");
  }
  const SimulatedHost& sim = it->second;
  TransportResult out;
  out.transcript = run_session(behavior_for(spec), sim.server, sim.attacker);
  if (out.transcript.established()) {
    out.response_headers = sim.response_headers;
    out.status = sim.status;
  }
  return out;
}

}  // namespace tlsgate
