#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tlsgate/tls_model.hpp"
#include "tlsgate/transport.hpp"

namespace tlsgate {

// A named simulated server plus the attacker sitting in front of it, and
// the hosts that resolve to it.
struct Scenario {
  std::string name;
  std::string description;
  std::vector<std::string> hosts;  // normalized
  SimulatedHost sim;
};

/// Scenario document (JSON):
///   {"scenarios": [{"name", "description"?, "hosts": [...],
///     "server": {"versions": [...], "suites": "catalog" | [id or name...],
///                "selection_rule"?: "server_preference"|"client_preference"},
///     "attacker"?: {"type": "none"|"fragmentation_rollback"|
///                   "handshake_failure_injection"|"parameter_tamper", ...},
///     "response"?: {"status"?: int, "headers"?: [[name, value], ...]}}]}
/// Throws kParse / kValidation (duplicate names, hosts that do not
/// normalize or appear twice, empty server config).
std::vector<Scenario> load_scenarios(std::string_view document, const SuiteCatalog& catalog);
std::vector<Scenario> load_scenarios_file(const std::string& path, const SuiteCatalog& catalog);
std::string_view default_scenarios_document();

const Scenario& find_scenario(const std::vector<Scenario>& scenarios, std::string_view name);

SimulatedTransport make_simulated_transport(const std::vector<Scenario>& scenarios);

}  // namespace tlsgate
