#include "tlsgate/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tlsgate/domain.hpp"
#include "tlsgate/error.hpp"

namespace tlsgate {

namespace data {
extern const std::string_view kDefaultScenarios;
}

namespace {

using nlohmann::json;

AttackerModel parse_attacker_json(const json& j, const std::string& where) {
  auto fail = [&where](const std::string& why) {
    return Error(ErrorCode::kParse, "scenario " + where + ": attacker " + why);
  };
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw fail("needs a string 'type'");
  }
  std::string type = j["type"].get<std::string>();
  if (type == "none") return NoAttacker{};
  if (type == "fragmentation_rollback") return FragmentationRollback{};
  if (type == "handshake_failure_injection") {
    if (!j.contains("fail_count") || !j["fail_count"].is_number_integer()) {
      throw fail("needs integer 'fail_count'");
    }
    int n = j["fail_count"].get<int>();
    if (n < 1) {
      throw Error(ErrorCode::kValidation, "scenario " + where + ": fail_count must be >= 1");
    }
    return HandshakeFailureInjection{n};
  }
  if (type == "parameter_tamper") {
    if (!j.contains("target_version") || !j["target_version"].is_string()) {
      throw fail("needs 'target_version'");
    }
    auto v = parse_version(j["target_version"].get<std::string>());
    if (!v) throw fail("bad target_version");
    ParameterTamper m{*v, std::nullopt};
    if (j.contains("target_suite")) {
      auto id = j["target_suite"].is_string() ? parse_suite_id(j["target_suite"].get<std::string>())
                                              : std::nullopt;
      if (!id) throw fail("bad target_suite");
      m.target_suite = *id;
    }
    return m;
  }
  throw fail("unknown type '" + type + "'");
}

ServerConfig parse_server(const json& j, const SuiteCatalog& catalog, const std::string& where) {
  auto fail = [&where](const std::string& why) {
    return Error(ErrorCode::kParse, "scenario " + where + ": server " + why);
  };
  if (!j.is_object()) throw fail("must be an object");
  ServerConfig cfg;
  if (!j.contains("versions") || !j["versions"].is_array()) throw fail("needs 'versions' array");
  for (const auto& v : j["versions"]) {
    auto parsed = v.is_string() ? parse_version(v.get<std::string>()) : std::nullopt;
    if (!parsed) throw fail("bad version " + v.dump());
    cfg.versions.insert(*parsed);
  }
  if (!j.contains("suites")) throw fail("needs 'suites'");
  const json& suites = j["suites"];
  if (suites.is_string() && suites.get<std::string>() == "catalog") {
    cfg.suites.assign(catalog.suites().begin(), catalog.suites().end());
  } else if (suites.is_array()) {
    for (const auto& s : suites) {
      if (!s.is_string()) throw fail("suite entries must be strings");
      try {
        cfg.suites.push_back(catalog.resolve(s.get<std::string>()));
      } catch (const Error& e) {
        throw fail(e.what());
      }
    }
  } else {
    throw fail("'suites' must be \"catalog\" or an array");
  }
  if (j.contains("selection_rule")) {
    auto rule = j["selection_rule"].is_string()
                    ? parse_selection_rule(j["selection_rule"].get<std::string>())
                    : std::nullopt;
    if (!rule) throw fail("bad selection_rule");
    cfg.selection_rule = *rule;
  }
  if (cfg.versions.empty() || cfg.suites.empty()) {
    throw Error(ErrorCode::kValidation, "scenario " + where + ": server needs versions and suites");
  }
  return cfg;
}

}  // namespace

std::vector<Scenario> load_scenarios(std::string_view document, const SuiteCatalog& catalog) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("scenario file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("scenarios") || !doc["scenarios"].is_array()) {
    throw Error(ErrorCode::kParse, "scenario file needs a 'scenarios' array");
  }
  std::vector<Scenario> out;
  std::set<std::string> names;
  std::set<std::string> hosts;
  const json& list = doc["scenarios"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& j = list[i];
    std::string where = std::to_string(i);
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
      throw Error(ErrorCode::kParse, "scenario " + where + ": needs a string 'name'");
    }
    Scenario sc;
    sc.name = j["name"].get<std::string>();
    where += " (" + sc.name + ")";
    if (!names.insert(sc.name).second) {
      throw Error(ErrorCode::kValidation, "duplicate scenario name '" + sc.name + "'");
    }
    if (j.contains("description") && j["description"].is_string()) {
      sc.description = j["description"].get<std::string>();
    }
    if (j.contains("hosts")) {
      if (!j["hosts"].is_array()) throw Error(ErrorCode::kParse, "scenario " + where + ": 'hosts' must be an array");
      for (const auto& h : j["hosts"]) {
        if (!h.is_string()) throw Error(ErrorCode::kParse, "scenario " + where + ": host must be a string");
        std::string host;
        try {
          host = normalize_domain(h.get<std::string>());
        } catch (const Error& e) {
          throw Error(ErrorCode::kValidation, "scenario " + where + ": " + e.what());
        }
        if (!hosts.insert(host).second) {
          throw Error(ErrorCode::kValidation, "host '" + host + "' mapped by more than one scenario");
        }
        sc.hosts.push_back(host);
      }
    }
    if (!j.contains("server")) throw Error(ErrorCode::kParse, "scenario " + where + ": needs 'server'");
    sc.sim.server = parse_server(j["server"], catalog, where);
    sc.sim.attacker = j.contains("attacker") ? parse_attacker_json(j["attacker"], where)
                                             : AttackerModel{NoAttacker{}};
    sc.sim.status = 200;
    if (j.contains("response")) {
      const json& r = j["response"];
      if (r.contains("status")) {
        if (!r["status"].is_number_integer()) throw Error(ErrorCode::kParse, "scenario " + where + ": bad status");
        sc.sim.status = r["status"].get<int>();
      }
      if (r.contains("headers")) {
        for (const auto& h : r["headers"]) {
          if (!h.is_array() || h.size() != 2 || !h[0].is_string() || !h[1].is_string()) {
            throw Error(ErrorCode::kParse, "scenario " + where + ": headers are [name, value] pairs");
          }
          sc.sim.response_headers.emplace_back(h[0].get<std::string>(), h[1].get<std::string>());
        }
      }
    }
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<Scenario> load_scenarios_file(const std::string& path, const SuiteCatalog& catalog) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenarios(buf.str(), catalog);
}

std::string_view default_scenarios_document() { return data::kDefaultScenarios; }

const Scenario& find_scenario(const std::vector<Scenario>& scenarios, std::string_view name) {
  for (const auto& s : scenarios) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::kNotFound, "no scenario named '" + std::string(name) + "'");
}

SimulatedTransport make_simulated_transport(const std::vector<Scenario>& scenarios) {
  SimulatedTransport t;
  for (const auto& s : scenarios) {
    for (const auto& h : s.hosts) t.add_host(h, s.sim);
  }
  return t;
}

}  // namespace tlsgate
