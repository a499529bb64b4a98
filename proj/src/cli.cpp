#include "tlsgate/cli.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "json_codec.hpp"
#include "tlsgate/domain.hpp"
#include "tlsgate/enforcement.hpp"
#include "tlsgate/error.hpp"
#include "tlsgate/gateway.hpp"
#include "tlsgate/scenario.hpp"

namespace tlsgate {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::string store;
  std::string catalog;
  std::string scenarios;
};

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : std::move(fallback);
}

std::string default_store_path() {
  if (const char* xdg = std::getenv("XDG_DATA_HOME"); xdg && *xdg) {
    return (fs::path(xdg) / "tlsgate" / "whitelist.json").string();
  }
  if (const char* home = std::getenv("HOME"); home && *home) {
    return (fs::path(home) / ".local" / "share" / "tlsgate" / "whitelist.json").string();
  }
  return "whitelist.json";
}

Clock cli_clock() {
  const char* fixed = std::getenv("TLSGATE_NOW");
  if (!fixed || !*fixed) return system_now;
  char* end = nullptr;
  long long v = std::strtoll(fixed, &end, 10);
  if (*end != '\0') throw Error(ErrorCode::kConfiguration, "TLSGATE_NOW must be an integer");
  return [v] { return static_cast<UnixSeconds>(v); };
}

// Advisory lock next to the store so concurrent CLI writers serialize.
class StoreLock {
 public:
  explicit StoreLock(const std::string& store_path) {
    fs::path lock_path = store_path + ".lock";
    if (lock_path.has_parent_path()) fs::create_directories(lock_path.parent_path());
    fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open lock file " + lock_path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::kIo, "cannot lock " + lock_path.string());
    }
  }
  ~StoreLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

std::unique_ptr<WhitelistStore> open_store(const std::string& path) {
  if (!fs::exists(path)) return std::make_unique<WhitelistStore>();
  return std::make_unique<WhitelistStore>(load_store(path));
}

SuiteCatalog open_catalog(const GlobalOptions& g) {
  return g.catalog.empty() ? default_catalog() : load_catalog_file(g.catalog);
}

std::vector<Scenario> open_scenarios(const GlobalOptions& g, const SuiteCatalog& catalog) {
  return g.scenarios.empty() ? load_scenarios(default_scenarios_document(), catalog)
                             : load_scenarios_file(g.scenarios, catalog);
}

ErrorHandling handling_from_cli(const std::string& text) {
  if (text == "warn" || text == "warning") return ErrorHandling::kActiveWarning;
  if (text == "block") return ErrorHandling::kBlocking;
  if (auto h = parse_error_handling(text)) return *h;
  throw Error(ErrorCode::kConfiguration, "handling must be blocking or active_warning");
}

void print_entry(std::ostream& out, const DomainEntry& e) {
  out << e.domain << "  " << to_string(e.level) << "  " << to_string(e.handling) << "  "
      << to_string(e.source);
  if (e.expires_at) out << "  expires_at=" << *e.expires_at;
  out << '\n';
}

void print_transcript(std::ostream& out, const SessionTranscript& t, const std::string& format) {
  if (format == "json") out << transcript_to_json(t) << '\n';
  else out << transcript_to_text(t);
}

std::string suite_label(const SuiteCatalog& catalog, SuiteId id) {
  const CipherSuite* s = catalog.find(id);
  return s ? s->name : format_suite_id(id);
}

struct FetchOptions {
  std::string url;
  bool live = false;
  std::string on_warning = "close";
  bool transcript = false;
};

int do_fetch(const GlobalOptions& g, const FetchOptions& o, std::ostream& out, std::ostream& err) {
  Clock now = cli_clock();
  SuiteCatalog catalog = open_catalog(g);
  PolicySet policies(catalog);
  std::unique_ptr<TransportAdapter> transport;
  if (o.live) transport = std::make_unique<LiveTransport>();
  else transport = std::make_unique<SimulatedTransport>(
           make_simulated_transport(open_scenarios(g, catalog)));

  StoreLock lock(g.store);
  auto store = open_store(g.store);
  std::uint64_t loaded = store->revision();
  EventRegistry registry;
  auto flush = [&] {
    if (store->revision() != loaded) save_store(*store, g.store);
  };

  std::string url = o.url;
  for (int round = 0; round < 2; ++round) {
    FetchResult result = fetch(*store, registry, policies, url, *transport, now());
    const SessionTranscript* transcript = std::visit(
        [](const auto& r) -> const SessionTranscript* { return &r.transcript; }, result);
    if (o.transcript) out << transcript_to_text(*transcript);

    if (auto* ok = std::get_if<FetchSuccess>(&result)) {
      flush();
      out << "connected " << ok->url << " policy=" << to_string(ok->level)
          << " version=" << to_string(ok->version) << " suite=" << suite_label(catalog, ok->suite)
          << " status=" << ok->status << '\n';
      if (ok->subscribed) {
        out << "subscribed " << ok->subscribed->domain << " (strict, blocking)\n";
        err << "note: " << ok->subscribed->domain
            << " added on first use; the first response was not protected\n";
      }
      return 0;
    }
    if (auto* blocked = std::get_if<FetchBlocked>(&result)) {
      flush();
      out << "blocked " << blocked->event.url << ": " << error_code(blocked->event.kind) << '\n';
      out << render_error_payload(blocked->event) << '\n';
      return 1;
    }
    if (auto* warned = std::get_if<FetchWarned>(&result)) {
      out << "warning " << warned->event.url << ": " << error_code(warned->event.kind) << '\n';
      out << render_error_payload(warned->event) << '\n';
      if (o.on_warning == "restore" && warned->event.token) {
        RetryDirective d = bypass(*store, registry, warned->event.token->value, warned->event.id);
        out << "restored defaults for " << d.domain << "; retrying\n";
        url = d.url;
        continue;
      }
      close_event(registry, warned->event.id);
      flush();
      out << "closed\n";
      return 1;
    }
    flush();
    out << "failed " << url << ": " << std::get<FetchFailed>(result).reason << '\n';
    return 1;
  }
  flush();
  return 1;
}

struct SimulateOptions {
  std::string scenario;
  std::string policy = "strict";
  std::string attacker;
  std::string format = "text";
  bool list = false;
};

int do_simulate(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out) {
  SuiteCatalog catalog = open_catalog(g);
  std::vector<Scenario> scenarios = open_scenarios(g, catalog);
  if (o.list) {
    for (const auto& s : scenarios) {
      out << s.name << "  attacker=" << format_attacker(s.sim.attacker) << "  " << s.description
          << '\n';
    }
    return 0;
  }
  if (o.scenario.empty()) throw Error(ErrorCode::kConfiguration, "--scenario is required");
  const Scenario& s = find_scenario(scenarios, o.scenario);
  auto level = parse_policy_level(o.policy);
  if (!level) throw Error(ErrorCode::kConfiguration, "policy must be strict or default");
  PolicySet policies(catalog);
  AttackerModel attacker = o.attacker.empty() ? s.sim.attacker : parse_attacker(o.attacker);
  SessionTranscript t = run_session(behavior_for(policies[*level]), s.sim.server, attacker);
  print_transcript(out, t, o.format);
  return t.established() ? 0 : 1;
}

struct ServeOptions {
  std::string listen = "127.0.0.1:8080";
  bool live = false;
  std::string static_dir;
};

int do_serve(const GlobalOptions& g, const ServeOptions& o, std::ostream& out, std::ostream& err) {
  GatewayConfig config;
  auto [host, port] = parse_listen_address(o.listen);
  config.listen_host = host;
  config.port = port;
  config.store_path = g.store;
  if (!g.catalog.empty()) config.catalog_path = g.catalog;
  if (!g.scenarios.empty()) config.scenario_path = g.scenarios;
  if (!o.static_dir.empty()) config.static_dir = o.static_dir;
  config.transport_mode = o.live ? TransportMode::kLive : TransportMode::kSimulated;
  if (o.live) {
    err << "warning: live mode subscribes sites from response headers on first use; that first "
           "response is not protected\n";
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto gateway = serve(config, cli_clock());
  out << "listening on http://" << config.listen_host << ":" << gateway->port() << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  gateway->stop();
  out << "stopped\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-domain strict TLS policy gateway", "tlsgate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  GlobalOptions g;
  g.store = env_or("TLSGATE_STORE", default_store_path());
  g.catalog = env_or("TLSGATE_CATALOG", "");
  g.scenarios = env_or("TLSGATE_SCENARIOS", "");
  app.add_option("--store", g.store, "Whitelist file")->capture_default_str();
  app.add_option("--catalog", g.catalog, "Cipher suite catalog (JSON)");
  app.add_option("--scenarios", g.scenarios, "Simulated host scenarios (JSON)");

  std::string domain;
  std::string handling = "active_warning";
  auto* add = app.add_subcommand("add", "Whitelist a domain under the strict policy");
  add->add_option("domain", domain)->required();
  add->add_option("--handling", handling, "blocking or active_warning")->capture_default_str();

  auto* rm = app.add_subcommand("rm", "Remove a domain");
  rm->add_option("domain", domain)->required();

  bool as_json = false;
  auto* ls = app.add_subcommand("ls", "List whitelisted domains");
  ls->add_flag("--json", as_json);

  auto* relax = app.add_subcommand("relax", "Set a client-side entry back to the default policy");
  relax->add_option("domain", domain)->required();

  FetchOptions fo;
  auto* fetch_cmd = app.add_subcommand("fetch", "Fetch a URL through the policy pipeline");
  fetch_cmd->add_option("url", fo.url)->required();
  fetch_cmd->add_flag("--live", fo.live, "Use real TLS instead of the simulator");
  fetch_cmd->add_option("--on-warning", fo.on_warning, "close or restore")
      ->check(CLI::IsMember({"close", "restore"}))
      ->capture_default_str();
  fetch_cmd->add_flag("--transcript", fo.transcript, "Print the handshake transcript");

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "Run one simulated handshake session");
  sim->add_option("--scenario", so.scenario);
  sim->add_option("--policy", so.policy)->check(CLI::IsMember({"strict", "default"}))
      ->capture_default_str();
  sim->add_option("--attacker", so.attacker, "none | fragmentation | drop:N | tamper:VER[:SUITE]");
  sim->add_option("--format", so.format)->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  sim->add_flag("--list", so.list, "List scenarios");

  ServeOptions sv;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP gateway");
  serve_cmd->add_option("--listen", sv.listen, "host:port")->capture_default_str();
  serve_cmd->add_flag("--live", sv.live, "Use real TLS instead of the simulator");
  serve_cmd->add_option("--static", sv.static_dir, "Directory served at /");

  std::string file;
  auto* exp = app.add_subcommand("export", "Write the whitelist document");
  exp->add_option("file", file, "Destination (stdout when omitted)");
  auto* imp = app.add_subcommand("import", "Replace the whitelist from a document");
  imp->add_option("file", file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Clock now = cli_clock();
    if (add->parsed()) {
      ErrorHandling h = handling_from_cli(handling);
      StoreLock lock(g.store);
      auto store = open_store(g.store);
      DomainEntry e = store->add_client_side(domain, now(), h);
      save_store(*store, g.store);
      out << "added ";
      print_entry(out, e);
    } else if (rm->parsed()) {
      StoreLock lock(g.store);
      auto store = open_store(g.store);
      DomainEntry e = store->remove(normalize_domain(domain));
      save_store(*store, g.store);
      out << "removed " << e.domain << '\n';
    } else if (ls->parsed()) {
      auto store = open_store(g.store);
      StoreSnapshot snap = store->snapshot();
      if (as_json) {
        nlohmann::ordered_json body;
        body["revision"] = snap.revision;
        body["entries"] = nlohmann::ordered_json::array();
        for (const auto& [d, e] : snap.entries) body["entries"].push_back(detail::entry_to_json(e));
        out << body.dump(2) << '\n';
      } else {
        for (const auto& [d, e] : snap.entries) print_entry(out, e);
      }
    } else if (relax->parsed()) {
      StoreLock lock(g.store);
      auto store = open_store(g.store);
      DomainEntry e = store->relax(normalize_domain(domain));
      save_store(*store, g.store);
      out << "relaxed ";
      print_entry(out, e);
    } else if (fetch_cmd->parsed()) {
      return do_fetch(g, fo, out, err);
    } else if (sim->parsed()) {
      return do_simulate(g, so, out);
    } else if (serve_cmd->parsed()) {
      return do_serve(g, sv, out, err);
    } else if (exp->parsed()) {
      auto store = open_store(g.store);
      std::string doc = serialize_store(store->snapshot());
      if (file.empty()) {
        out << doc;
      } else {
        std::ofstream f(file, std::ios::binary);
        if (!(f << doc)) throw Error(ErrorCode::kIo, "cannot write " + file);
      }
    } else if (imp->parsed()) {
      std::ifstream f(file, std::ios::binary);
      if (!f) throw Error(ErrorCode::kIo, "cannot read " + file);
      std::stringstream buf;
      buf << f.rdbuf();
      StoreSnapshot incoming = parse_store(buf.str());
      StoreLock lock(g.store);
      auto store = open_store(g.store);
      store->replace_entries(incoming);
      save_store(*store, g.store);
      out << "imported " << incoming.entries.size() << " entries\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kConfiguration ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace tlsgate
