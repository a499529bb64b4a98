#include "tlsgate/gateway.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>

#include "httplib.h"
#include "json_codec.hpp"
#include "tlsgate/domain.hpp"
#include "tlsgate/error.hpp"
#include "tlsgate/scenario.hpp"

namespace tlsgate {

namespace {

using nlohmann::ordered_json;

constexpr const char* kJson = "application/json";
constexpr const char* kHtml = "text/html; charset=utf-8";

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kDuplicate:
    case ErrorCode::kReplay:
    case ErrorCode::kState: return 409;
    case ErrorCode::kNormalization:
    case ErrorCode::kValidation: return 422;
    case ErrorCode::kParse: return 400;
    case ErrorCode::kTransport: return 502;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, const Error& e) {
  ordered_json body;
  body["error"] = to_string(e.code());
  body["message"] = e.what();
  send_json(res, http_status(e.code()), body);
}

std::string html_escape(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string page(const std::string& title, const std::string& body) {
  return "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>" + html_escape(title) +
         "</title></head>\n<body>\n" + body + "\n</body></html>\n";
}

std::string payload_script(const WarningEvent& event) {
  std::string json = render_error_payload(event);
  // Keep "</script>" out of the inline document.
  std::string safe;
  for (char c : json) {
    if (c == '<') safe += "\\u003c";
    else safe.push_back(c);
  }
  return "<script type=\"application/json\" id=\"tlsgate-payload\">" + safe + "</script>";
}

std::string block_page(const WarningEvent& event) {
  std::string body = "<h1>Connection blocked</h1>\n<p>" + html_escape(event.domain) +
                     " requires the strict TLS policy, but the connection to " +
                     html_escape(event.url) + " could not meet it (" +
                     std::string(error_code(event.kind)) +
                     "). This site cannot be reached until the policy allows it.</p>\n" +
                     payload_script(event);
  return page("Connection blocked", body);
}

std::string warning_page(const WarningEvent& event) {
  std::string id = std::to_string(event.id);
  std::string token = event.token ? event.token->value : "";
  std::string body =
      "<h1>Secure connection could not be established</h1>\n<p>" + html_escape(event.domain) +
      " is set to the strict TLS policy, but " + html_escape(event.url) +
      " offered weaker settings (" + std::string(error_code(event.kind)) +
      "). Someone may be interfering with the connection.</p>\n"
      "<form method=\"post\" action=\"/interstitial/" + id + "/restore\">"
      "<input type=\"hidden\" name=\"token\" value=\"" + html_escape(token) + "\">"
      "<button type=\"submit\">Restore Defaults</button></form>\n"
      "<form method=\"post\" action=\"/interstitial/" + id + "/close\">"
      "<button type=\"submit\">Close</button></form>\n" +
      payload_script(event);
  return page("Warning", body);
}

std::uint64_t parse_id(const std::string& text) {
  std::uint64_t id = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kNotFound, "no event '" + text + "'");
  }
  return id;
}

bool wants_json(const httplib::Request& req) {
  return req.get_header_value("Accept").find("application/json") != std::string::npos ||
         req.get_param_value("format") == "json";
}

std::unique_ptr<TransportAdapter> make_transport(const GatewayConfig& config,
                                                 const SuiteCatalog& catalog) {
  if (config.transport_mode == TransportMode::kLive) return std::make_unique<LiveTransport>();
  std::vector<Scenario> scenarios =
      config.scenario_path ? load_scenarios_file(*config.scenario_path, catalog)
                           : load_scenarios(default_scenarios_document(), catalog);
  return std::make_unique<SimulatedTransport>(make_simulated_transport(scenarios));
}

SuiteCatalog load_config_catalog(const GatewayConfig& config) {
  return config.catalog_path ? load_catalog_file(*config.catalog_path) : default_catalog();
}

std::unique_ptr<WhitelistStore> open_store(const std::string& path) {
  if (path.empty() || !std::filesystem::exists(path)) return std::make_unique<WhitelistStore>();
  return std::make_unique<WhitelistStore>(load_store(path));
}

}  // namespace

UnixSeconds system_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::pair<std::string, int> parse_listen_address(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::kConfiguration, "listen address must be host:port");
  }
  std::string_view port_text = text.substr(colon + 1);
  int port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 1 || port > 65535) {
    throw Error(ErrorCode::kConfiguration, "port must be in [1, 65535]");
  }
  return {std::string(text.substr(0, colon)), port};
}

void GatewayConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorCode::kConfiguration, "port must be in [1, 65535]");
  if (store_path.empty()) throw Error(ErrorCode::kConfiguration, "store path is required");
  if (catalog_path && !std::filesystem::exists(*catalog_path)) {
    throw Error(ErrorCode::kConfiguration, "catalog '" + *catalog_path + "' does not exist");
  }
  if (scenario_path && !std::filesystem::exists(*scenario_path)) {
    throw Error(ErrorCode::kConfiguration, "scenario file '" + *scenario_path + "' does not exist");
  }
  if (static_dir && !std::filesystem::is_directory(*static_dir)) {
    throw Error(ErrorCode::kConfiguration, "static directory '" + *static_dir + "' does not exist");
  }
}

Gateway::Gateway(GatewayConfig config, Clock clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      catalog_(load_config_catalog(config_)),
      policies_(catalog_),
      store_(open_store(config_.store_path)) {
  transport_ = make_transport(config_, catalog_);
  persisted_revision_ = store_->revision();
}

Gateway::Gateway(GatewayConfig config, std::unique_ptr<TransportAdapter> transport, Clock clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      catalog_(load_config_catalog(config_)),
      policies_(catalog_),
      store_(open_store(config_.store_path)),
      transport_(std::move(transport)) {
  persisted_revision_ = store_->revision();
}

Gateway::~Gateway() { stop(); }

void Gateway::persist_if_changed() {
  if (config_.store_path.empty()) return;
  std::lock_guard lock(persist_mutex_);
  std::uint64_t rev = store_->revision();
  if (rev == persisted_revision_) return;
  save_store(*store_, config_.store_path);
  persisted_revision_ = rev;
}

void Gateway::install_routes() {
  httplib::Server& srv = *server_;

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                               std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_json(res, 500, ordered_json{{"error", "internal"}, {"message", e.what()}});
    }
  });

  srv.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              ordered_json{{"version", kVersion}, {"transport_mode", transport_->mode()}});
  });

  srv.Get("/api/whitelist", [this](const httplib::Request&, httplib::Response& res) {
    StoreSnapshot snap = store_->snapshot();
    ordered_json body;
    body["revision"] = snap.revision;
    body["entries"] = ordered_json::array();
    for (const auto& [domain, entry] : snap.entries) {
      body["entries"].push_back(detail::entry_to_json(entry));
    }
    send_json(res, 200, body);
  });

  srv.Post("/api/whitelist", [this](const httplib::Request& req, httplib::Response& res) {
    ordered_json body = ordered_json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("domain") ||
        !body["domain"].is_string()) {
      throw Error(ErrorCode::kValidation, "body must be {\"domain\": string, \"handling\"?: string}");
    }
    ErrorHandling handling = ErrorHandling::kActiveWarning;
    if (body.contains("handling")) {
      auto h = body["handling"].is_string()
                   ? parse_error_handling(body["handling"].get<std::string>())
                   : std::nullopt;
      if (!h) throw Error(ErrorCode::kValidation, "handling must be blocking or active_warning");
      handling = *h;
    }
    DomainEntry entry =
        store_->add_client_side(body["domain"].get<std::string>(), clock_(), handling);
    persist_if_changed();
    res.set_header("ETag", std::to_string(store_->revision()));
    send_json(res, 201, detail::entry_to_json(entry));
  });

  srv.Delete(R"(/api/whitelist/([^/]+))", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
    store_->remove(req.matches[1].str());
    persist_if_changed();
    res.status = 204;
  });

  srv.Post(R"(/api/whitelist/([^/]+)/relax)", [this](const httplib::Request& req,
                                                     httplib::Response& res) {
    DomainEntry entry = store_->relax(req.matches[1].str());
    persist_if_changed();
    res.set_header("ETag", std::to_string(store_->revision()));
    send_json(res, 200, detail::entry_to_json(entry));
  });

  srv.Get("/api/events", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<EventStatus> filter;
    if (req.has_param("status")) {
      filter = parse_event_status(req.get_param_value("status"));
      if (!filter) throw Error(ErrorCode::kValidation, "unknown status filter");
    }
    ordered_json body;
    body["events"] = ordered_json::array();
    for (const auto& e : registry_.list(filter)) body["events"].push_back(detail::event_to_json(e));
    send_json(res, 200, body);
  });

  srv.Post(R"(/api/events/(\d+)/bypass)", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
    std::uint64_t id = parse_id(req.matches[1].str());
    ordered_json body = ordered_json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("token") ||
        !body["token"].is_string()) {
      throw Error(ErrorCode::kValidation, "body must be {\"token\": string}");
    }
    RetryDirective d = bypass(*store_, registry_, body["token"].get<std::string>(), id);
    persist_if_changed();
    send_json(res, 200,
              ordered_json{{"event_id", d.event_id},
                           {"domain", d.domain},
                           {"new_level", to_string(d.new_level)},
                           {"url", d.url},
                           {"retry_url", "/fetch?url=" + httplib::detail::encode_query_param(d.url)}});
  });

  srv.Post(R"(/api/events/(\d+)/close)", [this](const httplib::Request& req,
                                                httplib::Response& res) {
    WarningEvent e = close_event(registry_, parse_id(req.matches[1].str()));
    send_json(res, 200, detail::event_to_json(e));
  });

  srv.Get("/fetch", [this](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("url")) throw Error(ErrorCode::kParse, "missing url parameter");
    std::string url = req.get_param_value("url");
    FetchResult result = fetch(*store_, registry_, policies_, url, *transport_, clock_());
    persist_if_changed();
    bool json = wants_json(req);

    if (auto* ok = std::get_if<FetchSuccess>(&result)) {
      ordered_json body;
      body["result"] = "success";
      body["url"] = ok->url;
      body["policy"] = to_string(ok->level);
      body["matched_domain"] = ok->matched ? ordered_json(*ok->matched) : ordered_json(nullptr);
      body["version"] = to_string(ok->version);
      const CipherSuite* suite = catalog_.find(ok->suite);
      body["suite"] = suite ? suite->name : format_suite_id(ok->suite);
      body["upstream_status"] = ok->status;
      body["subscribed"] = ok->subscribed.has_value();
      send_json(res, 200, body);
    } else if (auto* blocked = std::get_if<FetchBlocked>(&result)) {
      res.status = 451;
      if (json) res.set_content(render_error_payload(blocked->event), kJson);
      else res.set_content(block_page(blocked->event), kHtml);
    } else if (auto* warned = std::get_if<FetchWarned>(&result)) {
      res.status = 409;
      if (json) res.set_content(render_error_payload(warned->event), kJson);
      else res.set_content(warning_page(warned->event), kHtml);
    } else {
      const auto& failed = std::get<FetchFailed>(result);
      send_json(res, 502, ordered_json{{"result", "failed"}, {"url", url}, {"error", failed.reason}});
    }
  });

  srv.Post(R"(/interstitial/(\d+)/restore)", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
    std::uint64_t id = parse_id(req.matches[1].str());
    RetryDirective d = bypass(*store_, registry_, req.get_param_value("token"), id);
    persist_if_changed();
    res.set_redirect("/fetch?url=" + httplib::detail::encode_query_param(d.url), 303);
  });

  srv.Post(R"(/interstitial/(\d+)/close)", [this](const httplib::Request& req,
                                                  httplib::Response& res) {
    WarningEvent e = close_event(registry_, parse_id(req.matches[1].str()));
    res.set_content(page("Closed", "<p>The connection to " + html_escape(e.domain) +
                                       " was not made. Its policy is unchanged.</p>"),
                    kHtml);
  });

  if (config_.static_dir) srv.set_mount_point("/", *config_.static_dir);
}

void Gateway::start() {
  if (running_) return;
  server_ = std::make_unique<httplib::Server>();
  // No SO_REUSEPORT: a second gateway on a busy port must fail to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  install_routes();
  if (config_.port == 0) {
    bound_port_ = server_->bind_to_any_port(config_.listen_host);
  } else {
    bound_port_ = server_->bind_to_port(config_.listen_host, config_.port) ? config_.port : -1;
  }
  if (bound_port_ <= 0) {
    server_.reset();
    throw Error(ErrorCode::kIo, "cannot listen on " + config_.listen_host + ":" +
                                    std::to_string(config_.port));
  }
  running_ = true;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void Gateway::stop() {
  if (running_.exchange(false)) {
    server_->stop();
    if (thread_.joinable()) thread_.join();
  }
  if (!config_.store_path.empty()) {
    std::lock_guard lock(persist_mutex_);
    if (store_->revision() != persisted_revision_ || !std::filesystem::exists(config_.store_path)) {
      save_store(*store_, config_.store_path);
      persisted_revision_ = store_->revision();
    }
  }
}

std::unique_ptr<Gateway> serve(GatewayConfig config, Clock clock) {
  config.validate();
  auto gw = std::make_unique<Gateway>(std::move(config), std::move(clock));
  gw->start();
  return gw;
}

}  // namespace tlsgate
