#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "tlsgate/enforcement.hpp"
#include "tlsgate/events.hpp"
#include "tlsgate/policy.hpp"
#include "tlsgate/tls_model.hpp"
#include "tlsgate/transport.hpp"
#include "tlsgate/whitelist.hpp"

namespace httplib {
class Server;
}

namespace tlsgate {

inline constexpr std::string_view kVersion = "0.1.0";

using Clock = std::function<UnixSeconds()>;
UnixSeconds system_now();

enum class TransportMode { kSimulated, kLive };

struct GatewayConfig {
  std::string listen_host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port (tests)
  std::string store_path;
  std::optional<std::string> catalog_path;
  TransportMode transport_mode = TransportMode::kSimulated;
  std::optional<std::string> scenario_path;  // built-in scenarios when unset
  std::optional<std::string> static_dir;

  /// Throws Error(kConfiguration).
  void validate() const;
};

/// "host:port" with port in [1, 65535]. Throws Error(kConfiguration).
std::pair<std::string, int> parse_listen_address(std::string_view text);

// Fetch-through gateway: management API, event decisions, interstitials.
class Gateway {
 public:
  /// Loads catalog and store (a missing store file starts empty), builds the
  /// transport from the config. Throws Error on unreadable inputs.
  explicit Gateway(GatewayConfig config, Clock clock = system_now);
  /// Injects a transport directly (tests).
  Gateway(GatewayConfig config, std::unique_ptr<TransportAdapter> transport,
          Clock clock = system_now);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds and starts serving on a background thread. Throws Error(kIo)
  /// when the port cannot be bound.
  void start();
  /// Stops serving and flushes the store to disk. Idempotent.
  void stop();
  int port() const { return bound_port_; }
  bool running() const { return running_; }

  WhitelistStore& store() { return *store_; }
  EventRegistry& registry() { return registry_; }
  const GatewayConfig& config() const { return config_; }

 private:
  void install_routes();
  void persist_if_changed();

  GatewayConfig config_;
  Clock clock_;
  SuiteCatalog catalog_;
  PolicySet policies_;
  std::unique_ptr<WhitelistStore> store_;
  EventRegistry registry_;
  std::unique_ptr<TransportAdapter> transport_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<bool> running_{false};
  int bound_port_ = 0;
  std::mutex persist_mutex_;
  std::uint64_t persisted_revision_ = 0;
};

/// Validates the config and starts a gateway.
std::unique_ptr<Gateway> serve(GatewayConfig config, Clock clock = system_now);

}  // namespace tlsgate
