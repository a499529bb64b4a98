#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "test_support.hpp"
#include "tlsgate/error.hpp"
#include "tlsgate/gateway.hpp"

namespace tlsgate {
namespace {

using nlohmann::json;

constexpr UnixSeconds kNow = 1700000000;

class GatewayTest : public ::testing::Test {
 protected:
  void SetUp() override { start(); }
  void TearDown() override { gateway_->stop(); }

  void start() {
    GatewayConfig c;
    c.port = 0;
    c.store_path = dir_.file("store.json");
    gateway_ = std::make_unique<Gateway>(c, [this] { return now_.load(); });
    gateway_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", gateway_->port());
  }

  httplib::Result post(const std::string& path, const json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }
  httplib::Result get_json(const std::string& path) {
    return client_->Get(path, {{"Accept", "application/json"}});
  }
  json whitelist() { return json::parse(client_->Get("/api/whitelist")->body); }

  testing::TempDir dir_;
  std::atomic<UnixSeconds> now_{kNow};
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(GatewayTest, Health) {
  auto r = client_->Get("/api/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  auto j = json::parse(r->body);
  EXPECT_EQ(j["version"], std::string(kVersion));
  EXPECT_EQ(j["transport_mode"], "simulated");
}

TEST_F(GatewayTest, WhitelistCrud) {
  auto r = post("/api/whitelist", {{"domain", "HTTPS://Bank.Example/x"}, {"handling", "blocking"}});
  ASSERT_EQ(r->status, 201);
  auto e = json::parse(r->body);
  EXPECT_EQ(e["domain"], "bank.example");
  EXPECT_EQ(e["level"], "strict");
  EXPECT_EQ(e["handling"], "blocking");
  EXPECT_EQ(e["source"], "client");
  EXPECT_EQ(e["added_at"], kNow);

  EXPECT_EQ(post("/api/whitelist", {{"domain", "bank.example"}})->status, 409);
  auto bad = post("/api/whitelist", {{"domain", "not a domain"}});
  EXPECT_EQ(bad->status, 422);
  EXPECT_EQ(json::parse(bad->body)["error"], "normalization");
  EXPECT_EQ(post("/api/whitelist", {{"domain", "x.example"}, {"handling", "warn"}})->status, 422);
  EXPECT_EQ(client_->Post("/api/whitelist", "{", "application/json")->status, 422);

  auto list = whitelist();
  EXPECT_EQ(list["revision"], 1);
  ASSERT_EQ(list["entries"].size(), 1u);

  auto relax = client_->Post("/api/whitelist/bank.example/relax");
  ASSERT_EQ(relax->status, 200);
  EXPECT_EQ(json::parse(relax->body)["level"], "default");
  EXPECT_EQ(client_->Post("/api/whitelist/none.example/relax")->status, 404);

  EXPECT_EQ(client_->Delete("/api/whitelist/bank.example")->status, 204);
  EXPECT_EQ(client_->Delete("/api/whitelist/bank.example")->status, 404);
  EXPECT_EQ(whitelist()["entries"].size(), 0u);
}

TEST_F(GatewayTest, HeaderEntryCannotBeRelaxed) {
  ASSERT_EQ(client_->Get("/fetch?url=https://secure.example/")->status, 200);
  auto r = client_->Post("/api/whitelist/secure.example/relax");
  EXPECT_EQ(r->status, 409);
  EXPECT_EQ(json::parse(r->body)["error"], "state");
}

TEST_F(GatewayTest, FetchSuccessJson) {
  auto r = client_->Get("/fetch?url=https%3A%2F%2Fmodern.example%2F");
  ASSERT_EQ(r->status, 200);
  auto j = json::parse(r->body);
  EXPECT_EQ(j["result"], "success");
  EXPECT_EQ(j["policy"], "default");
  EXPECT_EQ(j["version"], "TLS1.3");
  EXPECT_EQ(j["suite"], "TLS_AES_128_GCM_SHA256");
  EXPECT_EQ(j["upstream_status"], 200);
  EXPECT_EQ(j["subscribed"], false);
}

TEST_F(GatewayTest, FetchErrors) {
  EXPECT_EQ(client_->Get("/fetch")->status, 400);
  EXPECT_EQ(client_->Get("/fetch?url=https://nohost/")->status, 400);
  auto r = client_->Get("/fetch?url=https://unknown.example/");
  EXPECT_EQ(r->status, 502);
  EXPECT_EQ(json::parse(r->body)["error"], "transport");
}

TEST_F(GatewayTest, BlockPage) {
  post("/api/whitelist", {{"domain", "bank.example"}, {"handling", "blocking"}});
  auto html = client_->Get("/fetch?url=https://bank.example/");
  EXPECT_EQ(html->status, 451);
  EXPECT_NE(html->get_header_value("Content-Type").find("text/html"), std::string::npos);
  EXPECT_NE(html->body.find("SSL_ERROR_UNSUPPORTED_VERSION"), std::string::npos);
  EXPECT_EQ(html->body.find("Restore Defaults"), std::string::npos);

  auto j = json::parse(get_json("/fetch?url=https://bank.example/")->body);
  EXPECT_EQ(j["status"], "blocked");
  EXPECT_FALSE(j.contains("bypass_token"));
  auto events = json::parse(client_->Get("/api/events?status=blocked")->body)["events"];
  EXPECT_EQ(events.size(), 2u);
  EXPECT_EQ(whitelist()["entries"][0]["level"], "strict");
}

TEST_F(GatewayTest, WarningRestoreFlow) {
  post("/api/whitelist", {{"domain", "bank.example"}});
  auto page = client_->Get("/fetch?url=https://bank.example/");
  ASSERT_EQ(page->status, 409);
  EXPECT_NE(page->body.find("Restore Defaults"), std::string::npos);
  EXPECT_NE(page->body.find("Close"), std::string::npos);

  auto pending = json::parse(client_->Get("/api/events?status=pending")->body)["events"];
  ASSERT_EQ(pending.size(), 1u);
  std::string token = pending[0]["bypass_token"];
  std::uint64_t id = pending[0]["id"];
  EXPECT_NE(page->body.find(token), std::string::npos);
  EXPECT_EQ(pending[0]["error_code"], "SSL_ERROR_UNSUPPORTED_VERSION");

  std::string base = "/api/events/" + std::to_string(id);
  EXPECT_EQ(post(base + "/bypass", {{"token", "ffff"}})->status, 404);
  EXPECT_EQ(post("/api/events/999/bypass", {{"token", token}})->status, 404);
  auto ok = post(base + "/bypass", {{"token", token}});
  ASSERT_EQ(ok->status, 200);
  auto d = json::parse(ok->body);
  EXPECT_EQ(d["domain"], "bank.example");
  EXPECT_EQ(d["new_level"], "default");
  EXPECT_EQ(d["url"], "https://bank.example/");
  auto again = post(base + "/bypass", {{"token", token}});
  EXPECT_EQ(again->status, 409);
  EXPECT_EQ(json::parse(again->body)["error"], "replay");

  EXPECT_EQ(whitelist()["entries"][0]["level"], "default");
  auto retry = client_->Get(d["retry_url"].get<std::string>());
  ASSERT_EQ(retry->status, 200);
  EXPECT_EQ(json::parse(retry->body)["version"], "TLS1.0");
  auto bypassed = json::parse(client_->Get("/api/events?status=bypassed")->body)["events"];
  ASSERT_EQ(bypassed.size(), 1u);
  EXPECT_FALSE(bypassed[0].contains("bypass_token"));
  EXPECT_EQ(client_->Get("/api/events?status=weird")->status, 422);
}

TEST_F(GatewayTest, WarningCloseFlow) {
  post("/api/whitelist", {{"domain", "bank.example"}});
  auto j = json::parse(get_json("/fetch?url=https://bank.example/")->body);
  std::uint64_t id = j["event_id"];
  std::string token = j["bypass_token"];
  std::string base = "/api/events/" + std::to_string(id);
  auto closed = client_->Post(base + "/close");
  ASSERT_EQ(closed->status, 200);
  EXPECT_EQ(json::parse(closed->body)["status"], "closed");
  EXPECT_EQ(client_->Post(base + "/close")->status, 409);
  EXPECT_EQ(post(base + "/bypass", {{"token", token}})->status, 409);
  EXPECT_EQ(client_->Post("/api/events/4242/close")->status, 404);
  EXPECT_EQ(whitelist()["entries"][0]["level"], "strict");
}

TEST_F(GatewayTest, InterstitialForms) {
  post("/api/whitelist", {{"domain", "bank.example"}});
  auto j = json::parse(get_json("/fetch?url=https://bank.example/")->body);
  std::string id = std::to_string(j["event_id"].get<std::uint64_t>());
  httplib::Params form{{"token", j["bypass_token"].get<std::string>()}};
  auto r = client_->Post("/interstitial/" + id + "/restore", form);
  ASSERT_EQ(r->status, 303);
  EXPECT_EQ(r->get_header_value("Location"), "/fetch?url=https%3A%2F%2Fbank.example%2F");

  post("/api/whitelist", {{"domain", "portal.example"}});
  auto j2 = json::parse(get_json("/fetch?url=https://portal.example/")->body);
  std::string id2 = std::to_string(j2["event_id"].get<std::uint64_t>());
  auto c = client_->Post("/interstitial/" + id2 + "/close");
  EXPECT_EQ(c->status, 200);
  EXPECT_EQ(whitelist()["entries"][1]["level"], "strict");
}

TEST_F(GatewayTest, WarningPageEscapesUrl) {
  post("/api/whitelist", {{"domain", "bank.example"}});
  auto page = client_->Get("/fetch?url=" +
                           httplib::detail::encode_query_param("https://bank.example/<script>x"));
  ASSERT_EQ(page->status, 409);
  EXPECT_EQ(page->body.find("<script>x"), std::string::npos);
  EXPECT_NE(page->body.find("&lt;script&gt;x"), std::string::npos);
}

TEST_F(GatewayTest, PersistsAcrossRestart) {
  post("/api/whitelist", {{"domain", "bank.example"}, {"handling", "blocking"}});
  post("/api/whitelist", {{"domain", "mail.example.com"}});
  client_->Post("/api/whitelist/mail.example.com/relax");
  StoreSnapshot before = gateway_->store().snapshot();
  StoreSnapshot on_disk = load_store(dir_.file("store.json"));
  EXPECT_EQ(on_disk, before);
  gateway_->stop();
  gateway_.reset();
  start();
  EXPECT_EQ(gateway_->store().snapshot(), before);
  EXPECT_EQ(whitelist()["revision"], 3);
}

TEST_F(GatewayTest, ExpiredSubscriptionDisappears) {
  ASSERT_EQ(client_->Get("/fetch?url=https://shortlived.example/")->status, 200);
  EXPECT_EQ(whitelist()["entries"].size(), 1u);
  now_ = kNow + 1;
  auto r = json::parse(client_->Get("/fetch?url=https://shortlived.example/")->body);
  EXPECT_EQ(r["policy"], "default");
  EXPECT_EQ(r["subscribed"], true);
}

TEST_F(GatewayTest, ParallelAddsAreAllRecorded) {
  constexpr int kThreads = 8;
  constexpr int kEach = 10;
  std::atomic<int> created{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", gateway_->port());
      for (int i = 0; i < kEach; ++i) {
        json body{{"domain", "h" + std::to_string(t) + "-" + std::to_string(i) + ".example"}};
        auto r = c.Post("/api/whitelist", body.dump(), "application/json");
        if (r && r->status == 201) ++created;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(created, kThreads * kEach);
  EXPECT_EQ(whitelist()["revision"], kThreads * kEach);
  gateway_->stop();
  EXPECT_EQ(load_store(dir_.file("store.json")).entries.size(),
            static_cast<std::size_t>(kThreads * kEach));
}

TEST(GatewayConfigTest, Validation) {
  EXPECT_EQ(parse_listen_address("0.0.0.0:9000"), (std::pair<std::string, int>{"0.0.0.0", 9000}));
  for (const char* bad : {"9000", ":9000", "host:", "host:0", "host:70000", "host:x"}) {
    EXPECT_THROW(parse_listen_address(bad), Error) << bad;
  }
  GatewayConfig c;
  EXPECT_THROW(c.validate(), Error);
  c.store_path = "/tmp/x.json";
  EXPECT_NO_THROW(c.validate());
  c.static_dir = "/nonexistent/dir";
  EXPECT_THROW(c.validate(), Error);
}

TEST(GatewayBind, PortInUseIsIoError) {
  testing::TempDir dir;
  GatewayConfig c;
  c.port = 0;
  c.store_path = dir.file("a.json");
  Gateway first(c);
  first.start();
  GatewayConfig c2 = c;
  c2.port = first.port();
  c2.store_path = dir.file("b.json");
  Gateway second(c2);
  try {
    second.start();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  EXPECT_FALSE(second.running());
}

}  // namespace
}  // namespace tlsgate

namespace tlsgate {
namespace {

TEST(GatewayStartup, CorruptStoreFails) {
  testing::TempDir dir;
  std::ofstream(dir.file("store.json")) << "{ not json";
  GatewayConfig c;
  c.port = 0;
  c.store_path = dir.file("store.json");
  EXPECT_THROW(serve(c), Error);
}

TEST(GatewayStartup, EmptyStoreListsNothing) {
  testing::TempDir dir;
  GatewayConfig c;
  c.port = 0;
  c.store_path = dir.file("fresh/store.json");
  auto gw = serve(c);
  httplib::Client client("127.0.0.1", gw->port());
  auto j = nlohmann::json::parse(client.Get("/api/whitelist")->body);
  EXPECT_EQ(j["revision"], 0);
  EXPECT_TRUE(j["entries"].empty());
  gw->stop();
  EXPECT_TRUE(std::filesystem::exists(dir.file("fresh/store.json")));
}

}  // namespace
}  // namespace tlsgate
