#include "tlsgate/whitelist.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "json_codec.hpp"
#include "tlsgate/domain.hpp"
#include "tlsgate/error.hpp"

namespace tlsgate {

std::string_view to_string(ErrorHandling h) {
  return h == ErrorHandling::kBlocking ? "blocking" : "active_warning";
}

std::string_view to_string(SubscriptionSource s) {
  return s == SubscriptionSource::kClientSide ? "client" : "header";
}

std::optional<ErrorHandling> parse_error_handling(std::string_view text) {
  if (text == "blocking") return ErrorHandling::kBlocking;
  if (text == "active_warning") return ErrorHandling::kActiveWarning;
  return std::nullopt;
}

std::optional<SubscriptionSource> parse_subscription_source(std::string_view text) {
  if (text == "client") return SubscriptionSource::kClientSide;
  if (text == "header") return SubscriptionSource::kServerHeader;
  return std::nullopt;
}

void validate_entry(const DomainEntry& entry) {
  std::string normalized;
  try {
    normalized = normalize_domain(entry.domain);
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidation, e.what());
  }
  if (normalized != entry.domain) {
    throw Error(ErrorCode::kValidation, "domain '" + entry.domain + "' is not normalized");
  }
  if (entry.source == SubscriptionSource::kServerHeader &&
      entry.handling != ErrorHandling::kBlocking) {
    throw Error(ErrorCode::kValidation,
                "header subscription for '" + entry.domain + "' must use blocking");
  }
  if (entry.expires_at && *entry.expires_at <= entry.added_at) {
    throw Error(ErrorCode::kValidation, "entry '" + entry.domain + "' expires before it was added");
  }
}

WhitelistStore::WhitelistStore(StoreSnapshot snapshot) : state_(std::move(snapshot)) {
  for (const auto& [domain, entry] : state_.entries) {
    validate_entry(entry);
    if (domain != entry.domain) {
      throw Error(ErrorCode::kValidation, "store key '" + domain + "' does not match its entry");
    }
  }
}

DomainEntry WhitelistStore::add_client_side(std::string_view domain, UnixSeconds now,
                                            ErrorHandling handling) {
  DomainEntry entry;
  entry.domain = normalize_domain(domain);
  entry.level = PolicyLevel::kStrict;
  entry.handling = handling;
  entry.source = SubscriptionSource::kClientSide;
  entry.added_at = now;

  std::unique_lock lock(mutex_);
  if (state_.entries.contains(entry.domain)) {
    throw Error(ErrorCode::kDuplicate,
                "domain '" + entry.domain + "' is already whitelisted; remove it first");
  }
  state_.entries.emplace(entry.domain, entry);
  ++state_.revision;
  return entry;
}

std::optional<DomainEntry> WhitelistStore::subscribe_from_header(std::string_view host,
                                                                 const HeaderDirective& directive,
                                                                 UnixSeconds now) {
  if (!directive.present) {
    throw Error(ErrorCode::kContract, "subscribe_from_header needs a present directive");
  }
  DomainEntry entry;
  entry.domain = normalize_domain(host);
  entry.level = PolicyLevel::kStrict;
  entry.handling = ErrorHandling::kBlocking;
  entry.source = SubscriptionSource::kServerHeader;
  entry.added_at = now;
  if (directive.max_age_seconds) {
    if (*directive.max_age_seconds == 0) return std::nullopt;
    entry.expires_at = now + static_cast<UnixSeconds>(*directive.max_age_seconds);
  }

  std::unique_lock lock(mutex_);
  if (state_.entries.contains(entry.domain)) return std::nullopt;
  state_.entries.emplace(entry.domain, entry);
  ++state_.revision;
  return entry;
}

std::optional<DomainEntry> WhitelistStore::lookup(std::string_view host) const {
  std::string name;
  try {
    name = normalize_domain(host);
  } catch (const Error&) {
    return std::nullopt;
  }
  std::shared_lock lock(mutex_);
  // Walk suffixes from the full host downward so the first hit is the longest.
  std::string_view candidate = name;
  while (true) {
    if (auto it = state_.entries.find(std::string(candidate)); it != state_.entries.end()) {
      return it->second;
    }
    auto dot = candidate.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    candidate.remove_prefix(dot + 1);
  }
}

std::optional<DomainEntry> WhitelistStore::get(std::string_view domain) const {
  std::shared_lock lock(mutex_);
  auto it = state_.entries.find(std::string(domain));
  if (it == state_.entries.end()) return std::nullopt;
  return it->second;
}

DomainEntry WhitelistStore::relax(std::string_view domain) {
  std::string key = normalize_domain(domain);
  std::unique_lock lock(mutex_);
  auto it = state_.entries.find(key);
  if (it == state_.entries.end()) {
    throw Error(ErrorCode::kNotFound, "domain '" + key + "' is not whitelisted");
  }
  if (it->second.source == SubscriptionSource::kServerHeader) {
    throw Error(ErrorCode::kState, "domain '" + key +
                                       "' was subscribed by its server and cannot be relaxed");
  }
  it->second.level = PolicyLevel::kDefault;
  ++state_.revision;
  return it->second;
}

DomainEntry WhitelistStore::remove(std::string_view domain) {
  std::string key = normalize_domain(domain);
  std::unique_lock lock(mutex_);
  auto it = state_.entries.find(key);
  if (it == state_.entries.end()) {
    throw Error(ErrorCode::kNotFound, "domain '" + key + "' is not whitelisted");
  }
  DomainEntry removed = std::move(it->second);
  state_.entries.erase(it);
  ++state_.revision;
  return removed;
}

std::vector<std::string> WhitelistStore::purge_expired(UnixSeconds now) {
  std::vector<std::string> removed;
  std::unique_lock lock(mutex_);
  for (auto it = state_.entries.begin(); it != state_.entries.end();) {
    if (it->second.expires_at && *it->second.expires_at <= now) {
      removed.push_back(it->first);
      it = state_.entries.erase(it);
    } else {
      ++it;
    }
  }
  if (!removed.empty()) ++state_.revision;
  return removed;
}

void WhitelistStore::replace_entries(const StoreSnapshot& incoming) {
  for (const auto& [domain, entry] : incoming.entries) {
    validate_entry(entry);
    if (domain != entry.domain) {
      throw Error(ErrorCode::kValidation, "store key '" + domain + "' does not match its entry");
    }
  }
  std::unique_lock lock(mutex_);
  state_.entries = incoming.entries;
  ++state_.revision;
}

StoreSnapshot WhitelistStore::snapshot() const {
  std::shared_lock lock(mutex_);
  return state_;
}

std::uint64_t WhitelistStore::revision() const {
  std::shared_lock lock(mutex_);
  return state_.revision;
}

std::size_t WhitelistStore::size() const {
  std::shared_lock lock(mutex_);
  return state_.entries.size();
}

using nlohmann::ordered_json;

ordered_json detail::entry_to_json(const DomainEntry& e) {
  ordered_json j;
  j["domain"] = e.domain;
  j["level"] = to_string(e.level);
  j["handling"] = to_string(e.handling);
  j["source"] = to_string(e.source);
  j["added_at"] = e.added_at;
  if (e.expires_at) j["expires_at"] = *e.expires_at;
  return j;
}

namespace {

DomainEntry entry_from_json(const ordered_json& j, std::size_t index) {
  std::string label = "record " + std::to_string(index);
  if (j.is_object() && j.contains("domain") && j["domain"].is_string()) {
    label += " (" + j["domain"].get<std::string>() + ")";
  }
  auto fail = [&label](const std::string& why) {
    return Error(ErrorCode::kParse, "whitelist " + label + ": " + why);
  };
  if (!j.is_object()) throw fail("not an object");
  for (const char* key : {"domain", "level", "handling", "source"}) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw fail(std::string("missing or non-string '") + key + "'");
    }
  }
  if (!j.contains("added_at") || !j["added_at"].is_number_integer()) {
    throw fail("missing or non-integer 'added_at'");
  }
  DomainEntry e;
  e.domain = j["domain"].get<std::string>();
  auto level = parse_policy_level(j["level"].get<std::string>());
  auto handling = parse_error_handling(j["handling"].get<std::string>());
  auto source = parse_subscription_source(j["source"].get<std::string>());
  if (!level) throw fail("bad level");
  if (!handling) throw fail("bad handling");
  if (!source) throw fail("bad source");
  e.level = *level;
  e.handling = *handling;
  e.source = *source;
  e.added_at = j["added_at"].get<UnixSeconds>();
  if (j.contains("expires_at") && !j["expires_at"].is_null()) {
    if (!j["expires_at"].is_number_integer()) throw fail("non-integer 'expires_at'");
    e.expires_at = j["expires_at"].get<UnixSeconds>();
  }
  try {
    validate_entry(e);
  } catch (const Error& err) {
    throw Error(ErrorCode::kValidation, "whitelist " + label + ": " + err.what());
  }
  return e;
}

}  // namespace

std::string serialize_store(const StoreSnapshot& snapshot) {
  ordered_json doc;
  doc["schema_version"] = kStoreSchemaVersion;
  doc["revision"] = snapshot.revision;
  doc["entries"] = ordered_json::array();
  for (const auto& [domain, entry] : snapshot.entries) {
    doc["entries"].push_back(detail::entry_to_json(entry));
  }
  return doc.dump(2) + "\n";
}

StoreSnapshot parse_store(std::string_view document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("whitelist is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "whitelist document must be an object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    throw Error(ErrorCode::kSchemaVersion, "whitelist document has no schema_version");
  }
  if (doc["schema_version"].get<int>() != kStoreSchemaVersion) {
    throw Error(ErrorCode::kSchemaVersion,
                "unsupported whitelist schema_version " + doc["schema_version"].dump());
  }
  StoreSnapshot snap;
  if (doc.contains("revision")) {
    if (!doc["revision"].is_number_unsigned()) {
      throw Error(ErrorCode::kParse, "whitelist 'revision' must be a non-negative integer");
    }
    snap.revision = doc["revision"].get<std::uint64_t>();
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(ErrorCode::kParse, "whitelist document has no 'entries' array");
  }
  const auto& list = doc["entries"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    DomainEntry e = entry_from_json(list[i], i);
    std::string key = e.domain;
    if (!snap.entries.emplace(key, std::move(e)).second) {
      throw Error(ErrorCode::kValidation,
                  "whitelist record " + std::to_string(i) + ": duplicate domain '" + key + "'");
    }
  }
  return snap;
}

void save_store(const WhitelistStore& store, const std::string& path) {
  std::string text = serialize_store(store.snapshot());
  std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
  }
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace '" + path + "': " + ec.message());
}

StoreSnapshot load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open whitelist '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_store(buf.str());
}

}  // namespace tlsgate
