#include "tlsgate/events.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <array>

#include "json_codec.hpp"
#include "tlsgate/error.hpp"

namespace tlsgate {

std::string_view error_code(ErrorKind kind) {
  return kind == ErrorKind::kUnsupportedVersion ? "SSL_ERROR_UNSUPPORTED_VERSION"
                                                : "SSL_ERROR_NO_CYPHER_OVERLAP";
}

std::optional<ErrorKind> parse_error_code(std::string_view code) {
  if (code == "SSL_ERROR_UNSUPPORTED_VERSION") return ErrorKind::kUnsupportedVersion;
  if (code == "SSL_ERROR_NO_CYPHER_OVERLAP") return ErrorKind::kNoCipherOverlap;
  return std::nullopt;
}

std::string_view to_string(EventStatus status) {
  switch (status) {
    case EventStatus::kPending: return "pending";
    case EventStatus::kBypassed: return "bypassed";
    case EventStatus::kClosed: return "closed";
    case EventStatus::kBlocked: return "blocked";
  }
  return "unknown";
}

std::optional<EventStatus> parse_event_status(std::string_view text) {
  if (text == "pending") return EventStatus::kPending;
  if (text == "bypassed") return EventStatus::kBypassed;
  if (text == "closed") return EventStatus::kClosed;
  if (text == "blocked") return EventStatus::kBlocked;
  return std::nullopt;
}

void AuditLog::note(std::string line) {
  std::lock_guard lock(mutex_);
  lines_.push_back(std::move(line));
  while (lines_.size() > capacity_) lines_.pop_front();
}

std::vector<std::string> AuditLog::lines() const {
  std::lock_guard lock(mutex_);
  return {lines_.begin(), lines_.end()};
}

namespace {

std::string random_token() {
  std::array<unsigned char, 16> bytes{};
  if (RAND_bytes(bytes.data(), static_cast<int>(bytes.size())) != 1) {
    throw Error(ErrorCode::kState, "random generator unavailable");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (unsigned char b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0x0F]);
  }
  return out;
}

}  // namespace

EventRegistry::EventRegistry(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

void EventRegistry::evict_locked() {
  while (events_.size() >= capacity_) {
    auto victim = std::find_if(events_.begin(), events_.end(), [](const WarningEvent& e) {
      return e.status != EventStatus::kPending;
    });
    if (victim == events_.end()) victim = events_.begin();
    if (victim->token) by_token_.erase(victim->token->value);
    by_id_.erase(victim->id);
    events_.erase(victim);
  }
}

WarningEvent& EventRegistry::insert_locked(WarningEvent event) {
  evict_locked();
  event.id = next_id_++;
  events_.push_back(std::move(event));
  auto it = std::prev(events_.end());
  by_id_.emplace(it->id, it);
  if (it->token) by_token_.emplace(it->token->value, it->id);
  return *it;
}

WarningEvent EventRegistry::record_blocked(std::string url, std::string domain, ErrorKind kind,
                                           UnixSeconds now) {
  WarningEvent e;
  e.url = std::move(url);
  e.domain = std::move(domain);
  e.kind = kind;
  e.handling = ErrorHandling::kBlocking;
  e.status = EventStatus::kBlocked;
  e.created_at = now;
  std::lock_guard lock(mutex_);
  return insert_locked(std::move(e));
}

WarningEvent EventRegistry::record_warning(std::string url, std::string domain, ErrorKind kind,
                                           UnixSeconds now) {
  WarningEvent e;
  e.url = std::move(url);
  e.kind = kind;
  e.handling = ErrorHandling::kActiveWarning;
  e.status = EventStatus::kPending;
  e.created_at = now;
  BypassToken token;
  token.domain = domain;
  token.created_at = now;
  e.domain = std::move(domain);

  std::lock_guard lock(mutex_);
  do {
    token.value = random_token();
  } while (by_token_.contains(token.value));
  e.token = std::move(token);
  return insert_locked(std::move(e));
}

std::optional<WarningEvent> EventRegistry::get(std::uint64_t id) const {
  std::lock_guard lock(mutex_);
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return *it->second;
}

std::vector<WarningEvent> EventRegistry::list(std::optional<EventStatus> status) const {
  std::lock_guard lock(mutex_);
  std::vector<WarningEvent> out;
  for (const auto& e : events_) {
    if (!status || e.status == *status) out.push_back(e);
  }
  return out;
}

WarningEvent EventRegistry::consume_token(std::string_view token,
                                          std::optional<std::uint64_t> expected_event) {
  std::lock_guard lock(mutex_);
  auto t = by_token_.find(std::string(token));
  if (t == by_token_.end()) throw Error(ErrorCode::kNotFound, "unknown bypass token");
  if (expected_event && *expected_event != t->second) {
    throw Error(ErrorCode::kNotFound, "token does not belong to event " +
                                          std::to_string(*expected_event));
  }
  WarningEvent& e = *by_id_.at(t->second);
  if (e.status == EventStatus::kBypassed) {
    throw Error(ErrorCode::kReplay, "bypass token already used");
  }
  if (e.status != EventStatus::kPending || e.token->used) {
    throw Error(ErrorCode::kState, "event " + std::to_string(e.id) + " is " +
                                       std::string(to_string(e.status)) + ", not pending");
  }
  e.token->used = true;
  e.status = EventStatus::kBypassed;
  return e;
}

WarningEvent EventRegistry::close(std::uint64_t id) {
  std::lock_guard lock(mutex_);
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error(ErrorCode::kNotFound, "no event " + std::to_string(id));
  WarningEvent& e = *it->second;
  if (e.status != EventStatus::kPending) {
    throw Error(ErrorCode::kState, "event " + std::to_string(id) + " is " +
                                       std::string(to_string(e.status)) + ", not pending");
  }
  // The token stays indexed so a late bypass reports a state error.
  e.status = EventStatus::kClosed;
  return e;
}

std::size_t EventRegistry::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

nlohmann::ordered_json detail::event_to_json(const WarningEvent& event) {
  nlohmann::ordered_json j;
  j["id"] = event.id;
  j["url"] = event.url;
  j["domain"] = event.domain;
  j["error_code"] = error_code(event.kind);
  j["handling"] = to_string(event.handling);
  j["status"] = to_string(event.status);
  j["created_at"] = event.created_at;
  if (event.token && event.status == EventStatus::kPending) j["bypass_token"] = event.token->value;
  return j;
}

std::string render_error_payload(const WarningEvent& event) {
  nlohmann::ordered_json j;
  j["event_id"] = event.id;
  j["domain"] = event.domain;
  j["url"] = event.url;
  j["error_code"] = error_code(event.kind);
  j["handling"] = to_string(event.handling);
  j["status"] = to_string(event.status);
  if (event.token && event.status == EventStatus::kPending) j["bypass_token"] = event.token->value;
  return j.dump();
}

}  // namespace tlsgate
