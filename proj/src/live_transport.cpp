#include <netdb.h>
#include <openssl/err.h>
#include <openssl/ssl.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <memory>
#include <string>

#include "tlsgate/error.hpp"
#include "tlsgate/transport.hpp"

namespace tlsgate {

namespace {

struct UrlParts {
  std::string host;
  std::string port = "443";
  std::string path = "/";
};

UrlParts split_url(const std::string& url, const std::string& host) {
  UrlParts parts;
  parts.host = host;
  std::string_view rest = url;
  if (auto scheme = rest.find("://"); scheme != std::string_view::npos) {
    if (rest.substr(0, scheme) != "https") {
      throw Error(ErrorCode::kTransport, "live transport only speaks https");
    }
    rest.remove_prefix(scheme + 3);
  }
  std::string_view authority = rest.substr(0, rest.find_first_of("/?#"));
  if (auto slash = rest.find('/'); slash != std::string_view::npos) {
    parts.path = std::string(rest.substr(slash, rest.find('#') - slash));
  }
  if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    parts.port = std::string(authority.substr(colon + 1));
  }
  return parts;
}

struct FdCloser {
  int fd = -1;
  ~FdCloser() {
    if (fd >= 0) ::close(fd);
  }
};

int open_socket(const UrlParts& parts, int timeout_seconds) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(parts.host.c_str(), parts.port.c_str(), &hints, &found) != 0 || !found) {
    throw Error(ErrorCode::kTransport, "cannot resolve " + parts.host);
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);
  timeval tv{timeout_seconds, 0};
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) return fd;
    ::close(fd);
  }
  throw Error(ErrorCode::kTransport, "cannot connect to " + parts.host + ":" + parts.port);
}

int openssl_version(TlsVersion v) {
  switch (v) {
    case TlsVersion::kTls1_0: return TLS1_VERSION;
    case TlsVersion::kTls1_1: return TLS1_1_VERSION;
    case TlsVersion::kTls1_2: return TLS1_2_VERSION;
    case TlsVersion::kTls1_3: return TLS1_3_VERSION;
  }
  return TLS1_2_VERSION;
}

std::optional<TlsVersion> from_openssl_version(int v) {
  switch (v) {
    case TLS1_VERSION: return TlsVersion::kTls1_0;
    case TLS1_1_VERSION: return TlsVersion::kTls1_1;
    case TLS1_2_VERSION: return TlsVersion::kTls1_2;
    case TLS1_3_VERSION: return TlsVersion::kTls1_3;
    default: return std::nullopt;
  }
}

// Applies the spec's suites; IANA names are translated through OpenSSL's own
// cipher table.
void configure_suites(SSL_CTX* ctx, const PolicySpec& spec) {
  std::string tls13;
  for (const CipherSuite& s : spec.allowed_suites) {
    if (s.min_version == TlsVersion::kTls1_3) {
      if (!tls13.empty()) tls13 += ":";
      tls13 += s.name;
    }
  }
  if (!tls13.empty()) SSL_CTX_set_ciphersuites(ctx, tls13.c_str());

  SSL_CTX_set_cipher_list(ctx, "ALL:@SECLEVEL=0");
  std::string legacy;
  STACK_OF(SSL_CIPHER)* all = SSL_CTX_get_ciphers(ctx);
  for (const CipherSuite& s : spec.allowed_suites) {
    if (s.min_version == TlsVersion::kTls1_3) continue;
    for (int i = 0; i < sk_SSL_CIPHER_num(all); ++i) {
      const SSL_CIPHER* c = sk_SSL_CIPHER_value(all, i);
      const char* standard = SSL_CIPHER_standard_name(c);
      if (standard != nullptr && s.name == standard) {
        if (!legacy.empty()) legacy += ":";
        legacy += SSL_CIPHER_get_name(c);
        break;
      }
    }
  }
  if (!legacy.empty()) {
    const char* seclevel = spec.allows_version(TlsVersion::kTls1_0) ? ":@SECLEVEL=0" : "";
    SSL_CTX_set_cipher_list(ctx, (legacy + seclevel).c_str());
  }
}

std::string failure_reason(unsigned long err) {
  int r = ERR_GET_REASON(err);
  switch (r) {
    case SSL_R_UNSUPPORTED_PROTOCOL:
    case SSL_R_TLSV1_ALERT_PROTOCOL_VERSION:
    case SSL_R_WRONG_SSL_VERSION:
    case SSL_R_NO_PROTOCOLS_AVAILABLE:
      return std::string(reason::kNoCommonVersion);
    case SSL_R_NO_SHARED_CIPHER:
    case SSL_R_SSLV3_ALERT_HANDSHAKE_FAILURE:
    case SSL_R_NO_CIPHERS_AVAILABLE:
      return std::string(reason::kNoCommonSuite);
    default:
      return {};
  }
}

void parse_response_head(const std::string& head, TransportResult& out) {
  std::size_t line_end = head.find("\r\n");
  std::string status_line = head.substr(0, line_end);
  if (auto sp = status_line.find(' '); sp != std::string::npos) {
    out.status = std::atoi(status_line.c_str() + sp + 1);
  }
  std::size_t pos = line_end == std::string::npos ? head.size() : line_end + 2;
  while (pos < head.size()) {
    std::size_t end = head.find("\r\n", pos);
    if (end == std::string::npos) end = head.size();
    std::string line = head.substr(pos, end - pos);
    pos = end + 2;
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string value = line.substr(colon + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
    out.response_headers.emplace_back(line.substr(0, colon), value);
  }
}

}  // namespace

TransportResult LiveTransport::connect(const std::string& url, const std::string& host,
                                       const PolicySpec& spec) {
  UrlParts parts = split_url(url, host);
  TransportResult out;
  OfferedParams offer = offer_of(spec);
  out.transcript.events.push_back(event::HelloSent{build_client_hello(offer)});

  std::unique_ptr<SSL_CTX, decltype(&::SSL_CTX_free)> ctx(SSL_CTX_new(TLS_client_method()),
                                                          &::SSL_CTX_free);
  if (!ctx) throw Error(ErrorCode::kTransport, "cannot create TLS context");
  auto versions = spec.version_set();
  SSL_CTX_set_min_proto_version(ctx.get(), openssl_version(*versions.min()));
  SSL_CTX_set_max_proto_version(ctx.get(), openssl_version(*versions.max()));
  configure_suites(ctx.get(), spec);
  SSL_CTX_set_default_verify_paths(ctx.get());
  SSL_CTX_set_verify(ctx.get(), SSL_VERIFY_PEER, nullptr);

  FdCloser sock{open_socket(parts, timeout_seconds_)};
  std::unique_ptr<SSL, decltype(&::SSL_free)> ssl(SSL_new(ctx.get()), &::SSL_free);
  SSL_set_fd(ssl.get(), sock.fd);
  SSL_set_tlsext_host_name(ssl.get(), parts.host.c_str());
  SSL_set1_host(ssl.get(), parts.host.c_str());

  ERR_clear_error();
  if (SSL_connect(ssl.get()) != 1) {
    unsigned long err = ERR_peek_last_error();
    if (SSL_get_verify_result(ssl.get()) != X509_V_OK) {
      throw Error(ErrorCode::kTransport, "certificate verification failed for " + parts.host);
    }
    std::string why = failure_reason(err);
    if (!why.empty()) out.transcript.events.push_back(event::FailureAlert{why});
    out.transcript.events.push_back(event::ClientAborted{std::string(reason::kHandshakeFailed)});
    return out;
  }

  auto version = from_openssl_version(SSL_version(ssl.get()));
  const SSL_CIPHER* cipher = SSL_get_current_cipher(ssl.get());
  if (!version || cipher == nullptr) {
    out.transcript.events.push_back(event::ClientAborted{std::string(reason::kVersionNotOffered)});
    return out;
  }
  auto suite = static_cast<SuiteId>(SSL_CIPHER_get_protocol_id(cipher));
  out.transcript.events.push_back(event::HelloReceived{ServerHello{*version, suite}});
  out.transcript.events.push_back(event::Established{*version, suite});

  std::string request = "GET " + parts.path + " HTTP/1.1\r\nHost: " + parts.host +
                        "\r\nUser-Agent: tlsgate\r\nAccept: */*\r\nConnection: close\r\n\r\n";
  SSL_write(ssl.get(), request.data(), static_cast<int>(request.size()));
  std::string head;
  char buf[4096];
  while (head.find("\r\n\r\n") == std::string::npos && head.size() < 65536) {
    int n = SSL_read(ssl.get(), buf, sizeof buf);
    if (n <= 0) break;
    head.append(buf, static_cast<std::size_t>(n));
  }
  head = head.substr(0, head.find("\r\n\r\n"));
  parse_response_head(head, out);
  SSL_shutdown(ssl.get());
  return out;
}

}  // namespace tlsgate
