#include "tlsgate/tls_model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tlsgate/error.hpp"

namespace tlsgate {

namespace data {
extern const std::string_view kDefaultCatalog;
}

std::string_view to_string(TlsVersion v) {
  switch (v) {
    case TlsVersion::kTls1_0: return "TLS1.0";
    case TlsVersion::kTls1_1: return "TLS1.1";
    case TlsVersion::kTls1_2: return "TLS1.2";
    case TlsVersion::kTls1_3: return "TLS1.3";
  }
  return "TLS?";
}

std::optional<TlsVersion> parse_version(std::string_view text) {
  std::string s;
  for (char c : text) {
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s.starts_with("tls")) s.erase(0, 3);
  if (s.starts_with("v")) s.erase(0, 1);
  std::replace(s.begin(), s.end(), '_', '.');
  if (s == "1.0") return TlsVersion::kTls1_0;
  if (s == "1.1") return TlsVersion::kTls1_1;
  if (s == "1.2") return TlsVersion::kTls1_2;
  if (s == "1.3") return TlsVersion::kTls1_3;
  return std::nullopt;
}

std::optional<TlsVersion> step_down(TlsVersion v) {
  if (v == TlsVersion::kTls1_0) return std::nullopt;
  return static_cast<TlsVersion>(static_cast<std::uint8_t>(v) - 1);
}

int VersionSet::size() const { return std::popcount(bits_); }

std::optional<TlsVersion> VersionSet::max() const {
  for (int i = 3; i >= 0; --i) {
    auto v = static_cast<TlsVersion>(i);
    if (contains(v)) return v;
  }
  return std::nullopt;
}

std::optional<TlsVersion> VersionSet::min() const {
  for (TlsVersion v : kAllVersions) {
    if (contains(v)) return v;
  }
  return std::nullopt;
}

std::vector<TlsVersion> VersionSet::descending() const {
  std::vector<TlsVersion> out;
  for (int i = 3; i >= 0; --i) {
    auto v = static_cast<TlsVersion>(i);
    if (contains(v)) out.push_back(v);
  }
  return out;
}

std::string format_suite_id(SuiteId id) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04X", static_cast<unsigned>(id));
  return buf;
}

std::optional<SuiteId> parse_suite_id(std::string_view text) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) return std::nullopt;
  text.remove_prefix(2);
  if (text.size() > 4) return std::nullopt;
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return static_cast<SuiteId>(value);
}

std::string_view to_string(SecurityClass c) {
  return c == SecurityClass::kStrong ? "strong" : "weak";
}

std::optional<TlsVersion> max_common_version(VersionSet client, VersionSet server) {
  return (client & server).max();
}

SuiteCatalog::SuiteCatalog(std::vector<CipherSuite> suites) : suites_(std::move(suites)) {
  if (suites_.empty()) {
    throw Error(ErrorCode::kValidation, "catalog must contain at least one suite");
  }
  for (std::size_t i = 0; i < suites_.size(); ++i) {
    const CipherSuite& s = suites_[i];
    if (s.name.empty()) {
      throw Error(ErrorCode::kValidation, "suite " + format_suite_id(s.id) + " has an empty name");
    }
    if (s.min_version > s.max_version) {
      throw Error(ErrorCode::kValidation, "suite " + s.name + ": min_version exceeds max_version");
    }
    if (s.min_version == TlsVersion::kTls1_3 && classify_suite(s) != SecurityClass::kStrong) {
      throw Error(ErrorCode::kValidation,
                  "suite " + s.name + ": TLS1.3 suites must be forward secret and AE");
    }
    if (!by_id_.emplace(s.id, i).second) {
      throw Error(ErrorCode::kValidation, "duplicate suite id " + format_suite_id(s.id));
    }
    if (!by_name_.emplace(s.name, i).second) {
      throw Error(ErrorCode::kValidation, "duplicate suite name " + s.name);
    }
  }
}

const CipherSuite* SuiteCatalog::find(SuiteId id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &suites_[it->second];
}

const CipherSuite* SuiteCatalog::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : &suites_[it->second];
}

const CipherSuite& SuiteCatalog::resolve(std::string_view id_or_name) const {
  const CipherSuite* found = nullptr;
  if (auto id = parse_suite_id(id_or_name)) {
    found = find(*id);
  } else {
    found = find(id_or_name);
  }
  if (found == nullptr) {
    throw Error(ErrorCode::kNotFound, "unknown cipher suite '" + std::string(id_or_name) + "'");
  }
  return *found;
}

namespace {

CipherSuite parse_suite_record(const nlohmann::json& j, std::size_t index) {
  auto fail = [index, &j](const std::string& why) {
    std::string label = "entry " + std::to_string(index);
    if (j.is_object() && j.contains("name") && j["name"].is_string()) {
      label += " (" + j["name"].get<std::string>() + ")";
    }
    return Error(ErrorCode::kParse, "catalog " + label + ": " + why);
  };
  if (!j.is_object()) throw fail("record is not an object");
  for (const char* key : {"id", "name", "min_version", "max_version"}) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw fail(std::string("missing or non-string field '") + key + "'");
    }
  }
  for (const char* key : {"fs", "ae"}) {
    if (!j.contains(key) || !j[key].is_boolean()) {
      throw fail(std::string("missing or non-boolean field '") + key + "'");
    }
  }
  CipherSuite s;
  auto id = parse_suite_id(j["id"].get<std::string>());
  if (!id) throw fail("bad id '" + j["id"].get<std::string>() + "'");
  s.id = *id;
  s.name = j["name"].get<std::string>();
  auto lo = parse_version(j["min_version"].get<std::string>());
  auto hi = parse_version(j["max_version"].get<std::string>());
  if (!lo) throw fail("bad min_version");
  if (!hi) throw fail("bad max_version");
  s.min_version = *lo;
  s.max_version = *hi;
  s.forward_secret = j["fs"].get<bool>();
  s.authenticated_encryption = j["ae"].get<bool>();
  return s;
}

}  // namespace

SuiteCatalog load_catalog(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("catalog is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("suites") || !doc["suites"].is_array()) {
    throw Error(ErrorCode::kParse, "catalog must be an object with a 'suites' array");
  }
  std::vector<CipherSuite> suites;
  const auto& list = doc["suites"];
  suites.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    suites.push_back(parse_suite_record(list[i], i));
  }
  return SuiteCatalog(std::move(suites));
}

SuiteCatalog load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open catalog '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_catalog(buf.str());
}

std::string_view default_catalog_document() { return data::kDefaultCatalog; }

const SuiteCatalog& default_catalog() {
  static const SuiteCatalog catalog = load_catalog(data::kDefaultCatalog);
  return catalog;
}

}  // namespace tlsgate
