#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <sstream>

#include "tlsgate/error.hpp"
#include "tlsgate/tls_model.hpp"

namespace tlsgate {
namespace {

CipherSuite suite(SuiteId id, std::string name, TlsVersion lo, TlsVersion hi, bool fs, bool ae) {
  return CipherSuite{id, std::move(name), lo, hi, fs, ae};
}

TEST(TlsVersion, OrderAndText) {
  EXPECT_LT(TlsVersion::kTls1_0, TlsVersion::kTls1_1);
  EXPECT_LT(TlsVersion::kTls1_2, TlsVersion::kTls1_3);
  for (TlsVersion v : kAllVersions) EXPECT_EQ(parse_version(to_string(v)), v);
  EXPECT_EQ(to_string(TlsVersion::kTls1_3), "TLS1.3");
  EXPECT_EQ(parse_version("tls1_1"), TlsVersion::kTls1_1);
  EXPECT_EQ(parse_version("1.0"), TlsVersion::kTls1_0);
  EXPECT_FALSE(parse_version("SSL3.0"));
  EXPECT_FALSE(parse_version(""));
  EXPECT_EQ(step_down(TlsVersion::kTls1_3), TlsVersion::kTls1_2);
  EXPECT_FALSE(step_down(TlsVersion::kTls1_0));
}

TEST(VersionSet, Basics) {
  VersionSet s{TlsVersion::kTls1_0, TlsVersion::kTls1_2};
  EXPECT_EQ(s.size(), 2);
  EXPECT_EQ(s.max(), TlsVersion::kTls1_2);
  EXPECT_EQ(s.min(), TlsVersion::kTls1_0);
  EXPECT_EQ(s.descending(), (std::vector<TlsVersion>{TlsVersion::kTls1_2, TlsVersion::kTls1_0}));
  EXPECT_EQ(VersionSet::up_to(TlsVersion::kTls1_1).mask(), 0x3);
  EXPECT_EQ(VersionSet::all().size(), 4);
  EXPECT_FALSE(VersionSet{}.max());
  s.erase(TlsVersion::kTls1_0);
  EXPECT_EQ(s, VersionSet{TlsVersion::kTls1_2});
}

TEST(VersionSet, MaxCommonMatchesExhaustiveSearch) {
  for (unsigned a = 0; a < 16; ++a) {
    for (unsigned b = 0; b < 16; ++b) {
      std::optional<TlsVersion> expected;
      for (TlsVersion v : kAllVersions) {
        if ((a >> static_cast<unsigned>(v) & 1) && (b >> static_cast<unsigned>(v) & 1)) expected = v;
      }
      auto got = max_common_version(VersionSet::from_mask(static_cast<std::uint8_t>(a)),
                                    VersionSet::from_mask(static_cast<std::uint8_t>(b)));
      EXPECT_EQ(got, expected) << a << " " << b;
    }
  }
}

TEST(SuiteId, FormatAndParse) {
  EXPECT_EQ(format_suite_id(0x1301), "0x1301");
  EXPECT_EQ(format_suite_id(0x2F), "0x002F");
  EXPECT_EQ(parse_suite_id("0xc02f"), SuiteId{0xC02F});
  EXPECT_FALSE(parse_suite_id("0x10000"));
  EXPECT_FALSE(parse_suite_id("1301"));
  EXPECT_FALSE(parse_suite_id("0xZZ"));
}

TEST(Classify, StrongNeedsBothProperties) {
  for (bool fs : {false, true}) {
    for (bool ae : {false, true}) {
      auto s = suite(1, "x", TlsVersion::kTls1_0, TlsVersion::kTls1_2, fs, ae);
      EXPECT_EQ(classify_suite(s) == SecurityClass::kStrong, fs && ae);
    }
  }
}

TEST(DefaultCatalog, Composition) {
  const SuiteCatalog& c = default_catalog();
  ASSERT_EQ(c.size(), 15u);
  int tls13 = 0;
  for (const auto& s : c.suites()) {
    if (s.min_version == TlsVersion::kTls1_3) {
      ++tls13;
      EXPECT_EQ(classify_suite(s), SecurityClass::kStrong) << s.name;
    }
    EXPECT_LE(s.min_version, s.max_version);
  }
  EXPECT_EQ(tls13, 3);
  EXPECT_EQ(c.suites().front().id, 0x1301);
  const CipherSuite* rsa = c.find(SuiteId{0x002F});
  ASSERT_NE(rsa, nullptr);
  EXPECT_EQ(rsa->name, "TLS_RSA_WITH_AES_128_CBC_SHA");
  EXPECT_EQ(classify_suite(*rsa), SecurityClass::kWeak);
  EXPECT_EQ(&c.resolve("0x002F"), rsa);
  EXPECT_EQ(&c.resolve("TLS_RSA_WITH_AES_128_CBC_SHA"), rsa);
  EXPECT_EQ(c.find("TLS_NOPE"), nullptr);
  EXPECT_THROW(c.resolve("0xFFFF"), Error);
}

TEST(DefaultCatalog, ShippedFileMatchesEmbedded) {
  std::ifstream f(std::string(TLSGATE_SOURCE_DIR) + "/data/catalog.json");
  ASSERT_TRUE(f);
  std::stringstream s;
  s << f.rdbuf();
  EXPECT_EQ(s.str(), default_catalog_document());
  EXPECT_EQ(load_catalog(s.str()), default_catalog());
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kContract;
}

TEST(SuiteCatalog, RejectsInvalidSuites) {
  auto good = suite(0x1301, "A", TlsVersion::kTls1_3, TlsVersion::kTls1_3, true, true);
  EXPECT_EQ(code_of([] { SuiteCatalog({}); }), ErrorCode::kValidation);
  EXPECT_EQ(code_of([&] { SuiteCatalog({good, good}); }), ErrorCode::kValidation);
  auto same_name = suite(0x1302, "A", TlsVersion::kTls1_3, TlsVersion::kTls1_3, true, true);
  EXPECT_EQ(code_of([&] { SuiteCatalog({good, same_name}); }), ErrorCode::kValidation);
  auto inverted = suite(0x10, "B", TlsVersion::kTls1_2, TlsVersion::kTls1_0, true, true);
  EXPECT_EQ(code_of([&] { SuiteCatalog({inverted}); }), ErrorCode::kValidation);
  auto weak13 = suite(0x1304, "C", TlsVersion::kTls1_3, TlsVersion::kTls1_3, true, false);
  EXPECT_EQ(code_of([&] { SuiteCatalog({weak13}); }), ErrorCode::kValidation);
  auto unnamed = suite(0x11, "", TlsVersion::kTls1_0, TlsVersion::kTls1_2, false, false);
  EXPECT_EQ(code_of([&] { SuiteCatalog({unnamed}); }), ErrorCode::kValidation);
}

TEST(LoadCatalog, ParseErrorsNameTheEntry) {
  EXPECT_EQ(code_of([] { load_catalog("not json"); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { load_catalog(R"({"suites": 3})"); }), ErrorCode::kParse);
  try {
    load_catalog(R"({"suites":[{"id":"0x1301","name":"X","min_version":"TLS9","max_version":"TLS1.3","fs":true,"ae":true}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("entry 0"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { load_catalog_file("/nonexistent/catalog.json"); }), ErrorCode::kIo);
}

}  // namespace
}  // namespace tlsgate
