#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tlsgate/error.hpp"
#include "tlsgate/policy.hpp"

namespace tlsgate {
namespace {

std::vector<SuiteId> ids(const std::vector<CipherSuite>& suites) {
  std::vector<SuiteId> out;
  for (const auto& s : suites) out.push_back(s.id);
  return out;
}

TEST(PolicyLevel, Text) {
  EXPECT_EQ(to_string(PolicyLevel::kStrict), "strict");
  EXPECT_EQ(parse_policy_level("default"), PolicyLevel::kDefault);
  EXPECT_FALSE(parse_policy_level("Strict"));
}

TEST(SpecOf, StrictLevel) {
  PolicySpec s = spec_of(PolicyLevel::kStrict, default_catalog());
  EXPECT_EQ(s.level, PolicyLevel::kStrict);
  EXPECT_EQ(s.allowed_versions, std::vector<TlsVersion>{TlsVersion::kTls1_3});
  EXPECT_EQ(ids(s.allowed_suites), (std::vector<SuiteId>{0x1301, 0x1303, 0x1302}));
}

TEST(SpecOf, DefaultLevel) {
  PolicySpec s = spec_of(PolicyLevel::kDefault, default_catalog());
  EXPECT_EQ(s.allowed_versions,
            (std::vector<TlsVersion>{TlsVersion::kTls1_3, TlsVersion::kTls1_2,
                                     TlsVersion::kTls1_1, TlsVersion::kTls1_0}));
  ASSERT_EQ(s.allowed_suites.size(), 15u);
  auto cat = default_catalog().suites();
  EXPECT_TRUE(std::equal(cat.begin(), cat.end(), s.allowed_suites.begin()));
}

TEST(SpecOf, StrictIsContainedInDefaultForEveryCatalogSubset) {
  // Every subset of the sweep catalog that keeps a strong TLS1.3 suite.
  SuiteCatalog base = testing::sweep_catalog();
  auto all = base.suites();
  for (unsigned mask = 1; mask < (1u << all.size()); ++mask) {
    std::vector<CipherSuite> pick;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (mask >> i & 1) pick.push_back(all[i]);
    }
    SuiteCatalog c(pick);
    bool has13 = std::any_of(pick.begin(), pick.end(),
                             [](const CipherSuite& s) { return s.min_version == TlsVersion::kTls1_3; });
    if (!has13) {
      EXPECT_THROW(spec_of(PolicyLevel::kStrict, c), Error);
      continue;
    }
    PolicySpec strict = spec_of(PolicyLevel::kStrict, c);
    PolicySpec def = spec_of(PolicyLevel::kDefault, c);
    for (TlsVersion v : kAllVersions) {
      for (const auto& s : c.suites()) {
        if (is_compliant(strict, v, s)) {
          EXPECT_TRUE(is_compliant(def, v, s));
          EXPECT_EQ(classify_suite(s), SecurityClass::kStrong);
          EXPECT_EQ(v, TlsVersion::kTls1_3);
        }
      }
    }
  }
}

TEST(SpecOf, EmptyStrictIsConfigurationError) {
  SuiteCatalog legacy({*default_catalog().find(SuiteId{0xC02F})});
  try {
    spec_of(PolicyLevel::kStrict, legacy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfiguration);
  }
  EXPECT_NO_THROW(spec_of(PolicyLevel::kDefault, legacy));
}

TEST(IsCompliant, NeedsVersionSuiteAndUsability) {
  PolicySpec def = spec_of(PolicyLevel::kDefault, default_catalog());
  const CipherSuite& aes13 = *default_catalog().find(SuiteId{0x1301});
  const CipherSuite& gcm12 = *default_catalog().find(SuiteId{0xC02F});
  EXPECT_TRUE(is_compliant(def, TlsVersion::kTls1_3, aes13));
  EXPECT_FALSE(is_compliant(def, TlsVersion::kTls1_2, aes13));
  EXPECT_FALSE(is_compliant(def, TlsVersion::kTls1_0, gcm12));
  PolicySpec strict = spec_of(PolicyLevel::kStrict, default_catalog());
  EXPECT_FALSE(is_compliant(strict, TlsVersion::kTls1_2, gcm12));
  CipherSuite foreign{0x1399, "FOREIGN", TlsVersion::kTls1_3, TlsVersion::kTls1_3, true, true};
  EXPECT_FALSE(is_compliant(strict, TlsVersion::kTls1_3, foreign));
}

TEST(Offer, FiltersUnusableSuites) {
  PolicySpec spec;
  spec.allowed_versions = {TlsVersion::kTls1_3};
  spec.allowed_suites = {*default_catalog().find(SuiteId{0x1301}),
                         *default_catalog().find(SuiteId{0xC02F})};
  OfferedParams o = offer_of(spec);
  EXPECT_EQ(o.versions, std::vector<TlsVersion>{TlsVersion::kTls1_3});
  EXPECT_EQ(ids(o.suites), std::vector<SuiteId>{0x1301});
}

TEST(Offer, CapPrunesVersionsAndSuites) {
  OfferedParams full = offer_of(spec_of(PolicyLevel::kDefault, default_catalog()));
  OfferedParams c12 = cap_offer(full, TlsVersion::kTls1_2);
  EXPECT_EQ(c12.versions.front(), TlsVersion::kTls1_2);
  EXPECT_EQ(c12.suites.size(), 12u);
  OfferedParams c10 = cap_offer(full, TlsVersion::kTls1_0);
  EXPECT_EQ(c10.versions, std::vector<TlsVersion>{TlsVersion::kTls1_0});
  for (const auto& s : c10.suites) EXPECT_TRUE(s.usable_at(TlsVersion::kTls1_0)) << s.name;
  EXPECT_EQ(c10.suites.size(), 5u);
  OfferedParams strict = offer_of(spec_of(PolicyLevel::kStrict, default_catalog()));
  EXPECT_TRUE(cap_offer(strict, TlsVersion::kTls1_2).empty());
}

TEST(PolicySet, IndexesBothLevels) {
  PolicySet p(default_catalog());
  EXPECT_EQ(p[PolicyLevel::kStrict], p.strict());
  EXPECT_EQ(p[PolicyLevel::kDefault], p.fallback());
  EXPECT_EQ(p.fallback().level, PolicyLevel::kDefault);
}

}  // namespace
}  // namespace tlsgate
