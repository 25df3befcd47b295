#include "apmec/descriptor.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace apmec;

namespace {

const std::string kDataDir = std::string(APMEC_SOURCE_DIR) + "/data";

DescriptorErrorKind error_kind(const std::string& text)
{
    try {
        parse_mesd(text);
    } catch (const DescriptorError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected a DescriptorError for:\n" << text;
    return DescriptorErrorKind::syntax_error;
}

const char* kMinimal = R"(mesd_version: apmec-sim/1
name: svc
mead: {name: cache, vcpus: 1, memory_mb: 512}
nsd:
  vnfs:
    - {type: firewall, instances: 1}
    - {type: dpi, instances: 1}
)";

// Random descriptor with awkward names to stress quoting.
MESD random_mesd(std::mt19937& gen)
{
    static const std::vector<std::string> names{
        "firewall", "dpi",   "nat",  "video cache", "a:b",  "x#y",   "- dash", "123",
        "true",     "null",  "~",    "'quoted'",    "\"dq\"", "ünï", "[br]",   "{c}"};
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen); };

    MESD m;
    m.name = names[pick(names.size())] + "-" + std::to_string(pick(1000));
    m.mead.mea.name = names[pick(names.size())];
    m.mead.mea.vcpus = 1 + static_cast<std::uint32_t>(pick(16));
    m.mead.mea.memory_mb = 1 + static_cast<std::uint32_t>(pick(65536));
    if (pick(2) == 0) {
        const double thresholds[] = {0.9, 0.1, 1e-7, 123.456, -2.5, 0.30000000000000004};
        m.mead.alarm = AlarmConfig{names[pick(names.size())], thresholds[pick(6)],
                                   pick(2) == 0 ? AlarmAction::heal : AlarmAction::scale_out};
    }
    std::vector<std::string> pool = names;
    std::shuffle(pool.begin(), pool.end(), gen);
    const auto size = 1 + pick(5);
    for (std::size_t i = 0; i < size; ++i) {
        m.vnfs.push_back({pool[i], 1 + static_cast<std::uint32_t>(pick(6))});
    }
    if (pick(2) == 0) {
        std::vector<std::string> chain;
        for (std::size_t i = 0; i < size; ++i) {
            if (pick(3) != 0) {
                chain.push_back(pool[i]);
            }
        }
        std::shuffle(chain.begin(), chain.end(), gen);
        m.chain = chain;
    }
    return m;
}

} // namespace

TEST(ParseMesd, FirewallDpiCacheExample)
{
    const auto m = load_mesd(kDataDir + "/firewall_dpi_cache.yaml");
    EXPECT_EQ(m.version, "apmec-sim/1");
    EXPECT_EQ(m.mead.mea.name, "cache");
    ASSERT_EQ(m.vnfs.size(), 2u);
    EXPECT_EQ(m.vnfs[0], (VnfEntry{"firewall", 1}));
    EXPECT_EQ(m.vnfs[1], (VnfEntry{"dpi", 1}));
    ASSERT_TRUE(m.chain);
    EXPECT_EQ(*m.chain, (std::vector<std::string>{"firewall", "dpi"}));
    EXPECT_FALSE(m.mead.alarm);
}

TEST(ParseMesd, AlarmSection)
{
    const auto m = load_mesd(kDataDir + "/cache_with_scaling.yaml");
    ASSERT_TRUE(m.mead.alarm);
    EXPECT_EQ(*m.mead.alarm, (AlarmConfig{"cpu", 0.9, AlarmAction::scale_out}));
}

TEST(ParseMesd, MissingNsdSection)
{
    const std::string text = "mesd_version: apmec-sim/1\nname: x\nmead: {name: a, vcpus: 1, memory_mb: 2}\n";
    try {
        parse_mesd(text);
        FAIL();
    } catch (const DescriptorError& e) {
        EXPECT_EQ(e.kind(), DescriptorErrorKind::missing_section);
        EXPECT_NE(std::string(e.what()).find("nsd"), std::string::npos);
    }
}

TEST(ParseMesd, MissingMeadSection)
{
    EXPECT_EQ(error_kind("mesd_version: apmec-sim/1\nname: x\nnsd: {vnfs: [{type: a, instances: 1}]}\n"),
              DescriptorErrorKind::missing_section);
}

TEST(ParseMesd, DuplicateTypeIsRejected)
{
    const std::string text = std::string(kMinimal) + "    - {type: dpi, instances: 2}\n";
    try {
        parse_mesd(text);
        FAIL();
    } catch (const DescriptorError& e) {
        EXPECT_EQ(e.kind(), DescriptorErrorKind::duplicate_type);
        EXPECT_EQ(e.line(), 8);
    }
}

TEST(ParseMesd, UnknownVersion)
{
    std::string text = kMinimal;
    text.replace(text.find("apmec-sim/1"), 11, "tosca_simple_profile_for_mec_1_0_0");
    EXPECT_EQ(error_kind(text), DescriptorErrorKind::unknown_version);
}

TEST(ParseMesd, UnknownKeysAreRejected)
{
    EXPECT_EQ(error_kind(std::string(kMinimal) + "extra: 1\n"), DescriptorErrorKind::unknown_key);
    std::string in_mead = kMinimal;
    in_mead.replace(in_mead.find("memory_mb: 512"), 14, "memory_mb: 512, disk_gb: 10");
    EXPECT_EQ(error_kind(in_mead), DescriptorErrorKind::unknown_key);
}

TEST(ParseMesd, SyntaxErrorCarriesLine)
{
    try {
        parse_mesd("mesd_version: apmec-sim/1\nname: x\nmead: {name: a, vcpus: [1\n");
        FAIL();
    } catch (const DescriptorError& e) {
        EXPECT_EQ(e.kind(), DescriptorErrorKind::syntax_error);
        EXPECT_GT(e.line(), 0);
        EXPECT_NE(std::string(e.what()).find("line "), std::string::npos);
    }
}

TEST(ParseMesd, BadValues)
{
    std::string zero = kMinimal;
    zero.replace(zero.find("instances: 1"), 12, "instances: 0");
    EXPECT_EQ(error_kind(zero), DescriptorErrorKind::invalid_value);

    std::string neg = kMinimal;
    neg.replace(neg.find("vcpus: 1"), 8, "vcpus: -1");
    EXPECT_EQ(error_kind(neg), DescriptorErrorKind::invalid_value);

    std::string alarm = kMinimal;
    alarm.replace(alarm.find("memory_mb: 512"), 14,
                  "memory_mb: 512, alarm: {metric: cpu, threshold: .nan, action: scale_out}");
    EXPECT_EQ(error_kind(alarm), DescriptorErrorKind::invalid_value);

    std::string action = kMinimal;
    action.replace(action.find("memory_mb: 512"), 14,
                   "memory_mb: 512, alarm: {metric: cpu, threshold: 1, action: reboot}");
    EXPECT_EQ(error_kind(action), DescriptorErrorKind::invalid_value);

    std::string empty_vnfs = "mesd_version: apmec-sim/1\nname: x\nmead: {name: a, vcpus: 1, memory_mb: 2}\n"
                             "nsd: {vnfs: []}\n";
    EXPECT_EQ(error_kind(empty_vnfs), DescriptorErrorKind::invalid_value);
}

TEST(ParseMesd, ChainMustNameDistinctNsdTypes)
{
    EXPECT_EQ(error_kind(std::string(kMinimal) + "  chain: [firewall, nat]\n"), DescriptorErrorKind::bad_chain);
    EXPECT_EQ(error_kind(std::string(kMinimal) + "  chain: [dpi, dpi]\n"), DescriptorErrorKind::bad_chain);
    EXPECT_NO_THROW(parse_mesd(std::string(kMinimal) + "  chain: [dpi]\n"));
}

TEST(ParseMesd, EmptyDocument) { EXPECT_EQ(error_kind(""), DescriptorErrorKind::missing_field); }

TEST(LoadMesd, UnreadablePathIsNotADescriptorError)
{
    try {
        load_mesd(kDataDir + "/does-not-exist.yaml");
        FAIL();
    } catch (const DescriptorError&) {
        FAIL() << "should not be a content error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("cannot read"), std::string::npos);
    }
}

TEST(ToRequest, FirewallDpiLowersToFootprintTwo)
{
    NfCatalog catalog;
    const auto r = to_request(load_mesd(kDataDir + "/firewall_dpi_cache.yaml"), catalog, 3);
    EXPECT_EQ(r.id, 3u);
    EXPECT_EQ(r.ns, NSSpec(CountMap{{0, 1}, {1, 1}}));
    EXPECT_EQ(footprint(r.ns), 2u);
    EXPECT_EQ(catalog.at(0).name, "firewall");
    EXPECT_EQ(catalog.at(1).name, "dpi");
    EXPECT_EQ(r.mea.name, "cache");
}

TEST(ToRequest, InstanceCountsSum)
{
    MESD m;
    m.name = "x";
    m.mead.mea = {"a", 1, 1};
    m.vnfs = {{"a", 3}, {"b", 3}, {"c", 3}};
    NfCatalog catalog;
    EXPECT_EQ(footprint(to_request(m, catalog).ns), 9u);
}

TEST(ToRequest, ChainOrderDoesNotMatter)
{
    auto m = parse_mesd(std::string(kMinimal) + "  chain: [dpi, firewall]\n");
    auto n = m;
    n.chain = std::vector<std::string>{"firewall", "dpi"};
    NfCatalog c1;
    NfCatalog c2;
    EXPECT_EQ(to_request(m, c1).ns, to_request(n, c2).ns);
}

TEST(ToRequest, SealedCatalogRejectsUnknownType)
{
    auto catalog = NfCatalog::with_generic_types(2);
    catalog.seal();
    EXPECT_THROW(to_request(parse_mesd(kMinimal), catalog), ModelError);
}

TEST(Validate, CatchesInMemoryViolations)
{
    auto m = parse_mesd(kMinimal);
    EXPECT_NO_THROW(validate(m));
    auto dup = m;
    dup.vnfs.push_back({"dpi", 1});
    EXPECT_THROW(validate(dup), DescriptorError);
    auto none = m;
    none.vnfs.clear();
    EXPECT_THROW(validate(none), DescriptorError);
    auto zero = m;
    zero.vnfs[0].instances = 0;
    EXPECT_THROW(validate(zero), DescriptorError);
}

TEST(RoundTrip, GeneratedDescriptorsSurvive)
{
    std::mt19937 gen(31);
    for (int i = 0; i < 100; ++i) {
        const auto m = random_mesd(gen);
        ASSERT_NO_THROW(validate(m));
        const auto text = serialize_mesd(m);
        MESD back;
        ASSERT_NO_THROW(back = parse_mesd(text)) << text;
        EXPECT_EQ(back, m) << text;

        NfCatalog catalog;
        std::uint64_t declared = 0;
        for (const auto& v : m.vnfs) {
            declared += v.instances;
        }
        EXPECT_EQ(footprint(to_request(back, catalog).ns), declared);
    }
}
