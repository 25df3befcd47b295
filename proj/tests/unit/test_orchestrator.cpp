#include "apmec/orchestrator.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace apmec;

namespace {

MESD service(std::string name, std::vector<VnfEntry> vnfs, std::optional<AlarmConfig> alarm = std::nullopt)
{
    MESD m;
    m.name = std::move(name);
    m.mead.mea = {"cache", 1, 512};
    m.mead.alarm = std::move(alarm);
    m.vnfs = std::move(vnfs);
    return m;
}

MESD three_vnfs() { return service("svc", {{"firewall", 1}, {"dpi", 1}, {"nat", 1}}); }

MockBackendEvent ev(Target target, MesId id, std::variant<Deployed, Failed, MetricSample> outcome)
{
    return {target, id, std::move(outcome)};
}

struct Fixture : ::testing::Test
{
    MockMecBackend mec;
    MockManoBackend mano;
    Orchestrator orch{mec, mano, PoolState::empty(10, 3)};

    MesId activate(const MESD& mesd)
    {
        const auto id = orch.submit(mesd);
        orch.on_event(ev(Target::MEA, id, Deployed{}));
        if (orch.record(id).ns_state != PartState::ACTIVE) {
            orch.on_event(ev(Target::NS, id, Deployed{}));
        }
        return id;
    }
};

} // namespace

TEST_F(Fixture, SubmitIssuesOneCommandPerPart)
{
    const auto id = orch.submit(service("fw-dpi", {{"firewall", 1}, {"dpi", 1}}));
    ASSERT_EQ(mec.commands.size(), 1u);
    ASSERT_EQ(mano.commands.size(), 1u);
    EXPECT_EQ(mec.commands[0].kind, BackendCommand::Kind::deploy_mea);
    EXPECT_EQ(mano.commands[0].kind, BackendCommand::Kind::deploy_ns);
    EXPECT_EQ(mano.commands[0].amount, 2u);
    const auto& rec = orch.record(id);
    EXPECT_EQ(rec.state, MesState::DEPLOYING);
    EXPECT_EQ(rec.mea_state, PartState::DEPLOYING);
    EXPECT_EQ(rec.ns_state, PartState::DEPLOYING);
    EXPECT_EQ(orch.pool().used_vms, 2u);
}

TEST_F(Fixture, HappyPathReachesActive)
{
    const auto id = orch.submit(three_vnfs());
    orch.on_event(ev(Target::MEA, id, Deployed{}));
    EXPECT_EQ(orch.record(id).state, MesState::DEPLOYING);
    const auto& rec = orch.on_event(ev(Target::NS, id, Deployed{}));
    EXPECT_EQ(rec.state, MesState::ACTIVE);
    EXPECT_EQ(rec.mea_instances, 1u);
}

TEST_F(Fixture, InsufficientCapacityLeavesPoolUntouched)
{
    MockMecBackend m;
    MockManoBackend n;
    Orchestrator full(m, n, PoolState::empty(2, 3));
    full.submit(service("a", {{"x", 2}}));
    const auto before = full.pool();
    try {
        full.submit(three_vnfs());
        FAIL();
    } catch (const InsufficientCapacity& e) {
        EXPECT_EQ(e.shortfall(), 3u);
        EXPECT_NE(std::string(e.what()).find("insufficient_capacity"), std::string::npos);
    }
    EXPECT_EQ(full.pool(), before);
    EXPECT_EQ(full.ids().size(), 1u);
    EXPECT_EQ(m.commands.size(), 1u);
}

TEST_F(Fixture, InvalidDescriptorIsRejectedBeforePlacement)
{
    auto bad = three_vnfs();
    bad.vnfs.push_back({"dpi", 2});
    EXPECT_THROW(orch.submit(bad), InvalidDescriptor);
    EXPECT_EQ(orch.pool().used_vms, 0u);
    EXPECT_TRUE(orch.ids().empty());
}

TEST_F(Fixture, FullyReusedServiceHasItsNsActiveImmediately)
{
    const auto a = activate(three_vnfs());
    const auto b = orch.submit(three_vnfs());
    const auto& rec = orch.record(b);
    EXPECT_EQ(rec.placement.new_vms, 0u);
    EXPECT_EQ(rec.placement.reuse_source, orch.record(a).placement.deployed_as);
    EXPECT_EQ(rec.ns_state, PartState::ACTIVE);
    EXPECT_EQ(rec.event_log.back().event, "NS_ACTIVE");
    EXPECT_EQ(orch.pool().used_vms, 3u);
    orch.on_event(ev(Target::MEA, b, Deployed{}));
    EXPECT_EQ(orch.record(b).state, MesState::ACTIVE);
}

TEST_F(Fixture, FailureDuringDeploymentRollsBackExactly)
{
    const auto base = activate(service("base", {{"firewall", 1}}));
    (void)base;
    const auto before = orch.pool();
    const auto id = orch.submit(three_vnfs());
    EXPECT_NE(orch.pool(), before);
    orch.on_event(ev(Target::MEA, id, Deployed{}));
    const auto& rec = orch.on_event(ev(Target::NS, id, Failed{}));
    EXPECT_EQ(rec.state, MesState::FAILED);
    EXPECT_TRUE(rec.released);
    EXPECT_EQ(orch.pool(), before);
    EXPECT_EQ(mec.commands.back().kind, BackendCommand::Kind::delete_mea);
    EXPECT_EQ(mano.commands.back().kind, BackendCommand::Kind::delete_ns);
    EXPECT_EQ(mano.commands.back().amount, 2u);
}

TEST_F(Fixture, ScaleOutAddsAnInstance)
{
    const auto id = activate(service("s", {{"a", 1}}, AlarmConfig{"cpu", 0.9, AlarmAction::scale_out}));
    orch.on_event(ev(Target::MEA, id, MetricSample{"cpu", 0.5}));
    EXPECT_EQ(orch.record(id).state, MesState::ACTIVE);
    orch.on_event(ev(Target::MEA, id, MetricSample{"mem", 0.99}));
    EXPECT_EQ(orch.record(id).state, MesState::ACTIVE);

    orch.on_event(ev(Target::MEA, id, MetricSample{"cpu", 0.95}));
    EXPECT_EQ(orch.record(id).state, MesState::SCALING);
    EXPECT_EQ(mec.commands.back().kind, BackendCommand::Kind::deploy_mea);

    const auto& rec = orch.on_event(ev(Target::MEA, id, Deployed{}));
    EXPECT_EQ(rec.state, MesState::ACTIVE);
    EXPECT_EQ(rec.mea_instances, 2u);
}

TEST_F(Fixture, AlarmDuringScalingIsSuppressed)
{
    const auto id = activate(service("s", {{"a", 1}}, AlarmConfig{"cpu", 0.9, AlarmAction::scale_out}));
    orch.on_event(ev(Target::MEA, id, MetricSample{"cpu", 0.95}));
    const auto commands = mec.commands.size();
    orch.on_event(ev(Target::MEA, id, MetricSample{"cpu", 0.97}));
    EXPECT_EQ(mec.commands.size(), commands);
    EXPECT_EQ(orch.record(id).event_log.back().event, "ALARM_SUPPRESSED");
}

TEST_F(Fixture, FailedScaleOutKeepsExistingInstances)
{
    const auto id = activate(service("s", {{"a", 1}}, AlarmConfig{"cpu", 0.9, AlarmAction::scale_out}));
    orch.on_event(ev(Target::MEA, id, MetricSample{"cpu", 0.95}));
    const auto& rec = orch.on_event(ev(Target::MEA, id, Failed{}));
    EXPECT_EQ(rec.state, MesState::ACTIVE);
    EXPECT_EQ(rec.mea_instances, 1u);
}

TEST_F(Fixture, HealingSurvivesTwoCycles)
{
    const auto id = activate(service("s", {{"a", 1}}, AlarmConfig{"cpu", 0.9, AlarmAction::heal}));
    for (int cycle = 0; cycle < 2; ++cycle) {
        orch.on_event(ev(Target::MEA, id, Failed{}));
        EXPECT_EQ(orch.record(id).state, MesState::HEALING);
        EXPECT_EQ(orch.record(id).mea_state, PartState::DEPLOYING);
        orch.on_event(ev(Target::MEA, id, Deployed{}));
        EXPECT_EQ(orch.record(id).state, MesState::ACTIVE);
        EXPECT_EQ(orch.record(id).mea_instances, 1u);
    }
}

TEST_F(Fixture, MeaFailureWithoutHealAlarmDegrades)
{
    const auto id = activate(three_vnfs());
    const auto& rec = orch.on_event(ev(Target::MEA, id, Failed{}));
    EXPECT_EQ(rec.state, MesState::DEGRADED);
    EXPECT_THROW(orch.heal(activate(service("t", {{"q", 1}}))), InvalidTransition);
    orch.heal(id);
    EXPECT_EQ(orch.record(id).state, MesState::HEALING);
    orch.on_event(ev(Target::MEA, id, Deployed{}));
    EXPECT_EQ(orch.record(id).state, MesState::ACTIVE);
}

TEST_F(Fixture, NsFailureAfterActivationDegradesAndRecovers)
{
    const auto id = activate(three_vnfs());
    EXPECT_EQ(orch.on_event(ev(Target::NS, id, Failed{})).state, MesState::DEGRADED);
    EXPECT_EQ(orch.on_event(ev(Target::NS, id, Deployed{})).state, MesState::ACTIVE);
}

TEST_F(Fixture, SoleUserTerminationFreesItsVms)
{
    const auto id = activate(three_vnfs());
    EXPECT_EQ(orch.pool().used_vms, 3u);
    const auto& rec = orch.terminate(id);
    EXPECT_EQ(rec.state, MesState::TERMINATED);
    EXPECT_EQ(orch.pool().used_vms, 0u);
    EXPECT_TRUE(orch.pool().offered.empty());
    EXPECT_EQ(mano.commands.back().amount, 3u);
}

TEST_F(Fixture, ReuserTerminationKeepsSharedInstances)
{
    const auto owner = activate(three_vnfs());
    const auto reuser = activate(three_vnfs());
    const auto source = *orch.record(owner).placement.deployed_as;
    EXPECT_EQ(orch.pool().find(source)->reuse_count, (CountMap{{0, 2}, {1, 2}, {2, 2}}));

    orch.terminate(reuser);
    EXPECT_EQ(orch.pool().used_vms, 3u);
    EXPECT_EQ(orch.pool().find(source)->reuse_count, (CountMap{{0, 1}, {1, 1}, {2, 1}}));
    EXPECT_EQ(orch.record(owner).state, MesState::ACTIVE);
}

TEST_F(Fixture, OwnerTerminationWaitsForReusers)
{
    const auto owner = activate(three_vnfs());
    const auto reuser = activate(three_vnfs());
    orch.terminate(owner);
    EXPECT_EQ(orch.pool().used_vms, 3u);
    EXPECT_EQ(orch.record(reuser).state, MesState::ACTIVE);
    orch.terminate(reuser);
    EXPECT_EQ(orch.pool().used_vms, 0u);
    EXPECT_TRUE(orch.pool().offered.empty());
}

TEST_F(Fixture, ErrorsForUnknownAndTerminalRecords)
{
    EXPECT_THROW(orch.on_event(ev(Target::MEA, 42, Deployed{})), UnknownMes);
    EXPECT_THROW(orch.record(42), UnknownMes);
    EXPECT_THROW(orch.terminate(42), UnknownMes);

    const auto id = activate(three_vnfs());
    orch.terminate(id);
    EXPECT_THROW(orch.on_event(ev(Target::MEA, id, Deployed{})), EventAfterTerminal);
    EXPECT_THROW(orch.terminate(id), EventAfterTerminal);
    EXPECT_THROW(orch.coordinate_update(id, "x"), EventAfterTerminal);

    const auto failed = orch.submit(three_vnfs());
    orch.on_event(ev(Target::MEA, failed, Failed{}));
    EXPECT_EQ(orch.record(failed).state, MesState::FAILED);
    EXPECT_THROW(orch.on_event(ev(Target::NS, failed, Deployed{})), EventAfterTerminal);
    EXPECT_THROW(orch.heal(failed), EventAfterTerminal);
}

TEST_F(Fixture, TerminatingAFailedRecordDoesNotReleaseTwice)
{
    const auto id = orch.submit(three_vnfs());
    orch.on_event(ev(Target::MEA, id, Failed{}));
    const auto pool = orch.pool();
    orch.terminate(id);
    EXPECT_EQ(orch.pool(), pool);
    EXPECT_EQ(orch.record(id).state, MesState::TERMINATED);
}

TEST_F(Fixture, CoordinateUpdatePassesThrough)
{
    const auto id = activate(three_vnfs());
    orch.coordinate_update(id, "chain=dpi,firewall");
    EXPECT_EQ(mano.commands.back().kind, BackendCommand::Kind::update_ns);
    EXPECT_EQ(mano.commands.back().detail, "chain=dpi,firewall");
    EXPECT_EQ(orch.record(id).event_log.back().event, "UPDATE");
    EXPECT_EQ(orch.record(id).state, MesState::ACTIVE);
}

TEST_F(Fixture, VimsHaveIndependentPools)
{
    orch.add_vim("edge", PoolState::empty(3, 2));
    EXPECT_THROW(orch.add_vim("edge", PoolState::empty(3, 2)), OrchestratorError);
    const auto a = orch.submit(three_vnfs(), "edge");
    EXPECT_EQ(orch.pool("edge").used_vms, 3u);
    EXPECT_EQ(orch.pool().used_vms, 0u);
    EXPECT_EQ(orch.record(a).vim, "edge");
    // Reuse never crosses VIMs.
    const auto b = orch.submit(three_vnfs());
    EXPECT_FALSE(orch.record(b).placement.reuse_source);
    EXPECT_THROW(orch.submit(three_vnfs(), "cloud"), OrchestratorError);
    orch.terminate(a);
    EXPECT_EQ(orch.pool("edge").used_vms, 0u);
    EXPECT_EQ(orch.pool().used_vms, 3u);
}

TEST_F(Fixture, LogTimestampsIncreaseStrictly)
{
    const auto a = activate(three_vnfs());
    const auto b = activate(service("other", {{"x", 1}}));
    orch.terminate(a);
    orch.terminate(b);
    const auto log = orch.event_log();
    ASSERT_FALSE(log.empty());
    for (std::size_t i = 1; i < log.size(); ++i) {
        EXPECT_EQ(log[i].t, log[i - 1].t + 1);
    }
    EXPECT_EQ(format_log_line(log.front()), "t=1 mes=1 SUBMIT name=svc vim=default");
    EXPECT_EQ(format_log_line({5, 2, "ACTIVE", ""}), "t=5 mes=2 ACTIVE");
}

TEST(OrchestratorProperties, ActiveImpliesBothPartsActiveAndPoolStaysConsistent)
{
    std::mt19937 gen(17);
    for (int run = 0; run < 40; ++run) {
        MockMecBackend mec;
        MockManoBackend mano;
        Orchestrator orch(mec, mano, PoolState::empty(12, 1 + run % 4));
        const std::vector<std::string> types{"a", "b", "c", "d"};
        auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen); };

        for (int step = 0; step < 60; ++step) {
            const auto ids = orch.ids();
            const auto action = pick(ids.empty() ? 1 : 8);
            try {
                if (action == 0) {
                    std::vector<VnfEntry> vnfs;
                    for (const auto& t : types) {
                        if (pick(2) == 0) {
                            vnfs.push_back({t, 1 + static_cast<std::uint32_t>(pick(2))});
                        }
                    }
                    if (vnfs.empty()) {
                        vnfs.push_back({types[pick(4)], 1});
                    }
                    std::optional<AlarmConfig> alarm;
                    if (pick(2) == 0) {
                        alarm = AlarmConfig{"cpu", 0.5, pick(2) == 0 ? AlarmAction::heal : AlarmAction::scale_out};
                    }
                    orch.submit(service("s", vnfs, alarm));
                } else {
                    const auto id = ids[pick(ids.size())];
                    const auto target = pick(2) == 0 ? Target::MEA : Target::NS;
                    switch (action) {
                    case 1: orch.terminate(id); break;
                    case 2: orch.on_event(ev(target, id, Failed{})); break;
                    case 3: orch.on_event(ev(target, id, MetricSample{"cpu", 0.9})); break;
                    case 4: orch.heal(id); break;
                    default: orch.on_event(ev(target, id, Deployed{})); break;
                    }
                }
            } catch (const OrchestratorError&) {
                // Rejected operations must leave everything consistent too.
            }

            const auto& pool = orch.pool();
            ASSERT_NO_THROW(pool.check_invariants());
            std::uint64_t holders = 0;
            for (auto id : orch.ids()) {
                const auto& rec = orch.record(id);
                if (rec.state == MesState::ACTIVE) {
                    EXPECT_TRUE(rec.mea_state == PartState::ACTIVE && rec.ns_state == PartState::ACTIVE)
                        << "mes " << id;
                }
                EXPECT_EQ(rec.released, rec.state == MesState::TERMINATED || rec.state == MesState::FAILED);
                if (!rec.released) {
                    holders += rec.placement.reused.size() + rec.placement.deployed_new.size();
                }
            }
            std::uint64_t counted = 0;
            for (const auto& o : pool.offered) {
                for (const auto& [type, n] : o.reuse_count) {
                    counted += n;
                }
            }
            EXPECT_EQ(counted, holders);
        }
    }
}

TEST(OrchestratorLoop, SerializesConcurrentCallers)
{
    MockMecBackend mec;
    MockManoBackend mano;
    Orchestrator orch(mec, mano, PoolState::empty(1000, 4));
    {
        OrchestratorLoop loop(orch);
        std::vector<std::jthread> callers;
        std::vector<std::future<MesId>> ids(16);
        for (int i = 0; i < 16; ++i) {
            callers.emplace_back([&, i] {
                ids[i] = loop.post([i](Orchestrator& o) {
                    return o.submit(service("s" + std::to_string(i), {{"t" + std::to_string(i % 3), 1}}));
                });
            });
        }
        callers.clear();
        std::vector<MesId> got;
        for (auto& f : ids) {
            got.push_back(f.get());
        }
        std::sort(got.begin(), got.end());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i], i + 1);
        }
        auto used = loop.post([](Orchestrator& o) { return o.pool().used_vms; }).get();
        // Types seen 6, 5 and 5 times; four sharers per instance.
        EXPECT_EQ(used, 6u);

        auto failing = loop.post([](Orchestrator& o) { return o.record(99).state; });
        EXPECT_THROW(failing.get(), UnknownMes);
    }
    EXPECT_EQ(orch.ids().size(), 16u);
}
