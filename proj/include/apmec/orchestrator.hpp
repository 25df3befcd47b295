#ifndef APMEC_ORCHESTRATOR_HPP
#define APMEC_ORCHESTRATOR_HPP

#include "apmec/descriptor.hpp"
#include "apmec/placement.hpp"

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace apmec {

using MesId = std::uint64_t;

enum class MesState { PENDING, DEPLOYING, ACTIVE, DEGRADED, SCALING, HEALING, TERMINATING, TERMINATED, FAILED };
enum class PartState { PENDING, DEPLOYING, ACTIVE, FAILED };
enum class Target { MEA, NS };

std::string_view to_string(MesState state);
std::string_view to_string(PartState state);
std::string_view to_string(Target target);

struct LogEntry
{
    std::uint64_t t = 0;
    MesId mes = 0;
    std::string event;
    std::string detail;
};

/// `t=<n> mes=<id> <EVENT> <detail>`; the detail and its separator are
/// omitted when empty.
std::string format_log_line(const LogEntry& entry);

struct MESRecord
{
    MesId mes_id = 0;
    std::string vim;
    MESD mesd;
    MesState state = MesState::PENDING;
    PartState mea_state = PartState::PENDING;
    PartState ns_state = PartState::PENDING;
    std::uint32_t mea_instances = 0;
    PlacementPlan placement;
    /// Pool holdings were given back (rollback or termination).
    bool released = false;
    std::vector<LogEntry> event_log;
};

struct Deployed
{
};
struct Failed
{
};
struct MetricSample
{
    std::string name;
    double value = 0;
};

struct MockBackendEvent
{
    Target target = Target::MEA;
    MesId mes_id = 0;
    std::variant<Deployed, Failed, MetricSample> outcome;
};

class OrchestratorError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class UnknownMes : public OrchestratorError
{
public:
    explicit UnknownMes(MesId id) : OrchestratorError("unknown_mes_id: " + std::to_string(id)) {}
};

class EventAfterTerminal : public OrchestratorError
{
public:
    explicit EventAfterTerminal(MesId id)
        : OrchestratorError("event_after_terminal: MES " + std::to_string(id) + " is terminal")
    {
    }
};

class InsufficientCapacity : public OrchestratorError
{
public:
    explicit InsufficientCapacity(std::uint64_t shortfall)
        : OrchestratorError("insufficient_capacity: short by " + std::to_string(shortfall) + " VMs"),
          shortfall_(shortfall)
    {
    }
    std::uint64_t shortfall() const { return shortfall_; }

private:
    std::uint64_t shortfall_;
};

class InvalidDescriptor : public OrchestratorError
{
public:
    using OrchestratorError::OrchestratorError;
};

/// Raised when an operation does not apply in the record's current state.
class InvalidTransition : public OrchestratorError
{
public:
    using OrchestratorError::OrchestratorError;
};

/// Application side (MEO/MEM towards the VIM).
class MecBackend
{
public:
    virtual ~MecBackend() = default;
    virtual void deploy_mea(MesId mes, const MeadDesc& mead, std::uint32_t instances) = 0;
    virtual void delete_mea(MesId mes) = 0;
};

/// Network service side (NFVO/VNFM).
class ManoBackend
{
public:
    virtual ~ManoBackend() = default;
    virtual void deploy_ns(MesId mes, const PlacementPlan& plan) = 0;
    virtual void delete_ns(MesId mes, std::uint64_t freed_vms) = 0;
    virtual void update_ns(MesId mes, const std::string& payload) = 0;
};

struct BackendCommand
{
    enum class Kind { deploy_mea, delete_mea, deploy_ns, delete_ns, update_ns };
    Kind kind;
    MesId mes = 0;
    std::uint64_t amount = 0;
    std::string detail;
};

/// Records every command; confirmations come from injected events.
class MockMecBackend : public MecBackend
{
public:
    void deploy_mea(MesId mes, const MeadDesc& mead, std::uint32_t instances) override
    {
        commands.push_back({BackendCommand::Kind::deploy_mea, mes, instances, mead.mea.name});
    }
    void delete_mea(MesId mes) override { commands.push_back({BackendCommand::Kind::delete_mea, mes, 0, {}}); }

    std::vector<BackendCommand> commands;
};

class MockManoBackend : public ManoBackend
{
public:
    void deploy_ns(MesId mes, const PlacementPlan& plan) override
    {
        commands.push_back({BackendCommand::Kind::deploy_ns, mes, plan.new_vms, {}});
    }
    void delete_ns(MesId mes, std::uint64_t freed_vms) override
    {
        commands.push_back({BackendCommand::Kind::delete_ns, mes, freed_vms, {}});
    }
    void update_ns(MesId mes, const std::string& payload) override
    {
        commands.push_back({BackendCommand::Kind::update_ns, mes, 0, payload});
    }

    std::vector<BackendCommand> commands;
};

/// Lifecycle manager for MEC services.
///
/// Splits each descriptor into its application and network-service parts,
/// places the NS with the cooperation policy against the chosen VIM pool,
/// then tracks both deployments until they are confirmed. Time is a logical
/// counter advanced once per log entry.
///
/// Not thread-safe; see OrchestratorLoop.
class Orchestrator
{
public:
    Orchestrator(MecBackend& mec, ManoBackend& mano, PoolState default_pool);

    void add_vim(const std::string& name, PoolState pool);
    const PoolState& pool(const std::string& vim = "default") const;

    /// Throws InvalidDescriptor, InsufficientCapacity or OrchestratorError for
    /// an unknown VIM. Nothing is recorded when it throws.
    MesId submit(const MESD& mesd, const std::string& vim = "default");

    const MESRecord& on_event(const MockBackendEvent& ev);
    const MESRecord& heal(MesId id);
    const MESRecord& terminate(MesId id);
    /// Pass-through of an opaque update to the NS manager.
    const MESRecord& coordinate_update(MesId id, const std::string& payload);

    const MESRecord& record(MesId id) const;
    std::vector<MesId> ids() const;
    /// All records' entries in time order.
    std::vector<LogEntry> event_log() const;

private:
    MESRecord& live_record(MesId id);
    PoolState& vim_pool(const std::string& vim);
    void log(MESRecord& rec, std::string event, std::string detail = {});
    void settle(MESRecord& rec);
    void rollback(MESRecord& rec);
    void start_heal(MESRecord& rec);
    void on_deployed(MESRecord& rec, Target target);
    void on_failed(MESRecord& rec, Target target);
    void on_metric(MESRecord& rec, const MetricSample& sample);

    MecBackend& mec_;
    ManoBackend& mano_;
    std::map<std::string, PoolState> vims_;
    NfCatalog catalog_;
    std::map<MesId, MESRecord> records_;
    MesId next_mes_ = 1;
    RequestId next_request_ = 0;
    std::uint64_t clock_ = 0;
};

/// Serializes all access to an Orchestrator through a single worker thread.
class OrchestratorLoop
{
public:
    explicit OrchestratorLoop(Orchestrator& orchestrator);
    ~OrchestratorLoop();

    OrchestratorLoop(const OrchestratorLoop&) = delete;
    OrchestratorLoop& operator=(const OrchestratorLoop&) = delete;

    /// Queues `fn`; the future completes once it has run on the loop thread.
    template <typename Fn>
    auto post(Fn fn) -> std::future<std::invoke_result_t<Fn, Orchestrator&>>
    {
        using R = std::invoke_result_t<Fn, Orchestrator&>;
        auto task = std::make_shared<std::packaged_task<R(Orchestrator&)>>(std::move(fn));
        auto fut = task->get_future();
        enqueue([task](Orchestrator& o) { (*task)(o); });
        return fut;
    }

private:
    void enqueue(std::function<void(Orchestrator&)> job);
    void run(std::stop_token stop);

    Orchestrator& orchestrator_;
    std::mutex mutex_;
    std::condition_variable_any cv_;
    std::deque<std::function<void(Orchestrator&)>> queue_;
    std::jthread worker_;
};

} // namespace apmec

#endif
