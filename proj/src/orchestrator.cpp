#include "apmec/orchestrator.hpp"

#include <algorithm>
#include <charconv>

namespace apmec {

std::string_view to_string(MesState state)
{
    switch (state) {
    case MesState::PENDING: return "PENDING";
    case MesState::DEPLOYING: return "DEPLOYING";
    case MesState::ACTIVE: return "ACTIVE";
    case MesState::DEGRADED: return "DEGRADED";
    case MesState::SCALING: return "SCALING";
    case MesState::HEALING: return "HEALING";
    case MesState::TERMINATING: return "TERMINATING";
    case MesState::TERMINATED: return "TERMINATED";
    case MesState::FAILED: return "FAILED";
    }
    return "?";
}

std::string_view to_string(PartState state)
{
    switch (state) {
    case PartState::PENDING: return "PENDING";
    case PartState::DEPLOYING: return "DEPLOYING";
    case PartState::ACTIVE: return "ACTIVE";
    case PartState::FAILED: return "FAILED";
    }
    return "?";
}

std::string_view to_string(Target target) { return target == Target::MEA ? "MEA" : "NS"; }

std::string format_log_line(const LogEntry& e)
{
    std::string line = "t=" + std::to_string(e.t) + " mes=" + std::to_string(e.mes) + " " + e.event;
    if (!e.detail.empty()) {
        line += " " + e.detail;
    }
    return line;
}

namespace {

std::string number(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string source_text(const std::optional<OfferedId>& id) { return id ? std::to_string(*id) : "-"; }

bool is_terminal(MesState s) { return s == MesState::TERMINATED || s == MesState::FAILED; }

} // namespace

Orchestrator::Orchestrator(MecBackend& mec, ManoBackend& mano, PoolState default_pool) : mec_(mec), mano_(mano)
{
    vims_.emplace("default", std::move(default_pool));
}

void Orchestrator::add_vim(const std::string& name, PoolState pool)
{
    if (!vims_.emplace(name, std::move(pool)).second) {
        throw OrchestratorError("VIM '" + name + "' already registered");
    }
}

const PoolState& Orchestrator::pool(const std::string& vim) const
{
    auto it = vims_.find(vim);
    if (it == vims_.end()) {
        throw OrchestratorError("unknown VIM '" + vim + "'");
    }
    return it->second;
}

PoolState& Orchestrator::vim_pool(const std::string& vim) { return const_cast<PoolState&>(pool(vim)); }

const MESRecord& Orchestrator::record(MesId id) const
{
    auto it = records_.find(id);
    if (it == records_.end()) {
        throw UnknownMes(id);
    }
    return it->second;
}

std::vector<MesId> Orchestrator::ids() const
{
    std::vector<MesId> out;
    for (const auto& [id, rec] : records_) {
        out.push_back(id);
    }
    return out;
}

std::vector<LogEntry> Orchestrator::event_log() const
{
    std::vector<LogEntry> all;
    for (const auto& [id, rec] : records_) {
        all.insert(all.end(), rec.event_log.begin(), rec.event_log.end());
    }
    std::sort(all.begin(), all.end(), [](const LogEntry& a, const LogEntry& b) { return a.t < b.t; });
    return all;
}

MESRecord& Orchestrator::live_record(MesId id)
{
    auto it = records_.find(id);
    if (it == records_.end()) {
        throw UnknownMes(id);
    }
    if (it->second.state == MesState::TERMINATED) {
        throw EventAfterTerminal(id);
    }
    return it->second;
}

void Orchestrator::log(MESRecord& rec, std::string event, std::string detail)
{
    rec.event_log.push_back({++clock_, rec.mes_id, std::move(event), std::move(detail)});
}

MesId Orchestrator::submit(const MESD& mesd, const std::string& vim)
{
    try {
        validate(mesd);
    } catch (const DescriptorError& e) {
        throw InvalidDescriptor(std::string("invalid_descriptor: ") + e.what());
    }
    auto& pool = vim_pool(vim);

    auto request = to_request(mesd, catalog_, next_request_);
    auto outcome = place(request, pool, Policy::cooperation);
    if (auto* rejected = std::get_if<Rejection>(&outcome)) {
        throw InsufficientCapacity(rejected->shortfall_vms);
    }
    ++next_request_;

    const MesId id = next_mes_++;
    MESRecord& rec = records_[id];
    rec.mes_id = id;
    rec.vim = vim;
    rec.mesd = mesd;
    rec.placement = std::get<PlacementPlan>(std::move(outcome));
    log(rec, "SUBMIT", "name=" + mesd.name + " vim=" + vim);
    log(rec, "PLACED",
        "src=" + source_text(rec.placement.reuse_source) + " reused=" +
            std::to_string(rec.placement.reused_instances()) + " new_vms=" + std::to_string(rec.placement.new_vms));

    rec.state = MesState::DEPLOYING;
    rec.mea_state = PartState::DEPLOYING;
    rec.ns_state = PartState::DEPLOYING;
    mec_.deploy_mea(id, mesd.mead, 1);
    log(rec, "DEPLOY_MEA", "instances=1");
    mano_.deploy_ns(id, rec.placement);
    log(rec, "DEPLOY_NS", "new_vms=" + std::to_string(rec.placement.new_vms));

    // A fully reused NS is already running.
    if (rec.placement.new_vms == 0) {
        rec.ns_state = PartState::ACTIVE;
        log(rec, "NS_ACTIVE", "reused");
    }
    return id;
}

const MESRecord& Orchestrator::on_event(const MockBackendEvent& ev)
{
    MESRecord& rec = live_record(ev.mes_id);
    if (rec.state == MesState::FAILED) {
        throw EventAfterTerminal(ev.mes_id);
    }
    if (std::holds_alternative<Deployed>(ev.outcome)) {
        on_deployed(rec, ev.target);
    } else if (std::holds_alternative<Failed>(ev.outcome)) {
        on_failed(rec, ev.target);
    } else {
        on_metric(rec, std::get<MetricSample>(ev.outcome));
    }
    return rec;
}

void Orchestrator::settle(MESRecord& rec)
{
    if (rec.mea_state == PartState::ACTIVE && rec.ns_state == PartState::ACTIVE) {
        if (rec.state != MesState::ACTIVE) {
            rec.state = MesState::ACTIVE;
            log(rec, "ACTIVE");
        }
    } else if (rec.state == MesState::ACTIVE) {
        rec.state = MesState::DEGRADED;
        log(rec, "DEGRADED");
    }
}

void Orchestrator::on_deployed(MESRecord& rec, Target target)
{
    if (target == Target::NS) {
        if (rec.ns_state != PartState::DEPLOYING && rec.ns_state != PartState::FAILED) {
            log(rec, "IGNORED", "NS deployed");
            return;
        }
        rec.ns_state = PartState::ACTIVE;
        log(rec, "NS_ACTIVE");
        if (rec.state != MesState::DEPLOYING) {
            rec.state = MesState::DEGRADED;
        }
        settle(rec);
        return;
    }

    switch (rec.state) {
    case MesState::DEPLOYING:
        if (rec.mea_state != PartState::DEPLOYING) {
            log(rec, "IGNORED", "MEA deployed");
            return;
        }
        rec.mea_instances = 1;
        break;
    case MesState::SCALING:
        ++rec.mea_instances;
        break;
    case MesState::HEALING:
        if (rec.mea_instances == 0) {
            rec.mea_instances = 1;
        }
        break;
    default:
        log(rec, "IGNORED", "MEA deployed");
        return;
    }
    rec.mea_state = PartState::ACTIVE;
    log(rec, "MEA_ACTIVE", "instances=" + std::to_string(rec.mea_instances));
    if (rec.state != MesState::DEPLOYING) {
        rec.state = MesState::DEGRADED;
    }
    settle(rec);
}

void Orchestrator::on_failed(MESRecord& rec, Target target)
{
    if (rec.state == MesState::DEPLOYING) {
        (target == Target::MEA ? rec.mea_state : rec.ns_state) = PartState::FAILED;
        log(rec, target == Target::MEA ? "MEA_FAILED" : "NS_FAILED");
        rollback(rec);
        return;
    }
    if (target == Target::NS) {
        rec.ns_state = PartState::FAILED;
        log(rec, "NS_FAILED");
        if (rec.state != MesState::DEGRADED) {
            rec.state = MesState::ACTIVE;
        }
        settle(rec);
        return;
    }
    if (rec.state == MesState::SCALING) {
        // Existing instances keep running; only the extra one is lost.
        log(rec, "SCALE_FAILED", "instances=" + std::to_string(rec.mea_instances));
        rec.state = MesState::DEGRADED;
        settle(rec);
        return;
    }
    rec.mea_state = PartState::FAILED;
    log(rec, "MEA_FAILED");
    const auto& alarm = rec.mesd.mead.alarm;
    if (alarm && alarm->action == AlarmAction::heal) {
        start_heal(rec);
        return;
    }
    if (rec.state != MesState::DEGRADED) {
        rec.state = MesState::ACTIVE;
    }
    settle(rec);
}

void Orchestrator::on_metric(MESRecord& rec, const MetricSample& sample)
{
    log(rec, "METRIC", sample.name + "=" + number(sample.value));
    const auto& alarm = rec.mesd.mead.alarm;
    if (!alarm || alarm->metric != sample.name || !(sample.value > alarm->threshold)) {
        return;
    }
    if (rec.state != MesState::ACTIVE) {
        log(rec, "ALARM_SUPPRESSED", "state=" + std::string(to_string(rec.state)));
        return;
    }
    log(rec, "ALARM", sample.name + ">" + number(alarm->threshold) + " action=" + std::string(to_string(alarm->action)));
    if (alarm->action == AlarmAction::heal) {
        start_heal(rec);
        return;
    }
    rec.state = MesState::SCALING;
    mec_.deploy_mea(rec.mes_id, rec.mesd.mead, 1);
    log(rec, "SCALING", "instances=" + std::to_string(rec.mea_instances + 1));
}

void Orchestrator::rollback(MESRecord& rec)
{
    auto& pool = vim_pool(rec.vim);
    const auto before = pool.used_vms;
    release(pool, rec.placement);
    rec.released = true;
    mec_.delete_mea(rec.mes_id);
    mano_.delete_ns(rec.mes_id, before - pool.used_vms);
    log(rec, "ROLLBACK", "freed_vms=" + std::to_string(before - pool.used_vms) +
                             " used_vms=" + std::to_string(pool.used_vms));
    rec.state = MesState::FAILED;
    log(rec, "FAILED");
}

void Orchestrator::start_heal(MESRecord& rec)
{
    rec.state = MesState::HEALING;
    rec.mea_state = PartState::DEPLOYING;
    mec_.deploy_mea(rec.mes_id, rec.mesd.mead, rec.mea_instances == 0 ? 1 : rec.mea_instances);
    log(rec, "HEALING", "instances=" + std::to_string(rec.mea_instances));
}

const MESRecord& Orchestrator::heal(MesId id)
{
    MESRecord& rec = live_record(id);
    if (rec.state == MesState::FAILED) {
        throw EventAfterTerminal(id);
    }
    const auto& alarm = rec.mesd.mead.alarm;
    const bool heal_alarm = alarm && alarm->action == AlarmAction::heal;
    const bool allowed = rec.mea_state == PartState::FAILED ||
                         (heal_alarm && (rec.state == MesState::ACTIVE || rec.state == MesState::DEGRADED));
    if (!allowed || rec.state == MesState::DEPLOYING) {
        throw InvalidTransition("cannot heal MES " + std::to_string(id) + " in state " +
                                std::string(to_string(rec.state)));
    }
    start_heal(rec);
    return rec;
}

const MESRecord& Orchestrator::terminate(MesId id)
{
    MESRecord& rec = live_record(id);
    rec.state = MesState::TERMINATING;
    log(rec, "TERMINATING");
    if (!rec.released) {
        auto& pool = vim_pool(rec.vim);
        const auto before = pool.used_vms;
        release(pool, rec.placement);
        rec.released = true;
        mec_.delete_mea(id);
        mano_.delete_ns(id, before - pool.used_vms);
        log(rec, "RELEASE", "freed_vms=" + std::to_string(before - pool.used_vms) +
                                " used_vms=" + std::to_string(pool.used_vms));
    }
    rec.state = MesState::TERMINATED;
    log(rec, "TERMINATED");
    return rec;
}

const MESRecord& Orchestrator::coordinate_update(MesId id, const std::string& payload)
{
    MESRecord& rec = live_record(id);
    if (is_terminal(rec.state)) {
        throw EventAfterTerminal(id);
    }
    mano_.update_ns(id, payload);
    log(rec, "UPDATE", payload);
    return rec;
}

OrchestratorLoop::OrchestratorLoop(Orchestrator& orchestrator)
    : orchestrator_(orchestrator), worker_([this](std::stop_token stop) { run(stop); })
{
}

OrchestratorLoop::~OrchestratorLoop()
{
    worker_.request_stop();
    cv_.notify_all();
}

void OrchestratorLoop::enqueue(std::function<void(Orchestrator&)> job)
{
    {
        std::lock_guard lock(mutex_);
        queue_.push_back(std::move(job));
    }
    cv_.notify_one();
}

void OrchestratorLoop::run(std::stop_token stop)
{
    for (;;) {
        std::function<void(Orchestrator&)> job;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, stop, [this] { return !queue_.empty(); });
            if (queue_.empty()) {
                return;
            }
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        job(orchestrator_);
    }
}

} // namespace apmec
