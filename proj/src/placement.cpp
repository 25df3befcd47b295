#include "apmec/placement.hpp"

#include <algorithm>
#include <tuple>

namespace apmec {

std::string_view to_string(Policy policy)
{
    return policy == Policy::separation ? "separation" : "cooperation";
}

std::optional<Policy> parse_policy(std::string_view text)
{
    if (text == "separation") {
        return Policy::separation;
    }
    if (text == "cooperation") {
        return Policy::cooperation;
    }
    return std::nullopt;
}

PoolState PoolState::empty(std::uint64_t capacity_vms, std::uint32_t reuse_capacity)
{
    if (capacity_vms == 0) {
        throw ModelError("pool capacity must be positive");
    }
    if (reuse_capacity == 0) {
        throw ModelError("reuse capacity must be positive");
    }
    PoolState pool;
    pool.capacity_vms = capacity_vms;
    pool.reuse_capacity = reuse_capacity;
    return pool;
}

const OfferedNS* PoolState::find(OfferedId id) const
{
    auto it = std::find_if(offered.begin(), offered.end(), [id](const OfferedNS& ns) { return ns.id == id; });
    return it == offered.end() ? nullptr : &*it;
}

OfferedNS* PoolState::find(OfferedId id)
{
    return const_cast<OfferedNS*>(std::as_const(*this).find(id));
}

OfferedId PoolState::add_offered(NSSpec spec)
{
    if (spec.empty()) {
        throw ModelError("offered NS must not be empty");
    }
    const auto vms = footprint(spec);
    if (vms > remaining_vms()) {
        throw ModelError("offered NS does not fit the remaining budget");
    }
    const auto id = next_offered_id++;
    offered.push_back(OfferedNS::deployed(id, std::move(spec)));
    used_vms += vms;
    return id;
}

void PoolState::check_invariants() const
{
    std::uint64_t sum = 0;
    for (const auto& ns : offered) {
        if (ns.spec.empty()) {
            throw ModelError("offered NS " + std::to_string(ns.id) + " is empty");
        }
        sum += footprint(ns.spec);
        for (const auto& [type, n] : ns.spec.members()) {
            auto it = ns.reuse_count.find(type);
            if (it == ns.reuse_count.end() || it->second < 1 || it->second > reuse_capacity) {
                throw ModelError("offered NS " + std::to_string(ns.id) + " has a bad reuse counter for type " +
                                 std::to_string(type));
            }
        }
        if (ns.reuse_count.size() != ns.spec.size()) {
            throw ModelError("offered NS " + std::to_string(ns.id) + " counts sharers of absent types");
        }
    }
    if (sum != used_vms) {
        throw ModelError("used_vms " + std::to_string(used_vms) + " != offered footprint " + std::to_string(sum));
    }
    if (used_vms > capacity_vms) {
        throw ModelError("pool over capacity");
    }
}

std::uint64_t PlacementPlan::reused_instances() const
{
    std::uint64_t n = 0;
    for (const auto& [type, count] : reused) {
        n += count;
    }
    return n;
}

CountMap reusable_vector(const NSSpec& request, const OfferedNS& source, std::uint32_t cmax)
{
    CountMap grant;
    for (NfTypeId type : overlap_types(request, source.spec)) {
        const auto wanted = request.count(type);
        const auto held = source.spec.count(type);
        auto it = source.reuse_count.find(type);
        const std::uint32_t sharers = it == source.reuse_count.end() ? 0 : it->second;
        if (held >= wanted && sharers < cmax) {
            grant[type] = wanted;
        }
    }
    return grant;
}

std::vector<OfferedId> phase1_candidates(const NSSpec& request, const PoolState& pool)
{
    std::vector<OfferedId> best;
    std::size_t best_score = 0;
    for (const auto& ns : pool.offered) {
        const auto score = reusable_vector(request, ns, pool.reuse_capacity).size();
        if (score == 0 || score < best_score) {
            continue;
        }
        if (score > best_score) {
            best.clear();
            best_score = score;
        }
        best.push_back(ns.id);
    }
    return best;
}

std::optional<OfferedId> phase2_select(const NSSpec& request, std::span<const OfferedNS> candidates,
                                       std::uint32_t cmax)
{
    // F_k is fixed for the request, so maximizing F_k / F_m means the
    // smallest F_m.
    const OfferedNS* winner = nullptr;
    std::tuple<std::uint64_t, std::int64_t, OfferedId> winner_key{};
    for (const auto& ns : candidates) {
        std::uint64_t granted = 0;
        for (const auto& [type, n] : reusable_vector(request, ns, cmax)) {
            granted += n;
        }
        const std::tuple<std::uint64_t, std::int64_t, OfferedId> key{footprint(ns.spec),
                                                                     -static_cast<std::int64_t>(granted), ns.id};
        if (winner == nullptr || key < winner_key) {
            winner = &ns;
            winner_key = key;
        }
    }
    if (winner == nullptr) {
        return std::nullopt;
    }
    return winner->id;
}

PlacementPlan plan_with_source(const MESRequest& request, const PoolState& pool, std::optional<OfferedId> source)
{
    PlacementPlan plan;
    plan.request_id = request.id;
    if (source) {
        const auto* ns = pool.find(*source);
        if (ns == nullptr) {
            throw ModelError("unknown offered NS " + std::to_string(*source));
        }
        plan.reused = reusable_vector(request.ns, *ns, pool.reuse_capacity);
        if (!plan.reused.empty()) {
            plan.reuse_source = source;
        }
    }
    for (const auto& [type, n] : request.ns.members()) {
        if (plan.reused.count(type) == 0) {
            plan.deployed_new[type] = n;
            plan.new_vms += n;
        }
    }
    return plan;
}

void commit(PoolState& pool, PlacementPlan& plan)
{
    if (plan.new_vms > pool.remaining_vms()) {
        throw ModelError("plan needs " + std::to_string(plan.new_vms) + " VMs, only " +
                         std::to_string(pool.remaining_vms()) + " left");
    }
    if (plan.reuse_source) {
        auto* source = pool.find(*plan.reuse_source);
        if (source == nullptr) {
            throw ModelError("unknown offered NS " + std::to_string(*plan.reuse_source));
        }
        for (const auto& [type, n] : plan.reused) {
            auto& sharers = source->reuse_count.at(type);
            if (sharers >= pool.reuse_capacity || source->spec.count(type) < n) {
                throw ModelError("offered NS " + std::to_string(source->id) + " cannot serve type " +
                                 std::to_string(type));
            }
        }
        for (const auto& [type, n] : plan.reused) {
            ++source->reuse_count.at(type);
        }
    }
    if (!plan.deployed_new.empty()) {
        plan.deployed_as = pool.add_offered(NSSpec(plan.deployed_new));
    }
}

PlaceResult place(const MESRequest& request, PoolState& pool, Policy policy)
{
    std::optional<OfferedId> source;
    if (policy == Policy::cooperation) {
        std::vector<OfferedNS> candidates;
        for (OfferedId id : phase1_candidates(request.ns, pool)) {
            candidates.push_back(*pool.find(id));
        }
        source = phase2_select(request.ns, candidates, pool.reuse_capacity);
    }
    auto plan = plan_with_source(request, pool, source);
    if (plan.new_vms > pool.remaining_vms()) {
        return Rejection{request.id, plan.new_vms - pool.remaining_vms()};
    }
    commit(pool, plan);
    return plan;
}

namespace {

// Drops one holder of `type` on `ns`; frees the instances when none remain.
void drop_holder(PoolState& pool, OfferedId id, NfTypeId type)
{
    auto* ns = pool.find(id);
    if (ns == nullptr) {
        throw ModelError("release of unknown offered NS " + std::to_string(id));
    }
    auto it = ns->reuse_count.find(type);
    if (it == ns->reuse_count.end()) {
        throw ModelError("release of type " + std::to_string(type) + " not held on NS " + std::to_string(id));
    }
    if (--it->second > 0) {
        return;
    }
    ns->reuse_count.erase(it);
    auto members = ns->spec.members();
    pool.used_vms -= members.at(type);
    members.erase(type);
    if (members.empty()) {
        pool.offered.erase(pool.offered.begin() + (ns - pool.offered.data()));
    } else {
        ns->spec = NSSpec(std::move(members));
    }
}

} // namespace

void release(PoolState& pool, const PlacementPlan& plan)
{
    if (plan.reuse_source) {
        for (const auto& [type, n] : plan.reused) {
            drop_holder(pool, *plan.reuse_source, type);
        }
    }
    if (plan.deployed_as) {
        for (const auto& [type, n] : plan.deployed_new) {
            drop_holder(pool, *plan.deployed_as, type);
        }
    }
}

std::uint64_t total_instances(const PoolState& pool) { return pool.used_vms; }

} // namespace apmec
