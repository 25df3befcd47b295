#include "apmec/oracle.hpp"

#include <string>

namespace apmec {

OracleBudgetExceeded::OracleBudgetExceeded(std::uint64_t max_nodes)
    : std::runtime_error("budget_exceeded: oracle search exceeded " + std::to_string(max_nodes) + " nodes"),
      max_nodes_(max_nodes)
{
}

namespace {

// Flat per-type view of one deployed NS: instance count and holders.
struct Slot
{
    OfferedId id;
    std::map<NfTypeId, std::pair<std::uint32_t, std::uint32_t>> types;
};

struct SearchState
{
    std::vector<Slot> slots;
    std::uint64_t free_vms = 0;
    OfferedId next_id = 0;
};

class Search
{
public:
    Search(const std::vector<NSSpec>& requests, std::uint32_t cmax, OracleLimits limits)
        : requests_(requests), cmax_(cmax), limits_(limits)
    {
    }

    void run(SearchState& state, std::size_t k, std::uint64_t reuse_so_far)
    {
        if (++result_.nodes_explored > limits_.max_nodes) {
            throw OracleBudgetExceeded(limits_.max_nodes);
        }
        if (k == requests_.size()) {
            record(reuse_so_far);
            return;
        }
        const auto& request = requests_[k].members();

        // Choice "no source" first, then every slot that grants something.
        std::vector<std::optional<std::size_t>> choices{std::nullopt};
        for (std::size_t s = 0; s < state.slots.size(); ++s) {
            if (grants_anything(request, state.slots[s])) {
                choices.emplace_back(s);
            }
        }

        for (const auto& choice : choices) {
            std::uint64_t reused = 0;
            std::map<NfTypeId, std::pair<std::uint32_t, std::uint32_t>> fresh;
            std::vector<NfTypeId> taken;
            for (const auto& [type, want] : request) {
                if (choice && grants(state.slots[*choice], type, want)) {
                    taken.push_back(type);
                    reused += want;
                } else {
                    fresh[type] = {want, 1};
                }
            }
            std::uint64_t fresh_vms = 0;
            for (const auto& [type, entry] : fresh) {
                fresh_vms += entry.first;
            }
            if (fresh_vms > state.free_vms) {
                // This request is refused on this path, which ends the episode.
                record(reuse_so_far);
                continue;
            }

            SearchState next = state;
            if (choice) {
                for (NfTypeId type : taken) {
                    ++next.slots[*choice].types[type].second;
                }
            }
            if (!fresh.empty()) {
                next.slots.push_back({next.next_id++, std::move(fresh)});
            }
            next.free_vms -= fresh_vms;

            path_.emplace_back(choice ? std::optional<OfferedId>(state.slots[*choice].id) : std::nullopt);
            run(next, k + 1, reuse_so_far + reused);
            path_.pop_back();
        }
    }

    OracleResult take() { return std::move(result_); }

private:
    bool grants(const Slot& slot, NfTypeId type, std::uint32_t want) const
    {
        auto it = slot.types.find(type);
        return it != slot.types.end() && it->second.first >= want && it->second.second < cmax_;
    }

    bool grants_anything(const CountMap& request, const Slot& slot) const
    {
        for (const auto& [type, want] : request) {
            if (grants(slot, type, want)) {
                return true;
            }
        }
        return false;
    }

    void record(std::uint64_t total)
    {
        if (!have_best_ || total > result_.best_total_reuse) {
            have_best_ = true;
            result_.best_total_reuse = total;
            result_.best_assignment.clear();
            for (std::size_t i = 0; i < path_.size(); ++i) {
                result_.best_assignment[i] = path_[i];
            }
        }
    }

    const std::vector<NSSpec>& requests_;
    std::uint32_t cmax_;
    OracleLimits limits_;
    std::vector<std::optional<OfferedId>> path_;
    OracleResult result_;
    bool have_best_ = false;
};

} // namespace

OracleResult oracle_optimal_reuse(const std::vector<NSSpec>& requests, const PoolState& initial_pool,
                                  OracleLimits limits)
{
    SearchState state;
    state.free_vms = initial_pool.capacity_vms - initial_pool.used_vms;
    state.next_id = initial_pool.next_offered_id;
    for (const auto& ns : initial_pool.offered) {
        Slot slot{ns.id, {}};
        for (const auto& [type, n] : ns.spec.members()) {
            slot.types[type] = {n, ns.reuse_count.at(type)};
        }
        state.slots.push_back(std::move(slot));
    }
    Search search(requests, initial_pool.reuse_capacity, limits);
    search.run(state, 0, 0);
    return search.take();
}

} // namespace apmec
