#ifndef APMEC_PLACEMENT_HPP
#define APMEC_PLACEMENT_HPP

#include "apmec/core_model.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace apmec {

enum class Policy { separation, cooperation };

std::string_view to_string(Policy policy);
std::optional<Policy> parse_policy(std::string_view text);

/// Deployed network services plus the VM budget they draw from.
///
/// used_vms always equals the summed footprint of `offered`; reuse counters
/// never exceed reuse_capacity.
struct PoolState
{
    std::vector<OfferedNS> offered;
    std::uint64_t capacity_vms = 0;
    std::uint64_t used_vms = 0;
    std::uint32_t reuse_capacity = 1;
    OfferedId next_offered_id = 0;

    static PoolState empty(std::uint64_t capacity_vms, std::uint32_t reuse_capacity);

    std::uint64_t remaining_vms() const { return capacity_vms - used_vms; }

    const OfferedNS* find(OfferedId id) const;
    OfferedNS* find(OfferedId id);

    /// Deploys `spec` as a new offered NS owned by nobody in particular.
    /// Throws ModelError if it does not fit the budget.
    OfferedId add_offered(NSSpec spec);

    /// Throws ModelError describing the first broken invariant.
    void check_invariants() const;

    /// Id allocation state is not part of the observable pool.
    friend bool operator==(const PoolState& a, const PoolState& b)
    {
        return a.offered == b.offered && a.capacity_vms == b.capacity_vms &&
               a.used_vms == b.used_vms && a.reuse_capacity == b.reuse_capacity;
    }
};

struct PlacementPlan
{
    RequestId request_id = 0;
    std::optional<OfferedId> reuse_source;
    CountMap reused;
    CountMap deployed_new;
    std::uint64_t new_vms = 0;
    /// Offered NS created to hold deployed_new; set once the plan is committed.
    std::optional<OfferedId> deployed_as;

    /// Instances taken from the source (F_km for this request).
    std::uint64_t reused_instances() const;

    friend bool operator==(const PlacementPlan&, const PlacementPlan&) = default;
};

struct Rejection
{
    RequestId request_id = 0;
    std::uint64_t shortfall_vms = 0;

    friend bool operator==(const Rejection&, const Rejection&) = default;
};

using PlaceResult = std::variant<PlacementPlan, Rejection>;

inline bool accepted(const PlaceResult& r) { return std::holds_alternative<PlacementPlan>(r); }

/// Types of `request` that `source` can serve, at the requested count.
///
/// A type is granted only whole: the source must hold at least as many
/// instances as requested and still have a free sharing slot.
CountMap reusable_vector(const NSSpec& request, const OfferedNS& source, std::uint32_t cmax);

/// Offered NSs that grant the largest number of request types. Empty when no
/// offered NS grants anything.
std::vector<OfferedId> phase1_candidates(const NSSpec& request, const PoolState& pool);

/// Best fit among phase-1 winners: smallest footprint, then most reusable
/// instances, then lowest id.
std::optional<OfferedId> phase2_select(const NSSpec& request, std::span<const OfferedNS> candidates,
                                       std::uint32_t cmax);

/// Builds the plan for serving `request` from `source` (or from scratch)
/// without touching the pool. Throws ModelError on an unknown source id.
PlacementPlan plan_with_source(const MESRequest& request, const PoolState& pool,
                               std::optional<OfferedId> source);

/// Applies an accepted plan: takes sharing slots on the source, deploys the
/// residual as a new offered NS and charges its VMs. Sets plan.deployed_as.
/// Throws ModelError if the plan does not fit.
void commit(PoolState& pool, PlacementPlan& plan);

/// Places one request. On acceptance the pool is updated; on rejection it
/// is left untouched.
PlaceResult place(const MESRequest& request, PoolState& pool, Policy policy);

/// Gives back everything a committed plan holds. Instances are freed only
/// when their last holder lets go.
void release(PoolState& pool, const PlacementPlan& plan);

std::uint64_t total_instances(const PoolState& pool);

} // namespace apmec

#endif
