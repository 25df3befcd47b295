#ifndef APMEC_ORACLE_HPP
#define APMEC_ORACLE_HPP

#include "apmec/placement.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace apmec {

struct OracleLimits
{
    std::uint64_t max_nodes = 1'000'000;
};

struct OracleResult
{
    /// Largest total of reused instances over all admissible choice sequences.
    std::uint64_t best_total_reuse = 0;
    /// Source chosen for each request accepted on the best path (request id is
    /// the index in the input list). Requests after the stopping point are absent.
    std::map<RequestId, std::optional<OfferedId>> best_assignment;
    std::uint64_t nodes_explored = 0;
};

class OracleBudgetExceeded : public std::runtime_error
{
public:
    explicit OracleBudgetExceeded(std::uint64_t max_nodes);
    std::uint64_t max_nodes() const { return max_nodes_; }

private:
    std::uint64_t max_nodes_;
};

/// Exact maximum of total reuse for a request sequence served in arrival
/// order, one source at most per request, stopping at the first request that
/// does not fit. Full depth-first enumeration; meant for tiny instances.
///
/// Offered ids created during the search follow the pool's id counter, so a
/// witness assignment can be replayed with plan_with_source/commit.
OracleResult oracle_optimal_reuse(const std::vector<NSSpec>& requests, const PoolState& initial_pool,
                                  OracleLimits limits = {});

} // namespace apmec

#endif
