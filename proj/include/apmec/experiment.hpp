#ifndef APMEC_EXPERIMENT_HPP
#define APMEC_EXPERIMENT_HPP

#include "apmec/placement.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace apmec {

enum class CountMode { fixed, uniform };

std::string_view to_string(CountMode mode);
std::optional<CountMode> parse_count_mode(std::string_view text);

struct ExperimentConfig
{
    std::uint64_t capacity_vms = 100;
    std::uint32_t catalog_size = 10;
    std::uint32_t max_ns_size = 3;
    std::uint32_t nf_instances = 3;
    std::uint32_t reuse_capacity = 3;
    Policy policy = Policy::cooperation;
    std::uint64_t seed = 1;
    CountMode count_mode = CountMode::fixed;
    /// Safety stop for streams that never exhaust the budget.
    std::uint64_t max_requests = 1'000'000;

    /// Throws ModelError on an inconsistent configuration.
    void validate() const;
};

/// Seedable generator with a platform-independent output stream.
///
/// The engine is std::mt19937_64 seeded directly with the seed value; bounded
/// draws use rejection sampling so the sequence does not depend on the
/// standard library's distribution implementations.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

private:
    std::mt19937_64 engine_;
};

/// Draws one request: size, then the distinct types, then per-type counts.
MESRequest generate_request(Rng& rng, const ExperimentConfig& cfg, RequestId id);

/// Request stream for one seed; independent of placement outcomes.
class RequestGenerator
{
public:
    explicit RequestGenerator(const ExperimentConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}
    MESRequest next() { return generate_request(rng_, cfg_, next_id_++); }

private:
    ExperimentConfig cfg_;
    Rng rng_;
    RequestId next_id_ = 0;
};

struct TraceEntry
{
    MESRequest request;
    PlaceResult outcome;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct EpisodeResult
{
    std::uint64_t accepted_count = 0;
    std::uint64_t vms_used = 0;
    /// Sum of reused instances over accepted requests.
    std::uint64_t total_reused = 0;
    /// Sum of footprints of accepted requests.
    std::uint64_t accepted_footprint = 0;
    /// VMs missing for the final, rejected request (0 if the stream ran out).
    std::uint64_t rejection_shortfall = 0;
    bool stream_exhausted = false;
    std::vector<TraceEntry> trace;

    friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

EpisodeResult run_episode(const ExperimentConfig& cfg);

/// Canonical text form of an episode, trace included.
std::string serialize(const EpisodeResult& result);

class UndefinedGain : public std::domain_error
{
public:
    UndefinedGain() : std::domain_error("undefined_gain: separation mean is zero") {}
};

/// Relative improvement of cooperation over separation, in percent.
double gain_percent(double coop_mean, double sep_mean);

struct PointSummary
{
    double mean = 0;
    std::uint64_t min = 0;
    std::uint64_t max = 0;
};

struct SweepPoint
{
    /// Parameters of the point; the policy field is unused.
    ExperimentConfig params;
    /// Off-grid point evaluated alongside the grid.
    bool extra = false;
    std::vector<EpisodeResult> separation;
    std::vector<EpisodeResult> cooperation;
    PointSummary sep;
    PointSummary coop;
    std::optional<double> gain;
};

struct SweepResult
{
    std::string name;
    std::vector<std::uint64_t> seeds;
    std::vector<SweepPoint> points;
};

struct SweepOptions
{
    std::vector<std::uint64_t> seeds;
    unsigned jobs = 1;
    std::uint64_t capacity_vms = 100;
    std::uint32_t catalog_size = 10;
    CountMode count_mode = CountMode::fixed;
    /// Reuse capacities for the instance sweep.
    std::vector<std::uint32_t> cmax_grid{1, 4, 7};
    /// Drop per-request traces from stored episodes.
    bool keep_traces = false;
};

/// Consecutive seeds first, first+1, ..., first+count-1.
std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

/// Runs every (point, seed) pair under both policies and fills summaries.
/// Results are ordered by point, then seed, whatever the job count.
void run_points(std::vector<SweepPoint>& points, const SweepOptions& opts);

/// Max NS size 1..6 at three instances per type and reuse capacity three.
SweepResult run_size_sweep(const SweepOptions& opts);

/// Instances per type 1..6 crossed with the reuse-capacity grid at max NS
/// size three, plus an extra point at three instances and capacity five.
SweepResult run_instance_sweep(const SweepOptions& opts);

/// Random small instance for checking the heuristic against the exact search.
struct SmallInstanceParams
{
    std::uint32_t catalog_size = 3;
    std::uint32_t requests = 3;
    std::uint32_t initial_offered = 0;
    std::uint32_t max_count = 2;
    std::uint32_t reuse_capacity = 2;
    std::uint64_t capacity_vms = 12;
};

struct SmallInstance
{
    PoolState pool;
    std::vector<NSSpec> requests;
};

/// NS sizes are uniform in [1, catalog_size], counts uniform in [1, max_count].
/// Initial offered NSs that do not fit the budget are skipped.
SmallInstance generate_small_instance(Rng& rng, const SmallInstanceParams& params);

/// Outcome of serving a request list with the heuristic until the first
/// rejection.
struct HeuristicRun
{
    std::uint64_t accepted = 0;
    std::uint64_t total_reused = 0;
    std::uint64_t accepted_footprint = 0;
    std::uint64_t initial_footprint = 0;
    std::uint64_t vms_used = 0;
    std::vector<PlacementPlan> plans;
};

HeuristicRun run_heuristic(const SmallInstance& instance, Policy policy = Policy::cooperation);

inline constexpr const char* kCsvHeader =
    "policy,seed,capacity_vms,catalog_size,max_ns_size,nf_instances,reuse_capacity,accepted,vms_used,total_reused";

std::string csv_row(const ExperimentConfig& cfg, const EpisodeResult& result);

/// Header plus one row per (point, seed, policy), separation first.
void write_csv(std::ostream& os, const SweepResult& sweep);

/// One line per point with the means and gain.
void write_summary(std::ostream& os, const SweepResult& sweep, bool verbose);

} // namespace apmec

#endif
