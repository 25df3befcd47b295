#include "apmec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace apmec {

std::string_view to_string(CountMode mode) { return mode == CountMode::fixed ? "fixed" : "uniform"; }

std::optional<CountMode> parse_count_mode(std::string_view text)
{
    if (text == "fixed") {
        return CountMode::fixed;
    }
    if (text == "uniform") {
        return CountMode::uniform;
    }
    return std::nullopt;
}

void ExperimentConfig::validate() const
{
    if (capacity_vms < 1) {
        throw ModelError("capacity_vms must be >= 1");
    }
    if (catalog_size < 1) {
        throw ModelError("catalog_size must be >= 1");
    }
    if (max_ns_size < 1 || max_ns_size > catalog_size) {
        throw ModelError("max_ns_size must be in [1, catalog_size]");
    }
    if (nf_instances < 1) {
        throw ModelError("nf_instances must be >= 1");
    }
    if (reuse_capacity < 1) {
        throw ModelError("reuse_capacity must be >= 1");
    }
}

std::uint64_t Rng::below(std::uint64_t bound)
{
    if (bound == 0) {
        throw std::invalid_argument("Rng::below: bound must be positive");
    }
    // Reject the low (2^64 mod bound) values so every residue is equally likely.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const auto r = engine_();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

MESRequest generate_request(Rng& rng, const ExperimentConfig& cfg, RequestId id)
{
    const auto size = static_cast<std::uint32_t>(rng.between(1, cfg.max_ns_size));

    // Partial Fisher-Yates over the catalog.
    std::vector<NfTypeId> types(cfg.catalog_size);
    std::iota(types.begin(), types.end(), NfTypeId{0});
    for (std::uint32_t j = 0; j < size; ++j) {
        const auto pick = j + rng.below(cfg.catalog_size - j);
        std::swap(types[j], types[pick]);
    }

    CountMap members;
    for (std::uint32_t j = 0; j < size; ++j) {
        const auto n = cfg.count_mode == CountMode::fixed ? cfg.nf_instances
                                                          : static_cast<std::uint32_t>(rng.between(1, cfg.nf_instances));
        members[types[j]] = n;
    }
    return MESRequest{id, MEASpec{"mea-" + std::to_string(id), 1, 512}, NSSpec(std::move(members))};
}

EpisodeResult run_episode(const ExperimentConfig& cfg)
{
    cfg.validate();
    auto pool = PoolState::empty(cfg.capacity_vms, cfg.reuse_capacity);
    RequestGenerator gen(cfg);
    EpisodeResult result;

    for (std::uint64_t n = 0;; ++n) {
        if (n == cfg.max_requests) {
            result.stream_exhausted = true;
            break;
        }
        auto request = gen.next();
        auto outcome = place(request, pool, cfg.policy);
        if (const auto* plan = std::get_if<PlacementPlan>(&outcome)) {
            ++result.accepted_count;
            result.total_reused += plan->reused_instances();
            result.accepted_footprint += footprint(request.ns);
            result.trace.push_back({std::move(request), std::move(outcome)});
            continue;
        }
        result.rejection_shortfall = std::get<Rejection>(outcome).shortfall_vms;
        result.trace.push_back({std::move(request), std::move(outcome)});
        break;
    }
    result.vms_used = total_instances(pool);
    return result;
}

namespace {

void put_counts(std::ostream& os, const CountMap& m)
{
    os << '{';
    bool first = true;
    for (const auto& [type, n] : m) {
        os << (first ? "" : ",") << type << ':' << n;
        first = false;
    }
    os << '}';
}

void put_id(std::ostream& os, const std::optional<OfferedId>& id)
{
    if (id) {
        os << *id;
    } else {
        os << '-';
    }
}

} // namespace

std::string serialize(const EpisodeResult& r)
{
    std::ostringstream os;
    os << "accepted=" << r.accepted_count << " vms_used=" << r.vms_used << " total_reused=" << r.total_reused
       << " accepted_footprint=" << r.accepted_footprint << " shortfall=" << r.rejection_shortfall
       << " exhausted=" << (r.stream_exhausted ? 1 : 0) << '\n';
    for (const auto& e : r.trace) {
        os << "req " << e.request.id << ' ';
        put_counts(os, e.request.ns.members());
        if (const auto* plan = std::get_if<PlacementPlan>(&e.outcome)) {
            os << " accept src=";
            put_id(os, plan->reuse_source);
            os << " reused=";
            put_counts(os, plan->reused);
            os << " new=";
            put_counts(os, plan->deployed_new);
            os << " vms=" << plan->new_vms << " as=";
            put_id(os, plan->deployed_as);
        } else {
            os << " reject shortfall=" << std::get<Rejection>(e.outcome).shortfall_vms;
        }
        os << '\n';
    }
    return os.str();
}

double gain_percent(double coop_mean, double sep_mean)
{
    if (sep_mean == 0) {
        throw UndefinedGain();
    }
    return 100.0 * (coop_mean - sep_mean) / sep_mean;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count)
{
    std::vector<std::uint64_t> seeds(count);
    std::iota(seeds.begin(), seeds.end(), first);
    return seeds;
}

namespace {

PointSummary summarize(const std::vector<EpisodeResult>& runs)
{
    PointSummary s;
    if (runs.empty()) {
        return s;
    }
    s.min = std::numeric_limits<std::uint64_t>::max();
    double sum = 0;
    for (const auto& r : runs) {
        sum += static_cast<double>(r.accepted_count);
        s.min = std::min(s.min, r.accepted_count);
        s.max = std::max(s.max, r.accepted_count);
    }
    s.mean = sum / static_cast<double>(runs.size());
    return s;
}

} // namespace

void run_points(std::vector<SweepPoint>& points, const SweepOptions& opts)
{
    if (opts.seeds.empty()) {
        throw std::invalid_argument("sweep needs at least one seed");
    }
    const std::size_t per_point = opts.seeds.size() * 2;
    for (auto& p : points) {
        p.separation.assign(opts.seeds.size(), {});
        p.cooperation.assign(opts.seeds.size(), {});
    }

    // Each task writes its own slot, so completion order does not matter.
    const std::size_t tasks = points.size() * per_point;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            auto& point = points[t / per_point];
            const auto seed_index = (t % per_point) / 2;
            const bool coop = t % 2 == 1;
            ExperimentConfig cfg = point.params;
            cfg.seed = opts.seeds[seed_index];
            cfg.policy = coop ? Policy::cooperation : Policy::separation;
            auto result = run_episode(cfg);
            if (!opts.keep_traces) {
                result.trace.clear();
                result.trace.shrink_to_fit();
            }
            (coop ? point.cooperation : point.separation)[seed_index] = std::move(result);
        }
    };

    const unsigned jobs = std::max(1u, opts.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
    }

    for (auto& p : points) {
        p.sep = summarize(p.separation);
        p.coop = summarize(p.cooperation);
        p.gain = p.sep.mean > 0 ? std::optional<double>(gain_percent(p.coop.mean, p.sep.mean)) : std::nullopt;
    }
}

namespace {

SweepPoint make_point(const SweepOptions& opts, std::uint32_t max_ns_size, std::uint32_t nf_instances,
                      std::uint32_t reuse_capacity, bool extra = false)
{
    SweepPoint p;
    p.params.capacity_vms = opts.capacity_vms;
    p.params.catalog_size = opts.catalog_size;
    p.params.count_mode = opts.count_mode;
    p.params.max_ns_size = max_ns_size;
    p.params.nf_instances = nf_instances;
    p.params.reuse_capacity = reuse_capacity;
    p.params.validate();
    p.extra = extra;
    return p;
}

} // namespace

SweepResult run_size_sweep(const SweepOptions& opts)
{
    SweepResult sweep{"size", opts.seeds, {}};
    for (std::uint32_t s = 1; s <= 6; ++s) {
        sweep.points.push_back(make_point(opts, s, 3, 3));
    }
    run_points(sweep.points, opts);
    return sweep;
}

SweepResult run_instance_sweep(const SweepOptions& opts)
{
    SweepResult sweep{"instances", opts.seeds, {}};
    for (std::uint32_t cmax : opts.cmax_grid) {
        for (std::uint32_t y = 1; y <= 6; ++y) {
            sweep.points.push_back(make_point(opts, 3, y, cmax));
        }
    }
    sweep.points.push_back(make_point(opts, 3, 3, 5, true));
    run_points(sweep.points, opts);
    return sweep;
}

SmallInstance generate_small_instance(Rng& rng, const SmallInstanceParams& params)
{
    auto draw = [&] {
        const auto size = static_cast<std::uint32_t>(rng.between(1, params.catalog_size));
        std::vector<NfTypeId> types(params.catalog_size);
        std::iota(types.begin(), types.end(), NfTypeId{0});
        CountMap members;
        for (std::uint32_t j = 0; j < size; ++j) {
            std::swap(types[j], types[j + rng.below(params.catalog_size - j)]);
            members[types[j]] = static_cast<std::uint32_t>(rng.between(1, params.max_count));
        }
        return NSSpec(std::move(members));
    };

    SmallInstance inst{PoolState::empty(params.capacity_vms, params.reuse_capacity), {}};
    for (std::uint32_t m = 0; m < params.initial_offered; ++m) {
        auto ns = draw();
        if (footprint(ns) <= inst.pool.remaining_vms()) {
            inst.pool.add_offered(std::move(ns));
        }
    }
    for (std::uint32_t k = 0; k < params.requests; ++k) {
        inst.requests.push_back(draw());
    }
    return inst;
}

HeuristicRun run_heuristic(const SmallInstance& instance, Policy policy)
{
    HeuristicRun run;
    auto pool = instance.pool;
    run.initial_footprint = pool.used_vms;
    for (std::size_t k = 0; k < instance.requests.size(); ++k) {
        const MESRequest request{k, MEASpec{"mea", 1, 512}, instance.requests[k]};
        auto outcome = place(request, pool, policy);
        auto* plan = std::get_if<PlacementPlan>(&outcome);
        if (plan == nullptr) {
            break;
        }
        ++run.accepted;
        run.total_reused += plan->reused_instances();
        run.accepted_footprint += footprint(request.ns);
        run.plans.push_back(std::move(*plan));
    }
    run.vms_used = total_instances(pool);
    return run;
}

std::string csv_row(const ExperimentConfig& cfg, const EpisodeResult& r)
{
    std::ostringstream os;
    os << to_string(cfg.policy) << ',' << cfg.seed << ',' << cfg.capacity_vms << ',' << cfg.catalog_size << ','
       << cfg.max_ns_size << ',' << cfg.nf_instances << ',' << cfg.reuse_capacity << ',' << r.accepted_count << ','
       << r.vms_used << ',' << r.total_reused;
    return os.str();
}

void write_csv(std::ostream& os, const SweepResult& sweep)
{
    os << kCsvHeader << '\n';
    for (const auto& p : sweep.points) {
        for (std::size_t i = 0; i < sweep.seeds.size(); ++i) {
            ExperimentConfig cfg = p.params;
            cfg.seed = sweep.seeds[i];
            cfg.policy = Policy::separation;
            os << csv_row(cfg, p.separation[i]) << '\n';
            cfg.policy = Policy::cooperation;
            os << csv_row(cfg, p.cooperation[i]) << '\n';
        }
    }
}

void write_summary(std::ostream& os, const SweepResult& sweep, bool verbose)
{
    char buf[256];
    for (const auto& p : sweep.points) {
        std::snprintf(buf, sizeof buf, "# %s max_ns_size=%u nf_instances=%u reuse_capacity=%u sep_mean=%.2f coop_mean=%.2f",
                      p.extra ? "extra" : "point", p.params.max_ns_size, p.params.nf_instances,
                      p.params.reuse_capacity, p.sep.mean, p.coop.mean);
        os << buf;
        if (p.gain) {
            std::snprintf(buf, sizeof buf, " gain_pct=%.2f", *p.gain);
            os << buf;
        } else {
            os << " gain_pct=undefined";
        }
        if (verbose) {
            os << " sep_min=" << p.sep.min << " sep_max=" << p.sep.max << " coop_min=" << p.coop.min
               << " coop_max=" << p.coop.max;
        }
        os << '\n';
    }
}

} // namespace apmec
