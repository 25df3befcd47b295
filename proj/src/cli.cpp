#include "apmec/cli.hpp"

#include "apmec/descriptor.hpp"
#include "apmec/oracle.hpp"
#include "apmec/orchestrator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace apmec::cli {

namespace {

std::string format_ratio(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Writes `text` to the file when given, else to `out`. False if the file
// cannot be written.
bool emit(const std::optional<std::filesystem::path>& path, const std::string& text, std::ostream& out,
          std::ostream& err)
{
    if (!path) {
        out << text;
        return true;
    }
    std::ofstream file(*path, std::ios::binary);
    if (!file || !(file << text)) {
        err << "error: cannot write '" << path->string() << "'\n";
        return false;
    }
    return true;
}

} // namespace

CommandOutcome cmd_validate(const std::filesystem::path& path, std::ostream& out, std::ostream& err)
{
    try {
        load_mesd(path);
    } catch (const DescriptorError& e) {
        err << path.string() << ": " << e.what() << '\n';
        return {kExitDomainError, Payload::none};
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return {kExitUsage, Payload::none};
    }
    out << "OK\n";
    return {kExitOk, Payload::report};
}

CommandOutcome cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err)
{
    try {
        opts.cfg.validate();
    } catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return {kExitUsage, Payload::none};
    }
    std::vector<Policy> policies;
    if (opts.policy == "both") {
        policies = {Policy::separation, Policy::cooperation};
    } else if (auto p = parse_policy(opts.policy)) {
        policies = {*p};
    } else {
        err << "error: --policy must be separation, cooperation or both\n";
        return {kExitUsage, Payload::none};
    }
    if (opts.seeds == 0) {
        err << "error: --seeds must be at least 1\n";
        return {kExitUsage, Payload::none};
    }

    std::ostringstream csv;
    csv << kCsvHeader << '\n';
    if (policies.size() == 2) {
        std::vector<SweepPoint> points(1);
        points[0].params = opts.cfg;
        SweepOptions sweep;
        sweep.seeds = seed_range(opts.cfg.seed, opts.seeds);
        sweep.jobs = opts.jobs;
        run_points(points, sweep);
        for (std::size_t i = 0; i < sweep.seeds.size(); ++i) {
            ExperimentConfig cfg = opts.cfg;
            cfg.seed = sweep.seeds[i];
            cfg.policy = Policy::separation;
            csv << csv_row(cfg, points[0].separation[i]) << '\n';
            cfg.policy = Policy::cooperation;
            csv << csv_row(cfg, points[0].cooperation[i]) << '\n';
        }
    } else {
        for (auto seed : seed_range(opts.cfg.seed, opts.seeds)) {
            ExperimentConfig cfg = opts.cfg;
            cfg.seed = seed;
            cfg.policy = policies[0];
            csv << csv_row(cfg, run_episode(cfg)) << '\n';
        }
    }
    if (!emit(opts.out_path, csv.str(), out, err)) {
        return {kExitUsage, Payload::none};
    }
    return {kExitOk, Payload::csv};
}

CommandOutcome cmd_reproduce(const ReproduceOptions& opts, std::ostream& out, std::ostream& err)
{
    const bool size_sweep = opts.target == "fig5a" || opts.target == "size";
    const bool instance_sweep = opts.target == "fig5b" || opts.target == "instances";
    if (!size_sweep && !instance_sweep) {
        err << "error: unknown target '" << opts.target << "' (expected fig5a or fig5b)\n";
        return {kExitUsage, Payload::none};
    }
    if (opts.seeds == 0) {
        err << "error: --seeds must be at least 1\n";
        return {kExitUsage, Payload::none};
    }

    SweepOptions sweep;
    sweep.seeds = seed_range(opts.first_seed, opts.seeds);
    sweep.jobs = opts.jobs;
    sweep.catalog_size = opts.catalog_size;
    sweep.count_mode = opts.count_mode;
    sweep.cmax_grid = opts.cmax_grid;

    SweepResult result;
    try {
        result = size_sweep ? run_size_sweep(sweep) : run_instance_sweep(sweep);
    } catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return {kExitUsage, Payload::none};
    }

    std::ostringstream csv;
    write_csv(csv, result);
    if (!emit(opts.out_path, csv.str(), out, err)) {
        return {kExitUsage, Payload::none};
    }
    if (!opts.out_path) {
        out << '\n';
    }
    write_summary(out, result, opts.verbose);
    return {kExitOk, Payload::csv};
}

CommandOutcome cmd_oracle(const OracleOptions& opts, std::ostream& out, std::ostream& err)
{
    if (opts.n == 0 || opts.k == 0 || opts.max_count == 0 || opts.cmax == 0 || opts.capacity == 0) {
        err << "error: --n, --k, --max-count, --cmax and --capacity must be positive\n";
        return {kExitUsage, Payload::none};
    }
    SmallInstanceParams params;
    params.catalog_size = opts.n;
    params.requests = opts.k;
    params.initial_offered = opts.m;
    params.max_count = opts.max_count;
    params.reuse_capacity = opts.cmax;
    params.capacity_vms = opts.capacity;

    Rng rng(opts.seed);
    std::size_t violations = 0;
    std::size_t optimal = 0;
    double min_ratio = 1.0;
    double ratio_sum = 0;
    for (std::size_t t = 1; t <= opts.trials; ++t) {
        const auto inst = generate_small_instance(rng, params);
        const auto heuristic = run_heuristic(inst);
        OracleResult best;
        try {
            best = oracle_optimal_reuse(inst.requests, inst.pool, {opts.max_nodes});
        } catch (const OracleBudgetExceeded& e) {
            err << "error: trial " << t << ": " << e.what() << '\n';
            return {kExitDomainError, Payload::report};
        }
        const double ratio = best.best_total_reuse == 0
                                 ? 1.0
                                 : static_cast<double>(heuristic.total_reused) /
                                       static_cast<double>(best.best_total_reuse);
        if (heuristic.total_reused > best.best_total_reuse) {
            ++violations;
        }
        if (heuristic.total_reused == best.best_total_reuse) {
            ++optimal;
        }
        min_ratio = std::min(min_ratio, ratio);
        ratio_sum += ratio;
        out << "trial=" << t << " heuristic=" << heuristic.total_reused << " oracle=" << best.best_total_reuse
            << " ratio=" << format_ratio(ratio) << " nodes=" << best.nodes_explored << '\n';
    }
    const double mean = opts.trials == 0 ? 1.0 : ratio_sum / static_cast<double>(opts.trials);
    out << "summary trials=" << opts.trials << " violations=" << violations << " optimal=" << optimal
        << " min_ratio=" << format_ratio(min_ratio) << " mean_ratio=" << format_ratio(mean) << '\n';
    if (violations > 0) {
        err << "error: heuristic exceeded the exact optimum in " << violations << " trial(s)\n";
        return {kExitDomainError, Payload::report};
    }
    return {kExitOk, Payload::report};
}

namespace {

struct ScriptStep
{
    enum class Kind { event, terminate, heal };
    Kind kind = Kind::event;
    MockBackendEvent event;
};

// Lines: "MEA deployed", "NS failed", "METRIC <name> <value>", "TERMINATE",
// "HEAL". Blank lines and '#' comments are skipped.
std::vector<ScriptStep> parse_script(std::istream& in)
{
    std::vector<ScriptStep> steps;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream words(line);
        std::string first;
        if (!(words >> first) || first[0] == '#') {
            continue;
        }
        ScriptStep step;
        std::string second;
        std::string extra;
        if (first == "TERMINATE" || first == "HEAL") {
            step.kind = first == "HEAL" ? ScriptStep::Kind::heal : ScriptStep::Kind::terminate;
        } else if (first == "METRIC") {
            std::string value_text;
            if (!(words >> second >> value_text)) {
                throw std::runtime_error("script line " + std::to_string(n) + ": METRIC needs a name and a value");
            }
            double value = 0;
            auto [end, ec] = std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
            if (ec != std::errc{} || end != value_text.data() + value_text.size()) {
                throw std::runtime_error("script line " + std::to_string(n) + ": bad metric value '" + value_text + "'");
            }
            step.event.target = Target::MEA;
            step.event.outcome = MetricSample{second, value};
        } else if ((first == "MEA" || first == "NS") && (words >> second) &&
                   (second == "deployed" || second == "failed")) {
            step.event.target = first == "MEA" ? Target::MEA : Target::NS;
            if (second == "deployed") {
                step.event.outcome = Deployed{};
            } else {
                step.event.outcome = Failed{};
            }
        } else {
            throw std::runtime_error("script line " + std::to_string(n) + ": cannot parse '" + line + "'");
        }
        if (words >> extra) {
            throw std::runtime_error("script line " + std::to_string(n) + ": trailing text '" + extra + "'");
        }
        steps.push_back(std::move(step));
    }
    return steps;
}

} // namespace

CommandOutcome cmd_demo_orchestrate(const std::filesystem::path& mesd_path, const std::filesystem::path& script_path,
                                    const DemoOptions& opts, std::ostream& out, std::ostream& err)
{
    MESD mesd;
    std::vector<ScriptStep> steps;
    try {
        mesd = load_mesd(mesd_path);
    } catch (const DescriptorError& e) {
        err << mesd_path.string() << ": " << e.what() << '\n';
        return {kExitDomainError, Payload::none};
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return {kExitUsage, Payload::none};
    }
    std::ifstream script(script_path);
    if (!script) {
        err << "error: cannot read '" << script_path.string() << "'\n";
        return {kExitUsage, Payload::none};
    }
    try {
        steps = parse_script(script);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return {kExitUsage, Payload::none};
    }

    MockMecBackend mec;
    MockManoBackend mano;
    std::optional<Orchestrator> orch;
    try {
        orch.emplace(mec, mano, PoolState::empty(opts.capacity, opts.cmax));
    } catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return {kExitUsage, Payload::none};
    }

    MesId id = 0;
    try {
        id = orch->submit(mesd);
    } catch (const OrchestratorError& e) {
        err << "error: " << e.what() << '\n';
        return {kExitDomainError, Payload::none};
    }

    int code = kExitOk;
    for (const auto& step : steps) {
        try {
            switch (step.kind) {
            case ScriptStep::Kind::terminate: orch->terminate(id); break;
            case ScriptStep::Kind::heal: orch->heal(id); break;
            case ScriptStep::Kind::event: {
                auto ev = step.event;
                ev.mes_id = id;
                orch->on_event(ev);
                break;
            }
            }
        } catch (const OrchestratorError& e) {
            err << "error: " << e.what() << '\n';
            code = kExitDomainError;
            break;
        }
    }
    for (const auto& entry : orch->event_log()) {
        out << format_log_line(entry) << '\n';
    }
    const auto state = orch->record(id).state;
    if (code == kExitOk && state != MesState::ACTIVE && state != MesState::TERMINATED) {
        code = kExitDomainError;
    }
    return {code, Payload::event_log};
}

namespace {

std::vector<std::uint32_t> parse_grid(const std::string& text)
{
    std::vector<std::uint32_t> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::uint32_t v = 0;
        auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || end != item.data() + item.size() || v == 0) {
            throw CLI::ValidationError("--cmax-grid", "expected comma-separated positive integers, got '" + text + "'");
        }
        grid.push_back(v);
    }
    if (grid.empty()) {
        throw CLI::ValidationError("--cmax-grid", "empty grid");
    }
    return grid;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"MEC service placement simulator and provisioning demo", "apmec-sim"};
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and validate a service descriptor");
    validate->add_option("path", validate_path, "Descriptor file")->required();

    SimulateOptions sim;
    std::string sim_count_mode = "fixed";
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "Run placement episodes and print CSV");
    simulate->add_option("--capacity", sim.cfg.capacity_vms, "VM budget")->capture_default_str();
    simulate->add_option("--catalog-size", sim.cfg.catalog_size, "Number of NF types")->capture_default_str();
    simulate->add_option("--max-ns-size", sim.cfg.max_ns_size, "Largest requested NS size")->capture_default_str();
    simulate->add_option("--nf-instances", sim.cfg.nf_instances, "Instances per NF type")->capture_default_str();
    simulate->add_option("--reuse-capacity", sim.cfg.reuse_capacity, "Services sharing one NF instance set")
        ->capture_default_str();
    simulate->add_option("--policy", sim.policy, "separation, cooperation or both")->capture_default_str();
    simulate->add_option("--seed", sim.cfg.seed, "First seed")->capture_default_str();
    simulate->add_option("--seeds", sim.seeds, "Number of consecutive seeds")->capture_default_str();
    simulate->add_option("--count-mode", sim_count_mode, "fixed or uniform")->capture_default_str();
    simulate->add_option("--jobs", sim.jobs, "Worker threads")->capture_default_str();
    simulate->add_option("--out", sim_out, "CSV output path (default stdout)");

    ReproduceOptions rep;
    std::string rep_count_mode = "fixed";
    std::string rep_grid = "1,4,7";
    std::string rep_out;
    auto* reproduce = app.add_subcommand("reproduce", "Run a parameter sweep (fig5a or fig5b)");
    reproduce->add_option("target", rep.target, "fig5a or fig5b")->required();
    reproduce->add_option("--seeds", rep.seeds, "Number of seeds per point")->capture_default_str();
    reproduce->add_option("--seed", rep.first_seed, "First seed")->capture_default_str();
    reproduce->add_option("--jobs", rep.jobs, "Worker threads")->capture_default_str();
    reproduce->add_option("--catalog-size", rep.catalog_size, "Number of NF types")->capture_default_str();
    reproduce->add_option("--count-mode", rep_count_mode, "fixed or uniform")->capture_default_str();
    reproduce->add_option("--cmax-grid", rep_grid, "Reuse capacities for fig5b")->capture_default_str();
    reproduce->add_option("--out", rep_out, "CSV output path (default stdout)");
    reproduce->add_flag("--verbose", rep.verbose, "Add per-point min/max");

    OracleOptions orc;
    auto* oracle = app.add_subcommand("oracle", "Compare the heuristic against exhaustive search");
    oracle->add_option("--trials", orc.trials, "Random instances")->capture_default_str();
    oracle->add_option("--n", orc.n, "Catalog size")->capture_default_str();
    oracle->add_option("--k", orc.k, "Requests per instance")->capture_default_str();
    oracle->add_option("--m", orc.m, "Initially offered NSs")->capture_default_str();
    oracle->add_option("--max-count", orc.max_count, "Largest per-type instance count")->capture_default_str();
    oracle->add_option("--cmax", orc.cmax, "Reuse capacity")->capture_default_str();
    oracle->add_option("--capacity", orc.capacity, "VM budget")->capture_default_str();
    oracle->add_option("--max-nodes", orc.max_nodes, "Search node limit")->capture_default_str();
    oracle->add_option("--seed", orc.seed, "Seed")->capture_default_str();

    std::string demo_mesd;
    std::string demo_script;
    DemoOptions demo_opts;
    auto* demo = app.add_subcommand("demo", "Submit a descriptor and replay an event script");
    demo->alias("demo-orchestrate");
    demo->add_option("mesd", demo_mesd, "Descriptor file")->required();
    demo->add_option("script", demo_script, "Event script")->required();
    demo->add_option("--capacity", demo_opts.capacity, "VM budget")->capture_default_str();
    demo->add_option("--cmax", demo_opts.cmax, "Reuse capacity")->capture_default_str();

    try {
        app.parse(argc, argv);
        if (*simulate) {
            auto mode = parse_count_mode(sim_count_mode);
            if (!mode) {
                throw CLI::ValidationError("--count-mode", "expected fixed or uniform");
            }
            sim.cfg.count_mode = *mode;
            if (!sim_out.empty()) {
                sim.out_path = sim_out;
            }
        }
        if (*reproduce) {
            auto mode = parse_count_mode(rep_count_mode);
            if (!mode) {
                throw CLI::ValidationError("--count-mode", "expected fixed or uniform");
            }
            rep.count_mode = *mode;
            rep.cmax_grid = parse_grid(rep_grid);
            if (!rep_out.empty()) {
                rep.out_path = rep_out;
            }
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*validate) {
        return cmd_validate(validate_path, out, err).exit_code;
    }
    if (*simulate) {
        return cmd_simulate(sim, out, err).exit_code;
    }
    if (*reproduce) {
        return cmd_reproduce(rep, out, err).exit_code;
    }
    if (*oracle) {
        return cmd_oracle(orc, out, err).exit_code;
    }
    return cmd_demo_orchestrate(demo_mesd, demo_script, demo_opts, out, err).exit_code;
}

} // namespace apmec::cli
