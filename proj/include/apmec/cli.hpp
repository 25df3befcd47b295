#ifndef APMEC_CLI_HPP
#define APMEC_CLI_HPP

#include "apmec/experiment.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace apmec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

enum class Payload { none, csv, event_log, report };

struct CommandOutcome
{
    int exit_code = kExitOk;
    Payload payload = Payload::none;
};

CommandOutcome cmd_validate(const std::filesystem::path& path, std::ostream& out, std::ostream& err);

struct SimulateOptions
{
    ExperimentConfig cfg;
    /// separation, cooperation or both
    std::string policy = "both";
    std::size_t seeds = 1;
    unsigned jobs = 1;
    std::optional<std::filesystem::path> out_path;
};

/// One CSV row per (seed, policy); the k-th seed is cfg.seed + k.
CommandOutcome cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);

struct ReproduceOptions
{
    /// fig5a (size sweep) or fig5b (instance sweep)
    std::string target;
    std::size_t seeds = 30;
    std::uint64_t first_seed = 1;
    unsigned jobs = 1;
    std::uint32_t catalog_size = 10;
    CountMode count_mode = CountMode::fixed;
    std::vector<std::uint32_t> cmax_grid{1, 4, 7};
    std::optional<std::filesystem::path> out_path;
    bool verbose = false;
};

/// CSV first, then one `#` summary line per grid point.
CommandOutcome cmd_reproduce(const ReproduceOptions& opts, std::ostream& out, std::ostream& err);

struct OracleOptions
{
    std::size_t trials = 100;
    std::uint32_t n = 3;
    std::uint32_t k = 3;
    std::uint32_t m = 0;
    std::uint32_t max_count = 1;
    std::uint32_t cmax = 2;
    std::uint64_t capacity = 12;
    std::uint64_t max_nodes = 1'000'000;
    std::uint64_t seed = 1;
};

CommandOutcome cmd_oracle(const OracleOptions& opts, std::ostream& out, std::ostream& err);

struct DemoOptions
{
    std::uint64_t capacity = 100;
    std::uint32_t cmax = 5;
};

/// Submits one descriptor and replays an event script against it.
CommandOutcome cmd_demo_orchestrate(const std::filesystem::path& mesd_path, const std::filesystem::path& script_path,
                                    const DemoOptions& opts, std::ostream& out, std::ostream& err);

/// Full command line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace apmec::cli

#endif
