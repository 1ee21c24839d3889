#ifndef GATELAB_CLI_HPP
#define GATELAB_CLI_HPP

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gatelab/experiments.hpp"
#include "gatelab/io.hpp"

namespace gatelab {
namespace cli {

struct CliOptions {
    std::string subcommand;
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;  // --set key=value
    std::string out_dir;
    bool has_seed = false;
    std::uint64_t seed = 1;
    bool has_seed_range = false;
    std::uint64_t seed_lo = 0, seed_hi = 0;  // --seeds A..B, inclusive
    int jobs = 1;
    std::string format = "csv";  // csv | csv+svg
    int verbosity = 0;
    bool help = false;
    std::string grid = "tiny";
};

// Throws UsageError on unknown subcommands/flags or malformed values.
CliOptions parse_args(const std::vector<std::string>& args);

std::string usage_text();

const std::set<std::string>& known_config_keys();

// Resolved configuration -> experiment description; rejects unknown keys.
experiments::ExperimentSpec spec_from_config(const io::Config& cfg);
io::Config resolved_config(const CliOptions& opt);

// Full dispatch. Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, char** argv);

}  // namespace cli
}  // namespace gatelab

#endif
