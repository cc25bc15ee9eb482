#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgelab/interface_model.hpp"

namespace edgelab {

// Schema-validated run description; unknown fields are rejected with the
// offending path in the error message.
struct RunConfig {
    ExperimentSpec experiment;
    std::vector<double> mu_values{1.0};
    std::vector<double> lambda_values{0.0};
    int samples = 1;
    std::uint64_t master_seed = 1;
    int bott_size = 0;     // torus side for the optional Bott cross-check
    int cocycle_pairs = 50;
    std::string out_dir;
    std::string config_hash;

    DisorderSample sample(int index) const {
        return DisorderSample{derive_sample_seed(master_seed, static_cast<std::uint64_t>(index)),
                              0, 0};
    }
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::ordered_json& j);

struct Averaged {
    double mean = 0.0;
    std::optional<double> stderr_of_mean; // absent for a single sample
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
};

// Monte-Carlo stand-in for the disorder average in T^: ordered deterministic
// reduction; per-sample failures carry the sample seed. Parallel when
// EDGELAB_THREADS > 1.
Averaged disorder_average(const std::function<double(const DisorderSample&)>& per_sample,
                          const RunConfig& cfg);

int thread_count();

struct RunOutcome {
    int exit_code = 1;
    nlohmann::ordered_json report;
    std::vector<std::string> artifacts;
};

// Executes a CLI subcommand (chern, interface, winding, index, sweep, decay,
// cocycle, report); writes manifest + artifacts under cfg.out_dir when set.
RunOutcome run_experiment(const RunConfig& cfg, const std::string& command);

std::string software_version();

} // namespace edgelab
