#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "edgelab/harness.hpp"

namespace {

std::vector<double> parse_mu_flag(const std::string& s) {
    // "a:b:n" grid or comma-separated list
    std::vector<double> out;
    const auto c1 = s.find(':');
    if (c1 != std::string::npos) {
        const auto c2 = s.find(':', c1 + 1);
        if (c2 == std::string::npos) throw edgelab::Error("SchemaError", "--mu expects a:b:n");
        const double a = std::stod(s.substr(0, c1));
        const double b = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
        const int n = std::stoi(s.substr(c2 + 1));
        for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
        return out;
    }
    size_t pos = 0;
    while (pos < s.size()) {
        size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(std::stod(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

void apply_tolerance(edgelab::RunConfig& cfg, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw edgelab::Error("SchemaError", "--tolerance expects name=value");
    const std::string name = kv.substr(0, eq);
    const double v = std::stod(kv.substr(eq + 1));
    edgelab::Tolerances& t = cfg.experiment.tol;
    if (name == "chern") t.chern = v;
    else if (name == "winding") t.winding = v;
    else if (name == "index") t.index = v;
    else if (name == "bott") t.bott = v;
    else if (name == "current") t.current = v;
    else throw edgelab::Error("SchemaError", "unknown tolerance '" + name + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"interface-current laboratory: quantized currents, winding numbers,\n"
                 "Fredholm indices and Chern numbers of coupled 2d tight-binding bulks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string mu_flag;
    std::vector<std::string> tolerance_flags;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int samples = 0;

    for (const std::string name :
         {"chern", "interface", "winding", "index", "sweep", "decay", "cocycle", "report"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "artifact directory");
        sub->add_option("--mu", mu_flag, "mu grid: a:b:n or comma list");
        sub->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--samples", samples, "disorder sample count");
        sub->add_option("--tolerance", tolerance_flags, "override, e.g. winding=0.05");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        edgelab::RunConfig cfg = edgelab::parse_config(config_path);
        if (seed_set) cfg.master_seed = seed;
        if (samples > 0) cfg.samples = samples;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!mu_flag.empty()) cfg.mu_values = parse_mu_flag(mu_flag);
        for (const auto& kv : tolerance_flags) apply_tolerance(cfg, kv);

        const edgelab::RunOutcome outcome = edgelab::run_experiment(cfg, command);
        std::cout << outcome.report.dump(2) << "\n";
        for (const auto& path : outcome.artifacts)
            std::cerr << "wrote " << path << "\n";
        return outcome.exit_code;
    } catch (const edgelab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
