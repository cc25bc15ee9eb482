#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "edgelab/harness.hpp"

using namespace edgelab;
using njson = nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("config parsing") {
    SUBCASE("minimal catalog config fills the defaults") {
        const auto cfg = parse_config_json(njson{{"experiment", "haldane_vs_staggered"}});
        CHECK(cfg.experiment.L1 == 32);
        CHECK(cfg.experiment.L2 == 32);
        CHECK(cfg.samples == 1);
        CHECK(cfg.lambda_values == std::vector<double>{0.0});
        CHECK(cfg.mu_values == std::vector<double>{1.0});
        CHECK(cfg.experiment.trace_window_rows() == 20);
    }
    SUBCASE("negative sample count is a schema error") {
        CHECK_THROWS_WITH_AS(
            parse_config_json(njson{{"experiment", "haldane_vs_staggered"}, {"samples", -3}}),
            doctest::Contains("SchemaError"), Error);
    }
    SUBCASE("unknown fields are rejected with their path") {
        CHECK_THROWS_WITH_AS(
            parse_config_json(njson{{"experiment", "haldane_vs_staggered"}, {"typo", 1}}),
            doctest::Contains("$.typo"), Error);
        CHECK_THROWS_WITH_AS(
            parse_config_json(njson{{"experiment", "haldane_vs_staggered"},
                                    {"window", njson{{"lo", -1}, {"hi", 1}, {"phermi", 0}}}}),
            doctest::Contains("$.window.phermi"), Error);
    }
    SUBCASE("unknown experiment and model kinds") {
        CHECK_THROWS_WITH_AS(parse_config_json(njson{{"experiment", "nope"}}),
                             doctest::Contains("UnknownModel"), Error);
        CHECK_THROWS_WITH_AS(
            parse_config_json(njson{
                {"experiment",
                 njson{{"upper", njson{{"kind", "weird"}}},
                       {"lower", njson{{"kind", "weird"}}}, {"delta", njson::array({-1, 1})}}}}),
            doctest::Contains("UnknownModel"), Error);
    }
    SUBCASE("derived seeds are deterministic across parses") {
        const njson j{{"experiment", "haldane_vs_staggered"}, {"seed", 777}, {"samples", 4}};
        const auto a = parse_config_json(j);
        const auto b = parse_config_json(j);
        for (int i = 0; i < 4; ++i) CHECK(a.sample(i).seed == b.sample(i).seed);
        CHECK(a.config_hash == b.config_hash);
        // adding samples never reshuffles the existing ones
        const auto c = parse_config_json(
            njson{{"experiment", "haldane_vs_staggered"}, {"seed", 777}, {"samples", 9}});
        for (int i = 0; i < 4; ++i) CHECK(c.sample(i).seed == a.sample(i).seed);
    }
    SUBCASE("inline experiments parse and validate") {
        const njson j{
            {"experiment",
             njson{{"name", "pair"},
                   {"upper", njson{{"kind", "haldane"}, {"t1", 1.0}, {"t2", 0.2},
                                   {"phi", 1.5707963267948966}, {"mass", 0.0}}},
                   {"lower", njson{{"kind", "staggered_honeycomb"}, {"t1", 1.0}, {"mass", 0.8}}},
                   {"fermi", 0.0},
                   {"delta", njson::array({-0.45, 0.45})}}},
            {"L1", 16},
            {"L2", 12}};
        const auto cfg = parse_config_json(j);
        CHECK(cfg.experiment.name == "pair");
        CHECK(cfg.experiment.upper.orbitals == 2);
        CHECK(cfg.experiment.L1 == 16);
    }
    SUBCASE("mu grids in all three shapes") {
        auto one = parse_config_json(njson{{"experiment", "staggered_vs_staggered"},
                                           {"mu", 0.5}});
        CHECK(one.mu_values == std::vector<double>{0.5});
        auto list = parse_config_json(njson{{"experiment", "staggered_vs_staggered"},
                                            {"mu", njson::array({0.0, 1.0})}});
        CHECK(list.mu_values == std::vector<double>{0.0, 1.0});
        auto grid = parse_config_json(
            njson{{"experiment", "staggered_vs_staggered"},
                  {"mu", njson{{"from", 0.0}, {"to", 1.0}, {"count", 5}}}});
        REQUIRE(grid.mu_values.size() == 5);
        CHECK(grid.mu_values[1] == doctest::Approx(0.25));
    }
}

TEST_CASE("disorder averaging") {
    RunConfig cfg = parse_config_json(njson{{"experiment", "staggered_vs_staggered"},
                                            {"samples", 6}, {"seed", 5}});
    SUBCASE("clean observable: identical samples, zero spread") {
        const Averaged a = disorder_average([](const DisorderSample&) { return 2.5; }, cfg);
        CHECK(a.mean == 2.5);
        REQUIRE(a.stderr_of_mean.has_value());
        CHECK(*a.stderr_of_mean == 0.0);
        for (double v : a.values) CHECK(v == 2.5);
    }
    SUBCASE("single sample reports no stderr") {
        cfg.samples = 1;
        const Averaged a = disorder_average([](const DisorderSample&) { return 1.0; }, cfg);
        CHECK_FALSE(a.stderr_of_mean.has_value());
    }
    SUBCASE("per-sample failures carry the seed") {
        CHECK_THROWS_WITH_AS(disorder_average(
                                 [](const DisorderSample& s) -> double {
                                     if (s.seed % 2 == 0) throw Error("GapViolated", "x");
                                     return 0.0;
                                 },
                                 cfg),
                             doctest::Contains("seed"), Error);
    }
    SUBCASE("parallel and serial execution agree bitwise") {
        auto f = [](const DisorderSample& s) {
            double acc = 0.0;
            for (int i = 0; i < 1000; ++i) acc += s.value(i, -i);
            return acc;
        };
        setenv("EDGELAB_THREADS", "1", 1);
        const Averaged serial = disorder_average(f, cfg);
        setenv("EDGELAB_THREADS", "4", 1);
        const Averaged parallel = disorder_average(f, cfg);
        unsetenv("EDGELAB_THREADS");
        REQUIRE(serial.values.size() == parallel.values.size());
        for (size_t i = 0; i < serial.values.size(); ++i)
            CHECK(serial.values[i] == parallel.values[i]);
        CHECK(serial.mean == parallel.mean);
    }
}

TEST_CASE("run_experiment") {
    SUBCASE("chern command reports the integers") {
        RunConfig cfg = parse_config_json(njson{{"experiment", "haldane_vs_staggered"}});
        const RunOutcome out = run_experiment(cfg, "chern");
        CHECK(out.exit_code == 0);
        CHECK(out.report["upper"]["nearest"] == 1);
        CHECK(out.report["lower"]["nearest"] == 0);
        CHECK(out.report["difference"] == 1);
    }
    SUBCASE("cocycle command passes its identity table") {
        RunConfig cfg = parse_config_json(
            njson{{"experiment", "staggered_vs_staggered"}, {"cocycle_pairs", 12}});
        const RunOutcome out = run_experiment(cfg, "cocycle");
        CHECK(out.exit_code == 0);
        CHECK(out.report["cocycles"]["pass"] == true);
        CHECK(out.report["cocycles"]["sgn_identity_exact"] == true);
    }
    SUBCASE("unknown command is refused") {
        RunConfig cfg = parse_config_json(njson{{"experiment", "staggered_vs_staggered"}});
        CHECK_THROWS_AS(run_experiment(cfg, "frobnicate"), Error);
    }
    SUBCASE("artifacts are written and byte-stable") {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "edgelab_harness_test";
        fs::remove_all(dir);
        RunConfig cfg = parse_config_json(njson{{"experiment", "haldane_vs_staggered"}});
        cfg.out_dir = (dir / "a").string();
        run_experiment(cfg, "chern");
        cfg.out_dir = (dir / "b").string();
        run_experiment(cfg, "chern");
        CHECK(slurp((dir / "a" / "report.json").string()) ==
              slurp((dir / "b" / "report.json").string()));
        CHECK(fs::exists(dir / "a" / "manifest.json"));
        fs::remove_all(dir);
    }
    SUBCASE("interface command on the trivial pair is exactly zero") {
        RunConfig cfg = parse_config_json(njson{{"experiment", "staggered_vs_staggered"},
                                                {"samples", 2}, {"seed", 11}});
        const RunOutcome out = run_experiment(cfg, "interface");
        CHECK(out.exit_code == 0);
        CHECK(out.report["current_2pi"]["mean"] == 0.0);
        CHECK(out.report["current_2pi"]["quantized"] == true);
    }
}
