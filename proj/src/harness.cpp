#include "edgelab/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace edgelab {

namespace {

using njson = nlohmann::ordered_json;

constexpr const char* kVersion = "0.2.0";

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw Error("SchemaError", path + ": " + what);
}

void require_keys(const njson& j, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) schema_error(path + "." + it.key(), "unknown field");
    }
}

double get_num(const njson& j, const std::string& path, const char* key,
               std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        schema_error(path + "." + key, "missing required number");
    }
    if (!j[key].is_number()) schema_error(path + "." + key, "expected a number");
    return j[key].get<double>();
}

ModelSpec parse_model(const njson& j, const std::string& path) {
    if (!j.is_object() || !j.contains("kind")) schema_error(path, "expected a model object");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "harper") {
        require_keys(j, path, {"kind", "flux", "t"});
        return ModelSpec::harper(get_num(j, path, "flux"), get_num(j, path, "t", 1.0));
    }
    if (kind == "haldane") {
        require_keys(j, path, {"kind", "t1", "t2", "phi", "mass"});
        return ModelSpec::haldane(get_num(j, path, "t1", 1.0), get_num(j, path, "t2"),
                                  get_num(j, path, "phi"), get_num(j, path, "mass", 0.0));
    }
    if (kind == "staggered_honeycomb") {
        require_keys(j, path, {"kind", "t1", "mass"});
        return ModelSpec::staggered_honeycomb(get_num(j, path, "t1", 1.0),
                                              get_num(j, path, "mass"));
    }
    if (kind == "atomic_insulator") {
        require_keys(j, path, {"kind", "onsite"});
        return ModelSpec::atomic_insulator(get_num(j, path, "onsite"));
    }
    if (kind == "general_magnetic") {
        require_keys(j, path, {"kind", "orbitals", "flux", "hoppings"});
        const int F = static_cast<int>(get_num(j, path, "orbitals", 1.0));
        ModelSpec m = ModelSpec::general_magnetic(F, get_num(j, path, "flux", 0.0));
        if (!j.contains("hoppings") || !j["hoppings"].is_array())
            schema_error(path + ".hoppings", "expected an array");
        int idx = 0;
        for (const auto& h : j["hoppings"]) {
            const std::string hp = path + ".hoppings[" + std::to_string(idx++) + "]";
            require_keys(h, hp, {"m", "block"});
            if (!h.contains("m") || !h["m"].is_array() || h["m"].size() != 2)
                schema_error(hp + ".m", "expected [m1, m2]");
            Eigen::MatrixXcd blk(F, F);
            const auto& b = h["block"];
            if (!b.is_array() || static_cast<int>(b.size()) != F)
                schema_error(hp + ".block", "expected an FxF array of [re, im]");
            for (int r = 0; r < F; ++r)
                for (int c = 0; c < F; ++c) {
                    const auto& e = b[r][c];
                    if (!e.is_array() || e.size() != 2)
                        schema_error(hp + ".block", "entries are [re, im]");
                    blk(r, c) = cdouble(e[0].get<double>(), e[1].get<double>());
                }
            m.add_hermitian_pair(h["m"][0].get<int>(), h["m"][1].get<int>(), blk);
        }
        return m;
    }
    throw Error("UnknownModel", path + ": unknown model kind '" + kind + "'");
}

std::vector<double> parse_grid(const njson& j, const std::string& path) {
    std::vector<double> out;
    if (j.is_number()) {
        out.push_back(j.get<double>());
    } else if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) schema_error(path, "grid entries must be numbers");
            out.push_back(v.get<double>());
        }
    } else if (j.is_object()) {
        require_keys(j, path, {"from", "to", "count"});
        const double a = get_num(j, path, "from");
        const double b = get_num(j, path, "to");
        const int n = static_cast<int>(get_num(j, path, "count"));
        if (n < 1) schema_error(path + ".count", "must be >= 1");
        for (int i = 0; i < n; ++i)
            out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    } else {
        schema_error(path, "expected number, array or {from,to,count}");
    }
    if (out.empty()) schema_error(path, "grid is empty");
    return out;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

RunConfig parse_config_json(const njson& j) {
    if (!j.is_object()) schema_error("$", "config must be an object");
    require_keys(j, "$",
                 {"experiment", "L1", "L2", "window", "mu", "lambda", "samples", "seed",
                  "kgrid", "trace_window", "fredholm_window", "coupling", "tolerances",
                  "bott_size", "cocycle_pairs", "out"});
    RunConfig cfg;

    if (!j.contains("experiment")) schema_error("$.experiment", "missing");
    if (j["experiment"].is_string()) {
        cfg.experiment = catalog_experiment(j["experiment"].get<std::string>());
    } else if (j["experiment"].is_object()) {
        const njson& e = j["experiment"];
        require_keys(e, "$.experiment", {"name", "upper", "lower", "fermi", "delta"});
        if (!e.contains("upper") || !e.contains("lower"))
            schema_error("$.experiment", "inline experiments need upper and lower models");
        cfg.experiment.name = e.contains("name") ? e["name"].get<std::string>() : "custom";
        cfg.experiment.upper = parse_model(e["upper"], "$.experiment.upper");
        cfg.experiment.lower = parse_model(e["lower"], "$.experiment.lower");
        cfg.experiment.fermi = get_num(e, "$.experiment", "fermi", 0.0);
        if (!e.contains("delta") || !e["delta"].is_array() || e["delta"].size() != 2)
            schema_error("$.experiment.delta", "expected [lo, hi]");
        cfg.experiment.delta_lo = e["delta"][0].get<double>();
        cfg.experiment.delta_hi = e["delta"][1].get<double>();
    } else {
        schema_error("$.experiment", "expected a catalog name or an inline object");
    }

    if (j.contains("L1")) cfg.experiment.L1 = static_cast<int>(get_num(j, "$", "L1"));
    if (j.contains("L2")) cfg.experiment.L2 = static_cast<int>(get_num(j, "$", "L2"));
    if (j.contains("kgrid")) cfg.experiment.kgrid = static_cast<int>(get_num(j, "$", "kgrid"));
    if (j.contains("trace_window"))
        cfg.experiment.trace_window = static_cast<int>(get_num(j, "$", "trace_window"));
    if (j.contains("fredholm_window"))
        cfg.experiment.fredholm_window = static_cast<int>(get_num(j, "$", "fredholm_window"));

    if (j.contains("window")) {
        const njson& w = j["window"];
        require_keys(w, "$.window", {"lo", "hi", "fermi"});
        cfg.experiment.delta_lo = get_num(w, "$.window", "lo");
        cfg.experiment.delta_hi = get_num(w, "$.window", "hi");
        cfg.experiment.fermi = get_num(w, "$.window", "fermi");
    }
    if (cfg.experiment.delta_lo >= cfg.experiment.delta_hi)
        schema_error("$.window", "need lo < hi");

    if (j.contains("coupling")) {
        const njson& c = j["coupling"];
        require_keys(c, "$.coupling", {"kappa", "halfwidth"});
        cfg.experiment.coupling.kappa = get_num(c, "$.coupling", "kappa", 1.0);
        if (c.contains("halfwidth"))
            cfg.experiment.coupling.strip_halfwidth =
                static_cast<int>(get_num(c, "$.coupling", "halfwidth"));
    }
    if (j.contains("tolerances")) {
        const njson& t = j["tolerances"];
        require_keys(t, "$.tolerances", {"chern", "winding", "index", "bott", "current"});
        Tolerances& tol = cfg.experiment.tol;
        tol.chern = get_num(t, "$.tolerances", "chern", tol.chern);
        tol.winding = get_num(t, "$.tolerances", "winding", tol.winding);
        tol.index = get_num(t, "$.tolerances", "index", tol.index);
        tol.bott = get_num(t, "$.tolerances", "bott", tol.bott);
        tol.current = get_num(t, "$.tolerances", "current", tol.current);
    }

    if (j.contains("mu")) cfg.mu_values = parse_grid(j["mu"], "$.mu");
    if (j.contains("lambda")) cfg.lambda_values = parse_grid(j["lambda"], "$.lambda");
    for (double l : cfg.lambda_values)
        if (l < 0) schema_error("$.lambda", "disorder strength must be >= 0");

    if (j.contains("samples")) {
        const double s = get_num(j, "$", "samples");
        if (s < 1 || s != std::floor(s)) schema_error("$.samples", "must be a positive integer");
        cfg.samples = static_cast<int>(s);
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            schema_error("$.seed", "expected an integer");
        cfg.master_seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("bott_size")) cfg.bott_size = static_cast<int>(get_num(j, "$", "bott_size"));
    if (j.contains("cocycle_pairs"))
        cfg.cocycle_pairs = static_cast<int>(get_num(j, "$", "cocycle_pairs"));
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();

    cfg.experiment.validate();
    cfg.config_hash = hex64(fnv1a64(j.dump()));
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("SchemaError", "cannot open config file '" + path + "'");
    njson j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("SchemaError", std::string("invalid JSON: ") + e.what());
    }
    return parse_config_json(j);
}

int thread_count() {
    const char* s = std::getenv("EDGELAB_THREADS");
    if (!s) return 1;
    const int n = std::atoi(s);
    return n > 0 ? n : 1;
}

Averaged disorder_average(const std::function<double(const DisorderSample&)>& per_sample,
                          const RunConfig& cfg) {
    if (cfg.samples < 1) throw Error("SchemaError", "sample count must be >= 1");
    Averaged out;
    out.values.assign(static_cast<size_t>(cfg.samples), 0.0);
    out.seeds.resize(static_cast<size_t>(cfg.samples));
    for (int i = 0; i < cfg.samples; ++i) out.seeds[static_cast<size_t>(i)] = cfg.sample(i).seed;

    std::vector<std::exception_ptr> errors(static_cast<size_t>(cfg.samples));
    const int workers = std::min(thread_count(), cfg.samples);
    if (workers <= 1) {
        for (int i = 0; i < cfg.samples; ++i) {
            try {
                out.values[static_cast<size_t>(i)] = per_sample(cfg.sample(i));
            } catch (...) {
                errors[static_cast<size_t>(i)] = std::current_exception();
            }
        }
    } else {
        if (openblas_set_num_threads) openblas_set_num_threads(1);
        std::atomic<int> next{0};
        auto work = [&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= cfg.samples) return;
                try {
                    out.values[static_cast<size_t>(i)] = per_sample(cfg.sample(i));
                } catch (...) {
                    errors[static_cast<size_t>(i)] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    for (int i = 0; i < cfg.samples; ++i) {
        if (errors[static_cast<size_t>(i)]) {
            try {
                std::rethrow_exception(errors[static_cast<size_t>(i)]);
            } catch (const Error& e) {
                throw Error(e.code(), "sample " + std::to_string(i) + " (seed " +
                                          std::to_string(out.seeds[static_cast<size_t>(i)]) +
                                          "): " + e.what());
            } catch (const std::exception& e) {
                throw Error("SampleFailure", "sample " + std::to_string(i) + ": " + e.what());
            }
        }
    }

    // ordered reduction, independent of the worker schedule
    double mean = 0.0;
    for (double v : out.values) mean += v;
    mean /= cfg.samples;
    out.mean = mean;
    if (cfg.samples > 1) {
        double var = 0.0;
        for (double v : out.values) var += (v - mean) * (v - mean);
        var /= (cfg.samples - 1);
        out.stderr_of_mean = std::sqrt(var / cfg.samples);
    }
    return out;
}

std::string software_version() { return kVersion; }

namespace {

njson report_json(const TopologicalReport& r) {
    return njson{{"quantity", r.quantity}, {"raw", r.raw},         {"nearest", r.nearest},
                 {"residual", r.residual}, {"tolerance", r.tolerance},
                 {"quantized", r.quantized}};
}

njson averaged_json(const Averaged& a, double tolerance) {
    njson per = njson::array();
    for (size_t i = 0; i < a.values.size(); ++i)
        per.push_back(njson{{"seed", a.seeds[i]}, {"value", a.values[i]}});
    const long nearest = std::lround(a.mean);
    const double residual = std::abs(a.mean - nearest);
    njson out{{"mean", a.mean},
              {"stderr", a.stderr_of_mean ? njson(*a.stderr_of_mean) : njson(nullptr)},
              {"nearest", nearest},
              {"residual", residual},
              {"tolerance", tolerance},
              {"quantized", residual < tolerance},
              {"per_sample", per}};
    return out;
}

struct StageClock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    njson stages = njson::object();
    void lap(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        stages[name] = std::chrono::duration<double>(now - start).count();
        start = now;
    }
};

ExperimentSpec with_lambda(const ExperimentSpec& spec, double lambda) {
    ExperimentSpec s = spec;
    s.upper.lambda = lambda;
    s.lower.lambda = lambda;
    return s;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CocycleSuite {
    int pairs = 0;
    double antisym_max = 0.0;
    double hochschild_max = 0.0;
    double zeta_eta_max = 0.0;
    double rowsplit_max = 0.0; // upper + lower row sums against the full trace
    double eta_halfdiff_max = 0.0;
    double xi_zeta_max = 0.0;
    bool sgn_ok = false;
    bool pass = false;
};

CocycleSuite run_cocycle_suite(int pairs, std::uint64_t seed) {
    CocycleSuite s;
    s.pairs = pairs;
    const int L1_ring = 16, L1_open = 17, L2 = 5;
    for (int p = 0; p < pairs; ++p) {
        const int F = (p % 3 == 2) ? 2 : 1;
        const bool deterministic = (p % 2 == 0);
        const auto geom_ring = LatticeGeometry::strip(L1_ring, L2, F, Bc::Periodic, Bc::Open);
        const auto geom_open = LatticeGeometry::strip(L1_open, L2, F, Bc::Open, Bc::Open);
        const DisorderSample sample{derive_sample_seed(seed, 1000 + p), 0, 0};
        const auto patA = CovariantPattern::random(seed * 3 + p, 1 + p % 2, 3, F, deterministic);
        const auto patB = CovariantPattern::random(seed * 7 + p, 2 - p % 2, 3, F, deterministic);
        const auto patC = CovariantPattern::random(seed * 11 + p, 1, 2, F, deterministic);

        const Eigen::MatrixXcd A = patA.realize(geom_ring, sample);
        const Eigen::MatrixXcd B = patB.realize(geom_ring, sample);
        const Eigen::MatrixXcd C = patC.realize(geom_ring, sample);
        const cdouble xab = cocycle_xi(geom_ring, A, B, patA.range1, patB.range1);
        const cdouble xba = cocycle_xi(geom_ring, B, A, patB.range1, patA.range1);
        s.antisym_max = std::max(s.antisym_max, std::abs(xab + xba));
        const cdouble hb = cocycle_xi(geom_ring, A * B, C) - cocycle_xi(geom_ring, A, B * C) +
                           cocycle_xi(geom_ring, C * A, B);
        s.hochschild_max = std::max(s.hochschild_max, std::abs(hb));

        const Eigen::MatrixXcd Ao = patA.realize(geom_open, sample);
        const Eigen::MatrixXcd Bo = patB.realize(geom_open, sample);
        const cdouble z = cocycle_zeta(geom_open, Ao, Bo, RowSet::All);
        const cdouble e = cocycle_eta(geom_open, Ao, Bo, RowSet::All);
        const cdouble zu = cocycle_zeta(geom_open, Ao, Bo, RowSet::Upper);
        const cdouble eu = cocycle_eta(geom_open, Ao, Bo, RowSet::Upper);
        s.zeta_eta_max = std::max(s.zeta_eta_max, std::abs(z - e));
        s.zeta_eta_upper_max = std::max(s.zeta_eta_upper_max, std::abs(zu - eu));
        const cdouble zr = cocycle_zeta(geom_open, Bo, Ao, RowSet::All);
        s.eta_halfdiff_max = std::max(s.eta_halfdiff_max, std::abs(e - 0.5 * (z - zr)));
        if (deterministic)
            s.xi_zeta_max = std::max(s.xi_zeta_max, std::abs(xab - z));
    }
    s.sgn_ok = true;
    for (int n = -10; n <= 10; ++n)
        if (sgn_identity_sum(n, std::abs(n) + 8) != -4L * n) s.sgn_ok = false;
    s.pass = s.antisym_max < 1e-12 && s.hochschild_max < 1e-12 && s.zeta_eta_max < 1e-8 &&
             s.zeta_eta_upper_max < 1e-8 && s.eta_halfdiff_max < 1e-8 &&
             s.xi_zeta_max < 1e-8 && s.sgn_ok;
    return s;
}

njson cocycle_json(const CocycleSuite& s) {
    return njson{{"pairs", s.pairs},
                 {"antisymmetry_max", s.antisym_max},
                 {"hochschild_max", s.hochschild_max},
                 {"zeta_eta_max", s.zeta_eta_max},
                 {"zeta_eta_upper_rows_max", s.zeta_eta_upper_max},
                 {"eta_half_difference_max", s.eta_halfdiff_max},
                 {"xi_zeta_deterministic_max", s.xi_zeta_max},
                 {"sgn_identity_exact", s.sgn_ok},
                 {"pass", s.pass}};
}

} // namespace

RunOutcome run_experiment(const RunConfig& cfg, const std::string& command) {
    RunOutcome outcome;
    StageClock clock;
    njson report;
    report["experiment"] = cfg.experiment.name;
    report["command"] = command;
    bool ok = false;
    std::string csv;
    std::string csv_name;

    const double lambda0 = cfg.lambda_values.front();

    if (command == "chern") {
        ModelSpec up = cfg.experiment.upper, lo = cfg.experiment.lower;
        up.lambda = lo.lambda = 0.0;
        const auto cu = chern_plaquette(up, cfg.experiment.fermi, cfg.experiment.kgrid,
                                        cfg.experiment.tol.chern);
        const auto cl = chern_plaquette(lo, cfg.experiment.fermi, cfg.experiment.kgrid,
                                        cfg.experiment.tol.chern);
        report["upper"] = report_json(cu);
        report["lower"] = report_json(cl);
        report["difference"] = cu.nearest - cl.nearest;
        ok = cu.quantized && cl.quantized;
        if (cfg.bott_size > 0) {
            const int L = cfg.bott_size;
            const auto torus =
                LatticeGeometry::strip(L, L / 2, up.orbitals, Bc::Periodic, Bc::Periodic);
            ModelSpec upl = cfg.experiment.upper;
            upl.lambda = lambda0;
            auto one_bott = [&](const DisorderSample& smp) {
                const auto H = build_bulk_hamiltonian(upl, torus, smp, Bc::Periodic);
                const auto occ = occupied_vectors(H.mat, cfg.experiment.fermi);
                BottOptions bo;
                bo.tolerance = cfg.experiment.tol.bott;
                return chern_realspace_bott(torus, occ, bo).raw;
            };
            const Averaged a = disorder_average(one_bott, cfg);
            report["bott_upper"] = averaged_json(a, cfg.experiment.tol.bott);
            ok = ok && report["bott_upper"]["quantized"].get<bool>();
        }
    } else if (command == "interface" || command == "winding" || command == "index") {
        const ExperimentSpec spec = with_lambda(cfg.experiment, lambda0);
        const double mu = cfg.mu_values.front();
        PointRequest req;
        req.current = command == "interface";
        req.winding = command == "winding";
        req.index = command == "index";
        auto one = [&](const DisorderSample& smp) {
            const PointResult r = evaluate_point(spec, smp, mu, req);
            if (command == "interface") return r.current2pi.raw;
            if (command == "winding") return r.winding.raw;
            return r.index.raw;
        };
        const Averaged a = disorder_average(one, cfg);
        const double tol = command == "interface" ? spec.tol.current
                          : command == "winding"  ? spec.tol.winding
                                                  : spec.tol.index;
        const char* key = command == "interface" ? "current_2pi"
                          : command == "winding" ? "winding"
                                                 : "fredholm_index";
        report[key] = averaged_json(a, tol);
        ok = report[key]["quantized"].get<bool>();
        for (double v : a.values)
            if (std::abs(v - std::lround(a.mean)) > tol) ok = false;
    } else if (command == "sweep") {
        ModelSpec up = cfg.experiment.upper, lo = cfg.experiment.lower;
        up.lambda = lo.lambda = 0.0;
        const long chp = chern_plaquette(up, cfg.experiment.fermi, cfg.experiment.kgrid,
                                         cfg.experiment.tol.chern)
                             .nearest;
        const long chm = chern_plaquette(lo, cfg.experiment.fermi, cfg.experiment.kgrid,
                                         cfg.experiment.tol.chern)
                             .nearest;
        csv = "mu,lambda,seed,current_2pi,winding,index,chern_plus,chern_minus\n";
        csv_name = "sweep.csv";
        bool constant = true;
        long verdict = 0;
        bool first = true;
        for (double lambda : cfg.lambda_values) {
            const ExperimentSpec spec = with_lambda(cfg.experiment, lambda);
            for (int i = 0; i < cfg.samples; ++i) {
                const DisorderSample smp = cfg.sample(i);
                bool verified = false;
                for (double mu : cfg.mu_values) {
                    PointRequest req;
                    req.verify = !verified;
                    verified = true;
                    const PointResult r = evaluate_point(spec, smp, mu, req);
                    csv += format_double(mu) + "," + format_double(lambda) + "," +
                           std::to_string(smp.seed) + "," + format_double(r.current2pi.raw) +
                           "," + format_double(r.winding.raw) + "," +
                           format_double(r.index.raw) + "," + std::to_string(chp) + "," +
                           std::to_string(chm) + "\n";
                    if (first) {
                        verdict = r.winding.nearest;
                        first = false;
                    }
                    if (!r.winding.quantized || !r.index.quantized ||
                        r.winding.nearest != verdict || r.index.nearest != verdict)
                        constant = false;
                }
            }
        }
        report["rows"] = static_cast<int>(cfg.mu_values.size()) *
                         static_cast<int>(cfg.lambda_values.size()) * cfg.samples;
        report["verdict"] = verdict;
        report["verdicts_constant"] = constant;
        report["chern_plus"] = chp;
        report["chern_minus"] = chm;
        ok = constant;
    } else if (command == "decay") {
        const ExperimentSpec spec = with_lambda(cfg.experiment, lambda0);
        const DisorderSample smp = cfg.sample(0);
        const SpectralWindow window = spec.window();
        {
            const LatticeGeometry torus = LatticeGeometry::strip(
                spec.L1, spec.L2, spec.upper.orbitals, Bc::Periodic, Bc::Periodic);
            verify_gap(build_bulk_hamiltonian(spec.upper, torus, smp, Bc::Periodic),
                       build_bulk_hamiltonian(spec.lower, torus, smp, Bc::Periodic), window);
        }
        const HamiltonianMatrix H =
            interface_hamiltonian(spec, smp, Bc::Periodic, cfg.mu_values.front());
        const DecayReport rep = decay_profile(H, window);
        csv = rep.to_csv();
        csv_name = "decay.csv";
        double at20 = 0.0;
        for (const auto& b : rep.rows)
            if (b.distance == 20) at20 = b.max_abs;
        report["alpha_rows"] = rep.alpha_rows;
        report["alpha_along"] = rep.alpha_along;
        report["max_at_row_distance_20"] = at20;
        ok = rep.alpha_rows >= 3.0;
    } else if (command == "cocycle") {
        const CocycleSuite s = run_cocycle_suite(cfg.cocycle_pairs, cfg.master_seed);
        report["cocycles"] = cocycle_json(s);
        ok = s.pass;
    } else if (command == "report") {
        const ExperimentSpec spec = with_lambda(cfg.experiment, lambda0);
        const double mu = cfg.mu_values.front();
        njson samples = njson::array();
        bool all = true;
        std::vector<double> currents, windings, indices;
        ChainReport last;
        for (int i = 0; i < cfg.samples; ++i) {
            const ChainReport r = bulk_interface_report(spec, cfg.sample(i), mu);
            currents.push_back(r.point.current2pi.raw);
            windings.push_back(r.point.winding.raw);
            indices.push_back(r.point.index.raw);
            samples.push_back(njson{{"seed", cfg.sample(i).seed},
                                    {"current_2pi", report_json(r.point.current2pi)},
                                    {"winding", report_json(r.point.winding)},
                                    {"fredholm_index", report_json(r.point.index)},
                                    {"chain_current_winding", r.resid_current_winding},
                                    {"chain_winding_chern", r.resid_winding_chern},
                                    {"pass", r.pass}});
            all = all && r.pass;
            last = r;
        }
        report["chern_upper"] = report_json(last.chern_upper);
        report["chern_lower"] = report_json(last.chern_lower);
        report["per_sample"] = samples;
        report["pass"] = all;
        ok = all;
    } else {
        throw Error("SchemaError", "unknown command '" + command + "'");
    }

    clock.lap("compute");
    outcome.report = report;
    outcome.exit_code = ok ? 0 : 1;

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        const fs::path dir(cfg.out_dir);
        {
            std::ofstream f(dir / "report.json");
            f << report.dump(2) << "\n";
            outcome.artifacts.push_back((dir / "report.json").string());
        }
        if (!csv.empty()) {
            std::ofstream f(dir / csv_name);
            f << csv;
            outcome.artifacts.push_back((dir / csv_name).string());
        }
        njson manifest;
        manifest["version"] = software_version();
        manifest["config_hash"] = cfg.config_hash;
        manifest["command"] = command;
        manifest["samples"] = cfg.samples;
        njson seeds = njson::array();
        for (int i = 0; i < cfg.samples; ++i) seeds.push_back(cfg.sample(i).seed);
        manifest["sample_seeds"] = seeds;
        manifest["threads"] = thread_count();
        clock.lap("write");
        manifest["wall_clock_seconds"] = clock.stages;
        std::ofstream f(dir / "manifest.json");
        f << manifest.dump(2) << "\n";
        outcome.artifacts.push_back((dir / "manifest.json").string());
    }
    return outcome;
}

} // namespace edgelab
