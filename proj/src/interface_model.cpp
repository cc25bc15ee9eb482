#include "edgelab/interface_model.hpp"

#include <cmath>
#include <numbers>

namespace edgelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

} // namespace

void ExperimentSpec::validate() const {
    upper.validate();
    lower.validate();
    if (upper.orbitals != lower.orbitals)
        throw Error("BadGeometry", "upper and lower models need the same fiber dimension");
    if (!(delta_lo < fermi && fermi < delta_hi))
        throw Error("EmptyInterval", "E_F must lie inside Delta");
    if (L1 < 4 || L2 < 2) throw Error("BadGeometry", "geometry too small");
}

ExperimentSpec ExperimentSpec::swapped() const {
    ExperimentSpec s = *this;
    s.name = name + "_swapped";
    s.upper = lower;
    s.lower = upper;
    return s;
}

ExperimentSpec catalog_experiment(const std::string& name) {
    ExperimentSpec s;
    s.name = name;
    if (name == "haldane_vs_staggered") {
        s.upper = ModelSpec::haldane(1.0, 0.2, std::numbers::pi / 2, 0.0);
        s.lower = ModelSpec::staggered_honeycomb(1.0, 0.8);
        s.fermi = 0.0;
        s.delta_lo = -0.45;
        s.delta_hi = 0.45;
        s.L1 = 32;
        s.L2 = 32;
    } else if (name == "haldane_vs_staggered_m05") {
        s.upper = ModelSpec::haldane(1.0, 0.2, std::numbers::pi / 2, 0.0);
        s.lower = ModelSpec::staggered_honeycomb(1.0, 0.5);
        s.fermi = 0.0;
        s.delta_lo = -0.3;
        s.delta_hi = 0.3;
        s.L1 = 32;
        s.L2 = 32;
    } else if (name == "harper_pq3_opposite") {
        s.upper = ModelSpec::harper(kTwoPi / 3.0);
        s.lower = ModelSpec::harper(-kTwoPi / 3.0);
        // q = 3 bands: [-2.73,-2.0], [-0.73,0.73], [2.0,2.73]; first gap.
        s.fermi = -1.366;
        s.delta_lo = -1.75;
        s.delta_hi = -1.0;
        s.L1 = 60;
        s.L2 = 48;
    } else if (name == "harper_vs_vacuum") {
        s.upper = ModelSpec::harper(kTwoPi / 3.0);
        s.lower = ModelSpec::atomic_insulator(5.0);
        s.fermi = -1.366;
        s.delta_lo = -1.75;
        s.delta_hi = -1.0;
        s.L1 = 60;
        s.L2 = 48;
    } else if (name == "staggered_vs_staggered") {
        s.upper = ModelSpec::staggered_honeycomb(1.0, 0.8);
        s.lower = ModelSpec::staggered_honeycomb(1.0, 0.8);
        s.fermi = 0.0;
        s.delta_lo = -0.45;
        s.delta_hi = 0.45;
        s.L1 = 24;
        s.L2 = 16;
    } else {
        throw Error("UnknownModel", "no catalog experiment named '" + name + "'");
    }
    return s;
}

std::vector<std::string> catalog_names() {
    return {"haldane_vs_staggered", "haldane_vs_staggered_m05", "harper_pq3_opposite",
            "harper_vs_vacuum", "staggered_vs_staggered"};
}

HamiltonianMatrix interface_hamiltonian(const ExperimentSpec& spec,
                                        const DisorderSample& sample, Bc bc1, double mu) {
    spec.validate();
    const LatticeGeometry geom =
        LatticeGeometry::strip(spec.L1, spec.L2, spec.upper.orbitals, bc1, Bc::Open);
    const HamiltonianMatrix h_plus =
        restrict_half_space(build_bulk_hamiltonian(spec.upper, geom, sample, Bc::Open),
                            Half::Upper);
    const HamiltonianMatrix h_minus =
        restrict_half_space(build_bulk_hamiltonian(spec.lower, geom, sample, Bc::Open),
                            Half::Lower);
    const HamiltonianMatrix K = build_coupling(spec.coupling, spec.upper, spec.lower, geom);
    return assemble_interface(h_plus, h_minus, K, mu);
}

Eigen::MatrixXcd flux_unitary(const HamiltonianMatrix& H, const SpectralWindow& window) {
    const Eigen::MatrixXcd U = apply_function(H.mat, [&](double E) {
        return std::exp(cdouble(0, kTwoPi * window.G(E)));
    });
    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(U.rows()).normalized();
    if ((U.adjoint() * (U * x) - x).norm() > 1e-10)
        throw Error("NonUnitaryInput", "flux unitary failed the unitarity residual");
    return U;
}

namespace {

GapReport verify_bulk_gap(const ExperimentSpec& spec, const DisorderSample& sample,
                          const SpectralWindow& window, bool margins) {
    const LatticeGeometry torus = LatticeGeometry::strip(
        spec.L1, spec.L2, spec.upper.orbitals, Bc::Periodic, Bc::Periodic);
    const HamiltonianMatrix up =
        build_bulk_hamiltonian(spec.upper, torus, sample, Bc::Periodic);
    const HamiltonianMatrix lo =
        build_bulk_hamiltonian(spec.lower, torus, sample, Bc::Periodic);
    return verify_gap(up, lo, window, margins);
}

// Sparse triplets of J_1 = i [X_1, H]; H is short ranged so this is tiny.
struct JTriplet {
    long row, col;
    cdouble v;
};

std::vector<JTriplet> current_triplets(const HamiltonianMatrix& H) {
    std::vector<JTriplet> out;
    const LatticeGeometry& g = H.geom;
    const long n = g.dim();
    for (long j = 0; j < n; ++j) {
        const int j1 = g.i1_of(j);
        for (long i = 0; i < n; ++i) {
            if (H.mat(i, j) == cdouble(0, 0)) continue;
            const double d = signed_displacement(g, g.i1_of(i), j1);
            if (d != 0.0) out.push_back({i, j, cdouble(0, d) * H.mat(i, j)});
        }
    }
    return out;
}

double leakage_of_g(const LatticeGeometry& geom, const WindowStates& ws,
                    const SpectralWindow& window, int row_window) {
    // column norms of g(H) near the trace-window boundary
    double worst = 0.0;
    Eigen::VectorXd g2(ws.count());
    for (int j = 0; j < ws.count(); ++j) g2(j) = std::pow(window.g(ws.values(j)), 2);
    const double gmax = g2.size() ? std::sqrt(g2.maxCoeff()) : 0.0;
    for (long c = 0; c < geom.dim(); ++c) {
        const int row = geom.row_of(c);
        if (!in_row_window(geom, row, row_window)) continue;
        const int W = row_window < 0 ? 0 : row_window;
        const bool near_edge =
            row_window < 0 ? (row <= geom.row_lo + 2 || row >= geom.row_hi - 2)
                           : (row <= -W + 2 || row >= W - 3);
        if (!near_edge) continue;
        double cn = 0.0;
        for (int j = 0; j < ws.count(); ++j) cn += g2(j) * std::norm(ws.vectors(c, j));
        worst = std::max(worst, std::sqrt(cn));
    }
    // normalize by the window height so the threshold matches U-1 mass
    return gmax > 0.0 ? worst / gmax : worst;
}

} // namespace

PointResult evaluate_point(const ExperimentSpec& spec, const DisorderSample& sample,
                           double mu, const PointRequest& req) {
    spec.validate();
    const SpectralWindow window =
        req.window_override ? *req.window_override : spec.window();
    PointResult res;
    res.mu = mu;

    if (req.verify) res.gap = verify_bulk_gap(spec, sample, window, req.margins);

    ReportMeta meta;
    meta.L1 = spec.L1;
    meta.L2 = spec.L2;
    meta.mu = mu;
    meta.lambda = std::max(spec.upper.lambda, spec.lower.lambda);
    meta.seed = sample.seed;

    const int roww = spec.trace_window_rows();

    if (req.current || req.winding) {
        const HamiltonianMatrix H = interface_hamiltonian(spec, sample, Bc::Periodic, mu);
        const WindowStates ws =
            eigensolve_window(H.mat, window.lo - 1e-9, window.hi + 1e-9);
        res.states_in_window = ws.count();

        if (req.current) {
            const double leak = leakage_of_g(H.geom, ws, window, roww);
            if (leak > 1e-4)
                throw Error("LeakageAtBoundary",
                            "g(H) mass " + std::to_string(leak) + " at the window boundary");
            double cur = 0.0;
            if (ws.count() > 0) {
                const auto trips = current_triplets(H);
                Eigen::MatrixXcd jpsi =
                    Eigen::MatrixXcd::Zero(ws.vectors.rows(), ws.count());
                for (const auto& t : trips) jpsi.row(t.row) += t.v * ws.vectors.row(t.col);
                for (int j = 0; j < ws.count(); ++j) {
                    const double gj = window.g(ws.values(j));
                    if (gj == 0.0) continue;
                    double acc = 0.0;
                    for (long c = 0; c < H.geom.dim(); ++c) {
                        if (!in_row_window(H.geom, H.geom.row_of(c), roww)) continue;
                        acc += (std::conj(jpsi(c, j)) * ws.vectors(c, j)).real();
                    }
                    cur += gj * acc;
                }
                cur /= spec.L1;
            }
            res.current = cur;
            res.current2pi =
                TopologicalReport::make("current_2pi", kTwoPi * cur, spec.tol.current, meta);
        }

        if (req.winding) {
            WindingOptions wopts;
            wopts.row_window = roww;
            wopts.tolerance = spec.tol.winding;
            wopts.meta = meta;
            res.winding = winding_number(flux_factors(H.geom, ws, window, -1), wopts);
        }
    }

    if (req.index) {
        const HamiltonianMatrix Ho = interface_hamiltonian(spec, sample, Bc::Open, mu);
        const WindowStates ws =
            eigensolve_window(Ho.mat, window.lo - 1e-9, window.hi + 1e-9);
        FredholmOptions fopts;
        fopts.window1 = spec.fredholm_window;
        fopts.row_window = roww;
        fopts.tolerance = spec.tol.index;
        fopts.meta = meta;
        res.index = fredholm_index(flux_factors(Ho.geom, ws, window, -1), fopts);
    }
    return res;
}

double interface_current_density(const ExperimentSpec& spec, const DisorderSample& sample,
                                 double mu, const PointRequest& req) {
    PointRequest r = req;
    r.current = true;
    r.winding = false;
    r.index = false;
    return evaluate_point(spec, sample, mu, r).current;
}

ChainReport bulk_interface_report(const ExperimentSpec& spec, const DisorderSample& sample,
                                  double mu) {
    ChainReport rep;
    rep.point = evaluate_point(spec, sample, mu, {});
    ModelSpec up = spec.upper, lo = spec.lower;
    up.lambda = 0.0; // bulk invariants of the clean materials
    lo.lambda = 0.0;
    rep.chern_upper = chern_plaquette(up, spec.fermi, spec.kgrid, spec.tol.chern);
    rep.chern_lower = chern_plaquette(lo, spec.fermi, spec.kgrid, spec.tol.chern);
    rep.resid_current_winding = std::abs(rep.point.current2pi.raw - rep.point.winding.raw);
    rep.resid_winding_chern = std::abs(
        rep.point.winding.raw -
        static_cast<double>(rep.chern_upper.nearest - rep.chern_lower.nearest));
    rep.pass = rep.point.current2pi.quantized && rep.point.winding.quantized &&
               rep.point.index.quantized && rep.chern_upper.quantized &&
               rep.chern_lower.quantized && rep.resid_current_winding < 0.05 &&
               rep.resid_winding_chern < 0.1 &&
               rep.point.current2pi.nearest == rep.point.winding.nearest &&
               rep.point.winding.nearest == rep.point.index.nearest &&
               rep.point.winding.nearest ==
                   rep.chern_upper.nearest - rep.chern_lower.nearest;
    return rep;
}

SplitReport decoupled_split(const ExperimentSpec& spec, const DisorderSample& sample) {
    SplitReport rep;
    const SpectralWindow window = spec.window();
    const int roww = spec.trace_window_rows();

    PointRequest req;
    req.index = false;
    req.current = false;
    const PointResult at0 = evaluate_point(spec, sample, 0.0, req);
    rep.coupled = at0.winding.raw;

    auto half_winding = [&](const ModelSpec& model, Half which) {
        const LatticeGeometry geom = LatticeGeometry::half_strip(
            spec.L1, spec.L2, model.orbitals, which, Bc::Periodic);
        const HamiltonianMatrix H = build_bulk_hamiltonian(model, geom, sample, Bc::Open);
        const WindowStates ws =
            eigensolve_window(H.mat, window.lo - 1e-9, window.hi + 1e-9);
        WindingOptions wopts;
        wopts.row_window = roww;
        wopts.tolerance = spec.tol.winding;
        return winding_number(flux_factors(geom, ws, window, -1), wopts).raw;
    };
    rep.upper = half_winding(spec.upper, Half::Upper);
    rep.lower = half_winding(spec.lower, Half::Lower);
    return rep;
}

std::vector<PointResult> homotopy_sweep(const ExperimentSpec& spec,
                                        const DisorderSample& sample,
                                        const std::vector<double>& mu_values,
                                        const PointRequest& req) {
    std::vector<PointResult> out;
    out.reserve(mu_values.size());
    PointRequest r = req;
    for (size_t i = 0; i < mu_values.size(); ++i) {
        r.verify = req.verify && i == 0; // the bulk tori do not depend on mu
        out.push_back(evaluate_point(spec, sample, mu_values[i], r));
    }
    return out;
}

} // namespace edgelab
