#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edgelab/lattice.hpp"
#include "edgelab/spectral.hpp"
#include "edgelab/topology.hpp"

namespace edgelab {

// A named interface experiment: two bulk materials glued along row 0, the
// coupling, the gap window, geometry and verdict tolerances.
struct ExperimentSpec {
    std::string name = "custom";
    ModelSpec upper;
    ModelSpec lower;
    CouplingSpec coupling;
    double fermi = 0.0;
    double delta_lo = -0.5;
    double delta_hi = 0.5;
    int L1 = 32;
    int L2 = 32;
    int kgrid = 24;
    int trace_window = -1;    // rows; defaults to 5*L2/8
    int fredholm_window = -1; // defaults to L1/4
    Tolerances tol;

    int trace_window_rows() const { return trace_window > 0 ? trace_window : (5 * L2) / 8; }
    SpectralWindow window() const { return SpectralWindow::bump(delta_lo, delta_hi, fermi); }
    ExperimentSpec swapped() const; // upper <-> lower
    void validate() const;
};

// Built-in experiments: haldane_vs_staggered, harper_pq3_opposite,
// harper_vs_vacuum, staggered_vs_staggered, haldane_vs_staggered_m05.
ExperimentSpec catalog_experiment(const std::string& name);
std::vector<std::string> catalog_names();

HamiltonianMatrix interface_hamiltonian(const ExperimentSpec& spec,
                                        const DisorderSample& sample, Bc bc1, double mu);

// U = exp(2 pi i G(H)), dense. Unitarity residual <= 1e-10.
Eigen::MatrixXcd flux_unitary(const HamiltonianMatrix& H, const SpectralWindow& window);

struct PointRequest {
    bool verify = true;      // gap check on the two bulk tori first
    bool current = true;
    bool winding = true;
    bool index = true;
    bool margins = false;
    std::optional<SpectralWindow> window_override; // e.g. the tilted bump
};

struct PointResult {
    double mu = 1.0;
    double current = 0.0; // T^(g(H) J_1); the quantized quantity is 2*pi*this
    TopologicalReport current2pi;
    TopologicalReport winding;
    TopologicalReport index;
    GapReport gap;
    int states_in_window = 0;
};

// Everything Theorem-1-sided for one (spec, sample, mu) point. The winding
// and Fredholm index are evaluated on exp(-2 pi i G(H)), the convention under
// which the whole chain carries the sign of Ch(upper) - Ch(lower).
PointResult evaluate_point(const ExperimentSpec& spec, const DisorderSample& sample,
                           double mu, const PointRequest& req = {});

// Per-sample interface current density T^(g(H) J_1).
double interface_current_density(const ExperimentSpec& spec, const DisorderSample& sample,
                                 double mu = 1.0, const PointRequest& req = {});

struct ChainReport {
    PointResult point;
    TopologicalReport chern_upper;
    TopologicalReport chern_lower;
    double resid_current_winding = 0.0;
    double resid_winding_chern = 0.0;
    bool pass = false;
};

// The Theorem-2 package: 2 pi current, winding, Fredholm index, both bulk
// Chern numbers, and the equality-chain residuals.
ChainReport bulk_interface_report(const ExperimentSpec& spec, const DisorderSample& sample,
                                  double mu = 1.0);

struct SplitReport {
    double upper = 0.0; // half-space winding, interface-side row window
    double lower = 0.0;
    double coupled = 0.0; // full-strip winding at mu = 0
};

// mu = 0 decoupling: the two half-space windings whose sum the interface
// index equals.
SplitReport decoupled_split(const ExperimentSpec& spec, const DisorderSample& sample);

std::vector<PointResult> homotopy_sweep(const ExperimentSpec& spec,
                                        const DisorderSample& sample,
                                        const std::vector<double>& mu_values,
                                        const PointRequest& req = {});

} // namespace edgelab
