#pragma once

#include <Eigen/Dense>
#include <map>
#include <array>

#include "edgelab/lattice.hpp"
#include "edgelab/spectral.hpp"
#include "edgelab/types.hpp"

namespace edgelab {

// Row set for the transverse trace. A negative window means all rows;
// otherwise rows in [-W, W) intersected with the geometry, which puts the
// window edge symmetrically about the interface bond (and at the interface
// side of half strips).
bool in_row_window(const LatticeGeometry& geom, int row, int row_window);

// (1/L1) * sum of diagonal entries over the row window.
cdouble trace_per_length(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                         int row_window = -1);

// (grad_1 A)_{nm} = i * d(n1, m1) * A_{nm} with the ring-signed displacement.
// declared_range >= L1/2 on a ring is refused (exact mode only).
Eigen::MatrixXcd commutator_x1(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                               int declared_range = -1);

// J_1 = i [X_1, H].
Eigen::MatrixXcd current_operator(const HamiltonianMatrix& H);

// U - 1 in factored form: U = 1 + vectors * diag(phases) * vectors^dagger,
// exact because e^{2 pi i G} - 1 vanishes outside the gap window.
struct FluxFactors {
    LatticeGeometry geom;
    Eigen::MatrixXcd vectors;  // dim x r, orthonormal columns
    Eigen::VectorXcd phases;   // e^{sign * 2 pi i G(lambda)} - 1
};

// sign=+1 gives Theorem-style exp(+2 pi i G(H)); the index pipeline uses -1.
FluxFactors flux_factors(const LatticeGeometry& geom, const WindowStates& states,
                         const SpectralWindow& window, int sign);
FluxFactors power(const FluxFactors& u, int k);
// Concatenation for block-disjoint unitaries (checks the overlap vanishes).
FluxFactors concat_disjoint(const FluxFactors& u, const FluxFactors& v);

// Max column norm of U-1 within two rows of the trace-window boundary.
double window_leakage(const FluxFactors& u, int row_window);
double window_leakage(const LatticeGeometry& geom, const Eigen::MatrixXcd& u_minus_one,
                      int row_window);

struct WindingOptions {
    int row_window = -1;
    double tolerance = 0.05;
    double leak_threshold = 1e-4;
    bool check_leak = true;
    ReportMeta meta;
};

// i * T^((U*-1) grad_1 U), windowed; |Im| < 1e-8 asserted.
TopologicalReport winding_number(const LatticeGeometry& geom, const Eigen::MatrixXcd& U,
                                 const WindingOptions& opts = {});
TopologicalReport winding_number(const FluxFactors& u, const WindingOptions& opts = {});

struct FredholmOptions {
    int window1 = -1; // W; defaults to L1/4
    int row_window = -1;
    double tolerance = 0.1;
    ReportMeta meta;
};

// Ind = Tr(1 - T*T) - Tr(1 - TT*) with T = Pi_1 U Pi_1^*, both traces over
// the diagonal window 0 <= x1 <= W (rows windowed as above). Open bc1 only.
TopologicalReport fredholm_index(const LatticeGeometry& geom, const Eigen::MatrixXcd& U,
                                 const FredholmOptions& opts = {});
TopologicalReport fredholm_index(const FluxFactors& u, const FredholmOptions& opts = {});

// ---- edge-algebra test operators and 1-cocycles ----

// Finitely supported covariant family: coefficient blocks per (displacement,
// target row, source row). Deterministic patterns realize identically in
// every column; sampled ones are modulated by the disorder field.
struct CovariantPattern {
    int range1 = 1;
    int row_halfwidth = 1;
    int orbitals = 1;
    bool deterministic = true;
    double sample_weight = 0.5;
    std::map<std::array<int, 3>, Eigen::MatrixXcd> coeff;

    static CovariantPattern random(std::uint64_t seed, int range1, int row_halfwidth,
                                   int orbitals, bool deterministic);
    Eigen::MatrixXcd realize(const LatticeGeometry& geom, const DisorderSample& sample) const;
};

enum class RowSet { All, Upper, Lower };

// xi_1(A,B) = i * T^(A grad_1 B) on a ring.
cdouble cocycle_xi(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                   const Eigen::MatrixXcd& B, int range_a = -1, int range_b = -1);

// zeta_1 and eta_1 on an open strip, F = sign(X_1) with F = +1 at x1 = 0.
// Pairing order fixed so that zeta = eta = xi holds (see NOTES in tests).
cdouble cocycle_zeta(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                     const Eigen::MatrixXcd& B, RowSet rows = RowSet::All);
cdouble cocycle_eta(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                    const Eigen::MatrixXcd& B, RowSet rows = RowSet::All);

// sum_m sgn(m)(sgn(m) - sgn(m+n))^2 over |m| <= cutoff, exact integers.
long sgn_identity_sum(int n, int cutoff);

// ---- Chern numbers ----

// Plaquette (link-variable) Chern number of the Fermi projection of a clean
// model, on an N x N grid over the magnetic Brillouin zone. Exact integer
// for admissible grids.
TopologicalReport chern_plaquette(const ModelSpec& spec, double fermi, int grid,
                                  double tolerance = 1e-6);

struct BottOptions {
    double tolerance = 0.1;
    double obstruction_threshold = 1e-3;
    ReportMeta meta;
};

// Bott index of the compressed torus exponentials on the occupied subspace.
TopologicalReport chern_realspace_bott(const LatticeGeometry& geom,
                                       const Eigen::MatrixXcd& occupied,
                                       const BottOptions& opts = {});

struct AdditivityReport {
    double wind_uv = 0.0;
    double wind_u = 0.0;
    double wind_v = 0.0;
    double defect = 0.0;
};

AdditivityReport index_additivity_check(const FluxFactors& u, const FluxFactors& v,
                                        const WindingOptions& opts = {});

} // namespace edgelab
