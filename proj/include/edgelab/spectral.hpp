#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "edgelab/lattice.hpp"
#include "edgelab/types.hpp"

namespace edgelab {

// Smooth bump of unit integral on the gap interval and its primitive step.
// g(E) = c * exp(-1/(1-x^2)) on Delta (x the affine map onto (-1,1)); the
// tilted variant multiplies by (1 + 0.3 x), used for g-independence checks.
struct SpectralWindow {
    double lo = -1.0;
    double hi = 1.0;
    double fermi = 0.0;
    bool tilted = false;
    double norm = 1.0; // fixed by unit integral at construction

    static SpectralWindow bump(double lo, double hi, double fermi);
    static SpectralWindow tilted_bump(double lo, double hi, double fermi);

    double g(double E) const;
    double G(double E) const; // cumulative quadrature, abs err <= 1e-12
    bool contains(double E) const { return E > lo && E < hi; }
};

// Adaptive Simpson on [a, b]; integrand must be smooth.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-13);

struct EigenDecomposition {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXcd vectors;
};

// Eigenpairs with eigenvalue in (lo, hi]; low-rank when the window is a gap.
struct WindowStates {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
    double lo = 0.0, hi = 0.0;
    int count() const { return static_cast<int>(values.size()); }
};

EigenDecomposition eigensolve(const Eigen::MatrixXcd& H);
Eigen::VectorXd eigenvalues_only(const Eigen::MatrixXcd& H);
WindowStates eigensolve_window(const Eigen::MatrixXcd& H, double lo, double hi);
// Eigenvalue count below E via Hermitian-indefinite factorization inertia.
int count_eigenvalues_below(const Eigen::MatrixXcd& H, double E);

Eigen::MatrixXcd apply_function(const EigenDecomposition& eig,
                                const std::function<cdouble(double)>& f);
Eigen::MatrixXcd apply_function(const Eigen::MatrixXcd& H,
                                const std::function<cdouble(double)>& f);

// P = chi(H <= E_F); errors if E_F sits within 1e-8 of an eigenvalue.
Eigen::MatrixXcd fermi_projection(const Eigen::MatrixXcd& H, double fermi);
// Occupied eigenvectors only (the projector is V V^*).
Eigen::MatrixXcd occupied_vectors(const Eigen::MatrixXcd& H, double fermi);

struct GapReport {
    bool pass = false;
    int inside_upper = 0; // eigenvalue counts inside Delta
    int inside_lower = 0;
    double margin_upper = 0.0; // min dist(sigma, Delta); >= probe pad if no state found
    double margin_lower = 0.0;
    bool margins_exact = false;
};

// Asserts Delta avoids the spectra of both bulk tori. Counting uses inertia
// only; margins (optional, costlier) locate the nearest eigenvalues within
// `probe_pad` of the interval.
GapReport verify_gap(const HamiltonianMatrix& bulk_upper, const HamiltonianMatrix& bulk_lower,
                     const SpectralWindow& window, bool with_margins = false,
                     double probe_pad = 0.25);

struct DecayBin {
    int distance = 0;
    double max_abs = 0.0;
};

struct DecayReport {
    std::vector<DecayBin> rows;   // binned by |n2| + |m2|
    std::vector<DecayBin> along;  // binned by |signed displacement in direction 1|
    double alpha_rows = 0.0;      // fitted polynomial tail exponents
    double alpha_along = 0.0;
    std::string to_csv() const;   // columns: bin_kind,distance,max_abs_element
};

// Profile of g(H) on an interface strip. Requires the gap to be verified by
// the caller; uses only the eigenpairs inside the window. Sites within
// `collar` rows of the open transverse boundary are excluded so the outer-edge
// truncation modes do not pollute the large-distance bins.
DecayReport decay_profile(const HamiltonianMatrix& interface_h, const SpectralWindow& window,
                          int collar = 8);

} // namespace edgelab
