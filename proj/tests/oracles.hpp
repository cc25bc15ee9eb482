#pragma once

// Test-only oracles, kept independent of the library code they check.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracles {

using cdouble = std::complex<double>;
constexpr double pi = std::numbers::pi;

// Haldane / staggered honeycomb Bloch matrix written from the standard
// three-phase formulas of the brick-wall cell (A couples to B in cells
// (0,0), (-1,0), (0,-1); +phi triplet on A is {(1,0),(-1,1),(0,-1)}).
inline Eigen::Matrix2cd honeycomb_bloch(double t1, double t2, double phi, double M,
                                        double k1, double k2) {
    const cdouble f = t1 * (1.0 + std::exp(cdouble(0, k1)) + std::exp(cdouble(0, k2)));
    const double dots[3] = {k1, -k1 + k2, -k2};
    double hA = 0.0, hB = 0.0;
    for (double d : dots) {
        hA += 2.0 * t2 * std::cos(d + phi);
        hB += 2.0 * t2 * std::cos(d - phi);
    }
    Eigen::Matrix2cd H;
    H << cdouble(M + hA, 0), f, std::conj(f), cdouble(-M + hB, 0);
    return H;
}

// Harper q x q magnetic Bloch matrix for B = 2 pi p / q in the gauge where
// direction-2 hops at column j carry exp(-i B j).
inline Eigen::MatrixXcd harper_bloch(int p, int q, double t, double k1, double k2) {
    const double B = 2.0 * pi * p / q;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(q, q);
    for (int j = 0; j < q; ++j) {
        H(j, j) = 2.0 * t * std::cos(k2 - B * j);
        const int jn = (j + 1) % q;
        const cdouble hop = j + 1 < q ? cdouble(t, 0) : t * std::exp(cdouble(0, k1));
        H(jn, j) += hop;
        H(j, jn) += std::conj(hop);
    }
    return H;
}

// Minimum |E(k)| over an N x N grid; N a multiple of 3 resolves the Dirac points.
inline double honeycomb_min_abs_energy(double t1, double t2, double phi, double M, int N) {
    double best = 1e300;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            const Eigen::Matrix2cd H =
                honeycomb_bloch(t1, t2, phi, M, 2.0 * pi * a / N, 2.0 * pi * b / N);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
            best = std::min({best, std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(1))});
        }
    return best;
}

// TKNN integers via the Diophantine equation r = q s_r + p t_r, |t_r| <= q/2:
// the Chern number of the r-th gap of the Harper model at flux p/q.
inline int harper_gap_chern(int p, int q, int gap_index) {
    for (int t = -q / 2; t <= q / 2; ++t) {
        const int rem = gap_index - p * t;
        if (rem % q == 0) return t;
    }
    return 0;
}

// Composite Simpson at fixed resolution: quadrature check at doubled
// resolution, independent of the adaptive integrator in the library.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace oracles
