#include "edgelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace edgelab {

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, abs_tol, 48);
}

namespace {

double raw_bump(double x, bool tilted) {
    if (std::abs(x) >= 1.0) return 0.0;
    const double v = std::exp(-1.0 / (1.0 - x * x));
    return tilted ? v * (1.0 + 0.3 * x) : v;
}

SpectralWindow make_window(double lo, double hi, double fermi, bool tilted) {
    if (!(lo < fermi && fermi < hi)) throw Error("EmptyInterval", "need E_lo < E_F < E_hi");
    SpectralWindow w;
    w.lo = lo;
    w.hi = hi;
    w.fermi = fermi;
    w.tilted = tilted;
    const double width = hi - lo;
    const double base = integrate([&](double x) { return raw_bump(x, tilted); }, -1.0, 1.0);
    w.norm = 2.0 / (width * base);
    return w;
}

} // namespace

SpectralWindow SpectralWindow::bump(double lo, double hi, double fermi) {
    return make_window(lo, hi, fermi, false);
}

SpectralWindow SpectralWindow::tilted_bump(double lo, double hi, double fermi) {
    return make_window(lo, hi, fermi, true);
}

double SpectralWindow::g(double E) const {
    const double x = (2.0 * E - lo - hi) / (hi - lo);
    return norm * raw_bump(x, tilted);
}

double SpectralWindow::G(double E) const {
    if (E <= lo) return 0.0;
    if (E >= hi) return 1.0;
    return integrate([this](double e) { return g(e); }, lo, E, 1e-13);
}

namespace {

void check_square(const Eigen::MatrixXcd& H) {
    if (H.rows() != H.cols()) throw Error("BadMatrix", "matrix must be square");
}

void spot_check_reconstruction(const Eigen::MatrixXcd& H, const EigenDecomposition& eig) {
    const long n = H.rows();
    if (n == 0) return;
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    std::uint64_t s = 0x2545f4914f6cdd1dULL;
    for (long i = 0; i < n; ++i) {
        s = splitmix64(s);
        x(i) = cdouble(static_cast<double>(s >> 40) / (1 << 24) - 0.5, 0.0);
    }
    x.normalize();
    const Eigen::VectorXcd lhs = H * x;
    Eigen::VectorXcd c = eig.vectors.adjoint() * x;
    c = c.cwiseProduct(eig.values.cast<cdouble>());
    const Eigen::VectorXcd rhs = eig.vectors * c;
    const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    if ((lhs - rhs).norm() > 1e-9 * scale)
        throw Error("EigensolveFailure", "reconstruction residual too large");
}

} // namespace

EigenDecomposition eigensolve(const Eigen::MatrixXcd& H) {
    check_square(H);
    const int n = static_cast<int>(H.rows());
    EigenDecomposition eig;
    eig.vectors = H;
    eig.values.resize(n);
    const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                    eig.vectors.data(), n, eig.values.data());
    if (info != 0) throw Error("EigensolveFailure", "zheevd info=" + std::to_string(info));
    spot_check_reconstruction(H, eig);
    return eig;
}

Eigen::VectorXd eigenvalues_only(const Eigen::MatrixXcd& H) {
    check_square(H);
    const int n = static_cast<int>(H.rows());
    Eigen::MatrixXcd work = H;
    Eigen::VectorXd w(n);
    const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, w.data());
    if (info != 0) throw Error("EigensolveFailure", "zheevd info=" + std::to_string(info));
    return w;
}

WindowStates eigensolve_window(const Eigen::MatrixXcd& H, double lo, double hi) {
    check_square(H);
    if (!(lo < hi)) throw Error("EmptyInterval", "need lo < hi");
    const int n = static_cast<int>(H.rows());
    Eigen::MatrixXcd work = H;
    Eigen::VectorXd w(n);
    Eigen::MatrixXcd z(n, std::max(1, n));
    std::vector<int> isuppz(static_cast<size_t>(2 * n));
    int found = 0;
    const int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, work.data(), n,
                                    lo, hi, 0, 0, 0.0, &found, w.data(), z.data(), n,
                                    isuppz.data());
    if (info != 0) throw Error("EigensolveFailure", "zheevr info=" + std::to_string(info));
    WindowStates ws;
    ws.lo = lo;
    ws.hi = hi;
    ws.values = w.head(found);
    ws.vectors = z.leftCols(found);
    return ws;
}

int count_eigenvalues_below(const Eigen::MatrixXcd& H, double E) {
    check_square(H);
    const int n = static_cast<int>(H.rows());
    Eigen::MatrixXcd A = H;
    for (int i = 0; i < n; ++i) A(i, i) -= E;
    std::vector<int> ipiv(static_cast<size_t>(n));
    const int info = LAPACKE_zhetrf(LAPACK_COL_MAJOR, 'L', n, A.data(), n, ipiv.data());
    if (info < 0) throw Error("EigensolveFailure", "zhetrf info=" + std::to_string(info));
    // Count negative eigenvalues of the block-diagonal D (1x1 and 2x2 pivots).
    int negatives = 0;
    int i = 0;
    while (i < n) {
        if (ipiv[static_cast<size_t>(i)] > 0) {
            if (A(i, i).real() < 0.0) ++negatives;
            ++i;
        } else {
            // 2x2 pivot: diag a, c and off-diagonal b (lower storage)
            const double a = A(i, i).real();
            const double c = A(i + 1, i + 1).real();
            const double b2 = std::norm(A(i + 1, i));
            const double det = a * c - b2;
            if (det < 0.0) {
                ++negatives; // one eigenvalue of each sign
            } else if (a + c < 0.0) {
                negatives += 2;
            }
            i += 2;
        }
    }
    return negatives;
}

Eigen::MatrixXcd apply_function(const EigenDecomposition& eig,
                                const std::function<cdouble(double)>& f) {
    const long n = eig.values.size();
    Eigen::VectorXcd fv(n);
    for (long i = 0; i < n; ++i) fv(i) = f(eig.values(i));
    return eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
}

Eigen::MatrixXcd apply_function(const Eigen::MatrixXcd& H,
                                const std::function<cdouble(double)>& f) {
    return apply_function(eigensolve(H), f);
}

Eigen::MatrixXcd occupied_vectors(const Eigen::MatrixXcd& H, double fermi) {
    EigenDecomposition eig = eigensolve(H);
    for (long i = 0; i < eig.values.size(); ++i)
        if (std::abs(eig.values(i) - fermi) < 1e-8)
            throw Error("EigenvalueAtFermiLevel",
                        "eigenvalue within 1e-8 of E_F = " + std::to_string(fermi));
    long occ = 0;
    while (occ < eig.values.size() && eig.values(occ) <= fermi) ++occ;
    return eig.vectors.leftCols(occ);
}

Eigen::MatrixXcd fermi_projection(const Eigen::MatrixXcd& H, double fermi) {
    const Eigen::MatrixXcd V = occupied_vectors(H, fermi);
    if (V.cols() == 0) return Eigen::MatrixXcd::Zero(H.rows(), H.cols());
    return V * V.adjoint();
}

GapReport verify_gap(const HamiltonianMatrix& bulk_upper, const HamiltonianMatrix& bulk_lower,
                     const SpectralWindow& window, bool with_margins, double probe_pad) {
    if (bulk_upper.geom.bc1 != Bc::Periodic || bulk_upper.geom.bc2 != Bc::Periodic ||
        bulk_lower.geom.bc1 != Bc::Periodic || bulk_lower.geom.bc2 != Bc::Periodic)
        throw Error("BadGeometry", "gap verification expects bulk tori");

    GapReport rep;
    auto inside = [&](const Eigen::MatrixXcd& H) {
        return count_eigenvalues_below(H, window.hi) - count_eigenvalues_below(H, window.lo);
    };
    rep.inside_upper = inside(bulk_upper.mat);
    rep.inside_lower = inside(bulk_lower.mat);
    rep.pass = rep.inside_upper == 0 && rep.inside_lower == 0;
    if (!rep.pass) {
        const Eigen::VectorXd bad = eigenvalues_only(
            rep.inside_upper > 0 ? bulk_upper.mat : bulk_lower.mat);
        for (long i = 0; i < bad.size(); ++i)
            if (window.contains(bad(i)))
                throw Error("GapViolated", "bulk eigenvalue " + std::to_string(bad(i)) +
                                               " inside Delta");
        throw Error("GapViolated", "bulk spectrum intersects Delta");
    }

    rep.margin_upper = probe_pad;
    rep.margin_lower = probe_pad;
    if (with_margins) {
        auto margin = [&](const Eigen::MatrixXcd& H) {
            const WindowStates near =
                eigensolve_window(H, window.lo - probe_pad, window.hi + probe_pad);
            double m = probe_pad;
            for (long i = 0; i < near.values.size(); ++i) {
                const double E = near.values(i);
                m = std::min(m, E <= window.lo ? window.lo - E : E - window.hi);
            }
            return m;
        };
        rep.margin_upper = margin(bulk_upper.mat);
        rep.margin_lower = margin(bulk_lower.mat);
        rep.margins_exact = true;
    }
    return rep;
}

namespace {

double fit_tail_exponent(const std::vector<DecayBin>& bins, int min_distance) {
    // Least squares slope of log(max) vs log(d) over the usable tail.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& b : bins) {
        if (b.distance < min_distance || b.max_abs < 1e-14) continue;
        const double x = std::log(static_cast<double>(b.distance));
        const double y = std::log(b.max_abs);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

} // namespace

DecayReport decay_profile(const HamiltonianMatrix& interface_h, const SpectralWindow& window,
                          int collar) {
    const LatticeGeometry& geom = interface_h.geom;
    const long n = geom.dim();
    const WindowStates ws = eigensolve_window(interface_h.mat, window.lo, window.hi);

    const int row_min = geom.row_lo + collar;
    const int row_max = geom.row_hi - collar;
    const int max_row_bin =
        2 * std::max({std::abs(row_min), std::abs(row_max), 0});
    std::vector<double> row_bins(static_cast<size_t>(max_row_bin + 1), 0.0);
    const int max_d1 = geom.bc1 == Bc::Periodic ? geom.length1 / 2 : geom.length1 - 1;
    std::vector<double> d1_bins(static_cast<size_t>(max_d1 + 1), 0.0);

    if (ws.count() > 0 && row_min <= row_max) {
        Eigen::VectorXcd gv(ws.count());
        for (int j = 0; j < ws.count(); ++j) gv(j) = window.g(ws.values(j));
        // g(H) = V g(Lambda) V^*, streamed by column blocks of one i1 slab.
        const long slab = static_cast<long>(geom.rows()) * geom.orbitals;
        const Eigen::MatrixXcd scaled = ws.vectors * gv.asDiagonal();
        for (int c1 = 0; c1 < geom.length1; ++c1) {
            const Eigen::MatrixXcd block =
                scaled * ws.vectors.middleRows(c1 * slab, slab).adjoint(); // n x slab
            for (long j = 0; j < slab; ++j) {
                const long col = c1 * slab + j;
                const int col_row = geom.row_of(col);
                if (col_row < row_min || col_row > row_max) continue;
                for (long i = 0; i < n; ++i) {
                    const int i_row = geom.row_of(i);
                    if (i_row < row_min || i_row > row_max) continue;
                    const double a = std::abs(block(i, j));
                    if (a == 0.0) continue;
                    const int rb = std::abs(i_row) + std::abs(col_row);
                    if (rb <= max_row_bin) row_bins[static_cast<size_t>(rb)] =
                        std::max(row_bins[static_cast<size_t>(rb)], a);
                    const int d1 = std::abs(signed_displacement(geom, geom.i1_of(i), c1));
                    if (d1 <= max_d1) d1_bins[static_cast<size_t>(d1)] =
                        std::max(d1_bins[static_cast<size_t>(d1)], a);
                }
            }
        }
    }

    DecayReport rep;
    for (int d = 0; d <= max_row_bin; ++d) rep.rows.push_back({d, row_bins[static_cast<size_t>(d)]});
    for (int d = 0; d <= max_d1; ++d) rep.along.push_back({d, d1_bins[static_cast<size_t>(d)]});
    rep.alpha_rows = fit_tail_exponent(rep.rows, 6);
    rep.alpha_along = fit_tail_exponent(rep.along, 4);
    return rep;
}

std::string DecayReport::to_csv() const {
    std::string out = "bin_kind,distance,max_abs_element\n";
    char line[128];
    for (const auto& b : rows) {
        std::snprintf(line, sizeof(line), "rows,%d,%.17g\n", b.distance, b.max_abs);
        out += line;
    }
    for (const auto& b : along) {
        std::snprintf(line, sizeof(line), "along,%d,%.17g\n", b.distance, b.max_abs);
        out += line;
    }
    return out;
}

} // namespace edgelab
