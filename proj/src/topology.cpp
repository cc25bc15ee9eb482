#include "edgelab/topology.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

namespace edgelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

long slab_size(const LatticeGeometry& geom) {
    return static_cast<long>(geom.rows()) * geom.orbitals;
}

} // namespace

bool in_row_window(const LatticeGeometry& geom, int row, int row_window) {
    if (row < geom.row_lo || row > geom.row_hi) return false;
    if (row_window < 0) return true;
    return row >= -row_window && row < row_window;
}

cdouble trace_per_length(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                         int row_window) {
    cdouble sum(0, 0);
    for (long i = 0; i < geom.dim(); ++i)
        if (in_row_window(geom, geom.row_of(i), row_window)) sum += A(i, i);
    return sum / static_cast<double>(geom.length1);
}

Eigen::MatrixXcd commutator_x1(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                               int declared_range) {
    if (geom.bc1 == Bc::Periodic && declared_range >= 0 && 2 * declared_range >= geom.length1)
        throw Error("RangeTooLarge", "operator range must be < L1/2 for the exact commutator");
    const long n = geom.dim();
    Eigen::MatrixXcd out(n, n);
    for (long j = 0; j < n; ++j) {
        const int j1 = geom.i1_of(j);
        for (long i = 0; i < n; ++i) {
            const double d = signed_displacement(geom, geom.i1_of(i), j1);
            out(i, j) = cdouble(0, d) * A(i, j);
        }
    }
    return out;
}

Eigen::MatrixXcd current_operator(const HamiltonianMatrix& H) {
    return commutator_x1(H.geom, H.mat, H.range1);
}

FluxFactors flux_factors(const LatticeGeometry& geom, const WindowStates& states,
                         const SpectralWindow& window, int sign) {
    FluxFactors u;
    u.geom = geom;
    u.vectors = states.vectors;
    u.phases.resize(states.count());
    for (int j = 0; j < states.count(); ++j) {
        const double G = window.G(states.values(j));
        u.phases(j) = std::exp(cdouble(0, sign * kTwoPi * G)) - cdouble(1, 0);
    }
    return u;
}

FluxFactors power(const FluxFactors& u, int k) {
    FluxFactors out = u;
    for (long j = 0; j < u.phases.size(); ++j) {
        const cdouble w = cdouble(1, 0) + u.phases(j);
        out.phases(j) = std::pow(w, k) - cdouble(1, 0);
    }
    return out;
}

FluxFactors concat_disjoint(const FluxFactors& u, const FluxFactors& v) {
    if (!u.geom.compatible(v.geom) || u.geom.rows() != v.geom.rows())
        throw Error("BadGeometry", "factors live on different geometries");
    if (u.vectors.cols() > 0 && v.vectors.cols() > 0) {
        const double overlap = (u.vectors.adjoint() * v.vectors).cwiseAbs().maxCoeff();
        if (overlap > 1e-10)
            throw Error("SupportOverlap", "unitaries are not block-disjoint");
    }
    FluxFactors out;
    out.geom = u.geom;
    out.vectors.resize(u.vectors.rows(), u.vectors.cols() + v.vectors.cols());
    out.vectors << u.vectors, v.vectors;
    out.phases.resize(u.phases.size() + v.phases.size());
    out.phases << u.phases, v.phases;
    return out;
}

double window_leakage(const FluxFactors& u, int row_window) {
    const LatticeGeometry& geom = u.geom;
    const long n = geom.dim();
    double worst = 0.0;
    const Eigen::VectorXd p2 = u.phases.cwiseAbs2();
    for (long c = 0; c < n; ++c) {
        const int row = geom.row_of(c);
        if (!in_row_window(geom, row, row_window)) continue;
        const int W = row_window < 0 ? 0 : row_window;
        const bool near_edge =
            row_window < 0 ? (row <= geom.row_lo + 2 || row >= geom.row_hi - 2)
                           : (row <= -W + 2 || row >= W - 3);
        if (!near_edge) continue;
        double cn = 0.0;
        for (long j = 0; j < u.phases.size(); ++j)
            cn += p2(j) * std::norm(u.vectors(c, j));
        worst = std::max(worst, std::sqrt(cn));
    }
    return worst;
}

double window_leakage(const LatticeGeometry& geom, const Eigen::MatrixXcd& u_minus_one,
                      int row_window) {
    double worst = 0.0;
    for (long c = 0; c < geom.dim(); ++c) {
        const int row = geom.row_of(c);
        if (!in_row_window(geom, row, row_window)) continue;
        const int W = row_window < 0 ? 0 : row_window;
        const bool near_edge =
            row_window < 0 ? (row <= geom.row_lo + 2 || row >= geom.row_hi - 2)
                           : (row <= -W + 2 || row >= W - 3);
        if (near_edge) worst = std::max(worst, u_minus_one.col(c).norm());
    }
    return worst;
}

namespace {

void require_unitary(const Eigen::MatrixXcd& U) {
    const long n = U.rows();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    std::uint64_t s = 0x9b1f0f7a325e1ad7ULL;
    for (long i = 0; i < n; ++i) {
        s = splitmix64(s);
        x(i) = cdouble(static_cast<double>(s >> 40) / (1 << 24) - 0.5,
                       static_cast<double>(splitmix64(s) >> 40) / (1 << 24) - 0.5);
    }
    x.normalize();
    if ((U.adjoint() * (U * x) - x).norm() > 1e-10)
        throw Error("NonUnitaryInput", "U fails the unitarity residual check");
}

void require_unit_phases(const FluxFactors& u) {
    for (long j = 0; j < u.phases.size(); ++j)
        if (std::abs(std::abs(cdouble(1, 0) + u.phases(j)) - 1.0) > 1e-10)
            throw Error("NonUnitaryInput", "factored phases are not unimodular");
}

TopologicalReport winding_report(cdouble value, const WindingOptions& opts) {
    if (std::abs(value.imag()) > 1e-8)
        throw Error("NonUnitaryInput",
                    "winding has imaginary part " + std::to_string(value.imag()));
    TopologicalReport rep =
        TopologicalReport::make("winding", value.real(), opts.tolerance, opts.meta);
    return rep;
}

} // namespace

TopologicalReport winding_number(const LatticeGeometry& geom, const Eigen::MatrixXcd& U,
                                 const WindingOptions& opts) {
    require_unitary(U);
    if (opts.check_leak) {
        const Eigen::MatrixXcd W = U - Eigen::MatrixXcd::Identity(U.rows(), U.cols());
        const double leak = window_leakage(geom, W, opts.row_window);
        if (leak > opts.leak_threshold)
            throw Error("LeakageAtBoundary", "U-1 column norm " + std::to_string(leak) +
                                                 " at the trace-window boundary");
    }
    // i * T^((U*-1) grad_1 U): diagonal entries need only the matching column.
    cdouble sum(0, 0);
    const long n = geom.dim();
    for (long c = 0; c < n; ++c) {
        if (!in_row_window(geom, geom.row_of(c), opts.row_window)) continue;
        const int c1 = geom.i1_of(c);
        for (long k = 0; k < n; ++k) {
            cdouble ustar = std::conj(U(k, c));
            if (k == c) ustar -= cdouble(1, 0);
            const double d = signed_displacement(geom, geom.i1_of(k), c1);
            sum += ustar * cdouble(0, d) * U(k, c);
        }
    }
    return winding_report(cdouble(0, 1) * sum / static_cast<double>(geom.length1), opts);
}

TopologicalReport winding_number(const FluxFactors& u, const WindingOptions& opts) {
    require_unit_phases(u);
    if (opts.check_leak) {
        const double leak = window_leakage(u, opts.row_window);
        if (leak > opts.leak_threshold)
            throw Error("LeakageAtBoundary", "U-1 column norm " + std::to_string(leak) +
                                                 " at the trace-window boundary");
    }
    const LatticeGeometry& geom = u.geom;
    const long n = geom.dim();
    const long slab = slab_size(geom);
    const Eigen::MatrixXcd scaled = u.vectors * u.phases.asDiagonal();
    cdouble sum(0, 0);
    for (int c1 = 0; c1 < geom.length1; ++c1) {
        // W columns of one i1 slab; diagonal of (W* grad_1 W) restricted there.
        const Eigen::MatrixXcd block =
            scaled * u.vectors.middleRows(c1 * slab, slab).adjoint(); // n x slab
        for (long j = 0; j < slab; ++j) {
            const long col = c1 * slab + j;
            if (!in_row_window(geom, geom.row_of(col), opts.row_window)) continue;
            for (long k = 0; k < n; ++k) {
                const double d = signed_displacement(geom, geom.i1_of(k), c1);
                sum += std::conj(block(k, j)) * cdouble(0, d) * block(k, j);
            }
        }
    }
    return winding_report(cdouble(0, 1) * sum / static_cast<double>(geom.length1), opts);
}

namespace {

TopologicalReport fredholm_report(double value, const FredholmOptions& opts) {
    return TopologicalReport::make("fredholm_index", value, opts.tolerance, opts.meta);
}

int default_fredholm_window(const LatticeGeometry& geom, const FredholmOptions& opts) {
    int W = opts.window1 > 0 ? opts.window1 : geom.length1 / 4;
    if (geom.bc1 != Bc::Open)
        throw Error("BadGeometry", "the Fredholm compression needs an open strip");
    if (geom.length1 < 4 * W)
        throw Error("WindowTooSmall", "need L1 >= 4W");
    return W;
}

} // namespace

TopologicalReport fredholm_index(const LatticeGeometry& geom, const Eigen::MatrixXcd& U,
                                 const FredholmOptions& opts) {
    require_unitary(U);
    const int W = default_fredholm_window(geom, opts);
    const long n = geom.dim();

    auto windowed_value = [&](int W_probe) {
        double value = 0.0;
        for (long c = 0; c < n; ++c) {
            const int x1 = geom.x1(geom.i1_of(c));
            if (x1 < 0 || x1 > W_probe) continue;
            if (!in_row_window(geom, geom.row_of(c), opts.row_window)) continue;
            double ttd = 0.0, ttu = 0.0; // (1-T*T)_cc and (1-TT*)_cc
            for (long k = 0; k < n; ++k) {
                if (geom.x1(geom.i1_of(k)) >= 0) continue;
                ttd += std::norm(U(k, c));
                ttu += std::norm(U(c, k));
            }
            value += ttd - ttu;
        }
        return value;
    };

    const double value = windowed_value(W);
    if (geom.length1 >= 4 * (W + 4)) {
        const double probe = windowed_value(W + 4);
        if (std::abs(probe - value) > 0.5 * opts.tolerance)
            throw Error("WindowTooSmall", "value moved by " + std::to_string(probe - value) +
                                              " when widening the window");
    }
    return fredholm_report(value, opts);
}

TopologicalReport fredholm_index(const FluxFactors& u, const FredholmOptions& opts) {
    require_unit_phases(u);
    const LatticeGeometry& geom = u.geom;
    const int W = default_fredholm_window(geom, opts);
    const long n = geom.dim();
    const long slab = slab_size(geom);

    // Across the Pi_1 cut U = W (the identity part cannot cross), so
    // (1-T*T)_cc = sum_{x1(k)<0} |W_kc|^2 and (1-TT*)_cc = sum |W_ck|^2.
    const Eigen::MatrixXcd scaled = u.vectors * u.phases.asDiagonal();
    const Eigen::MatrixXcd scaled_adj = u.vectors * u.phases.conjugate().asDiagonal();
    std::vector<double> gain(static_cast<size_t>(n), 0.0), loss(static_cast<size_t>(n), 0.0);
    for (int c1 = 0; c1 < geom.length1; ++c1) {
        if (geom.x1(c1) < 0) continue;
        const auto rows_block = u.vectors.middleRows(c1 * slab, slab).adjoint();
        const Eigen::MatrixXcd wb = scaled * rows_block;      // W(:, slab)
        const Eigen::MatrixXcd wtb = scaled_adj * rows_block; // W^dagger(:, slab)
        for (long j = 0; j < slab; ++j) {
            const long col = c1 * slab + j;
            for (long k = 0; k < n; ++k) {
                if (geom.x1(geom.i1_of(k)) >= 0) continue;
                gain[static_cast<size_t>(col)] += std::norm(wb(k, j));
                loss[static_cast<size_t>(col)] += std::norm(wtb(k, j));
            }
        }
    }

    auto windowed_value = [&](int W_probe) {
        double value = 0.0;
        for (long c = 0; c < n; ++c) {
            const int x1 = geom.x1(geom.i1_of(c));
            if (x1 < 0 || x1 > W_probe) continue;
            if (!in_row_window(geom, geom.row_of(c), opts.row_window)) continue;
            value += gain[static_cast<size_t>(c)] - loss[static_cast<size_t>(c)];
        }
        return value;
    };

    const double value = windowed_value(W);
    if (geom.length1 >= 4 * (W + 4)) {
        const double probe = windowed_value(W + 4);
        if (std::abs(probe - value) > 0.5 * opts.tolerance)
            throw Error("WindowTooSmall", "value moved by " + std::to_string(probe - value) +
                                              " when widening the window");
    }
    return fredholm_report(value, opts);
}

// ---- covariant test operators ----

CovariantPattern CovariantPattern::random(std::uint64_t seed, int range1, int row_halfwidth,
                                          int orbitals, bool deterministic) {
    CovariantPattern p;
    p.range1 = range1;
    p.row_halfwidth = row_halfwidth;
    p.orbitals = orbitals;
    p.deterministic = deterministic;
    std::uint64_t s = splitmix64(seed ^ 0xA076u);
    auto next = [&s]() {
        s = splitmix64(s);
        return static_cast<double>(s >> 11) * (2.0 / 9007199254740992.0) - 1.0;
    };
    for (int d = -range1; d <= range1; ++d)
        for (int a = -row_halfwidth; a <= row_halfwidth; ++a)
            for (int b = -row_halfwidth; b <= row_halfwidth; ++b) {
                Eigen::MatrixXcd blk(orbitals, orbitals);
                for (int fa = 0; fa < orbitals; ++fa)
                    for (int fb = 0; fb < orbitals; ++fb) blk(fa, fb) = cdouble(next(), next());
                p.coeff[{d, a, b}] = blk;
            }
    return p;
}

Eigen::MatrixXcd CovariantPattern::realize(const LatticeGeometry& geom,
                                           const DisorderSample& sample) const {
    if (geom.orbitals != orbitals) throw Error("BadGeometry", "orbital mismatch");
    if (geom.row_lo > -row_halfwidth || geom.row_hi < row_halfwidth)
        throw Error("BadGeometry", "pattern rows exceed the strip");
    if (geom.bc1 == Bc::Periodic && 2 * range1 >= geom.length1)
        throw Error("RangeTooLarge", "pattern range must be < L1/2 on a ring");
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(geom.dim(), geom.dim());
    for (int i1 = 0; i1 < geom.length1; ++i1) {
        for (const auto& [key, blk] : coeff) {
            const auto [d, a, b] = key;
            int j1 = i1 + d;
            if (geom.bc1 == Bc::Periodic) {
                j1 = (j1 % geom.length1 + geom.length1) % geom.length1;
            } else if (j1 < 0 || j1 >= geom.length1) {
                continue;
            }
            const double w =
                deterministic ? 1.0 : 1.0 + sample_weight * sample.value(geom.x1(i1), b);
            A.block(geom.index(j1, a, 0), geom.index(i1, b, 0), orbitals, orbitals) += blk * w;
        }
    }
    return A;
}

cdouble cocycle_xi(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                   const Eigen::MatrixXcd& B, int range_a, int range_b) {
    if (geom.bc1 != Bc::Periodic)
        throw Error("BadGeometry", "xi_1 uses the ring trace per unit length");
    if (range_a >= 0 && range_b >= 0 && 2 * (range_a + range_b) >= geom.length1)
        throw Error("RangeTooLarge", "combined range must stay < L1/2");
    const long n = geom.dim();
    cdouble sum(0, 0);
    for (long m = 0; m < n; ++m) {
        const int m1 = geom.i1_of(m);
        for (long l = 0; l < n; ++l) {
            if (A(m, l) == cdouble(0, 0)) continue;
            const double d = signed_displacement(geom, geom.i1_of(l), m1);
            sum += A(m, l) * cdouble(0, d) * B(l, m);
        }
    }
    return cdouble(0, 1) * sum / static_cast<double>(geom.length1);
}

namespace {

Eigen::VectorXd sign_x1(const LatticeGeometry& geom) {
    Eigen::VectorXd F(geom.dim());
    for (long i = 0; i < geom.dim(); ++i)
        F(i) = geom.x1(geom.i1_of(i)) >= 0 ? 1.0 : -1.0; // sign(0) = +1
    return F;
}

bool in_rowset(const LatticeGeometry& geom, long idx, RowSet rows) {
    const int r = geom.row_of(idx);
    switch (rows) {
        case RowSet::All: return true;
        case RowSet::Upper: return r >= 0;
        case RowSet::Lower: return r < 0;
    }
    return true;
}

Eigen::MatrixXcd sign_commutator(const Eigen::VectorXd& F, const Eigen::MatrixXcd& X) {
    Eigen::MatrixXcd out = X;
    for (long j = 0; j < X.cols(); ++j)
        for (long i = 0; i < X.rows(); ++i) out(i, j) *= F(i) - F(j);
    return out;
}

} // namespace

// Pairing note: the derivative cocycle pairs as xi(A,B) = i T^(A grad_1 B);
// the sign-operator expression matches it with the arguments in the order
// (B, A). Both orders are exposed through the two cocycles' argument swap.
cdouble cocycle_zeta(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                     const Eigen::MatrixXcd& B, RowSet rows) {
    if (geom.bc1 != Bc::Open)
        throw Error("BadGeometry", "zeta_1 needs the sign operator of an open strip");
    const Eigen::VectorXd F = sign_x1(geom);
    const Eigen::MatrixXcd prod = sign_commutator(F, B) * sign_commutator(F, A);
    cdouble sum(0, 0);
    for (long i = 0; i < geom.dim(); ++i)
        if (in_rowset(geom, i, rows)) sum += F(i) * prod(i, i);
    return 0.25 * sum;
}

cdouble cocycle_eta(const LatticeGeometry& geom, const Eigen::MatrixXcd& A,
                    const Eigen::MatrixXcd& B, RowSet rows) {
    if (geom.bc1 != Bc::Open)
        throw Error("BadGeometry", "eta_1 compresses along an open strip");
    const long n = geom.dim();
    Eigen::VectorXd half(n);
    for (long i = 0; i < n; ++i) half(i) = geom.x1(geom.i1_of(i)) >= 0 ? 1.0 : 0.0;
    auto compress = [&](const Eigen::MatrixXcd& X) {
        Eigen::MatrixXcd out = X;
        for (long j = 0; j < n; ++j)
            for (long i = 0; i < n; ++i) out(i, j) *= half(i) * half(j);
        return out;
    };
    const Eigen::MatrixXcd first = compress(A * B) - compress(A) * compress(B);
    const Eigen::MatrixXcd second = compress(B * A) - compress(B) * compress(A);
    cdouble sum(0, 0);
    for (long i = 0; i < n; ++i)
        if (half(i) > 0.5 && in_rowset(geom, i, rows)) sum += first(i, i) - second(i, i);
    return sum;
}

long sgn_identity_sum(int n, int cutoff) {
    auto sgn = [](long m) { return m >= 0 ? 1L : -1L; };
    long total = 0;
    for (long m = -cutoff; m <= cutoff; ++m) {
        const long d = sgn(m) - sgn(m + n);
        total += sgn(m) * d * d;
    }
    return total;
}

// ---- Chern numbers ----

TopologicalReport chern_plaquette(const ModelSpec& spec, double fermi, int grid,
                                  double tolerance) {
    if (spec.lambda != 0.0)
        throw Error("BadModel", "plaquette Chern numbers need a clean model");
    const int Q = magnetic_supercell(spec);
    const int dim = Q * spec.orbitals;
    std::vector<Eigen::MatrixXcd> occ(static_cast<size_t>(grid * grid));
    int occupied = -1;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
            const double k1 = kTwoPi * a / grid;
            const double k2 = kTwoPi * b / grid;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                bloch_hamiltonian(spec, k1, k2));
            int nocc = 0;
            for (int j = 0; j < dim; ++j) {
                if (std::abs(es.eigenvalues()(j) - fermi) < 1e-9)
                    throw Error("GapClosedOnGrid", "eigenvalue at E_F on the k-grid");
                if (es.eigenvalues()(j) <= fermi) ++nocc;
            }
            if (occupied < 0) occupied = nocc;
            if (nocc != occupied)
                throw Error("GapClosedOnGrid", "occupied band count varies over the grid");
            occ[static_cast<size_t>(a * grid + b)] = es.eigenvectors().leftCols(nocc);
        }
    if (occupied == 0 || occupied == dim) {
        return TopologicalReport::make("chern_plaquette", 0.0, tolerance);
    }

    auto link = [&](int a, int b, int a2, int b2) {
        const Eigen::MatrixXcd m =
            occ[static_cast<size_t>(a * grid + b)].adjoint() *
            occ[static_cast<size_t>(a2 * grid + b2)];
        return m.determinant();
    };
    double total = 0.0;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
            const int a1 = (a + 1) % grid, b1 = (b + 1) % grid;
            // plaquette traversed k2-first; this orientation is the one that
            // pairs with the interface current sign convention
            const cdouble u1 = link(a, b, a, b1);
            const cdouble u2 = link(a, b1, a1, b1);
            const cdouble u3 = link(a1, b1, a1, b);
            const cdouble u4 = link(a1, b, a, b);
            total += std::arg(u1 * u2 * u3 * u4);
        }
    return TopologicalReport::make("chern_plaquette", total / kTwoPi, tolerance);
}

TopologicalReport chern_realspace_bott(const LatticeGeometry& geom,
                                       const Eigen::MatrixXcd& occupied,
                                       const BottOptions& opts) {
    if (geom.bc1 != Bc::Periodic || geom.bc2 != Bc::Periodic)
        throw Error("BadGeometry", "the Bott index lives on a torus");
    const long n = geom.dim();
    const long r = occupied.cols();
    if (r == 0) return TopologicalReport::make("bott_index", 0.0, opts.tolerance, opts.meta);

    Eigen::VectorXcd e1(n), e2(n);
    for (long i = 0; i < n; ++i) {
        e1(i) = std::exp(cdouble(0, kTwoPi * geom.i1_of(i) / geom.length1));
        e2(i) = std::exp(cdouble(0, kTwoPi * (geom.row_of(i) - geom.row_lo) / geom.rows()));
    }
    const Eigen::MatrixXcd Up = occupied.adjoint() * (e1.asDiagonal() * occupied);
    const Eigen::MatrixXcd Vp = occupied.adjoint() * (e2.asDiagonal() * occupied);

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd_u(Up), svd_v(Vp);
    const double smin = std::min(svd_u.singularValues().minCoeff(),
                                 svd_v.singularValues().minCoeff());
    if (smin < opts.obstruction_threshold)
        throw Error("SpectralObstruction",
                    "compressed exponential singular value " + std::to_string(smin));

    const Eigen::MatrixXcd M = Vp * Up * Vp.adjoint() * Up.adjoint();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(M, false);
    double total = 0.0;
    for (long i = 0; i < r; ++i) total += std::arg(ces.eigenvalues()(i));
    return TopologicalReport::make("bott_index", total / kTwoPi, opts.tolerance, opts.meta);
}

AdditivityReport index_additivity_check(const FluxFactors& u, const FluxFactors& v,
                                        const WindingOptions& opts) {
    AdditivityReport rep;
    rep.wind_u = winding_number(u, opts).raw;
    rep.wind_v = winding_number(v, opts).raw;
    rep.wind_uv = winding_number(concat_disjoint(u, v), opts).raw;
    rep.defect = std::abs(rep.wind_uv - rep.wind_u - rep.wind_v);
    return rep;
}

} // namespace edgelab
