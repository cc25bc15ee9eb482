#include "edgelab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace edgelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_canonical_half(int m1, int m2) { return m1 > 0 || (m1 == 0 && m2 > 0); }

} // namespace

LatticeGeometry LatticeGeometry::strip(int L1, int L2, int F, Bc bc1, Bc bc2) {
    if (L1 < 1 || L2 < 1 || F < 1) throw Error("BadGeometry", "dimensions must be positive");
    LatticeGeometry g;
    g.length1 = L1;
    g.row_lo = -L2;
    g.row_hi = L2 - 1;
    g.orbitals = F;
    g.bc1 = bc1;
    g.bc2 = bc2;
    return g;
}

LatticeGeometry LatticeGeometry::half_strip(int L1, int L2, int F, Half which, Bc bc1) {
    LatticeGeometry g = strip(L1, L2, F, bc1, Bc::Open);
    if (which == Half::Upper) {
        g.row_lo = 0;
        g.row_hi = L2 - 1;
    } else {
        g.row_lo = -L2;
        g.row_hi = -1;
    }
    return g;
}

int signed_displacement(const LatticeGeometry& geom, int a1, int b1) {
    if (geom.bc1 == Bc::Open) return geom.x1(a1) - geom.x1(b1);
    const int L = geom.length1;
    int d = (a1 - b1) % L;
    if (d < 0) d += L;
    if (2 * d > L) d -= L; // representative in (-L/2, L/2], tie kept at +L/2
    return d;
}

void ModelSpec::add_hermitian_pair(int m1, int m2, const Eigen::MatrixXcd& t) {
    if (t.rows() != orbitals || t.cols() != orbitals)
        throw Error("BadModel", "orbital block size mismatch");
    if (std::abs(m1) > 2 || std::abs(m2) > 2)
        throw Error("RangeTooLarge", "hopping range exceeds 2");
    if (m1 == 0 && m2 == 0) {
        if ((t - t.adjoint()).cwiseAbs().maxCoeff() != 0.0)
            throw Error("BadModel", "on-site block must be Hermitian");
        hoppings.push_back({0, 0, t});
        return;
    }
    hoppings.push_back({m1, m2, t});
    hoppings.push_back({-m1, -m2, t.adjoint()});
}

int ModelSpec::range() const {
    int r = 0;
    for (const auto& h : hoppings) r = std::max({r, std::abs(h.m1), std::abs(h.m2)});
    return r;
}

void ModelSpec::validate() const {
    if (range() > 2) throw Error("RangeTooLarge", "hopping range exceeds 2");
    // Hermitian symmetry: the accumulated block for -m must be the adjoint of m's.
    for (const auto& a : hoppings) {
        Eigen::MatrixXcd fwd = Eigen::MatrixXcd::Zero(orbitals, orbitals);
        Eigen::MatrixXcd rev = Eigen::MatrixXcd::Zero(orbitals, orbitals);
        for (const auto& b : hoppings) {
            if (b.m1 == a.m1 && b.m2 == a.m2) fwd += b.t;
            if (b.m1 == -a.m1 && b.m2 == -a.m2) rev += b.t;
        }
        if ((rev - fwd.adjoint()).cwiseAbs().maxCoeff() > 0.0)
            throw Error("BadModel", "hoppings are not Hermitian-symmetric");
    }
}

ModelSpec ModelSpec::harper(double flux, double t) {
    ModelSpec m;
    m.name = "harper";
    m.kind = ModelKind::Harper;
    m.orbitals = 1;
    m.flux = flux;
    Eigen::MatrixXcd one(1, 1);
    one << cdouble(t, 0.0);
    m.add_hermitian_pair(1, 0, one);
    m.add_hermitian_pair(0, 1, one);
    return m;
}

// Brick-wall honeycomb: orbital 0 = A, 1 = B. A couples to B in cells
// (0,0), (-1,0), (0,-1); the +phi next-nearest triplet on A is
// {(1,0), (-1,1), (0,-1)} and B carries the conjugate phase.
ModelSpec ModelSpec::haldane(double t1, double t2, double phi, double mass) {
    ModelSpec m;
    m.name = "haldane";
    m.kind = ModelKind::Haldane;
    m.orbitals = 2;
    Eigen::MatrixXcd onsite(2, 2);
    onsite << cdouble(mass, 0), cdouble(t1, 0), cdouble(t1, 0), cdouble(-mass, 0);
    m.add_hermitian_pair(0, 0, onsite);
    Eigen::MatrixXcd ab = Eigen::MatrixXcd::Zero(2, 2);
    ab(1, 0) = cdouble(t1, 0);
    m.add_hermitian_pair(-1, 0, ab);
    m.add_hermitian_pair(0, -1, ab);
    const cdouble tp = t2 * std::exp(cdouble(0, phi));
    const int triplet[3][2] = {{1, 0}, {-1, 1}, {0, -1}};
    for (const auto& d : triplet) {
        Eigen::MatrixXcd nn = Eigen::MatrixXcd::Zero(2, 2);
        nn(0, 0) = tp;
        nn(1, 1) = std::conj(tp);
        m.add_hermitian_pair(d[0], d[1], nn);
    }
    return m;
}

ModelSpec ModelSpec::staggered_honeycomb(double t1, double mass) {
    ModelSpec m = haldane(t1, 0.0, 0.0, mass);
    m.name = "staggered_honeycomb";
    m.kind = ModelKind::StaggeredHoneycomb;
    return m;
}

ModelSpec ModelSpec::atomic_insulator(double onsite) {
    ModelSpec m;
    m.name = "atomic_insulator";
    m.kind = ModelKind::GeneralMagnetic;
    m.orbitals = 1;
    Eigen::MatrixXcd e(1, 1);
    e << cdouble(onsite, 0);
    m.add_hermitian_pair(0, 0, e);
    return m;
}

ModelSpec ModelSpec::general_magnetic(int orbitals, double flux) {
    ModelSpec m;
    m.name = "general_magnetic";
    m.kind = ModelKind::GeneralMagnetic;
    m.orbitals = orbitals;
    m.flux = flux;
    return m;
}

namespace {

void check_flux_commensurate(const ModelSpec& spec, const LatticeGeometry& geom) {
    if (geom.bc1 != Bc::Periodic || spec.flux == 0.0) return;
    const double cycles = spec.flux * geom.length1 / kTwoPi;
    if (std::abs(cycles - std::round(cycles)) > 1e-9)
        throw Error("IncommensurateFlux", "B*L1 not a multiple of 2*pi");
}

} // namespace

HamiltonianMatrix build_bulk_hamiltonian(const ModelSpec& spec, LatticeGeometry geom,
                                         const DisorderSample& sample, Bc bc2) {
    spec.validate();
    geom.bc2 = bc2;
    if (geom.orbitals != spec.orbitals)
        throw Error("BadGeometry", "geometry orbitals must match the model fiber");
    check_flux_commensurate(spec, geom);
    const int R = spec.range();
    if (geom.bc1 == Bc::Periodic && 2 * R >= geom.length1)
        throw Error("RangeTooLarge", "hopping range must be < L1/2 on a ring");

    const int L1 = geom.length1;
    const int rows = geom.rows();
    HamiltonianMatrix H;
    H.geom = geom;
    H.provenance = Provenance::Bulk;
    H.range1 = R;
    H.mat = Eigen::MatrixXcd::Zero(geom.dim(), geom.dim());

    for (const auto& hop : spec.hoppings) {
        const bool onsite = hop.m1 == 0 && hop.m2 == 0;
        if (!onsite && !is_canonical_half(hop.m1, hop.m2)) continue;
        for (int i1 = 0; i1 < L1; ++i1) {
            int j1 = i1 + hop.m1;
            if (geom.bc1 == Bc::Periodic) {
                j1 = (j1 % L1 + L1) % L1;
            } else if (j1 < 0 || j1 >= L1) {
                continue;
            }
            for (int n2 = geom.row_lo; n2 <= geom.row_hi; ++n2) {
                int n2t = n2 + hop.m2;
                if (bc2 == Bc::Periodic) {
                    n2t = (n2t - geom.row_lo + rows * 8) % rows + geom.row_lo;
                } else if (n2t < geom.row_lo || n2t > geom.row_hi) {
                    continue;
                }
                const double theta =
                    -spec.flux * (geom.x1(i1) + 0.5 * hop.m1) * hop.m2;
                const cdouble phase = std::exp(cdouble(0, theta));
                for (int fa = 0; fa < spec.orbitals; ++fa) {
                    for (int fb = 0; fb < spec.orbitals; ++fb) {
                        const cdouble v = hop.t(fa, fb) * phase;
                        if (v == cdouble(0, 0)) continue;
                        const long r = geom.index(j1, n2t, fa);
                        const long c = geom.index(i1, n2, fb);
                        if (onsite) {
                            H.mat(r, c) += v; // block itself Hermitian
                        } else {
                            H.mat(r, c) += v;
                            H.mat(c, r) += std::conj(v);
                        }
                    }
                }
            }
        }
    }

    if (spec.lambda != 0.0) {
        for (int i1 = 0; i1 < L1; ++i1)
            for (int n2 = geom.row_lo; n2 <= geom.row_hi; ++n2) {
                const double v = spec.lambda * sample.value(geom.x1(i1), n2);
                for (int f = 0; f < spec.orbitals; ++f) {
                    const long k = geom.index(i1, n2, f);
                    H.mat(k, k) += v;
                }
            }
    }
    return H;
}

HamiltonianMatrix build_haldane(double t1, double t2, double phi, double mass,
                                LatticeGeometry geom, const DisorderSample& sample, Bc bc2) {
    const double dirac_mass = 3.0 * std::sqrt(3.0) * t2 * std::sin(phi);
    if (std::abs(std::abs(mass) - std::abs(dirac_mass)) < 1e-12 && t1 != 0.0)
        throw Error("GapClosed", "|M| = 3*sqrt(3)*t2*sin(phi): clean gap closes at E=0");
    return build_bulk_hamiltonian(ModelSpec::haldane(t1, t2, phi, mass), geom, sample, bc2);
}

HamiltonianMatrix restrict_half_space(const HamiltonianMatrix& bulk, Half half) {
    if (bulk.geom.bc2 != Bc::Open)
        throw Error("OpenBoundaryRequired", "half-space restriction needs open bc2");
    HamiltonianMatrix out = bulk;
    out.provenance = Provenance::HalfSpace;
    const long n = bulk.geom.dim();
    for (long i = 0; i < n; ++i) {
        const bool iu = bulk.geom.row_of(i) >= 0;
        for (long j = 0; j < n; ++j) {
            const bool ju = bulk.geom.row_of(j) >= 0;
            const bool keep = (half == Half::Upper) ? (iu && ju) : (!iu && !ju);
            if (!keep) out.mat(i, j) = cdouble(0, 0);
        }
    }
    return out;
}

HamiltonianMatrix build_coupling(const CouplingSpec& cspec, const ModelSpec& upper,
                                 const ModelSpec& lower, const LatticeGeometry& geom) {
    ModelSpec up = upper, lo = lower;
    up.lambda = 0.0; // K is chosen non-random
    lo.lambda = 0.0;
    const int needed = std::max(up.range(), lo.range());
    const int N = cspec.strip_halfwidth < 0 ? needed : cspec.strip_halfwidth;
    if (N >= geom.half_width()) throw Error("StripTooWide", "coupling strip must satisfy N < L2");

    DisorderSample none{0, 0, 0};
    auto crossing = [&](const ModelSpec& m) {
        HamiltonianMatrix bulk = build_bulk_hamiltonian(m, geom, none, Bc::Open);
        Eigen::MatrixXcd cross = bulk.mat;
        cross -= restrict_half_space(bulk, Half::Upper).mat;
        cross -= restrict_half_space(bulk, Half::Lower).mat;
        return cross;
    };

    HamiltonianMatrix K;
    K.geom = geom;
    K.geom.bc2 = Bc::Open;
    K.provenance = Provenance::Coupling;
    K.range1 = std::max(up.range(), lo.range());
    K.mat = 0.5 * cspec.kappa * (crossing(up) + crossing(lo));

    const long n = geom.dim();
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            const int ri = geom.row_of(i), rj = geom.row_of(j);
            if (std::abs(ri) > N || std::abs(rj) > N) K.mat(i, j) = cdouble(0, 0);
        }
    return K;
}

HamiltonianMatrix assemble_interface(const HamiltonianMatrix& h_plus,
                                     const HamiltonianMatrix& h_minus,
                                     const HamiltonianMatrix& coupling, double mu) {
    if (!h_plus.geom.compatible(h_minus.geom) || !h_plus.geom.compatible(coupling.geom))
        throw Error("BadGeometry", "interface parts live on incompatible geometries");
    const long n = h_plus.geom.dim();
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            if (h_plus.mat(i, j) != cdouble(0, 0) &&
                (h_plus.geom.row_of(i) < 0 || h_plus.geom.row_of(j) < 0))
                throw Error("SupportOverlap", "H_plus has weight on the lower half");
            if (h_minus.mat(i, j) != cdouble(0, 0) &&
                (h_minus.geom.row_of(i) >= 0 || h_minus.geom.row_of(j) >= 0))
                throw Error("SupportOverlap", "H_minus has weight on the upper half");
        }
    HamiltonianMatrix H;
    H.geom = h_plus.geom;
    H.provenance = Provenance::Interface;
    H.range1 = std::max({h_plus.range1, h_minus.range1, coupling.range1});
    H.mat = h_plus.mat + h_minus.mat + mu * coupling.mat;
    return H;
}

Eigen::MatrixXcd magnetic_translation(const LatticeGeometry& geom, double flux, int direction) {
    const long n = geom.dim();
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n, n);
    const int L1 = geom.length1;
    const int rows = geom.rows();
    for (int i1 = 0; i1 < L1; ++i1)
        for (int n2 = geom.row_lo; n2 <= geom.row_hi; ++n2)
            for (int f = 0; f < geom.orbitals; ++f) {
                if (direction == 1) {
                    const int j1 = (i1 + 1) % L1;
                    S(geom.index(j1, n2, f), geom.index(i1, n2, f)) =
                        std::exp(cdouble(0, -flux * n2));
                } else {
                    const int n2t = (n2 - geom.row_lo + 1) % rows + geom.row_lo;
                    S(geom.index(i1, n2t, f), geom.index(i1, n2, f)) = cdouble(1, 0);
                }
            }
    return S;
}

int magnetic_supercell(const ModelSpec& spec) {
    if (spec.flux == 0.0) return 1;
    const double frac = spec.flux / kTwoPi;
    for (int q = 1; q <= 256; ++q) {
        if (std::abs(frac * q - std::round(frac * q)) < 1e-9) return q;
    }
    throw Error("IncommensurateFlux", "flux is not 2*pi*p/q with q <= 256");
}

Eigen::MatrixXcd bloch_hamiltonian(const ModelSpec& spec, double k1, double k2) {
    spec.validate();
    const int Q = magnetic_supercell(spec);
    const int F = spec.orbitals;
    Eigen::MatrixXcd Hk = Eigen::MatrixXcd::Zero(Q * F, Q * F);
    for (const auto& hop : spec.hoppings) {
        for (int j = 0; j < Q; ++j) {
            int jp = j + hop.m1;
            int c = jp >= 0 ? jp / Q : (jp - Q + 1) / Q;
            jp -= c * Q;
            const double theta = -spec.flux * (j + 0.5 * hop.m1) * hop.m2;
            const cdouble phase =
                std::exp(cdouble(0, theta)) * std::exp(cdouble(0, k1 * c + k2 * hop.m2));
            Hk.block(jp * F, j * F, F, F) += hop.t * phase;
        }
    }
    return Hk;
}

} // namespace edgelab
