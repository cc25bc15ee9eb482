#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "edgelab/lattice.hpp"
#include "edgelab/spectral.hpp"
#include "oracles.hpp"

using namespace edgelab;
constexpr double pi = std::numbers::pi;

namespace {
const DisorderSample kNoDisorder{0, 0, 0};
}

TEST_CASE("signed displacement on the ring") {
    auto g = LatticeGeometry::strip(10, 2, 1, Bc::Periodic, Bc::Open);
    CHECK(signed_displacement(g, 0, 0) == 0);
    CHECK(signed_displacement(g, 9, 0) == -1);
    CHECK(signed_displacement(g, 5, 0) == 5); // tie broken to +L1/2
    CHECK(signed_displacement(g, 0, 9) == 1);
    auto go = LatticeGeometry::strip(10, 2, 1, Bc::Open, Bc::Open);
    CHECK(signed_displacement(go, 9, 0) == 9);
}

TEST_CASE("free lattice torus spectrum is the closed form") {
    auto geom = LatticeGeometry::strip(8, 4, 1, Bc::Periodic, Bc::Periodic);
    auto H = build_bulk_hamiltonian(ModelSpec::harper(0.0), geom, kNoDisorder, Bc::Periodic);
    Eigen::VectorXd ev = eigenvalues_only(H.mat);
    std::vector<double> expected;
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
            expected.push_back(2 * std::cos(2 * pi * a / 8) + 2 * std::cos(2 * pi * b / 8));
    std::sort(expected.begin(), expected.end());
    for (long i = 0; i < ev.size(); ++i)
        CHECK(ev(i) == doctest::Approx(expected[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("harper 2pi/3 torus has three symmetric bands") {
    auto geom = LatticeGeometry::strip(6, 3, 1, Bc::Periodic, Bc::Periodic);
    auto H = build_bulk_hamiltonian(ModelSpec::harper(2 * pi / 3), geom, kNoDisorder,
                                    Bc::Periodic);
    Eigen::VectorXd ev = eigenvalues_only(H.mat);
    // E -> -E symmetry
    for (long i = 0; i < ev.size(); ++i)
        CHECK(ev(i) == doctest::Approx(-ev(ev.size() - 1 - i)).epsilon(1e-10));
    // three bands: two macroscopic gaps
    int gaps = 0;
    for (long i = 1; i < ev.size(); ++i)
        if (ev(i) - ev(i - 1) > 0.5) ++gaps;
    CHECK(gaps == 2);
    // and the torus spectrum matches the magnetic Bloch oracle
    std::vector<double> oracle;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 6; ++b) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                oracles::harper_bloch(1, 3, 1.0, 2 * pi * a / 2, 2 * pi * b / 6));
            for (int j = 0; j < 3; ++j) oracle.push_back(es.eigenvalues()(j));
        }
    std::sort(oracle.begin(), oracle.end());
    for (long i = 0; i < ev.size(); ++i)
        CHECK(ev(i) == doctest::Approx(oracle[static_cast<size_t>(i)]).epsilon(1e-10));
}

TEST_CASE("single site with disorder is the scalar case") {
    auto geom = LatticeGeometry::half_strip(1, 1, 1, Half::Upper, Bc::Open);
    ModelSpec m = ModelSpec::atomic_insulator(2.5);
    m.lambda = 1.0;
    DisorderSample s{42, 0, 0};
    auto H = build_bulk_hamiltonian(m, geom, s, Bc::Open);
    REQUIRE(H.mat.rows() == 1);
    CHECK(H.mat(0, 0).real() == doctest::Approx(2.5 + s.value(0, 0)).epsilon(1e-15));
}

TEST_CASE("hermiticity is exact, not approximate") {
    ModelSpec m = ModelSpec::general_magnetic(2, 2 * pi / 5);
    Eigen::MatrixXcd t(2, 2);
    t << cdouble(0.3, 0.7), cdouble(-1.1, 0.2), cdouble(0.5, -0.4), cdouble(0.9, 0.1);
    m.add_hermitian_pair(1, 1, t); // diagonal hop exercises the midpoint phase
    m.add_hermitian_pair(1, 0, t);
    m.add_hermitian_pair(0, 1, 0.5 * t);
    Eigen::MatrixXcd onsite(2, 2);
    onsite << cdouble(0.2, 0), cdouble(0.1, 0.6), cdouble(0.1, -0.6), cdouble(-0.2, 0);
    m.add_hermitian_pair(0, 0, onsite);
    m.lambda = 0.7;
    auto geom = LatticeGeometry::strip(10, 4, 2, Bc::Periodic, Bc::Open);
    auto H = build_bulk_hamiltonian(m, geom, DisorderSample{7, 0, 0}, Bc::Open);
    CHECK((H.mat - H.mat.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("flux commensurability and range guards") {
    auto geom = LatticeGeometry::strip(8, 3, 1, Bc::Periodic, Bc::Open);
    CHECK_THROWS_WITH_AS(
        build_bulk_hamiltonian(ModelSpec::harper(2 * pi / 3), geom, kNoDisorder, Bc::Open),
        doctest::Contains("IncommensurateFlux"), Error);

    ModelSpec wide = ModelSpec::general_magnetic(1, 0.0);
    Eigen::MatrixXcd one(1, 1);
    one << cdouble(1, 0);
    wide.add_hermitian_pair(2, 0, one);
    auto tiny = LatticeGeometry::strip(4, 2, 1, Bc::Periodic, Bc::Open);
    CHECK_THROWS_WITH_AS(build_bulk_hamiltonian(wide, tiny, kNoDisorder, Bc::Open),
                         doctest::Contains("RangeTooLarge"), Error);

    ModelSpec toofar = ModelSpec::general_magnetic(1, 0.0);
    CHECK_THROWS_WITH_AS(toofar.add_hermitian_pair(3, 0, one), doctest::Contains("RangeTooLarge"),
                         Error);
}

TEST_CASE("clean periodic models commute with the magnetic translations") {
    // B * L1 and B * rows both commensurate so the generators wrap cleanly
    auto geom = LatticeGeometry::strip(6, 3, 1, Bc::Periodic, Bc::Periodic);
    const double B = 2 * pi / 3;
    auto H = build_bulk_hamiltonian(ModelSpec::harper(B), geom, kNoDisorder, Bc::Periodic);
    auto S1 = magnetic_translation(geom, B, 1);
    auto S2 = magnetic_translation(geom, B, 2);
    CHECK((S1.adjoint() * S1 - Eigen::MatrixXcd::Identity(18, 18)).cwiseAbs().maxCoeff() <
          1e-14);
    CHECK((H.mat * S1 - S1 * H.mat).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((H.mat * S2 - S2 * H.mat).cwiseAbs().maxCoeff() < 1e-12);
    // magnetic commutation S1 S2 = e^{iB} S2 S1
    CHECK((S1 * S2 - std::exp(cdouble(0, B)) * S2 * S1).cwiseAbs().maxCoeff() < 1e-12);

    auto geomh = LatticeGeometry::strip(6, 3, 2, Bc::Periodic, Bc::Periodic);
    auto Hh = build_bulk_hamiltonian(ModelSpec::haldane(1.0, 0.2, pi / 2, 0.0), geomh,
                                     kNoDisorder, Bc::Periodic);
    auto T1 = magnetic_translation(geomh, 0.0, 1);
    CHECK((Hh.mat * T1 - T1 * Hh.mat).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("disordered covariance: translated sample = conjugated matrix (interior)") {
    ModelSpec m = ModelSpec::harper(0.0);
    m.lambda = 0.9;
    auto geom = LatticeGeometry::strip(9, 3, 1, Bc::Open, Bc::Open);
    DisorderSample w{321, 0, 0};
    auto H0 = build_bulk_hamiltonian(m, geom, w, Bc::Open);
    auto H1 = build_bulk_hamiltonian(m, geom, w.translated(1, 0), Bc::Open);
    // away from the open ends, <n|H_{T1 w}|n> = <n+e1|H_w|n+e1>
    for (int i1 = 0; i1 + 1 < 9; ++i1)
        for (int n2 = -3; n2 <= 2; ++n2) {
            const long a = geom.index(i1, n2, 0);
            const long b = geom.index(i1 + 1, n2, 0);
            CHECK(H1.mat(a, a) == H0.mat(b, b));
        }
}

TEST_CASE("plaquette flux equals e^{iB} in the up-right-down-left orientation") {
    const double B = 2 * pi / 7;
    auto geom = LatticeGeometry::strip(7, 3, 1, Bc::Periodic, Bc::Open);
    auto H = build_bulk_hamiltonian(ModelSpec::harper(B), geom, kNoDisorder, Bc::Open);
    for (int i1 = 0; i1 + 1 < 7; ++i1)
        for (int n2 = -3; n2 + 1 <= 2; ++n2) {
            const long s = geom.index(i1, n2, 0);
            const long up = geom.index(i1, n2 + 1, 0);
            const long upr = geom.index(i1 + 1, n2 + 1, 0);
            const long r = geom.index(i1 + 1, n2, 0);
            const cdouble loop = H.mat(up, s) * H.mat(upr, up) * H.mat(r, upr) * H.mat(s, r);
            CHECK(std::arg(loop) == doctest::Approx(B).epsilon(1e-12));
        }
}

TEST_CASE("half-space restriction") {
    SUBCASE("diagonal matrix unchanged on its half") {
        auto geom = LatticeGeometry::strip(4, 2, 1, Bc::Periodic, Bc::Open);
        ModelSpec m = ModelSpec::atomic_insulator(1.5);
        auto H = build_bulk_hamiltonian(m, geom, kNoDisorder, Bc::Open);
        auto up = restrict_half_space(H, Half::Upper);
        for (long i = 0; i < geom.dim(); ++i) {
            const bool upper = geom.row_of(i) >= 0;
            CHECK(up.mat(i, i) == (upper ? H.mat(i, i) : cdouble(0, 0)));
        }
    }
    SUBCASE("free strip: crossing hops removed, upper block intact") {
        auto geom = LatticeGeometry::strip(4, 2, 1, Bc::Periodic, Bc::Open);
        auto H = build_bulk_hamiltonian(ModelSpec::harper(0.0), geom, kNoDisorder, Bc::Open);
        auto up = restrict_half_space(H, Half::Upper);
        for (long i = 0; i < geom.dim(); ++i)
            for (long j = 0; j < geom.dim(); ++j) {
                const bool both_upper = geom.row_of(i) >= 0 && geom.row_of(j) >= 0;
                CHECK(up.mat(i, j) == (both_upper ? H.mat(i, j) : cdouble(0, 0)));
            }
    }
    SUBCASE("upper + lower + crossing recovers the bulk exactly") {
        auto geom = LatticeGeometry::strip(6, 3, 1, Bc::Periodic, Bc::Open);
        ModelSpec m = ModelSpec::harper(2 * pi / 3);
        auto H = build_bulk_hamiltonian(m, geom, kNoDisorder, Bc::Open);
        auto up = restrict_half_space(H, Half::Upper);
        auto lo = restrict_half_space(H, Half::Lower);
        auto K = build_coupling(CouplingSpec{}, m, m, geom);
        CHECK((up.mat + lo.mat + K.mat - H.mat).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("periodic bc2 is rejected") {
        auto geom = LatticeGeometry::strip(4, 2, 1, Bc::Periodic, Bc::Periodic);
        auto H =
            build_bulk_hamiltonian(ModelSpec::harper(0.0), geom, kNoDisorder, Bc::Periodic);
        CHECK_THROWS_AS(restrict_half_space(H, Half::Upper), Error);
    }
}

TEST_CASE("coupling support and scaling") {
    auto geom = LatticeGeometry::strip(6, 4, 1, Bc::Periodic, Bc::Open);
    ModelSpec m = ModelSpec::harper(0.0);
    SUBCASE("kappa = 0 gives the zero matrix") {
        CouplingSpec c;
        c.kappa = 0.0;
        auto K = build_coupling(c, m, m, geom);
        CHECK(K.mat.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("default support is rows {-1, 0}") {
        auto K = build_coupling(CouplingSpec{0.5, -1}, m, m, geom);
        bool any = false;
        for (long i = 0; i < geom.dim(); ++i)
            for (long j = 0; j < geom.dim(); ++j)
                if (K.mat(i, j) != cdouble(0, 0)) {
                    any = true;
                    CHECK(geom.row_of(i) >= -1);
                    CHECK(geom.row_of(i) <= 0);
                    CHECK(geom.row_of(j) >= -1);
                    CHECK(geom.row_of(j) <= 0);
                }
        CHECK(any);
    }
    SUBCASE("strip wider than the half-width is rejected") {
        CHECK_THROWS_WITH_AS(build_coupling(CouplingSpec{1.0, 4}, m, m, geom),
                             doctest::Contains("StripTooWide"), Error);
    }
}

TEST_CASE("interface assembly") {
    auto geom = LatticeGeometry::strip(6, 3, 1, Bc::Periodic, Bc::Open);
    ModelSpec m = ModelSpec::harper(2 * pi / 3);
    auto bulk = build_bulk_hamiltonian(m, geom, kNoDisorder, Bc::Open);
    auto up = restrict_half_space(bulk, Half::Upper);
    auto lo = restrict_half_space(bulk, Half::Lower);
    auto K = build_coupling(CouplingSpec{}, m, m, geom);

    SUBCASE("mu = 0 is block diagonal") {
        auto H0 = assemble_interface(up, lo, K, 0.0);
        for (long i = 0; i < geom.dim(); ++i)
            for (long j = 0; j < geom.dim(); ++j)
                if ((geom.row_of(i) >= 0) != (geom.row_of(j) >= 0))
                    CHECK(H0.mat(i, j) == cdouble(0, 0));
    }
    SUBCASE("mu = 1 with matched coupling restores the bulk") {
        auto H1 = assemble_interface(up, lo, K, 1.0);
        CHECK((H1.mat - bulk.mat).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("affine in mu") {
        auto H0 = assemble_interface(up, lo, K, 0.0);
        auto Hm = assemble_interface(up, lo, K, 0.37);
        CHECK((Hm.mat - (H0.mat + 0.37 * K.mat)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("support overlap is rejected") {
        CHECK_THROWS_WITH_AS(assemble_interface(bulk, lo, K, 1.0),
                             doctest::Contains("SupportOverlap"), Error);
    }
}

TEST_CASE("haldane and staggered gaps against the Bloch oracle") {
    SUBCASE("t2 = 0, M = 0.5: gap is the staggered mass") {
        CHECK(oracles::honeycomb_min_abs_energy(1.0, 0.0, 0.0, 0.5, 24) ==
              doctest::Approx(0.5).epsilon(1e-9));
        // finite torus eigenvalues avoid (-M, M) up to 1e-6
        auto geom = LatticeGeometry::strip(12, 6, 2, Bc::Periodic, Bc::Periodic);
        auto H = build_bulk_hamiltonian(ModelSpec::staggered_honeycomb(1.0, 0.5), geom,
                                        kNoDisorder, Bc::Periodic);
        CHECK(eigenvalues_only(H.mat).cwiseAbs().minCoeff() >= 0.5 - 1e-6);
    }
    SUBCASE("t2 = 0.2, phi = pi/2, M = 0: E_F = 0 is in a gap of 3 sqrt(3) t2") {
        const double gap = 3 * std::sqrt(3.0) * 0.2;
        CHECK(oracles::honeycomb_min_abs_energy(1.0, 0.2, pi / 2, 0.0, 24) ==
              doctest::Approx(gap).epsilon(1e-9));
    }
    SUBCASE("atomic limit is the diagonal mass") {
        auto geom = LatticeGeometry::strip(4, 2, 2, Bc::Periodic, Bc::Periodic);
        auto H = build_bulk_hamiltonian(ModelSpec::staggered_honeycomb(0.0, 1.0), geom,
                                        kNoDisorder, Bc::Periodic);
        Eigen::VectorXd ev = eigenvalues_only(H.mat);
        for (long i = 0; i < ev.size(); ++i) CHECK(std::abs(std::abs(ev(i)) - 1.0) < 1e-14);
    }
    SUBCASE("closing the clean gap is refused") {
        auto geom = LatticeGeometry::strip(6, 3, 2, Bc::Periodic, Bc::Periodic);
        const double critical = 3 * std::sqrt(3.0) * 0.2;
        CHECK_THROWS_WITH_AS(
            build_haldane(1.0, 0.2, pi / 2, critical, geom, kNoDisorder, Bc::Periodic),
            doctest::Contains("GapClosed"), Error);
    }
}

TEST_CASE("real-space torus spectrum equals the union of Bloch spectra") {
    // Haldane via the production Bloch matrix and the independent oracle
    ModelSpec m = ModelSpec::haldane(1.0, 0.2, pi / 2, 0.3);
    auto geom = LatticeGeometry::strip(6, 3, 2, Bc::Periodic, Bc::Periodic);
    auto H = build_bulk_hamiltonian(m, geom, kNoDisorder, Bc::Periodic);
    Eigen::VectorXd ev = eigenvalues_only(H.mat);

    std::vector<double> bloch, oracle;
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
            const double k1 = 2 * pi * a / 6, k2 = 2 * pi * b / 6;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bloch_hamiltonian(m, k1, k2));
            for (int j = 0; j < 2; ++j) bloch.push_back(es.eigenvalues()(j));
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eo(
                oracles::honeycomb_bloch(1.0, 0.2, pi / 2, 0.3, k1, k2));
            for (int j = 0; j < 2; ++j) oracle.push_back(eo.eigenvalues()(j));
        }
    std::sort(bloch.begin(), bloch.end());
    std::sort(oracle.begin(), oracle.end());
    for (long i = 0; i < ev.size(); ++i) {
        CHECK(ev(i) == doctest::Approx(bloch[static_cast<size_t>(i)]).epsilon(1e-10));
        CHECK(ev(i) == doctest::Approx(oracle[static_cast<size_t>(i)]).epsilon(1e-10));
    }
}
