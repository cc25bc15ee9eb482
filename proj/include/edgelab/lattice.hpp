#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "edgelab/rng.hpp"
#include "edgelab/types.hpp"

namespace edgelab {

enum class Bc { Periodic, Open };
enum class Half { Upper, Lower };
enum class Provenance { Bulk, HalfSpace, Coupling, Interface };

// Strip of L1 sites along the interface direction and rows row_lo..row_hi
// in direction 2 (full strips use -L2..L2-1, the interface sits between
// rows -1 and 0). Storage index: ((i1 * rows) + (n2 - row_lo)) * F + f.
struct LatticeGeometry {
    int length1 = 1;
    int row_lo = 0;
    int row_hi = -1;
    int orbitals = 1;
    Bc bc1 = Bc::Periodic;
    Bc bc2 = Bc::Open;

    static LatticeGeometry strip(int L1, int L2, int F, Bc bc1, Bc bc2);
    static LatticeGeometry half_strip(int L1, int L2, int F, Half which, Bc bc1);

    int rows() const { return row_hi - row_lo + 1; }
    long dim() const { return static_cast<long>(length1) * rows() * orbitals; }
    int half_width() const { return (rows() + 1) / 2; }

    long index(int i1, int n2, int f) const {
        return (static_cast<long>(i1) * rows() + (n2 - row_lo)) * orbitals + f;
    }
    int i1_of(long idx) const { return static_cast<int>(idx / (static_cast<long>(rows()) * orbitals)); }
    int row_of(long idx) const {
        return static_cast<int>((idx / orbitals) % rows()) + row_lo;
    }
    int orbital_of(long idx) const { return static_cast<int>(idx % orbitals); }

    // Position label along direction 1; centered when the strip is open so
    // that the Pi_1 cut and sign(X_1) sit in the middle.
    int x1(int i1) const { return bc1 == Bc::Open ? i1 - length1 / 2 : i1; }

    bool compatible(const LatticeGeometry& o) const {
        return length1 == o.length1 && row_lo == o.row_lo && row_hi == o.row_hi &&
               orbitals == o.orbitals && bc1 == o.bc1;
    }
};

// Canonical representative of a1 - b1 on the ring, in (-L1/2, L1/2] with the
// tie broken to +L1/2. Plain label difference on open strips.
int signed_displacement(const LatticeGeometry& geom, int a1, int b1);

enum class ModelKind { Harper, GeneralMagnetic, Haldane, StaggeredHoneycomb };

struct HopTerm {
    int m1 = 0;
    int m2 = 0;
    Eigen::MatrixXcd t; // orbital block, F x F
};

// Hopping catalog entry. `hoppings` is Hermitian-symmetric by construction:
// every term has its reversed partner with the adjoint block, the on-site
// block is Hermitian.
struct ModelSpec {
    std::string name = "model";
    ModelKind kind = ModelKind::GeneralMagnetic;
    int orbitals = 1;
    double flux = 0.0;       // B, radians per plaquette
    double lambda = 0.0;     // on-site disorder strength
    std::vector<HopTerm> hoppings;

    static ModelSpec harper(double flux, double t = 1.0);
    static ModelSpec haldane(double t1, double t2, double phi, double mass);
    static ModelSpec staggered_honeycomb(double t1, double mass);
    static ModelSpec atomic_insulator(double onsite);
    static ModelSpec general_magnetic(int orbitals, double flux);

    // Adds t for displacement (m1,m2) plus the adjoint block at (-m1,-m2).
    // On-site terms (0,0) must be passed once and be exactly Hermitian.
    void add_hermitian_pair(int m1, int m2, const Eigen::MatrixXcd& t);

    int range() const;
    void validate() const;
};

struct HamiltonianMatrix {
    LatticeGeometry geom;
    Eigen::MatrixXcd mat;
    Provenance provenance = Provenance::Bulk;
    int range1 = 0;
};

// H = sum_m t_m (dual magnetic translation)^m + lambda sum_n v_n |n><n|,
// Landau gauge: a hop m starting at x1 carries phase exp(-i B (x1 + m1/2) m2).
HamiltonianMatrix build_bulk_hamiltonian(const ModelSpec& spec, LatticeGeometry geom,
                                         const DisorderSample& sample, Bc bc2);

// Haldane convenience with the clean-model gap precondition at E_F = 0.
HamiltonianMatrix build_haldane(double t1, double t2, double phi, double mass,
                                LatticeGeometry geom, const DisorderSample& sample, Bc bc2);

// Pi_{2,±} H Pi_{2,±}^*: zeroes everything outside the chosen half's block.
HamiltonianMatrix restrict_half_space(const HamiltonianMatrix& bulk, Half half);

struct CouplingSpec {
    double kappa = 1.0;
    int strip_halfwidth = -1; // N; defaults to the larger model range
};

// Default K: kappa times the mean of the two bulks' removed row-crossing
// blocks, masked to the strip [-N, N]. Restores the exact bulk for matched
// materials at kappa = 1.
HamiltonianMatrix build_coupling(const CouplingSpec& cspec, const ModelSpec& upper,
                                 const ModelSpec& lower, const LatticeGeometry& geom);

// H(mu) = H_plus + H_minus + mu K on a shared full-strip geometry.
HamiltonianMatrix assemble_interface(const HamiltonianMatrix& h_plus,
                                     const HamiltonianMatrix& h_minus,
                                     const HamiltonianMatrix& coupling, double mu);

// Magnetic translation generators commuting with the clean bulk (tests).
Eigen::MatrixXcd magnetic_translation(const LatticeGeometry& geom, double flux, int direction);

// Bloch matrix on the magnetic supercell (q x 1 cells for B = 2 pi p / q),
// dimension q * F. Clean models only.
int magnetic_supercell(const ModelSpec& spec);
Eigen::MatrixXcd bloch_hamiltonian(const ModelSpec& spec, double k1, double k2);

} // namespace edgelab
