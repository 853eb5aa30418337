#pragma once

#include "shtukalab/carlitz.hpp"
#include "shtukalab/shtuka.hpp"
#include "shtukalab/solve.hpp"

namespace shtukalab {

// Basis of the dual Tate module: columns of U satisfy tau(sigma* U) = U, so
// sigma(U) = T^{-1} U; built by Lang's theorem at z-degree 0 and coefficient-
// wise Artin-Schreier solves above.
struct Trivialization {
    TowerPtr tower;        // extension of the shtuka's tower where U lives
    Mat<ZSeries> U;
    Rational residual;     // certified valuation of T sigma(U) - U (zeta units)
    Rational norm_bound;   // -v(c)/(qhat-1), in the proof's norm estimate
    bool norm_ok = false;  // v(U_n) + n >= norm_bound for all stored n
};

Trivialization tate_trivialize(const LocalShtuka& sh, std::int64_t z_prec, std::int64_t pi_prec,
                               const SolveOptions& opt);

// Checks that every entry of U (and of U^{-1} when invertible to precision)
// lies in K^sep<z/zeta^s>: v(coeff of z^n) + s n >= bound uniformly.
struct SepRadiusReport {
    bool ok = false;
    Rational uniform_bound{0};
    // witness of failure: (z-degree, row, col)
    std::int64_t witness_n = 0;
    int witness_i = 0, witness_j = 0;
};
SepRadiusReport verify_sep_radius(const Trivialization& triv, Rational s);

// tau-fixed points of a torsion local shtuka over extensions of the base.
struct TorsionTatePoints {
    TowerPtr tower;
    std::vector<std::vector<ZSeries>> basis;  // generators, entries mod z^{n_i}
    std::int64_t length = 0;                  // A_eps-length = sum n_i
    bool rational_over_base = false;
};
TorsionTatePoints torsion_tate_points(const TorsionShtuka& t, const SolveOptions& opt);

// Differential omega = sum lambda(z^{-1-i}) z^i dz from the functional values.
struct Differential {
    std::vector<ff_t> c;  // coefficients over F_eps; implicit dz
};
Differential residue_form(const std::vector<ff_t>& lambda);

// The pairing <f, m> = m . f for a z-division tower (P_0, ..., P_{N-1}) of the
// Carlitz module (phi_z(P_j) = P_{j-1}, phi_z(P_0) = 0) against a tau-fixed
// series m = sum m_k z^k: lambda(z^{-1-j}) = sum_k m_k phi_z^k(P_j).  Each
// value must land in F_eps (NotFrobeniusFixed otherwise).
struct PairingResult {
    std::vector<ff_t> lambda;
    Differential omega;
    bool perfect = false;  // the differential generates over A_eps/(z^n)
};
PairingResult pairing_evaluate(const CarlitzTower& ct, const std::vector<LFE>& division_points,
                               const ZSeries& m);

}  // namespace shtukalab
