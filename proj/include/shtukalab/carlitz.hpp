#pragma once

#include <vector>

#include "shtukalab/zseries.hpp"

namespace shtukalab {

// The epsilon-power division tower of the Carlitz module: ell_0^{qhat-1} = -zeta,
// ell_i^{qhat} + zeta ell_i = ell_{i-1}, built top-down with pi := ell_n.
struct CarlitzTower {
    TowerPtr tower;          // F_eps((pi)), v(zeta) = (qhat-1) qhat^n
    int depth = 0;           // n
    std::vector<LFE> ells;   // ell_0 .. ell_n
    LFE zeta;                // re-expanded in pi

    std::int64_t qhat() const { return static_cast<std::int64_t>(tower->qhat()); }
};

// Builds the tower by the downward fixed-point iteration; prec is the
// pi-digit budget of the top level.
CarlitzTower carlitz_build_tower(const FieldPtr& feps, int depth, std::int64_t prec);

// Carlitz action: phi_z(x) = zeta x + x^qhat; phi_a for a in A_eps mod z^n
// given by its F_eps-coefficients (a_0, a_1, ...).
LFE carlitz_phi_z(const CarlitzTower& ct, const LFE& x);
LFE carlitz_phi(const CarlitzTower& ct, const LFE& x, const std::vector<ff_t>& a);

// The epsilon^n-torsion points {phi_a(ell_{n-1}) : a in A/z^n}; qhat^n points.
std::vector<LFE> carlitz_torsion_points(const CarlitzTower& ct, int n);

// ell_plus = sum ell_i z^i, ell_minus = prod (1 - zeta^{qhat^i}/z), ell = product.
struct PeriodSeries {
    ZSeries ell_plus;
    ZSeries ell_minus;
    ZSeries ell;
};

// ellminus_window: number of z^{-j} coefficients kept for ell_minus (>= 1).
PeriodSeries carlitz_periods(const CarlitzTower& ct, std::int64_t ellminus_window);

// Certified residual of a defining identity: ok means every coefficient of
// the residual vanishes to its precision; certified is the minimal coefficient
// precision of the residual in zeta-units.
struct IdentityCheck {
    bool ok = false;
    Rational certified{0};
};
IdentityCheck check_ell_plus_identity(const CarlitzTower& ct, const PeriodSeries& ps);
IdentityCheck check_ell_minus_identity(const CarlitzTower& ct, const PeriodSeries& ps);
IdentityCheck check_ell_identity(const CarlitzTower& ct, const PeriodSeries& ps);

// Anderson pairing: with ell_plus^{-1} = sum ell'_k z^k, checks
// sum_{k<=m} ell'_k ell_{m-k} = delta_{m,0} for 0 <= m <= mmax.
struct PairingCheck {
    bool ok = false;
    int first_fail = -1;         // failing m, or -1
    Rational residual_val{0};    // valuation of the failing residual (zeta units)
    Rational certified{0};       // minimal certified precision across entries
    std::vector<ff_t> column;    // evaluated pairing column (in F_eps), index m
};
PairingCheck anderson_pairing_check(const CarlitzTower& ct, int mmax);

// A finite-level Galois relabeling: candidate images of ell_0..ell_n.
struct Relabeling {
    std::vector<LFE> ells;
};

// Identity relabeling, and the translate ell_i -> ell_i + phi_{z^{...}}-torsion
// shift determined by a unit a in A/z^{n+1} (the chi = a relabeling).
Relabeling carlitz_identity_relabeling(const CarlitzTower& ct);
Relabeling carlitz_relabeling_from_unit(const CarlitzTower& ct, const std::vector<ff_t>& unit);

// The unique chi mod z^{n+1} with relabeled ell_plus = chi * ell_plus; checks
// tower relations first (NotGaloisConsistent otherwise).
std::vector<ff_t> cyclotomic_character(const CarlitzTower& ct, const Relabeling& g);

// Composition (g after h), via the substitution pi -> g(pi).
Relabeling compose_relabelings(const CarlitzTower& ct, const Relabeling& g, const Relabeling& h);

// Galois substitution of a single element under the relabeling.
LFE relabeling_apply(const CarlitzTower& ct, const Relabeling& g, const LFE& x);

}  // namespace shtukalab
