#pragma once

#include <optional>
#include <vector>

#include "shtukalab/solve.hpp"
#include "shtukalab/tower.hpp"

namespace shtukalab {

// Certified bound on the coefficients below the stored z-window:
// v(b_{zmin - t}) >= base + (t > t0 ? growth * qhat^{t - t0} : 0)  (pi-units),
// for all t >= 1.  ExactZero means those coefficients vanish identically.
struct TailBound {
    enum Kind { ExactZero, Geometric } kind = ExactZero;
    Rational base{0};
    Rational growth{0};  // must be > 0 for a convergent R[[z,z^{-1}}-tail
    std::int64_t t0 = 0;
};

// Truncated series in z with local-field coefficients.  Exponents in
// [zmin, zprec); coefficients below zmin are controlled by the tail bound;
// coefficients at or above zprec are unknown (optionally bounded below by
// val_floor, e.g. 0 for integral series).
struct ZSeries {
    TowerPtr tw;
    std::int64_t zmin = 0;
    std::int64_t zprec = 0;
    std::vector<LFE> c;
    TailBound tail;
    std::optional<Rational> val_floor;  // pi-units, applies to every coefficient

    bool zero_window() const;
};

ZSeries zs_zero(const TowerPtr& tw, std::int64_t zmin, std::int64_t zprec, std::int64_t pi_prec);
ZSeries zs_const(const LFE& a, std::int64_t zprec);
ZSeries zs_monomial(const LFE& a, std::int64_t zexp, std::int64_t zprec);
// z - zeta as a series.
ZSeries zs_z_minus_zeta(const TowerPtr& tw, std::int64_t zprec, std::int64_t pi_prec);

LFE zs_coeff(const ZSeries& a, std::int64_t i);
void zs_set_coeff(ZSeries& a, std::int64_t i, const LFE& v);
ZSeries zs_lift(const TowerPtr& tw, const ZSeries& a);
void zs_unify(ZSeries& a, ZSeries& b);

ZSeries zs_add(const ZSeries& a, const ZSeries& b);
ZSeries zs_sub(const ZSeries& a, const ZSeries& b);
ZSeries zs_neg(const ZSeries& a);
ZSeries zs_mul(const ZSeries& a, const ZSeries& b);
ZSeries zs_scale(const ZSeries& a, const LFE& s);
ZSeries zs_shift_z(const ZSeries& a, std::int64_t k);  // multiply by z^k
// Inverse; the lowest stored coefficient must be a unit of known valuation.
ZSeries zs_inv(const ZSeries& a);
ZSeries zs_truncate(const ZSeries& a, std::int64_t new_zprec);
bool zs_zero_to_prec(const ZSeries& a);
// Minimal pi-valuation over stored coefficients (prec if none); zeta units.
Rational zs_min_coeff_val_zeta(const ZSeries& a);
// Minimal coefficient precision (pi-units).
std::int64_t zs_min_coeff_prec(const ZSeries& a);

// sigma-hat: coefficientwise qhat^j power, z fixed.
ZSeries zs_sigma(const ZSeries& a, unsigned j = 1);

// Division by (z - zeta) for series with a(zeta) = 0 to precision
// (top-down back-substitution); multiplication by (z - zeta).
ZSeries zs_mul_z_minus_zeta(const ZSeries& a);
ZSeries zs_div_z_minus_zeta(const ZSeries& a);

// Evaluation at z = zeta: sum b_i zeta^i with certified tail handling.
LFE zs_evaluate_at_zeta(const ZSeries& a);

// ||.||_s in valuation scale: min over i of v_zeta(b_i) + s*i.  exact=false
// when truncation (window or tail) could hide smaller terms.
struct NormResult {
    Rational value;
    bool exact;
};
NormResult zs_norm(const ZSeries& a, Rational s);

// --- localization at (z - zeta) ---------------------------------------------

// (z - zeta)^{-pole} * num in normal form (num not divisible by z - zeta
// unless pole == 0).
struct ZZetaFrac {
    ZSeries num;
    std::int64_t pole = 0;
};

ZZetaFrac zzf_make(ZSeries num, std::int64_t pole);  // normalizes
void zzf_normalize(ZZetaFrac& f);
ZZetaFrac zzf_mul(const ZZetaFrac& a, const ZZetaFrac& b);
// Expansion as a plain ZSeries (pole expanded via (z-zeta)^{-1} geometric tail).
ZSeries zzf_expand(const ZZetaFrac& f);

// --- series in u = z - zeta ---------------------------------------------------

struct UZSeries {
    TowerPtr tw;
    std::int64_t umin = 0;
    std::int64_t uprec = 0;
    std::vector<LFE> c;
};

UZSeries uz_zero(const TowerPtr& tw, std::int64_t umin, std::int64_t uprec, std::int64_t pi_prec);
UZSeries uz_const(const LFE& a, std::int64_t uprec);
UZSeries uz_monomial(const LFE& a, std::int64_t uexp, std::int64_t uprec);
LFE uz_coeff(const UZSeries& a, std::int64_t i);
UZSeries uz_lift(const TowerPtr& tw, const UZSeries& a);
UZSeries uz_add(const UZSeries& a, const UZSeries& b);
UZSeries uz_sub(const UZSeries& a, const UZSeries& b);
UZSeries uz_neg(const UZSeries& a);
UZSeries uz_mul(const UZSeries& a, const UZSeries& b);
UZSeries uz_scale(const UZSeries& a, const LFE& s);
UZSeries uz_shift(const UZSeries& a, std::int64_t k);
UZSeries uz_inv(const UZSeries& a);  // unit at its lowest exponent
UZSeries uz_truncate(const UZSeries& a, std::int64_t new_uprec);
bool uz_zero_to_prec(const UZSeries& a);
// u-order of the series; nullopt when zero to precision.
std::optional<std::int64_t> uz_order(const UZSeries& a);

// Re-expansion around z = zeta: z -> zeta + u; requires convergence of the
// binomial resummation (certified by the tail bound).
UZSeries to_u_expansion(const ZSeries& a, std::int64_t u_prec);
UZSeries to_u_expansion(const ZZetaFrac& f, std::int64_t u_prec);
// Back-substitution oracle for round-trip checks: u -> z - zeta on a finite window.
ZSeries from_u_polynomial(const UZSeries& a, std::int64_t zprec);

}  // namespace shtukalab
