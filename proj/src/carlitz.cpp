#include "shtukalab/carlitz.hpp"

#include <algorithm>

namespace shtukalab {

namespace {
std::int64_t ipow64(std::int64_t b, int e) {
    std::int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}
}  // namespace

CarlitzTower carlitz_build_tower(const FieldPtr& feps, int depth, std::int64_t prec) {
    std::int64_t qhat = static_cast<std::int64_t>(feps->q());
    std::int64_t ram = (qhat - 1) * ipow64(qhat, depth);
    // Scratch model: only field arithmetic is used until zeta is known.
    Embedding id;
    id.src = feps;
    id.dst = feps;
    id.gen_image = feps->m() > 1 ? feps->from_digits({0, 1}) : 0;
    TowerPtr scratch = Tower::base(feps, feps, id, RawSeries{ram, prec, {feps->one()}});

    std::vector<LFE> ells(static_cast<std::size_t>(depth) + 1);
    LFE zeta = lfe_zero(scratch, prec);
    // per-pass precision gain of the fixed-point iteration
    std::int64_t gain = depth == 0 ? prec
                                   : (qhat - 2) * ipow64(qhat, depth) + ipow64(qhat, depth - 1);
    if (gain < 1) gain = 1;
    int max_iter = static_cast<int>(prec / gain) + 8;
    bool stable = false;
    for (int it = 0; it < max_iter; ++it) {
        ells[static_cast<std::size_t>(depth)] = lfe_monomial(scratch, feps->one(), 1, prec);
        for (int i = depth; i >= 1; --i)
            ells[static_cast<std::size_t>(i - 1)] =
                lfe_add(lfe_sigma(ells[static_cast<std::size_t>(i)]),
                        lfe_truncate(lfe_mul(zeta, ells[static_cast<std::size_t>(i)]), prec));
        LFE znew = lfe_neg(lfe_pow(ells[0], qhat - 1));
        znew = lfe_truncate(znew, prec);
        LFE diff = lfe_sub(znew, zeta);
        zeta = znew;
        if (diff.zero_to_prec()) {
            stable = true;
            break;
        }
    }
    if (!stable) throw PrecisionExhausted("carlitz_build_tower: zeta iteration did not stabilize");
    if (!zeta.val() || *zeta.val() != ram)
        throw PrecisionExhausted("carlitz_build_tower: zeta valuation wrong");
    TowerPtr tower = Tower::base(feps, feps, id, RawSeries{zeta.vmin, zeta.prec, zeta.c});
    CarlitzTower ct;
    ct.tower = tower;
    ct.depth = depth;
    ct.zeta = lfe_from_raw(tower, RawSeries{zeta.vmin, zeta.prec, zeta.c});
    for (auto& l : ells) ct.ells.push_back(lfe_from_raw(tower, RawSeries{l.vmin, l.prec, l.c}));
    // invariants: valuations and relations
    for (int i = 0; i <= depth; ++i) {
        if (!ct.ells[static_cast<std::size_t>(i)].val() ||
            *ct.ells[static_cast<std::size_t>(i)].val() != ipow64(qhat, depth - i))
            throw PrecisionExhausted("carlitz_build_tower: ell valuation wrong");
    }
    return ct;
}

LFE carlitz_phi_z(const CarlitzTower& ct, const LFE& x) {
    LFE xl = ct.tower->lift(x);
    return lfe_add(lfe_mul(ct.zeta, xl), lfe_sigma(xl));
}

LFE carlitz_phi(const CarlitzTower& ct, const LFE& x, const std::vector<ff_t>& a) {
    LFE acc = lfe_zero(ct.tower, x.prec);
    LFE cur = ct.tower->lift(x);
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] != 0) acc = lfe_add(acc, lfe_scale(cur, a[j]));
        if (j + 1 < a.size()) cur = carlitz_phi_z(ct, cur);
    }
    return acc;
}

std::vector<LFE> carlitz_torsion_points(const CarlitzTower& ct, int n) {
    if (n < 1 || n - 1 > ct.depth) throw InputError("carlitz_torsion_points: tower too shallow");
    const FieldPtr& F = ct.tower->feps();
    std::vector<LFE> out;
    std::vector<ff_t> a(static_cast<std::size_t>(n), 0);
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) total *= F->q();
    const LFE& gen = ct.ells[static_cast<std::size_t>(n - 1)];
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t t = idx;
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)] = F->from_index(t % F->q());
            t /= F->q();
        }
        out.push_back(carlitz_phi(ct, gen, a));
    }
    return out;
}

PeriodSeries carlitz_periods(const CarlitzTower& ct, std::int64_t J) {
    if (J < 1) J = 1;
    const TowerPtr& tw = ct.tower;
    std::int64_t prec = ct.zeta.prec;
    std::int64_t qhat = ct.qhat();
    std::int64_t ram = tw->zeta_val();
    PeriodSeries ps;
    // ell_plus
    ps.ell_plus = zs_zero(tw, 0, ct.depth + 1, prec);
    for (int i = 0; i <= ct.depth; ++i)
        zs_set_coeff(ps.ell_plus, i, ct.ells[static_cast<std::size_t>(i)]);
    ps.ell_plus.val_floor = Rational(1);  // v(ell_i) >= 1 pi-unit
    // ell_minus: product of (1 - zeta^{qhat^i} z^{-1}) until the factor is 1 to
    // precision.  The window keeps explicit zeros above z^0 (the product has no
    // positive z-support), so multiplications do not erode z-precision.
    std::int64_t K = J + ct.depth + 16;
    ZSeries acc = zs_zero(tw, -J, K, prec);
    zs_set_coeff(acc, 0, lfe_one(tw, prec));
    LFE zq = ct.zeta;
    while (true) {
        if (!zq.val() || *zq.val() >= prec) break;
        ZSeries factor = zs_zero(tw, -1, K, prec);
        zs_set_coeff(factor, -1, lfe_neg(zq));
        zs_set_coeff(factor, 0, lfe_one(tw, prec));
        ZSeries prod = zs_mul(acc, factor);
        ZSeries clamped = zs_zero(tw, -J, K, prec);
        for (std::int64_t i = -J; i < std::min<std::int64_t>(K, prod.zprec); ++i)
            if (i >= prod.zmin) zs_set_coeff(clamped, i, zs_coeff(prod, i));
        acc = clamped;
        zq = lfe_sigma(zq);
    }
    acc.tail.kind = TailBound::Geometric;
    acc.tail.growth = Rational(ram, qhat - 1) * Rational(ipow64(qhat, static_cast<int>(J)));
    acc.tail.base = Rational(-ram, qhat - 1);
    acc.tail.t0 = 0;
    acc.val_floor = Rational(0);
    ps.ell_minus = acc;
    // ell = ell_plus * ell_minus, window [-J, depth+1)
    ZSeries ell = zs_mul(ps.ell_plus, ps.ell_minus);
    ps.ell = ell;
    return ps;
}

namespace {
IdentityCheck residual_check(const ZSeries& resid, std::int64_t zeta_val) {
    IdentityCheck out;
    out.ok = true;
    Rational cert((std::int64_t(1) << 40));
    for (std::int64_t i = resid.zmin; i < resid.zprec; ++i) {
        LFE c = zs_coeff(resid, i);
        lfe_normalize(c);
        if (!c.zero_to_prec()) {
            out.ok = false;
            cert = rmin(cert, c.val_zeta());
        } else {
            cert = rmin(cert, Rational(c.prec, zeta_val));
        }
    }
    out.certified = cert;
    return out;
}
}  // namespace

IdentityCheck check_ell_plus_identity(const CarlitzTower& ct, const PeriodSeries& ps) {
    // sigma(ell_plus) = (z - zeta) ell_plus
    ZSeries lhs = zs_sigma(ps.ell_plus);
    ZSeries zmz = zs_z_minus_zeta(ct.tower, ct.depth + 2, ct.zeta.prec);
    ZSeries rhs = zs_mul(zmz, ps.ell_plus);
    ZSeries resid = zs_sub(lhs, rhs);
    return residual_check(resid, ct.tower->zeta_val());
}

IdentityCheck check_ell_minus_identity(const CarlitzTower& ct, const PeriodSeries& ps) {
    // ell_minus = (1 - zeta/z) sigma(ell_minus)
    ZSeries sig = zs_sigma(ps.ell_minus);
    ZSeries factor = zs_zero(ct.tower, -1, 1, ct.zeta.prec);
    zs_set_coeff(factor, -1, lfe_neg(ct.zeta));
    zs_set_coeff(factor, 0, lfe_one(ct.tower, ct.zeta.prec));
    ZSeries rhs = zs_mul(factor, sig);
    ZSeries resid = zs_sub(ps.ell_minus, rhs);
    return residual_check(resid, ct.tower->zeta_val());
}

IdentityCheck check_ell_identity(const CarlitzTower& ct, const PeriodSeries& ps) {
    // sigma(ell) = z * ell
    ZSeries lhs = zs_sigma(ps.ell);
    ZSeries rhs = zs_shift_z(ps.ell, 1);
    ZSeries resid = zs_sub(lhs, rhs);
    return residual_check(resid, ct.tower->zeta_val());
}

PairingCheck anderson_pairing_check(const CarlitzTower& ct, int mmax) {
    if (mmax > ct.depth) throw InputError("anderson_pairing_check: tower too shallow");
    PairingCheck out;
    ZSeries lp = zs_truncate(carlitz_periods(ct, 1).ell_plus, mmax + 1);
    ZSeries lpinv = zs_inv(lp);
    out.ok = true;
    Rational cert((std::int64_t(1) << 40));
    const FieldPtr& Feps = ct.tower->feps();
    for (int m = 0; m <= mmax; ++m) {
        LFE sum = lfe_zero(ct.tower, ct.zeta.prec);
        for (int k = 0; k <= m; ++k)
            sum = lfe_add(sum, lfe_mul(zs_coeff(lpinv, k), ct.ells[static_cast<std::size_t>(m - k)]));
        LFE expect = m == 0 ? lfe_one(ct.tower, ct.zeta.prec) : lfe_zero(ct.tower, ct.zeta.prec);
        LFE resid = lfe_sub(sum, expect);
        lfe_normalize(resid);
        if (resid.zero_to_prec() && resid.prec <= 0)
            throw PrecisionExhausted("anderson_pairing_check: pi-precision budget too small");
        ff_t val = 0;
        bool constant = lfe_is_feps_constant(sum, &val);
        out.column.push_back(constant ? val : Feps->zero());
        if (!resid.zero_to_prec()) {
            if (out.ok) {
                out.ok = false;
                out.first_fail = m;
                out.residual_val = resid.val_zeta();
            }
        } else {
            cert = rmin(cert, Rational(resid.prec, ct.tower->zeta_val()));
        }
    }
    out.certified = cert;
    return out;
}

Relabeling carlitz_identity_relabeling(const CarlitzTower& ct) {
    Relabeling g;
    g.ells = ct.ells;
    return g;
}

Relabeling carlitz_relabeling_from_unit(const CarlitzTower& ct, const std::vector<ff_t>& unit) {
    // chi = unit acts by ell-tower translation: the new division tower is
    // phi_unit applied to the old one.
    if (unit.empty() || unit[0] == 0) throw InputError("relabeling unit must be a unit of A_eps");
    Relabeling g;
    for (int i = 0; i <= ct.depth; ++i) {
        std::vector<ff_t> a(unit.begin(),
                            unit.begin() + std::min<std::size_t>(unit.size(), static_cast<std::size_t>(i) + 1));
        g.ells.push_back(carlitz_phi(ct, ct.ells[static_cast<std::size_t>(i)], a));
    }
    return g;
}

std::vector<ff_t> cyclotomic_character(const CarlitzTower& ct, const Relabeling& g) {
    if (static_cast<int>(g.ells.size()) != ct.depth + 1)
        throw InputError("relabeling must provide images for ell_0..ell_n");
    // consistency: tower relations for the relabeled generators
    const std::int64_t qhat = ct.qhat();
    {
        LFE r0 = lfe_add(lfe_pow(g.ells[0], qhat - 1), ct.zeta);
        lfe_normalize(r0);
        if (!r0.zero_to_prec()) throw NotGaloisConsistent("relabeled ell_0 breaks ell_0^{qhat-1} = -zeta");
        for (int i = 1; i <= ct.depth; ++i) {
            LFE lhs = lfe_add(lfe_sigma(g.ells[static_cast<std::size_t>(i)]),
                              lfe_mul(ct.zeta, g.ells[static_cast<std::size_t>(i)]));
            LFE resid = lfe_sub(lhs, g.ells[static_cast<std::size_t>(i - 1)]);
            lfe_normalize(resid);
            if (!resid.zero_to_prec()) throw NotGaloisConsistent("relabeled tower relation fails");
        }
    }
    // chi = (relabeled ell_plus) * ell_plus^{-1} mod z^{n+1}
    ZSeries lp = zs_zero(ct.tower, 0, ct.depth + 1, ct.zeta.prec);
    ZSeries lpg = zs_zero(ct.tower, 0, ct.depth + 1, ct.zeta.prec);
    for (int i = 0; i <= ct.depth; ++i) {
        zs_set_coeff(lp, i, ct.ells[static_cast<std::size_t>(i)]);
        zs_set_coeff(lpg, i, g.ells[static_cast<std::size_t>(i)]);
    }
    ZSeries chi = zs_mul(lpg, zs_inv(lp));
    std::vector<ff_t> out;
    for (std::int64_t i = 0; i < chi.zprec && i <= ct.depth; ++i) {
        ff_t v = 0;
        if (!lfe_is_feps_constant(zs_coeff(chi, i), &v))
            throw NotGaloisConsistent("character coefficient not constant in F_eps");
        out.push_back(v);
    }
    return out;
}

LFE relabeling_apply(const CarlitzTower& ct, const Relabeling& g, const LFE& x) {
    // substitute pi = ell_n -> g(ell_n), coefficients fixed
    const LFE& gpi = g.ells[static_cast<std::size_t>(ct.depth)];
    LFE xl = ct.tower->lift(x);
    std::int64_t target = xl.prec;
    LFE r = lfe_zero(ct.tower, target);
    for (std::size_t i = xl.c.size(); i-- > 0;) {
        r = lfe_truncate(lfe_mul(r, gpi), target);
        if (xl.c[i] != 0) r = lfe_add(r, lfe_const(ct.tower, xl.c[i], target));
    }
    if (xl.vmin != 0) r = lfe_mul(r, lfe_pow(gpi, xl.vmin));
    return lfe_truncate(r, target);
}

Relabeling compose_relabelings(const CarlitzTower& ct, const Relabeling& g, const Relabeling& h) {
    Relabeling out;
    for (auto& hi : h.ells) out.ells.push_back(relabeling_apply(ct, g, hi));
    return out;
}

}  // namespace shtukalab
