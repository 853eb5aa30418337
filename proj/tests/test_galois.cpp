#include "doctest.h"

#include "shtukalab/galois.hpp"

using namespace shtukalab;

namespace {
TowerPtr tower(std::uint32_t p, std::int64_t ram, std::int64_t prec) {
    return Tower::eisenstein_base(FiniteField::make_default(p, 1), ram, prec);
}
}  // namespace

TEST_CASE("tate: identity shtuka gives a constant gauge") {
    SolveOptions opt;
    auto tw = tower(3, 1, 32);
    auto sh = unit_shtuka(tw, 2, 4, 32);
    auto triv = tate_trivialize(sh, 4, 24, opt);
    CHECK(triv.residual >= Rational(20));
    CHECK(triv.norm_ok);
    // U is constant in z: all z>=1 digits vanish
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (std::int64_t n = 1; n < 4; ++n) {
                LFE c = zs_coeff(triv.U.at(i, j), n);
                lfe_normalize(c);
                CHECK(c.zero_to_prec());
            }
    auto rep = verify_sep_radius(triv, Rational(1));
    CHECK(rep.ok);
}

TEST_CASE("tate: Carlitz shtuka matches the inverse period series up to gauge") {
    SolveOptions opt;
    for (std::uint32_t q : {2u, 3u}) {
        auto tw = tower(q, 1, 40);
        auto sh = carlitz_shtuka(tw, 4, 40);
        auto triv = tate_trivialize(sh, 4, 20, opt);
        CHECK(triv.residual >= Rational(10));
        CHECK(triv.norm_ok);
        // gauge comparison: the solver's U equals ell_plus^{-1} up to an
        // A_eps^x gauge, so the coefficient valuations agree with the ones of
        // the directly inverted Anderson generating function
        std::int64_t qh = static_cast<std::int64_t>(q);
        std::int64_t ram = (qh - 1) * qh * qh * qh;
        auto ct = carlitz_build_tower(tw->feps(), 3, 24 * ram);
        ZSeries lpinv = zs_inv(zs_truncate(carlitz_periods(ct, 1).ell_plus, 4));
        const ZSeries& u = triv.U.at(0, 0);
        for (std::int64_t n = 0; n < 4; ++n) {
            LFE c = zs_coeff(u, n);
            lfe_normalize(c);
            REQUIRE_FALSE(c.zero_to_prec());
            LFE w = zs_coeff(lpinv, n);
            lfe_normalize(w);
            REQUIRE_FALSE(w.zero_to_prec());
            CHECK(c.val_zeta() == w.val_zeta());
        }
        auto rep = verify_sep_radius(triv, Rational(1));
        CHECK(rep.ok);
    }
}

TEST_CASE("tate: ordinary Drinfeld rank 2") {
    SolveOptions opt;
    opt.ram_cap = 1 << 16;
    auto tw = tower(3, 4, 40);  // zeta = pi^4, q = qhat = 3
    Mat<ZSeries> m(2, 2, zs_zero(tw, 0, 3, 40));
    m.at(0, 1) = zs_z_minus_zeta(tw, 3, 40);
    m.at(1, 0) = zs_const(lfe_one(tw, 40), 3);
    m.at(1, 1) = zs_const(lfe_sub(lfe_monomial(tw, 1, 1, 40), lfe_one(tw, 40)), 3);
    auto sh = make_shtuka(tw, m, 0);
    auto triv = tate_trivialize(sh, 3, 24, opt);
    CHECK(triv.residual >= Rational(5));
    CHECK(triv.norm_ok);
}

TEST_CASE("tate: gauge invariance between tie-break choices") {
    SolveOptions opt;
    auto tw = tower(2, 1, 40);
    auto sh = carlitz_shtuka(tw, 3, 40);
    auto t1 = tate_trivialize(sh, 3, 16, opt);
    SolveOptions opt2 = opt;
    opt2.tie_break_high = true;
    auto t2 = tate_trivialize(sh, 3, 16, opt2);
    // U^{-1} U' has constant F_eps((z)) entries when both live in one tower
    if (t1.tower.get() == t2.tower.get() ||
        t1.tower->is_ancestor_of(t2.tower.get()) || t2.tower->is_ancestor_of(t1.tower.get())) {
        Mat<ZSeries> G = mat_zs_mul(mat_zs_inv(t1.U), t2.U);
        for (auto& e : G.a)
            for (std::int64_t n = e.zmin; n < e.zprec; ++n) {
                LFE c = zs_coeff(e, n);
                ff_t v = 0;
                CHECK(lfe_is_feps_constant(c, &v));
            }
    }
}

TEST_CASE("verify_sep_radius flags a corrupted trivialization") {
    SolveOptions opt;
    auto tw = tower(3, 1, 40);
    auto sh = carlitz_shtuka(tw, 8, 40);
    auto triv = tate_trivialize(sh, 8, 20, opt);
    auto good = verify_sep_radius(triv, Rational(1));
    CHECK(good.ok);
    // corrupt a late coefficient with a very negative valuation
    Trivialization bad = triv;
    ZSeries& u = bad.U.at(0, 0);
    zs_set_coeff(u, 7, lfe_monomial(bad.tower, 1, -60 * bad.tower->zeta_val(), 10));
    auto rep = verify_sep_radius(bad, Rational(1));
    CHECK_FALSE(rep.ok);
    CHECK(rep.witness_n == 7);
}

TEST_CASE("torsion tate points: etale level-1 has length 1 over F_eps") {
    SolveOptions opt;
    auto tw = tower(2, 1, 40);
    auto t = torsion_model(tw, 1, 0, 40);
    auto pts = torsion_tate_points(t, opt);
    CHECK(pts.length == 1);
    CHECK(pts.rational_over_base);  // tau = 1: fixed points are F_eps
}

TEST_CASE("torsion tate points: cokernel of z^n on Carlitz has length n") {
    SolveOptions opt;
    auto tw = tower(3, 1, 60);
    auto c = carlitz_shtuka(tw, 8, 60);
    Mat<ZSeries> f(1, 1, zs_monomial(lfe_one(tw, 60), 2, 8));
    auto tor = isogeny_cokernel(make_isogeny(c, c, f));
    auto pts = torsion_tate_points(tor, opt);
    CHECK(pts.length == 2);
    CHECK_FALSE(pts.rational_over_base);  // needs the ell-tower
}

TEST_CASE("torsion tate points: M^d_n rational when (qhat-1)qhat^e | d, qhat^e >= n") {
    SolveOptions opt;
    auto tw = tower(3, 1, 60);
    // qhat = 3, n = 3, e = 1: d = (3-1)*3 = 6
    auto t = torsion_model(tw, 3, 6, 60);
    auto pts = torsion_tate_points(t, opt);
    CHECK(pts.length == 3);
    CHECK(pts.rational_over_base);
    // the generator is the constant ell_0^{-d} = (-zeta)^{-2*3}: z-digits past 0 vanish
    const ZSeries& g = pts.basis[0][0];
    for (std::int64_t n = 1; n < g.zprec; ++n) {
        LFE c = zs_coeff(g, n);
        lfe_normalize(c);
        CHECK(c.zero_to_prec());
    }
    LFE g0 = zs_coeff(g, 0);
    REQUIRE(g0.val());
    CHECK(*g0.val() == -3);  // v(ell_0^{-d}) = -d/(qhat-1) zeta-units
}

TEST_CASE("residue form and pairing") {
    // lambda = 0 -> 0; lambda(z^{-1}) = 1, rest 0 -> dz
    auto d0 = residue_form({});
    CHECK(d0.c.empty());
    auto d1 = residue_form({1, 0, 0});
    CHECK(d1.c[0] == 1);
    // Carlitz pairing: <(ell_{n-1})_n, ell_plus^{-1}> = 1 dz
    for (std::uint32_t q : {2u, 3u}) {
        std::int64_t qh = q;
        std::int64_t ram = (qh - 1) * qh * qh * qh;
        auto ct = carlitz_build_tower(FiniteField::make_default(q, 1), 3, 8 * ram);
        ZSeries lp = zs_truncate(carlitz_periods(ct, 1).ell_plus, 4);
        ZSeries m = zs_inv(lp);
        std::vector<LFE> pts(ct.ells.begin(), ct.ells.end());  // P_j = ell_j
        auto pr = pairing_evaluate(ct, pts, m);
        REQUIRE(pr.lambda.size() == 4);
        CHECK(pr.lambda[0] == ct.tower->feps()->one());
        for (std::size_t i = 1; i < 4; ++i) CHECK(pr.lambda[i] == 0);
        CHECK(pr.perfect);
        // bilinearity: scale the generator by c in F_eps^x
        if (q == 3) {
            ZSeries mc = zs_scale(m, lfe_const(ct.tower, 2, ct.zeta.prec));
            auto pc = pairing_evaluate(ct, pts, mc);
            CHECK(pc.lambda[0] == 2);
        }
        // zero point -> 0
        std::vector<LFE> zpts(4, lfe_zero(ct.tower, ct.zeta.prec));
        auto pz = pairing_evaluate(ct, zpts, m);
        for (auto v : pz.lambda) CHECK(v == 0);
    }
}
