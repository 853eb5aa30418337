#include "doctest.h"

#include "shtukalab/solve.hpp"

using namespace shtukalab;

namespace {
TowerPtr base_tower(std::uint32_t p, std::uint32_t m, std::int64_t ram, std::int64_t prec) {
    return Tower::eisenstein_base(FiniteField::make_default(p, m), ram, prec);
}

LFE as_residual(const LFE& x, const LFE& c, unsigned j = 1) {
    LFE lhs = lfe_sub(lfe_sigma(x, j), x);
    return lfe_sub(lhs, x.tw->lift(c));
}
}  // namespace

TEST_CASE("residue Artin-Schreier: kernels and extensions") {
    SolveOptions opt;
    auto F2 = FiniteField::make(2, 1, {0, 1});
    // GF(2), c=0 -> {0,1}
    auto r0 = artin_schreier_residue(F2, 2, 0, opt);
    CHECK(r0.roots.size() == 2);
    CHECK(r0.field->q() == 2);
    // GF(2), c=1 -> two roots in GF(4), the two primitive elements
    auto r1 = artin_schreier_residue(F2, 2, 1, opt);
    CHECK(r1.field->q() == 4);
    REQUIRE(r1.roots.size() == 2);
    for (ff_t r : r1.roots) {
        CHECK(r1.field->sub(r1.field->mul(r, r), r) == r1.field->one());
        CHECK(r1.field->index(r) >= 2);  // primitive, not in GF(2)
    }
    // GF(3), c=1: no root in GF(3); three roots in GF(27)
    auto F3 = FiniteField::make(3, 1, {0, 1});
    auto r2 = artin_schreier_residue(F3, 3, 1, opt);
    CHECK(r2.field->q() == 27);
    CHECK(r2.roots.size() == 3);
    // brute-force oracle over GF(27)
    int count = 0;
    for (ff_t x : r2.field->all_elements())
        if (r2.field->sub(r2.field->pow(x, 3), x) == r2.field->one()) ++count;
    CHECK(count == 3);
}

TEST_CASE("residue Lang fixed basis vs brute force on GF(4)") {
    SolveOptions opt;
    auto F2 = FiniteField::make(2, 1, {0, 1});
    auto F4 = FiniteField::make(2, 2, {1, 1, 1});
    Mat<ff_t> A(1, 1);
    A.at(0, 0) = F4->from_digits({0, 1});  // g
    auto rf = residue_fixed_basis(F4, F2, 2, A, opt);
    ff_t u = rf.basis.at(0, 0);
    ff_t Au = rf.field->mul(rf.emb.apply(A.at(0, 0)), rf.field->pow(u, 2));
    CHECK(Au == u);
    CHECK(u != 0);
}

TEST_CASE("lang_solve over R with integral unit matrix") {
    SolveOptions opt;
    auto tw = base_tower(3, 1, 1, 40);
    Mat<LFE> T0(2, 2, lfe_zero(tw, 40));
    T0.at(0, 0) = lfe_one(tw, 40);
    T0.at(0, 1) = lfe_monomial(tw, 1, 1, 40);
    T0.at(1, 0) = lfe_monomial(tw, 2, 2, 40);
    T0.at(1, 1) = lfe_const(tw, 2, 40);
    auto res = lang_solve(tw, T0, opt);
    Mat<LFE> lhs = mat_lfe_sigma(res.U);
    Mat<LFE> rhs = mat_lfe_mul(mat_lfe_lift(res.tower, T0), res.U);
    Mat<LFE> diff = mat_lfe_sub(lhs, rhs);
    CHECK(mat_lfe_min_val(diff) >= 35);
    LFE det = mat_lfe_det(res.U);
    lfe_normalize(det);
    CHECK_FALSE(det.zero_to_prec());
}

TEST_CASE("kummer root: ell_0 equation x^{qhat-1} = -zeta") {
    SolveOptions opt;
    for (std::uint32_t q : {2u, 3u}) {
        auto tw = base_tower(q, 1, 1, 60);
        LFE mz = lfe_neg(tw->zeta(60));
        if (q == 2) {
            auto r = kummer_root(tw, mz, 1, opt);
            CHECK(lfe_eq(r.x, mz));
        } else {
            auto r = kummer_root(tw, mz, 2, opt);
            CHECK(r.tower->zeta_val() == 2);  // radical level adjoined
            LFE sq = lfe_mul(r.x, r.x);
            CHECK(lfe_eq(sq, r.tower->lift(mz)));
        }
    }
}

TEST_CASE("solve_as_scalar: positive valuation series case") {
    SolveOptions opt;
    auto tw = base_tower(3, 1, 1, 50);
    LFE c = lfe_add(lfe_monomial(tw, 2, 1, 50), lfe_monomial(tw, 1, 3, 50));
    auto r = solve_as_scalar(tw, c, opt);
    LFE res = as_residual(r.x, c);
    CHECK(res.zero_to_prec());
    CHECK(r.tower.get() == tw.get());  // no extension needed
}

TEST_CASE("solve_as_scalar: residue digit case") {
    SolveOptions opt;
    auto tw = base_tower(2, 1, 1, 40);
    LFE c = lfe_add(lfe_one(tw, 40), lfe_monomial(tw, 1, 2, 40));
    auto r = solve_as_scalar(tw, c, opt);
    LFE res = as_residual(r.x, r.tower->lift(c));
    CHECK(res.zero_to_prec());
    CHECK(r.tower->field()->q() == 4);  // x^2-x=1 needs GF(4)
}

TEST_CASE("solve_as_scalar: wild negative case builds an AS level") {
    SolveOptions opt;
    auto tw0 = base_tower(3, 1, 1, 90);
    auto tw = tw0->adjoin_radical(2, tw0->field()->one());  // v(zeta) = 2
    LFE c = lfe_monomial(tw, 2, -1, 60);
    auto r = solve_as_scalar(tw, c, opt);
    LFE res = as_residual(r.x, r.tower->lift(c));
    CHECK(res.zero_to_prec());
    CHECK(r.tower->zeta_val() == 6);  // degree-3 wild level
    REQUIRE(r.x.val());
    CHECK(*r.x.val() == -1);  // v(x) = v(c)/qhat
}

TEST_CASE("solve_as_scalar: peeling when gcd(a, qhat) > 1") {
    SolveOptions opt;
    auto tw = base_tower(2, 1, 1, 80);
    LFE c = lfe_monomial(tw, 1, -2, 40);  // a = 2, qhat = 2
    auto r = solve_as_scalar(tw, c, opt);
    LFE res = as_residual(r.x, r.tower->lift(c));
    CHECK(res.zero_to_prec());
}

TEST_CASE("artin_schreier_solve returns qhat translates") {
    SolveOptions opt;
    auto tw = base_tower(3, 1, 1, 40);
    LFE c = lfe_monomial(tw, 1, 1, 40);
    auto r = artin_schreier_solve(c, true, opt);
    CHECK(r.sols.size() == 3);
    for (auto& x : r.sols) {
        LFE res = as_residual(x, r.tower->lift(c));
        CHECK(res.zero_to_prec());
    }
    LFE d01 = lfe_sub(r.sols[0], r.sols[1]);
    ff_t val = 0;
    CHECK(lfe_is_feps_constant(d01, &val));
    CHECK(val != 0);
}

TEST_CASE("additive kernel: phi_z kernel has dimension 1 and valuation 1/(qhat-1)") {
    SolveOptions opt;
    for (std::uint32_t q : {2u, 3u}) {
        auto tw = base_tower(q, 1, 1, 60);
        std::vector<LFE> coeffs{tw->zeta(60), lfe_one(tw, 60)};
        auto ker = additive_kernel(tw, coeffs, opt);
        REQUIRE(ker.sols.size() == 1);
        LFE x = ker.sols[0];
        REQUIRE(x.val());
        CHECK(x.val_zeta() == Rational(1, static_cast<std::int64_t>(q) - 1));
        std::vector<LFE> cl{ker.tower->lift(coeffs[0]), ker.tower->lift(coeffs[1])};
        LFE img = additive_apply(cl, x);
        CHECK(img.zero_to_prec());
    }
}

TEST_CASE("lf_root_find: linear and Kummer cases") {
    SolveOptions opt;
    auto tw = base_tower(3, 1, 1, 50);
    {
        std::vector<LFE> poly{lfe_neg(tw->zeta(50)), lfe_one(tw, 50)};
        auto r = lf_root_find(tw, poly, Rational(1), 40, opt);
        CHECK(lfe_eq(r.x, tw->zeta(40)));
    }
    {
        std::vector<LFE> poly{tw->zeta(50), lfe_zero(tw, 50), lfe_one(tw, 50)};
        auto r = lf_root_find(tw, poly, Rational(1, 2), 20, opt);
        REQUIRE(r.x.val());
        CHECK(r.x.val_zeta() == Rational(1, 2));
        LFE v = lfe_add(lfe_mul(r.x, r.x), r.tower->lift(tw->zeta(50)));
        lfe_normalize(v);
        CHECK(Rational(v.val_or_prec(), r.tower->zeta_val()) >= Rational(15));
    }
}

TEST_CASE("semilinear fixed basis: Carlitz rank 1 (non-integral)") {
    SolveOptions opt;
    for (std::uint32_t q : {2u, 3u}) {
        auto tw = base_tower(q, 1, 1, 60);
        // z-digit 0 of the Carlitz tau = (z - zeta): fixed points of -zeta*sigma(u) = u,
        // i.e. u^{qhat-1} = -zeta^{-1}: the inverse Carlitz tower generator
        Mat<LFE> A(1, 1, lfe_neg(tw->zeta(60)));
        auto res = semilinear_fixed_basis(tw, A, opt);
        LFE u = res.U.at(0, 0);
        REQUIRE(u.val());
        CHECK(u.val_zeta() == Rational(-1, static_cast<std::int64_t>(q) - 1));
        LFE lhs = lfe_mul(res.tower->lift(A.at(0, 0)), lfe_sigma(u));
        LFE diff = lfe_sub(lhs, u);
        lfe_normalize(diff);
        CHECK(diff.zero_to_prec());
    }
}

TEST_CASE("semilinear fixed basis: rank 2 etale") {
    SolveOptions opt;
    auto tw = base_tower(2, 1, 1, 30);
    Mat<LFE> A(2, 2, lfe_zero(tw, 30));
    A.at(0, 0) = lfe_one(tw, 30);
    A.at(0, 1) = lfe_one(tw, 30);
    A.at(1, 0) = lfe_one(tw, 30);
    auto res = semilinear_fixed_basis(tw, A, opt);
    Mat<LFE> lhs = mat_lfe_mul(mat_lfe_lift(res.tower, A), mat_lfe_sigma(res.U));
    Mat<LFE> diff = mat_lfe_sub(lhs, res.U);
    CHECK(mat_lfe_min_val(diff) >= 25);
    LFE det = mat_lfe_det(res.U);
    lfe_normalize(det);
    CHECK_FALSE(det.zero_to_prec());
}

TEST_CASE("semilinear fixed basis: rank 2 mixed slopes") {
    SolveOptions opt;
    opt.ram_cap = 1 << 15;
    auto tw = base_tower(3, 1, 1, 24);
    Mat<LFE> A(2, 2, lfe_zero(tw, 24));
    A.at(0, 1) = lfe_neg(lfe_inv(tw->zeta(24)));
    A.at(1, 0) = lfe_one(tw, 24);
    A.at(1, 1) = lfe_one(tw, 24);
    auto res = semilinear_fixed_basis(tw, A, opt);
    Mat<LFE> lhs = mat_lfe_mul(mat_lfe_lift(res.tower, A), mat_lfe_sigma(res.U));
    Mat<LFE> diff = mat_lfe_sub(lhs, res.U);
    std::int64_t resid = mat_lfe_min_val(diff);
    CHECK(Rational(resid, res.tower->zeta_val()) >= Rational(8));
    LFE det = mat_lfe_det(res.U);
    lfe_normalize(det);
    CHECK_FALSE(det.zero_to_prec());
}
