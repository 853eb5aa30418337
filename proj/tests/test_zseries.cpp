#include "doctest.h"

#include "shtukalab/zseries.hpp"

using namespace shtukalab;

namespace {
TowerPtr tower(std::uint32_t p, std::int64_t ram, std::int64_t prec) {
    return Tower::eisenstein_base(FiniteField::make_default(p, 1), ram, prec);
}
}  // namespace

TEST_CASE("(1+z)(1-z) = 1 - z^2") {
    auto tw = tower(3, 1, 30);
    ZSeries a = zs_add(zs_const(lfe_one(tw, 30), 5), zs_monomial(lfe_one(tw, 30), 1, 5));
    ZSeries b = zs_sub(zs_const(lfe_one(tw, 30), 5), zs_monomial(lfe_one(tw, 30), 1, 5));
    ZSeries ab = zs_mul(a, b);
    CHECK(lfe_eq(zs_coeff(ab, 0), lfe_one(tw, 30)));
    CHECK(zs_coeff(ab, 1).zero_to_prec());
    CHECK(lfe_eq(zs_coeff(ab, 2), lfe_neg(lfe_one(tw, 30))));
}

TEST_CASE("inv(1 - zeta z): geometric series checked by multiplying back") {
    auto tw = tower(2, 1, 40);
    ZSeries a = zs_sub(zs_const(lfe_one(tw, 40), 8), zs_monomial(tw->zeta(40), 1, 8));
    ZSeries ainv = zs_inv(a);
    ZSeries prod = zs_mul(a, ainv);
    CHECK(lfe_eq(zs_coeff(prod, 0), lfe_one(tw, 38)));
    for (std::int64_t i = 1; i < prod.zprec; ++i) CHECK(zs_coeff(prod, i).zero_to_prec());
    CHECK(lfe_eq(zs_coeff(ainv, 3), lfe_pow(tw->zeta(40), 3)));
}

TEST_CASE("inv(z - zeta) = -zeta^{-1} - zeta^{-2} z - ...") {
    auto tw = tower(3, 1, 40);
    ZZetaFrac f = zzf_make(zs_const(lfe_one(tw, 40), 8), 1);
    ZSeries e = zzf_expand(f);
    LFE zinv = lfe_inv(tw->zeta(40));
    CHECK(lfe_eq(zs_coeff(e, 0), lfe_neg(zinv)));
    CHECK(lfe_eq(zs_coeff(e, 1), lfe_neg(lfe_mul(zinv, zinv))));
    CHECK(lfe_eq(zs_coeff(e, 2), lfe_neg(lfe_pow(zinv, 3))));
    ZSeries zmz = zs_z_minus_zeta(tw, 8, 40);
    ZSeries prod = zs_mul(zmz, e);
    CHECK(lfe_eq(zs_coeff(prod, 0), lfe_one(tw, 30)));
    for (std::int64_t i = 1; i < prod.zprec; ++i) CHECK(zs_coeff(prod, i).zero_to_prec());
}

TEST_CASE("sigma-hat is a ring endomorphism on random series") {
    auto tw = tower(3, 2, 60);
    std::uint64_t st = 99;
    auto rnd = [&]() {
        st = st * 6364136223846793005ull + 1442695040888963407ull;
        return st >> 33;
    };
    for (int trial = 0; trial < 8; ++trial) {
        ZSeries a = zs_zero(tw, 0, 5, 20), b = zs_zero(tw, 0, 5, 20);
        for (std::int64_t i = 0; i < 5; ++i) {
            zs_set_coeff(a, i, lfe_monomial(tw, tw->field()->from_index(rnd() % 3), rnd() % 4, 20));
            zs_set_coeff(b, i, lfe_monomial(tw, tw->field()->from_index(rnd() % 3), rnd() % 4, 20));
        }
        ZSeries diff = zs_sub(zs_sigma(zs_mul(a, b)), zs_mul(zs_sigma(a), zs_sigma(b)));
        CHECK(zs_zero_to_prec(diff));
        ZSeries diff2 = zs_sub(zs_sigma(zs_add(a, b)), zs_add(zs_sigma(a), zs_sigma(b)));
        CHECK(zs_zero_to_prec(diff2));
    }
    ZSeries z = zs_monomial(lfe_one(tw, 30), 1, 4);
    CHECK(zs_zero_to_prec(zs_sub(zs_sigma(z), z)));
    ZSeries zc = zs_const(tw->zeta(30), 4);
    CHECK(lfe_eq(zs_coeff(zs_sigma(zc), 0), lfe_pow(tw->zeta(30), 3)));
}

TEST_CASE("division by z - zeta round trip") {
    auto tw = tower(2, 1, 40);
    ZSeries a = zs_zero(tw, 0, 6, 30);
    zs_set_coeff(a, 0, tw->zeta(30));
    zs_set_coeff(a, 2, lfe_one(tw, 30));
    zs_set_coeff(a, 4, tw->zeta(30));
    ZSeries am = zs_mul_z_minus_zeta(a);
    ZSeries back = zs_div_z_minus_zeta(am);
    ZSeries diff = zs_sub(back, zs_truncate(a, back.zprec));
    CHECK(zs_zero_to_prec(diff));
}

TEST_CASE("evaluate at zeta") {
    auto tw = tower(3, 1, 40);
    ZSeries zmz = zs_z_minus_zeta(tw, 6, 40);
    LFE v = zs_evaluate_at_zeta(zmz);
    CHECK(v.zero_to_prec());
    ZSeries a = zs_add(zs_const(lfe_one(tw, 40), 6), zs_monomial(lfe_one(tw, 40), 2, 6));
    LFE got = zs_evaluate_at_zeta(a);
    LFE want = lfe_add(lfe_one(tw, 40), lfe_pow(tw->zeta(40), 2));
    CHECK(lfe_eq(got, lfe_truncate(want, got.prec)));
}

TEST_CASE("norm_s basics and z^k scaling") {
    auto tw = tower(2, 1, 60);
    ZSeries a = zs_monomial(lfe_one(tw, 60), 1, 4);
    a.val_floor = Rational(0);
    auto n1 = zs_norm(a, Rational(1));
    CHECK(n1.value == Rational(1));
    ZSeries b = zs_add(zs_monomial(tw->zeta(60), 0, 4), zs_monomial(lfe_one(tw, 60), 2, 4));
    b.val_floor = Rational(0);
    auto nb = zs_norm(b, Rational(1, 2));
    ZSeries bz = zs_shift_z(b, 3);
    auto nbz = zs_norm(bz, Rational(1, 2));
    CHECK(nbz.value == nb.value + Rational(3) * Rational(1, 2));
}

TEST_CASE("u-expansion: z -> zeta + u and ring homomorphism") {
    auto tw = tower(3, 1, 60);
    ZSeries z = zs_monomial(lfe_one(tw, 60), 1, 6);
    UZSeries u = to_u_expansion(z, 4);
    CHECK(lfe_eq(uz_coeff(u, 0), lfe_truncate(tw->zeta(60), uz_coeff(u, 0).prec)));
    CHECK(lfe_eq(uz_coeff(u, 1), lfe_one(tw, uz_coeff(u, 1).prec)));
    CHECK(uz_coeff(u, 2).zero_to_prec());
    ZSeries a = zs_add(zs_const(tw->zeta(60), 6), zs_monomial(lfe_one(tw, 60), 2, 6));
    ZSeries b = zs_add(zs_const(lfe_one(tw, 60), 6), zs_monomial(tw->zeta(60), 1, 6));
    UZSeries ua = to_u_expansion(a, 4), ub = to_u_expansion(b, 4);
    UZSeries lhs = to_u_expansion(zs_mul(a, b), 4);
    UZSeries diff = uz_sub(lhs, uz_mul(ua, ub));
    CHECK(uz_zero_to_prec(diff));
}

TEST_CASE("u-expansion of (z-zeta)^{-1} is u^{-1}") {
    auto tw = tower(2, 1, 40);
    ZZetaFrac f = zzf_make(zs_const(lfe_one(tw, 40), 6), 1);
    UZSeries u = to_u_expansion(f, 3);
    CHECK(u.umin == -1);
    CHECK(lfe_eq(uz_coeff(u, -1), lfe_one(tw, uz_coeff(u, -1).prec)));
    for (std::int64_t i = 0; i < u.uprec; ++i) CHECK(uz_coeff(u, i).zero_to_prec());
}

TEST_CASE("u round trip via back-substitution oracle") {
    auto tw = tower(3, 1, 50);
    ZSeries a = zs_zero(tw, 0, 30, 25);
    a.val_floor = Rational(0);
    zs_set_coeff(a, 0, lfe_one(tw, 25));
    zs_set_coeff(a, 1, tw->zeta(25));
    zs_set_coeff(a, 3, lfe_monomial(tw, 2, 2, 25));
    UZSeries u = to_u_expansion(a, 5);
    ZSeries back = from_u_polynomial(u, 5);
    ZSeries diff = zs_sub(back, a);
    for (std::int64_t i = diff.zmin; i < diff.zprec; ++i) {
        LFE d = zs_coeff(diff, i);
        CHECK(Rational(d.val_or_prec(), tw->zeta_val()) >= Rational(15));
    }
}

TEST_CASE("zzf normal form divides out z - zeta greedily") {
    auto tw = tower(2, 1, 40);
    ZSeries zmz = zs_z_minus_zeta(tw, 8, 40);
    ZSeries num = zs_mul(zmz, zs_add(zs_const(lfe_one(tw, 40), 8), zs_monomial(lfe_one(tw, 40), 1, 8)));
    ZZetaFrac f = zzf_make(num, 2);
    CHECK(f.pole == 1);
    LFE at = zs_evaluate_at_zeta(f.num);
    lfe_normalize(at);
    CHECK_FALSE(at.zero_to_prec());
}

TEST_CASE("uz inverse") {
    auto tw = tower(3, 1, 40);
    UZSeries a = uz_add(uz_const(lfe_add(lfe_one(tw, 40), tw->zeta(40)), 5),
                        uz_monomial(lfe_one(tw, 40), 2, 5));
    UZSeries ai = uz_inv(a);
    UZSeries prod = uz_mul(a, ai);
    CHECK(lfe_eq(uz_coeff(prod, 0), lfe_one(tw, uz_coeff(prod, 0).prec)));
    for (std::int64_t i = 1; i < prod.uprec; ++i) CHECK(uz_coeff(prod, i).zero_to_prec());
}
