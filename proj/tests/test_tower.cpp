#include "doctest.h"

#include "shtukalab/tower.hpp"

using namespace shtukalab;

namespace {
TowerPtr simple_tower(std::uint32_t p, std::uint32_t m, std::int64_t ram, std::int64_t prec) {
    auto F = FiniteField::make_default(p, m);
    return Tower::eisenstein_base(F, ram, prec);
}
}  // namespace

TEST_CASE("tower element arithmetic basics") {
    auto tw = simple_tower(3, 1, 1, 64);
    auto F = tw->field();
    LFE a = lfe_monomial(tw, 1, 2, 64);              // pi^2
    LFE b = lfe_monomial(tw, 2, -1, 64);             // 2 pi^-1
    LFE ab = lfe_mul(a, b);
    CHECK(ab.val() == 1);
    CHECK(lfe_coeff(ab, 1) == 2);
    LFE s = lfe_add(a, b);
    CHECK(s.val() == -1);
    CHECK(lfe_coeff(s, 2) == 1);
    LFE inv = lfe_inv(s);
    LFE prod = lfe_mul(s, inv);
    CHECK(lfe_eq(prod, lfe_one(tw, 32)));
    (void)F;
}

TEST_CASE("valuation multiplicativity on random pairs") {
    auto tw = simple_tower(2, 2, 1, 128);
    std::uint64_t st = 42;
    auto rnd = [&]() {
        st = st * 6364136223846793005ull + 1442695040888963407ull;
        return st >> 33;
    };
    for (int trial = 0; trial < 30; ++trial) {
        RawSeries ra, rb;
        ra.vmin = static_cast<std::int64_t>(rnd() % 20) - 10;
        rb.vmin = static_cast<std::int64_t>(rnd() % 20) - 10;
        ra.prec = ra.vmin + 40;
        rb.prec = rb.vmin + 40;
        ra.c.resize(30);
        rb.c.resize(30);
        for (auto& x : ra.c) x = tw->field()->from_index(rnd() % 4);
        for (auto& x : rb.c) x = tw->field()->from_index(rnd() % 4);
        ra.c[0] = tw->field()->one();
        rb.c[0] = tw->field()->from_index(1 + rnd() % 3);
        LFE a = lfe_from_raw(tw, ra), b = lfe_from_raw(tw, rb);
        LFE ab = lfe_mul(a, b);
        REQUIRE(a.val());
        REQUIRE(b.val());
        CHECK(*ab.val() == *a.val() + *b.val());
    }
}

TEST_CASE("multiplication kernels agree with generic schoolbook") {
    // long operands trigger the plane kernels; compare against direct formula
    for (auto [p, m] : {std::pair<int, int>{2, 1}, {2, 2}, {3, 1}, {3, 2}, {2, 3}}) {
        auto tw = simple_tower(p, m, 1, 3000);
        auto F = tw->field();
        std::uint64_t st = 7 * p + m;
        auto rnd = [&]() {
            st = st * 6364136223846793005ull + 1442695040888963407ull;
            return st >> 33;
        };
        RawSeries ra, rb;
        ra.vmin = 0;
        rb.vmin = 0;
        ra.prec = rb.prec = 3000;
        ra.c.resize(700);
        rb.c.resize(650);
        for (auto& x : ra.c) x = F->from_index(rnd() % F->q());
        for (auto& x : rb.c) x = F->from_index(rnd() % F->q());
        LFE a = lfe_from_raw(tw, ra), b = lfe_from_raw(tw, rb);
        LFE ab = lfe_mul(a, b);
        // spot-check coefficients against the definition
        for (std::int64_t k : {std::int64_t(0), std::int64_t(5), std::int64_t(333), std::int64_t(1200)}) {
            ff_t want = 0;
            for (std::int64_t i = std::max<std::int64_t>(0, k - 649); i <= std::min<std::int64_t>(699, k); ++i) {
                ff_t va = ra.c[static_cast<std::size_t>(i)];
                ff_t vb = (k - i) < 650 ? rb.c[static_cast<std::size_t>(k - i)] : 0;
                want = F->add(want, F->mul(va, vb));
            }
            CHECK(lfe_coeff(ab, k) == want);
        }
    }
}

TEST_CASE("sigma-hat is the literal q-hat power") {
    auto tw = simple_tower(3, 1, 2, 200);  // v(zeta) = 2
    LFE z = tw->zeta(100);
    CHECK(z.val() == 2);
    LFE x = lfe_add(lfe_one(tw, 60), lfe_monomial(tw, 2, 3, 60));
    LFE lhs = lfe_sigma(x);
    LFE rhs = lfe_pow(x, 3);
    CHECK(lfe_eq(lhs, rhs));
    // sigma_inv round trip
    CHECK(lfe_eq(lfe_sigma_inv(lhs), lfe_truncate(x, lhs.prec / 3 + 1)));
}

TEST_CASE("radical level re-expansion") {
    auto tw = simple_tower(3, 1, 1, 64);
    // pi_old = 2 * pi_new^2
    auto tw2 = tw->adjoin_radical(2, 2);
    CHECK(tw2->zeta_val() == 2);
    LFE pi_old = lfe_monomial(tw, 1, 1, 30);
    LFE lifted = tw2->lift(pi_old);
    CHECK(lifted.val() == 2);
    CHECK(lfe_coeff(lifted, 2) == 2);
    // arithmetic consistency: lift(a*b) = lift(a)*lift(b)
    LFE a = lfe_add(lfe_monomial(tw, 2, -1, 20), lfe_one(tw, 20));
    LFE b = lfe_add(lfe_monomial(tw, 1, 2, 20), lfe_monomial(tw, 2, 0, 20));
    CHECK(lfe_eq(tw2->lift(lfe_mul(a, b)), lfe_mul(tw2->lift(a), tw2->lift(b))));
}

TEST_CASE("cohen level re-expansion") {
    auto tw = simple_tower(2, 1, 1, 64);
    // pi_old = pi_new^2 + pi_new^3 (a wild degree-2 level shape)
    RawSeries exp;
    exp.vmin = 2;
    exp.prec = 40;
    exp.c = {1, 1};
    auto tw2 = tw->adjoin_cohen(2, exp);
    LFE a = lfe_add(lfe_monomial(tw, 1, 1, 10), lfe_one(tw, 10));
    LFE b = lfe_monomial(tw, 1, -1, 10);
    CHECK(lfe_eq(tw2->lift(lfe_mul(a, b)), lfe_mul(tw2->lift(a), tw2->lift(b))));
    CHECK(lfe_eq(tw2->lift(lfe_add(a, b)), lfe_add(tw2->lift(a), tw2->lift(b))));
}

TEST_CASE("newton polygon of x^2 + zeta x + zeta") {
    // points (0,1),(1,1),(2,0): single segment slope -1/2, length 2
    auto np = newton_polygon({{0, Rational(1)}, {1, Rational(1)}, {2, Rational(0)}});
    REQUIRE(np.segments.size() == 1);
    CHECK(np.segments[0].slope == Rational(-1, 2));
    CHECK(np.segments[0].length == 2);
}

TEST_CASE("newton polygon ell_1 equation and linear case") {
    // x^qhat + zeta x - l0 with qhat=2, v(l0)=1: slope -1/2... in zeta units
    // points (0, 1/1), (1, 1), (2, 0)  [v(l0) = qhat^{-1}/(qhat-1) scaled: use the
    // direct statement: root valuation 1/2]
    auto np = newton_polygon({{0, Rational(1, 2)}, {1, Rational(1)}, {2, Rational(0)}});
    REQUIRE(np.segments.size() == 1);
    CHECK(np.segments[0].slope == Rational(-1, 4));
    CHECK(np.segments[0].length == 2);
    // linear x - c: one root of valuation v(c)
    auto np2 = newton_polygon({{0, Rational(7)}, {1, Rational(0)}});
    REQUIRE(np2.segments.size() == 1);
    CHECK(np2.segments[0].slope == Rational(-7));
    CHECK(np2.segments[0].length == 1);
}

TEST_CASE("newton polygon hull is on-or-below all points") {
    auto np = newton_polygon({{0, Rational(3)}, {1, Rational(0)}, {2, Rational(2)}, {4, Rational(1)}, {5, Rational(0)}});
    std::int64_t total = 0;
    for (auto& s : np.segments) total += s.length;
    CHECK(total == np.hull.back().first - np.hull.front().first);
    // convexity: slopes strictly increasing
    for (std::size_t i = 0; i + 1 < np.segments.size(); ++i)
        CHECK(np.segments[i].slope < np.segments[i + 1].slope);
    // all points above or on the hull
    for (auto& pt : np.points) {
        for (std::size_t i = 0; i + 1 < np.hull.size(); ++i) {
            if (np.hull[i].first <= pt.first && pt.first <= np.hull[i + 1].first) {
                Rational t = Rational(pt.first - np.hull[i].first) / Rational(np.hull[i + 1].first - np.hull[i].first);
                Rational y = np.hull[i].second + t * (np.hull[i + 1].second - np.hull[i].second);
                CHECK(pt.second >= y);
            }
        }
    }
}
