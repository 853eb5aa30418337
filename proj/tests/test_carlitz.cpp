#include "doctest.h"

#include "shtukalab/carlitz.hpp"

using namespace shtukalab;

namespace {
CarlitzTower small_tower(std::uint32_t q, int depth, std::int64_t prec_mult = 3) {
    FieldPtr feps = q == 4 ? FiniteField::make(2, 2, {1, 1, 1}) : FiniteField::make_default(q, 1);
    std::int64_t qh = static_cast<std::int64_t>(feps->q());
    std::int64_t ram = qh - 1;
    for (int i = 0; i < depth; ++i) ram *= qh;
    return carlitz_build_tower(feps, depth, prec_mult * ram + 8);
}
}  // namespace

TEST_CASE("depth 0: zeta = -pi^{qhat-1}") {
    for (std::uint32_t q : {2u, 3u}) {
        auto ct = small_tower(q, 0);
        // ell_0 = pi and zeta = -pi^{qhat-1}
        CHECK(ct.ells[0].val() == 1);
        LFE want = lfe_neg(lfe_pow(ct.ells[0], static_cast<std::int64_t>(q) - 1));
        CHECK(lfe_eq(ct.zeta, want));
    }
}

TEST_CASE("tower relations and valuations at depth 2") {
    for (std::uint32_t q : {2u, 3u}) {
        auto ct = small_tower(q, 2);
        std::int64_t qh = ct.qhat();
        // v(ell_i) = qhat^{-i}/(qhat-1) in zeta units
        for (int i = 0; i <= 2; ++i) {
            Rational want(1, (qh - 1));
            for (int k = 0; k < i; ++k) want = want / Rational(qh);
            CHECK(ct.ells[static_cast<std::size_t>(i)].val_zeta() == want);
        }
        // relations to precision
        LFE r0 = lfe_add(lfe_pow(ct.ells[0], qh - 1), ct.zeta);
        lfe_normalize(r0);
        CHECK(r0.zero_to_prec());
        for (int i = 1; i <= 2; ++i) {
            LFE lhs = lfe_add(lfe_sigma(ct.ells[static_cast<std::size_t>(i)]),
                              lfe_mul(ct.zeta, ct.ells[static_cast<std::size_t>(i)]));
            LFE resid = lfe_sub(lhs, ct.ells[static_cast<std::size_t>(i - 1)]);
            lfe_normalize(resid);
            CHECK(resid.zero_to_prec());
        }
    }
}

TEST_CASE("phi_z maps ell_i to ell_{i-1} and kills ell_0") {
    auto ct = small_tower(3, 2);
    CHECK(lfe_eq(carlitz_phi_z(ct, ct.ells[2]), ct.ells[1]));
    CHECK(lfe_eq(carlitz_phi_z(ct, ct.ells[1]), ct.ells[0]));
    LFE k = carlitz_phi_z(ct, ct.ells[0]);
    lfe_normalize(k);
    CHECK(k.zero_to_prec());
    // phi_{z^2}(ell_1) = 0
    LFE k2 = carlitz_phi_z(ct, carlitz_phi_z(ct, ct.ells[1]));
    lfe_normalize(k2);
    CHECK(k2.zero_to_prec());
    // phi_z(0) = 0
    LFE z0 = carlitz_phi_z(ct, lfe_zero(ct.tower, 20));
    CHECK(z0.zero_to_prec());
}

TEST_CASE("torsion points: cardinality and phi_z-image") {
    auto ct = small_tower(2, 2);
    auto pts1 = carlitz_torsion_points(ct, 1);
    CHECK(pts1.size() == 2);  // {0, ell_0}
    bool has_zero = false, has_ell0 = false;
    for (auto& p : pts1) {
        LFE pn = p;
        lfe_normalize(pn);
        if (pn.zero_to_prec()) has_zero = true;
        if (lfe_eq(p, ct.ells[0])) has_ell0 = true;
    }
    CHECK(has_zero);
    CHECK(has_ell0);
    auto pts2 = carlitz_torsion_points(ct, 2);
    CHECK(pts2.size() == 4);
    // each point annihilated by phi_{z^2}, and phi_z maps onto level-1 points
    int mapped = 0;
    for (auto& p : pts2) {
        LFE k = carlitz_phi_z(ct, carlitz_phi_z(ct, p));
        lfe_normalize(k);
        CHECK(k.zero_to_prec());
        LFE im = carlitz_phi_z(ct, p);
        for (auto& q : pts1)
            if (lfe_eq(im, q)) {
                ++mapped;
                break;
            }
    }
    CHECK(mapped == 4);
}

TEST_CASE("period identities at modest depth") {
    for (std::uint32_t q : {2u, 3u}) {
        auto ct = small_tower(q, 3);
        auto ps = carlitz_periods(ct, 2);
        auto c1 = check_ell_plus_identity(ct, ps);
        CHECK(c1.ok);
        CHECK(c1.certified > Rational(1));
        auto c2 = check_ell_minus_identity(ct, ps);
        CHECK(c2.ok);
        auto c3 = check_ell_identity(ct, ps);
        CHECK(c3.ok);
    }
}

TEST_CASE("ell_minus is 1 mod m_R") {
    auto ct = small_tower(3, 2);
    auto ps = carlitz_periods(ct, 2);
    LFE c0 = zs_coeff(ps.ell_minus, 0);
    LFE diff = lfe_sub(c0, lfe_one(ct.tower, c0.prec));
    lfe_normalize(diff);
    if (!diff.zero_to_prec()) CHECK(*diff.val() > 0);
    for (std::int64_t i = ps.ell_minus.zmin; i < 0; ++i) {
        LFE ci = zs_coeff(ps.ell_minus, i);
        lfe_normalize(ci);
        if (!ci.zero_to_prec()) CHECK(*ci.val() > 0);
    }
}

TEST_CASE("anderson pairing column is delta_{m,0}") {
    for (std::uint32_t q : {2u, 3u}) {
        auto ct = small_tower(q, 4, 8);  // the pairing needs ~ (mmax+3) zeta-digits
        auto pc = anderson_pairing_check(ct, 4);
        CHECK(pc.ok);
        REQUIRE(pc.column.size() == 5);
        CHECK(pc.column[0] == ct.tower->feps()->one());
        for (int m = 1; m <= 4; ++m) CHECK(pc.column[static_cast<std::size_t>(m)] == 0);
    }
}

TEST_CASE("cyclotomic character: identity and scalar relabelings") {
    auto ct = small_tower(3, 1);
    auto idr = carlitz_identity_relabeling(ct);
    auto chi = cyclotomic_character(ct, idr);
    REQUIRE(chi.size() >= 1);
    CHECK(chi[0] == ct.tower->feps()->one());
    for (std::size_t i = 1; i < chi.size(); ++i) CHECK(chi[i] == 0);
    // ell_0 -> c ell_0 for c in F_3^x gives chi = c mod z
    auto g = carlitz_relabeling_from_unit(ct, {ct.tower->feps()->from_index(2)});
    auto chi2 = cyclotomic_character(ct, g);
    CHECK(chi2[0] == ct.tower->feps()->from_index(2));
}

TEST_CASE("cyclotomic character: z-correction and multiplicativity") {
    auto ct = small_tower(2, 1);
    const FieldPtr& F = ct.tower->feps();
    // unit 1 + z: fixes ell_0, sends ell_1 -> ell_1 + ell_0
    auto g = carlitz_relabeling_from_unit(ct, {F->one(), F->one()});
    CHECK(lfe_eq(g.ells[0], ct.ells[0]));
    CHECK(lfe_eq(g.ells[1], lfe_add(ct.ells[1], ct.ells[0])));
    auto chi = cyclotomic_character(ct, g);
    REQUIRE(chi.size() == 2);
    CHECK(chi[0] == F->one());
    CHECK(chi[1] == F->one());
    // multiplicativity: chi(g o g) = chi(g)^2 = 1 + z^2... truncated at z^2: = 1 + 0 z
    auto gg = compose_relabelings(ct, g, g);
    auto chigg = cyclotomic_character(ct, gg);
    // (1+z)^2 = 1 + z^2 over F_2: coefficient of z is 0
    CHECK(chigg[0] == F->one());
    CHECK(chigg[1] == 0);
}

TEST_CASE("inconsistent relabeling is rejected") {
    auto ct = small_tower(3, 1);
    Relabeling bad;
    bad.ells = ct.ells;
    bad.ells[0] = lfe_add(bad.ells[0], lfe_one(ct.tower, bad.ells[0].prec));
    CHECK_THROWS_AS(cyclotomic_character(ct, bad), NotGaloisConsistent);
}
