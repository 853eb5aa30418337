#include "doctest.h"

#include <set>

#include "shtukalab/finite_field.hpp"
#include "shtukalab/fq_poly.hpp"

using namespace shtukalab;

TEST_CASE("prime field arithmetic") {
    auto F = FiniteField::make(5, 1, {0, 1});
    CHECK(F->q() == 5);
    CHECK(F->add(3, 4) == 2);
    CHECK(F->mul(3, 4) == 2);
    CHECK(F->inv(2) == 3);
    CHECK(F->pow(2, 4) == 1);
}

TEST_CASE("GF(4) structure and Frobenius") {
    auto F = FiniteField::make(2, 2, {1, 1, 1});
    CHECK(F->q() == 4);
    ff_t g = F->from_digits({0, 1});  // x
    // brute-force oracle: x^2 = x + 1 under x^2+x+1
    CHECK(F->mul(g, g) == F->add(g, F->one()));
    // Frobenius b -> b^2 maps g to g^2
    CHECK(F->frobenius(g, 1) == F->mul(g, g));
    // inverse Frobenius: the unique square root
    ff_t r = F->root_frobenius(g, 1);
    CHECK(F->mul(r, r) == g);
    // field axioms on all pairs (exhaustive oracle)
    for (ff_t a : F->all_elements())
        for (ff_t b : F->all_elements()) {
            CHECK(F->add(a, b) == F->add(b, a));
            CHECK(F->mul(a, b) == F->mul(b, a));
            if (b != 0) CHECK(F->mul(F->mul(a, b), F->inv(b)) == a);
        }
}

TEST_CASE("GF(9) inverse Frobenius (k = -1)") {
    auto F = FiniteField::make_default(3, 2);
    ff_t g = F->generator();
    // g^{3^{-1}} is the unique cube root; equals g^3 iterated once more: (g^3)^3 = g^9 = g
    ff_t r = F->root_frobenius(g, 1);
    CHECK(F->pow(r, 3) == g);
    CHECK(r == F->frobenius(g, 1));  // exponent arithmetic mod 8: 3*3=9=1 mod 8
}

TEST_CASE("ff_pow_frobenius identity and negative exponents") {
    auto F = FiniteField::make_default(2, 4);
    CHECK(F->frobenius(F->one(), 5) == F->one());
    for (ff_t a : F->all_elements()) {
        ff_t up = F->frobenius(a, 3);
        CHECK(F->root_frobenius(up, 3) == a);
        // Frobenius distributes over + and * (automorphism oracle)
        for (ff_t b : {F->generator(), F->one()}) {
            CHECK(F->frobenius(F->add(a, b), 3) == F->add(up, F->frobenius(b, 3)));
            CHECK(F->frobenius(F->mul(a, b), 3) == F->mul(up, F->frobenius(b, 3)));
        }
    }
}

TEST_CASE("modulus irreducibility enforced") {
    // x^2 + 1 is reducible over F_2
    CHECK_THROWS_AS(FiniteField::make(2, 2, {1, 0, 1}), InputError);
    CHECK_NOTHROW(FiniteField::make(3, 2, {1, 0, 1}));  // irreducible over F_3
}

TEST_CASE("polynomial roots via equal-degree splitting") {
    auto F = FiniteField::make_default(3, 3);
    // f = prod (x - a) over chosen elements
    std::vector<ff_t> as = {F->from_index(1), F->from_index(5), F->from_index(20)};
    fqpoly::Poly f{F->one()};
    for (ff_t a : as) f = fqpoly::mul(*F, f, fqpoly::Poly{F->neg(a), F->one()});
    auto rts = fqpoly::roots(*F, f, 7);
    std::set<std::uint64_t> got, want;
    for (ff_t r : rts) got.insert(F->index(r));
    for (ff_t a : as) want.insert(F->index(a));
    CHECK(got == want);
}

TEST_CASE("embeddings GF(4) -> GF(16)") {
    auto F4 = FiniteField::make(2, 2, {1, 1, 1});
    auto F16 = FiniteField::make_default(2, 4);
    auto emb = make_embedding(F4, F16);
    // homomorphism oracle on all pairs
    for (ff_t a : F4->all_elements())
        for (ff_t b : F4->all_elements()) {
            CHECK(emb.apply(F4->add(a, b)) == F16->add(emb.apply(a), emb.apply(b)));
            CHECK(emb.apply(F4->mul(a, b)) == F16->mul(emb.apply(a), emb.apply(b)));
        }
    // membership + preimage round trip
    for (ff_t a : F4->all_elements()) {
        ff_t pre = 0;
        CHECK(in_subfield(emb, emb.apply(a), &pre));
        CHECK(pre == a);
    }
    // an element outside the image is detected
    ff_t g = F16->generator();
    ff_t pre = 0;
    CHECK_FALSE(in_subfield(emb, g, &pre));
}

TEST_CASE("find_irreducible produces valid moduli") {
    auto F2 = FiniteField::make(2, 1, {0, 1});
    for (std::uint32_t n : {2u, 3u, 5u, 8u}) {
        auto f = fqpoly::find_irreducible(*F2, n);
        CHECK(fqpoly::deg(f) == static_cast<int>(n));
        CHECK(fqpoly::is_irreducible(*F2, f));
    }
    // large packed field without tables
    auto big = FiniteField::make_default(3, 20);
    ff_t g = big->from_digits({1, 2, 0, 1});
    CHECK(big->mul(g, big->inv(g)) == big->one());
    CHECK(big->root_frobenius(big->frobenius(g, 7), 7) == g);
}
