#pragma once

#include <cstdint>
#include <vector>

#include "shtukalab/finite_field.hpp"

namespace shtukalab {

// Dense univariate polynomials over a finite field, lowest coefficient first.
// Plain helpers; the owning field is passed explicitly.
namespace fqpoly {

using Poly = std::vector<ff_t>;

void trim(Poly& f);
int deg(const Poly& f);  // -1 for zero
Poly add(const FiniteField& F, const Poly& a, const Poly& b);
Poly sub(const FiniteField& F, const Poly& a, const Poly& b);
Poly mul(const FiniteField& F, const Poly& a, const Poly& b);
Poly scale(const FiniteField& F, const Poly& a, ff_t c);
// Division with remainder; divisor need not be monic.
void divmod(const FiniteField& F, const Poly& a, const Poly& b, Poly& quo, Poly& rem);
Poly mod(const FiniteField& F, const Poly& a, const Poly& b);
Poly gcd(const FiniteField& F, Poly a, Poly b);  // monic gcd
Poly monic(const FiniteField& F, Poly f);
ff_t eval(const FiniteField& F, const Poly& f, ff_t x);
Poly powmod(const FiniteField& F, Poly base, std::uint64_t e, const Poly& f);
// x^{p^k} mod f via iterated Frobenius.
Poly xq_pow_mod(const FiniteField& F, std::uint64_t k, const Poly& f);
Poly compose_mod(const FiniteField& F, const Poly& g, const Poly& h, const Poly& f);  // g(h) mod f
Poly formal_derivative(const FiniteField& F, const Poly& f);

// Rabin irreducibility test over GF(p^m) (factorization-free).
bool is_irreducible(const FiniteField& F, const Poly& f);

// All roots of f in the coefficient field (with multiplicity stripped),
// via equal-degree splitting; deterministic given seed.
std::vector<ff_t> roots(const FiniteField& F, const Poly& f, std::uint64_t seed = 1);

// Least monic irreducible of degree n over F, by counter enumeration.
Poly find_irreducible(const FiniteField& F, std::uint32_t n);

}  // namespace fqpoly
}  // namespace shtukalab
