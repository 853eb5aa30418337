#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "shtukalab/errors.hpp"

namespace shtukalab {

// Packed element of a finite field: base-p digits of the polynomial-basis
// representation, little-endian in fixed-width bit fields.
using ff_t = std::uint64_t;

class FiniteField;
using FieldPtr = std::shared_ptr<const FiniteField>;

// GF(p^m) presented as F_p[x]/(modulus), modulus monic of degree m over F_p.
// Immutable; elements are ff_t values tied to their field.
class FiniteField : public std::enable_shared_from_this<FiniteField> {
public:
    static FieldPtr make(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> modulus);
    // Deterministically picks the least irreducible monic modulus of degree m.
    static FieldPtr make_default(std::uint32_t p, std::uint32_t m);

    std::uint32_t p() const { return p_; }
    std::uint32_t m() const { return m_; }
    std::uint64_t q() const { return q_; }
    const std::vector<std::uint32_t>& modulus() const { return modulus_; }
    std::uint32_t digit_bits() const { return digit_bits_; }
    bool has_tables() const { return !log_.empty(); }

    ff_t zero() const { return 0; }
    ff_t one() const { return 1; }
    // Scalar from the prime field.
    ff_t from_prime(std::uint64_t v) const { return v % p_; }
    ff_t from_digits(const std::vector<std::uint32_t>& d) const;
    std::vector<std::uint32_t> to_digits(ff_t a) const;
    // Canonical index in [0, q): sum d_i p^i.
    std::uint64_t index(ff_t a) const;
    ff_t from_index(std::uint64_t idx) const;

    ff_t add(ff_t a, ff_t b) const;
    ff_t sub(ff_t a, ff_t b) const;
    ff_t neg(ff_t a) const;
    ff_t mul(ff_t a, ff_t b) const;
    ff_t inv(ff_t a) const;
    ff_t pow(ff_t a, std::uint64_t e) const;
    // a^{p^k}; k may exceed m (reduced mod the Frobenius order).
    ff_t frobenius(ff_t a, std::uint64_t k = 1) const;
    // Unique p^k-th root (the field is perfect).
    ff_t root_frobenius(ff_t a, std::uint64_t k = 1) const;

    bool is_zero(ff_t a) const { return a == 0; }
    // A fixed multiplicative generator (computed for table fields; on demand otherwise).
    ff_t generator() const;

    // All elements, for brute-force oracles on small fields.
    std::vector<ff_t> all_elements() const;

    ~FiniteField() = default;
    FiniteField(const FiniteField&) = delete;

private:
    FiniteField() = default;
    void build_tables();
    ff_t mul_poly(ff_t a, ff_t b) const;  // table-free path

    std::uint32_t p_ = 2, m_ = 1;
    std::uint64_t q_ = 2;
    std::uint32_t digit_bits_ = 1;
    ff_t digit_mask_ = 1;
    std::vector<std::uint32_t> modulus_;
    // Log/exp tables indexed by canonical element index, generated when q fits.
    std::vector<std::uint32_t> log_;
    std::vector<ff_t> exp_;
    mutable ff_t generator_ = 0;
};

// Prime-field arithmetic helper.
inline std::uint32_t modp_add(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
    std::uint32_t s = a + b;
    return s >= p ? s - p : s;
}
inline std::uint32_t modp_sub(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
    return a >= b ? a - b : a + p - b;
}

// Field embedding GF(p^a) -> GF(p^b), a | b, determined by the image of the
// source polynomial generator.
struct Embedding {
    FieldPtr src;
    FieldPtr dst;
    ff_t gen_image = 0;  // root of src->modulus() in dst

    ff_t apply(ff_t a) const;
    bool trivial() const { return src.get() == dst.get(); }
};

// Constructs an embedding by locating a root of src's modulus in dst.
// Deterministic given the seed.
Embedding make_embedding(const FieldPtr& src, const FieldPtr& dst, std::uint64_t seed = 1);

// Whether an element of dst lies in the image of emb; if so return the preimage.
bool in_subfield(const Embedding& emb, ff_t a, ff_t* preimage = nullptr);

}  // namespace shtukalab
