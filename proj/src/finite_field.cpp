#include "shtukalab/finite_field.hpp"

#include <algorithm>

#include "shtukalab/fq_poly.hpp"

namespace shtukalab {

namespace {

std::uint32_t bits_for_prime(std::uint32_t p) {
    if (p == 2) return 1;
    if (p == 3) return 2;
    if (p <= 13) return 4;
    if (p <= 251) return 8;
    throw InputError("finite field: prime too large (max 251)");
}

bool is_prime_u32(std::uint32_t p) {
    if (p < 2) return false;
    for (std::uint32_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
    std::vector<std::uint64_t> fs;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            fs.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) fs.push_back(n);
    return fs;
}

}  // namespace

FieldPtr FiniteField::make(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> modulus) {
    if (!is_prime_u32(p)) throw InputError("finite field: p must be prime");
    if (m == 0) throw InputError("finite field: m must be positive");
    std::uint32_t bits = bits_for_prime(p);
    if (bits * m > 64) throw InputError("finite field: p^m too large for packed representation");
    // q >= 2 always holds; guard overflow of p^m.
    long double qf = 1;
    for (std::uint32_t i = 0; i < m; ++i) qf *= p;
    if (qf > 9e18L) throw InputError("finite field: p^m overflows");

    if (modulus.size() != m + 1) throw InputError("finite field: modulus must have degree m");
    for (auto& c : modulus) c %= p;
    if (modulus[m] != 1) throw InputError("finite field: modulus must be monic");

    auto F = std::shared_ptr<FiniteField>(new FiniteField());
    F->p_ = p;
    F->m_ = m;
    F->digit_bits_ = bits;
    F->digit_mask_ = (bits == 64) ? ~0ull : ((1ull << bits) - 1);
    F->modulus_ = modulus;
    std::uint64_t q = 1;
    for (std::uint32_t i = 0; i < m; ++i) q *= p;
    F->q_ = q;
    if (m > 1) {
        fqpoly::Poly f(modulus.begin(), modulus.end());
        auto Fp = (p == F->p_ && m == 1) ? nullptr : FiniteField::make(p, 1, {0, 1});
        // Irreducibility over the prime field.
        if (!fqpoly::is_irreducible(*FiniteField::make(p, 1, {0, 1}), f))
            throw InputError("finite field: modulus is reducible");
        (void)Fp;
    }
    if (q <= (1u << 16)) F->build_tables();
    return F;
}

FieldPtr FiniteField::make_default(std::uint32_t p, std::uint32_t m) {
    if (m == 1) return make(p, 1, {0, 1});
    auto Fp = make(p, 1, {0, 1});
    auto f = fqpoly::find_irreducible(*Fp, m);
    std::vector<std::uint32_t> mod(f.begin(), f.end());
    return make(p, m, mod);
}

ff_t FiniteField::from_digits(const std::vector<std::uint32_t>& d) const {
    ff_t a = 0;
    for (std::size_t i = 0; i < d.size() && i < m_; ++i)
        a |= static_cast<ff_t>(d[i] % p_) << (i * digit_bits_);
    return a;
}

std::vector<std::uint32_t> FiniteField::to_digits(ff_t a) const {
    std::vector<std::uint32_t> d(m_);
    for (std::uint32_t i = 0; i < m_; ++i) d[i] = (a >> (i * digit_bits_)) & digit_mask_;
    return d;
}

std::uint64_t FiniteField::index(ff_t a) const {
    std::uint64_t idx = 0;
    for (std::uint32_t i = m_; i-- > 0;) idx = idx * p_ + ((a >> (i * digit_bits_)) & digit_mask_);
    return idx;
}

ff_t FiniteField::from_index(std::uint64_t idx) const {
    ff_t a = 0;
    for (std::uint32_t i = 0; i < m_; ++i) {
        a |= static_cast<ff_t>(idx % p_) << (i * digit_bits_);
        idx /= p_;
    }
    return a;
}

ff_t FiniteField::add(ff_t a, ff_t b) const {
    if (p_ == 2) return a ^ b;
    ff_t r = 0;
    for (std::uint32_t i = 0; i < m_; ++i) {
        std::uint32_t da = (a >> (i * digit_bits_)) & digit_mask_;
        std::uint32_t db = (b >> (i * digit_bits_)) & digit_mask_;
        r |= static_cast<ff_t>(modp_add(da, db, p_)) << (i * digit_bits_);
    }
    return r;
}

ff_t FiniteField::sub(ff_t a, ff_t b) const {
    if (p_ == 2) return a ^ b;
    ff_t r = 0;
    for (std::uint32_t i = 0; i < m_; ++i) {
        std::uint32_t da = (a >> (i * digit_bits_)) & digit_mask_;
        std::uint32_t db = (b >> (i * digit_bits_)) & digit_mask_;
        r |= static_cast<ff_t>(modp_sub(da, db, p_)) << (i * digit_bits_);
    }
    return r;
}

ff_t FiniteField::neg(ff_t a) const { return sub(0, a); }

ff_t FiniteField::mul_poly(ff_t a, ff_t b) const {
    // Schoolbook product of digit vectors, reduced by the monic modulus.
    std::uint32_t prod[128] = {0};
    for (std::uint32_t i = 0; i < m_; ++i) {
        std::uint32_t da = (a >> (i * digit_bits_)) & digit_mask_;
        if (!da) continue;
        for (std::uint32_t j = 0; j < m_; ++j) {
            std::uint32_t db = (b >> (j * digit_bits_)) & digit_mask_;
            if (!db) continue;
            prod[i + j] = (prod[i + j] + da * db) % p_;
        }
    }
    for (std::uint32_t k = 2 * m_ - 1; k-- > m_;) {
        std::uint32_t c = prod[k];
        if (!c) continue;
        prod[k] = 0;
        for (std::uint32_t j = 0; j < m_; ++j) {
            std::uint32_t t = (std::uint64_t(c) * modulus_[j]) % p_;
            prod[k - m_ + j] = modp_sub(prod[k - m_ + j], t, p_);
        }
    }
    ff_t r = 0;
    for (std::uint32_t i = 0; i < m_; ++i) r |= static_cast<ff_t>(prod[i]) << (i * digit_bits_);
    return r;
}

ff_t FiniteField::mul(ff_t a, ff_t b) const {
    if (a == 0 || b == 0) return 0;
    if (!log_.empty()) {
        std::uint64_t e = log_[index(a)] + log_[index(b)];
        return exp_[e];
    }
    return mul_poly(a, b);
}

ff_t FiniteField::pow(ff_t a, std::uint64_t e) const {
    if (a == 0) return e == 0 ? one() : 0;
    if (!log_.empty()) {
        std::uint64_t l = (static_cast<unsigned __int128>(log_[index(a)]) * (e % (q_ - 1))) % (q_ - 1);
        return exp_[l];
    }
    ff_t r = one();
    ff_t base = a;
    while (e) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

ff_t FiniteField::inv(ff_t a) const {
    if (a == 0) throw NotAUnit("finite field: inverse of zero");
    if (!log_.empty()) return exp_[(q_ - 1) - log_[index(a)]];
    return pow(a, q_ - 2);
}

ff_t FiniteField::frobenius(ff_t a, std::uint64_t k) const {
    if (a == 0 || m_ == 1) return a;
    k %= m_;
    if (k == 0) return a;
    // exponent p^k mod (q-1)
    std::uint64_t e = 1;
    for (std::uint64_t i = 0; i < k; ++i) e = (static_cast<unsigned __int128>(e) * p_) % (q_ - 1);
    return pow(a, e);
}

ff_t FiniteField::root_frobenius(ff_t a, std::uint64_t k) const {
    if (a == 0 || m_ == 1) return a;
    k %= m_;
    if (k == 0) return a;
    return frobenius(a, m_ - k);
}

ff_t FiniteField::generator() const {
    if (generator_) return generator_;
    auto fs = prime_factors(q_ - 1);
    for (std::uint64_t idx = 1; idx < q_; ++idx) {
        ff_t g = from_index(idx);
        bool ok = true;
        for (auto f : fs) {
            if (pow(g, (q_ - 1) / f) == one()) { ok = false; break; }
        }
        if (ok) { generator_ = g; return g; }
    }
    throw Error("finite field: no generator found");
}

std::vector<ff_t> FiniteField::all_elements() const {
    if (q_ > (1u << 22)) throw InputError("finite field: enumeration too large");
    std::vector<ff_t> out(q_);
    for (std::uint64_t i = 0; i < q_; ++i) out[i] = from_index(i);
    return out;
}

void FiniteField::build_tables() {
    ff_t g = generator();
    log_.assign(q_, 0);
    exp_.assign(2 * q_, 0);
    ff_t cur = one();
    for (std::uint64_t e = 0; e < q_ - 1; ++e) {
        exp_[e] = cur;
        exp_[e + (q_ - 1)] = cur;
        log_[index(cur)] = static_cast<std::uint32_t>(e);
        cur = mul_poly(cur, g);
    }
}

ff_t Embedding::apply(ff_t a) const {
    if (trivial()) return a;
    // Horner over src digits: sum d_i * gen_image^i in dst.
    ff_t r = 0;
    for (std::uint32_t i = src->m(); i-- > 0;) {
        std::uint32_t d = (a >> (i * src->digit_bits())) & ((1ull << src->digit_bits()) - 1);
        r = dst->add(dst->mul(r, gen_image), dst->from_prime(d));
    }
    return r;
}

Embedding make_embedding(const FieldPtr& src, const FieldPtr& dst, std::uint64_t seed) {
    if (src->p() != dst->p()) throw CharacteristicMismatch("embedding: different characteristic");
    if (dst->m() % src->m() != 0) throw InputError("embedding: source degree does not divide target degree");
    Embedding e;
    e.src = src;
    e.dst = dst;
    if (src.get() == dst.get() || src->m() == 1) {
        e.gen_image = dst->from_prime(0);
        if (src->m() == 1) e.gen_image = dst->from_prime(0);  // unused for prime sources
        if (src.get() == dst.get()) e.gen_image = src->m() > 1 ? src->from_digits({0, 1}) : 0;
        return e;
    }
    fqpoly::Poly f(src->modulus().begin(), src->modulus().end());
    auto rts = fqpoly::roots(*dst, f, seed);
    if (rts.empty()) throw Error("embedding: no root of subfield modulus found");
    // Deterministic choice: least canonical index.
    ff_t best = rts[0];
    for (ff_t r : rts)
        if (dst->index(r) < dst->index(best)) best = r;
    e.gen_image = best;
    return e;
}

bool in_subfield(const Embedding& emb, ff_t a, ff_t* preimage) {
    if (emb.trivial() || emb.src->m() == 1) {
        // Prime subfield: element must be fixed by Frobenius x -> x^p.
        if (emb.src->m() == 1 && !emb.trivial()) {
            if (emb.dst->frobenius(a, 1) != a) return false;
            // value is a prime-field scalar: digit 0 equals the scalar
            std::uint64_t idx = emb.dst->index(a);
            if (idx >= emb.src->p()) return false;
            if (preimage) *preimage = emb.src->from_prime(idx);
            return true;
        }
        if (preimage) *preimage = a;
        return true;
    }
    // a lies in the image iff a^{q_src} == a.
    std::uint64_t qs = emb.src->q();
    if (emb.dst->pow(a, qs) != a) return false;
    if (preimage) {
        // Express a in the source power basis by linear algebra over F_p.
        std::uint32_t p = emb.dst->p();
        std::uint32_t a_deg = emb.src->m();
        std::uint32_t b_deg = emb.dst->m();
        // columns: gen_image^i written in dst digit basis
        std::vector<std::vector<std::uint32_t>> cols(a_deg, std::vector<std::uint32_t>(b_deg));
        ff_t pw = emb.dst->one();
        for (std::uint32_t i = 0; i < a_deg; ++i) {
            auto dg = emb.dst->to_digits(pw);
            for (std::uint32_t j = 0; j < b_deg; ++j) cols[i][j] = dg[j];
            pw = emb.dst->mul(pw, emb.gen_image);
        }
        auto target = emb.dst->to_digits(a);
        // Solve cols * x = target over F_p by Gaussian elimination.
        std::vector<std::vector<std::uint32_t>> M(b_deg, std::vector<std::uint32_t>(a_deg + 1));
        for (std::uint32_t r = 0; r < b_deg; ++r) {
            for (std::uint32_t c = 0; c < a_deg; ++c) M[r][c] = cols[c][r];
            M[r][a_deg] = target[r];
        }
        std::vector<int> pivot_col(b_deg, -1);
        std::uint32_t rank = 0;
        for (std::uint32_t c = 0; c < a_deg && rank < b_deg; ++c) {
            std::uint32_t sel = rank;
            while (sel < b_deg && M[sel][c] == 0) ++sel;
            if (sel == b_deg) continue;
            std::swap(M[sel], M[rank]);
            std::uint64_t invp = 1, base = M[rank][c], e = p - 2;
            while (e) { if (e & 1) invp = invp * base % p; base = base * base % p; e >>= 1; }
            for (std::uint32_t cc = c; cc <= a_deg; ++cc) M[rank][cc] = (std::uint64_t(M[rank][cc]) * invp) % p;
            for (std::uint32_t r = 0; r < b_deg; ++r) {
                if (r == rank || M[r][c] == 0) continue;
                std::uint64_t f = M[r][c];
                for (std::uint32_t cc = c; cc <= a_deg; ++cc)
                    M[r][cc] = modp_sub(M[r][cc], (f * M[rank][cc]) % p, p);
            }
            pivot_col[rank] = static_cast<int>(c);
            ++rank;
        }
        std::vector<std::uint32_t> x(a_deg, 0);
        for (std::uint32_t r = 0; r < rank; ++r)
            if (pivot_col[r] >= 0) x[pivot_col[r]] = M[r][a_deg];
        *preimage = emb.src->from_digits(x);
        // sanity: round-trip
        if (emb.apply(*preimage) != a) return false;
    }
    return true;
}

}  // namespace shtukalab
