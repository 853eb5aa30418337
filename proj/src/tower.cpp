#include "shtukalab/tower.hpp"

#include <algorithm>
#include <sstream>

namespace shtukalab {

namespace {

constexpr std::int64_t kPrecCap = (std::int64_t(1) << 40);

std::int64_t sat_add(std::int64_t a, std::int64_t b) {
    std::int64_t s = a + b;
    if (s > kPrecCap) return kPrecCap;
    if (s < -kPrecCap) return -kPrecCap;
    return s;
}
std::int64_t sat_mul(std::int64_t a, std::int64_t m) {
    if (a >= kPrecCap / m) return kPrecCap;
    if (a <= -(kPrecCap / m)) return -kPrecCap;
    return a * m;
}

// --- convolution kernels ---------------------------------------------------

// Generic truncated convolution via field multiplication tables.
void conv_generic(const FiniteField& F, const ff_t* a, std::size_t la, const ff_t* b,
                  std::size_t lb, ff_t* out, std::size_t L) {
    for (std::size_t i = 0; i < la && i < L; ++i) {
        if (a[i] == 0) continue;
        std::size_t jmax = std::min(lb, L - i);
        for (std::size_t j = 0; j < jmax; ++j) {
            if (b[j] == 0) continue;
            out[i + j] = F.add(out[i + j], F.mul(a[i], b[j]));
        }
    }
}

// p = 2, m <= 8: bit-plane carry-less convolutions with modulus reduction.
void conv_gf2m(const FiniteField& F, const ff_t* a, std::size_t la, const ff_t* b,
               std::size_t lb, ff_t* out, std::size_t L) {
    const std::uint32_t m = F.m();
    const std::size_t lc = std::min(L, la + lb - 1);
    const std::size_t wa = (la + 63) / 64, wb = (lb + 63) / 64, wc = (lc + 63) / 64;
    std::vector<std::uint64_t> A(m * wa, 0), B(m * wb, 0);
    for (std::size_t i = 0; i < la; ++i) {
        ff_t v = a[i];
        for (std::uint32_t s = 0; s < m; ++s)
            if ((v >> s) & 1) A[s * wa + i / 64] |= 1ull << (i % 64);
    }
    for (std::size_t i = 0; i < lb; ++i) {
        ff_t v = b[i];
        for (std::uint32_t s = 0; s < m; ++s)
            if ((v >> s) & 1) B[s * wb + i / 64] |= 1ull << (i % 64);
    }
    std::vector<std::uint64_t> acc((2 * m - 1) * wc, 0);
    for (std::uint32_t s = 0; s < m; ++s) {
        const std::uint64_t* As = &A[s * wa];
        for (std::uint32_t t = 0; t < m; ++t) {
            const std::uint64_t* Bt = &B[t * wb];
            std::uint64_t* C = &acc[(s + t) * wc];
            for (std::size_t i = 0; i < la; ++i) {
                if (!((As[i / 64] >> (i % 64)) & 1)) continue;
                std::size_t off = i / 64, sh = i % 64;
                if (sh == 0) {
                    for (std::size_t w = 0; w < wb && off + w < wc; ++w) C[off + w] ^= Bt[w];
                } else {
                    std::uint64_t carry = 0;
                    for (std::size_t w = 0; w < wb && off + w < wc; ++w) {
                        C[off + w] ^= (Bt[w] << sh) | carry;
                        carry = Bt[w] >> (64 - sh);
                    }
                    if (off + wb < wc) C[off + wb] ^= carry;
                }
            }
        }
    }
    // Reduce powers y^k, k >= m, by the modulus (coefficients in F_2).
    const auto& mod = F.modulus();
    for (std::uint32_t k = 2 * m - 2; k >= m && k < 2 * m; --k) {
        std::uint64_t* src = &acc[k * wc];
        for (std::uint32_t j = 0; j < m; ++j) {
            if (mod[j] == 0) continue;
            std::uint64_t* dstp = &acc[(k - m + j) * wc];
            for (std::size_t w = 0; w < wc; ++w) dstp[w] ^= src[w];
        }
        if (k == m) break;
    }
    for (std::size_t i = 0; i < lc; ++i) {
        ff_t v = 0;
        for (std::uint32_t s = 0; s < m; ++s)
            v |= ((acc[s * wc + i / 64] >> (i % 64)) & 1) << s;
        out[i] = F.add(out[i], v);
    }
}

// p odd and small, m <= 2: digit-plane convolutions with 64-bit accumulators.
void conv_podd(const FiniteField& F, const ff_t* a, std::size_t la, const ff_t* b,
               std::size_t lb, ff_t* out, std::size_t L) {
    const std::uint32_t m = F.m(), p = F.p(), bits = F.digit_bits();
    const ff_t mask = (1ull << bits) - 1;
    const std::size_t lc = std::min(L, la + lb - 1);
    std::vector<std::uint32_t> A(m * la), B(m * lb);
    for (std::size_t i = 0; i < la; ++i)
        for (std::uint32_t s = 0; s < m; ++s) A[s * la + i] = (a[i] >> (s * bits)) & mask;
    for (std::size_t i = 0; i < lb; ++i)
        for (std::uint32_t s = 0; s < m; ++s) B[s * lb + i] = (b[i] >> (s * bits)) & mask;

    auto conv_into = [&](const std::uint32_t* x, const std::uint32_t* y,
                         std::vector<std::uint64_t>& acc) {
        for (std::size_t i = 0; i < la && i < lc; ++i) {
            std::uint64_t xi = x[i];
            if (!xi) continue;
            std::size_t jmax = std::min(lb, lc - i);
            std::uint64_t* dst = acc.data() + i;
            for (std::size_t j = 0; j < jmax; ++j) dst[j] += xi * y[j];
        }
    };

    if (m == 1) {
        std::vector<std::uint64_t> acc(lc, 0);
        conv_into(A.data(), B.data(), acc);
        for (std::size_t i = 0; i < lc; ++i)
            out[i] = F.add(out[i], static_cast<ff_t>(acc[i] % p));
        return;
    }
    // m == 2 with modulus x^2 + m1 x + m0
    std::vector<std::uint64_t> P00(lc, 0), P01(lc, 0), P10(lc, 0), P11(lc, 0);
    conv_into(&A[0], &B[0], P00);
    conv_into(&A[0], &B[lb], P01);
    conv_into(&A[la], &B[0], P10);
    conv_into(&A[la], &B[lb], P11);
    const std::uint64_t m0 = F.modulus()[0], m1 = F.modulus()[1];
    for (std::size_t i = 0; i < lc; ++i) {
        std::uint64_t t11 = P11[i] % p;
        std::uint64_t d0 = (P00[i] + (p - m0) * t11) % p;
        std::uint64_t d1 = (P01[i] + P10[i] + (p - m1) * t11) % p;
        ff_t v = (static_cast<ff_t>(d1) << bits) | d0;
        out[i] = F.add(out[i], v);
    }
}

void conv_dispatch(const FiniteField& F, const ff_t* a, std::size_t la, const ff_t* b,
                   std::size_t lb, ff_t* out, std::size_t L) {
    if (la == 0 || lb == 0 || L == 0) return;
    if (la > lb) {
        std::swap(a, b);
        std::swap(la, lb);
    }
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < la; ++i) nnz += (a[i] != 0);
    double work = double(nnz) * double(std::min(lb, L));
    if (work < 20000.0) {
        conv_generic(F, a, la, b, lb, out, L);
    } else if (F.p() == 2 && F.m() <= 8) {
        conv_gf2m(F, a, la, b, lb, out, L);
    } else if (F.p() <= 13 && F.m() <= 2) {
        conv_podd(F, a, la, b, lb, out, L);
    } else {
        conv_generic(F, a, la, b, lb, out, L);
    }
}

}  // namespace

// --- Tower ------------------------------------------------------------------

TowerPtr Tower::base(FieldPtr k, FieldPtr feps, Embedding feps_in_k, RawSeries zeta) {
    if (zeta.c.empty() || zeta.vmin < 1) throw InputError("tower: zeta must have positive valuation");
    if (zeta.c[0] == 0) throw InputError("tower: zeta expansion must be normalized");
    auto t = std::shared_ptr<Tower>(new Tower());
    t->F_ = std::move(k);
    t->Feps_ = std::move(feps);
    t->feps_in_k_ = std::move(feps_in_k);
    t->qhat_ = t->Feps_->q();
    t->zeta_val_ = zeta.vmin;
    t->zeta_ = std::move(zeta);
    t->level_.kind = LevelKind::Base;
    t->depth_ = 0;
    return t;
}

TowerPtr Tower::eisenstein_base(FieldPtr feps, std::int64_t e, std::int64_t zeta_prec) {
    if (e < 1) throw InputError("tower: ramification must be positive");
    // zeta = pi^e is exact; keep a precision far beyond any working budget
    RawSeries zeta{e, std::max(zeta_prec, kPrecCap), {feps->one()}};
    Embedding id;
    id.src = feps;
    id.dst = feps;
    id.gen_image = feps->m() > 1 ? feps->from_digits({0, 1}) : 0;
    return base(feps, feps, id, std::move(zeta));
}

TowerPtr Tower::adjoin_unramified(FieldPtr new_k, std::uint64_t seed) const {
    Embedding emb = make_embedding(F_, new_k, seed);
    auto t = std::shared_ptr<Tower>(new Tower());
    t->F_ = new_k;
    t->Feps_ = Feps_;
    // F_eps -> new k via composition.
    Embedding fe;
    fe.src = Feps_;
    fe.dst = new_k;
    fe.gen_image = emb.apply(feps_in_k_.gen_image);
    if (Feps_->m() == 1) fe.gen_image = 0;
    t->feps_in_k_ = fe;
    t->qhat_ = qhat_;
    t->zeta_val_ = zeta_val_;
    t->zeta_.vmin = zeta_.vmin;
    t->zeta_.prec = zeta_.prec;
    t->zeta_.c.resize(zeta_.c.size());
    for (std::size_t i = 0; i < zeta_.c.size(); ++i) t->zeta_.c[i] = emb.apply(zeta_.c[i]);
    t->parent_ = shared_from_this();
    t->level_.kind = LevelKind::Unramified;
    t->level_.ram = 1;
    t->level_.emb = emb;
    t->depth_ = depth_ + 1;
    return t;
}

TowerPtr Tower::adjoin_radical(std::int64_t e, ff_t cconst) const {
    if (e < 2) throw InputError("tower: radical level needs e >= 2");
    if (cconst == 0) throw InputError("tower: radical constant must be a unit");
    auto t = std::shared_ptr<Tower>(new Tower());
    t->F_ = F_;
    t->Feps_ = Feps_;
    t->feps_in_k_ = feps_in_k_;
    t->qhat_ = qhat_;
    t->zeta_val_ = zeta_val_ * e;
    t->zeta_.vmin = zeta_.vmin * e;
    t->zeta_.prec = sat_mul(zeta_.prec, e);
    t->zeta_.c.assign(zeta_.c.size() ? (zeta_.c.size() - 1) * e + 1 : 0, 0);
    // pi_old^j = cconst^j pi_new^{je}
    ff_t cpow = F_->pow(cconst, static_cast<std::uint64_t>(zeta_.vmin % (F_->q() - 1 ? F_->q() - 1 : 1)));
    // compute cconst^j incrementally instead (exponents j = vmin..):
    {
        ff_t cj = F_->one();
        std::int64_t j = zeta_.vmin;
        if (j >= 0) {
            for (std::int64_t i = 0; i < j; ++i) cj = F_->mul(cj, cconst);
        } else {
            ff_t ci = F_->inv(cconst);
            for (std::int64_t i = 0; i < -j; ++i) cj = F_->mul(cj, ci);
        }
        cpow = cj;
        for (std::size_t i = 0; i < zeta_.c.size(); ++i) {
            if (zeta_.c[i] != 0) t->zeta_.c[i * e] = F_->mul(zeta_.c[i], cpow);
            cpow = F_->mul(cpow, cconst);
        }
    }
    t->parent_ = shared_from_this();
    t->level_.kind = LevelKind::Radical;
    t->level_.ram = e;
    t->level_.radical_const = cconst;
    t->depth_ = depth_ + 1;
    return t;
}

TowerPtr Tower::adjoin_cohen(std::int64_t e, RawSeries pi_old_expansion) const {
    if (e < 2) throw InputError("tower: cohen level needs e >= 2");
    if (pi_old_expansion.vmin != e || pi_old_expansion.c.empty() || pi_old_expansion.c[0] == 0)
        throw InputError("tower: cohen expansion must start with a unit at exponent e");
    auto t = std::shared_ptr<Tower>(new Tower());
    t->F_ = F_;
    t->Feps_ = Feps_;
    t->feps_in_k_ = feps_in_k_;
    t->qhat_ = qhat_;
    t->zeta_val_ = zeta_val_ * e;
    t->parent_ = shared_from_this();
    t->level_.kind = LevelKind::Cohen;
    t->level_.ram = e;
    t->level_.cohen_pi_old = std::move(pi_old_expansion);
    t->depth_ = depth_ + 1;
    // zeta re-expanded through the level map.
    LFE zold;
    zold.tw = shared_from_this();
    zold.vmin = zeta_.vmin;
    zold.prec = zeta_.prec;
    zold.c = zeta_.c;
    LFE znew = t->lift(zold);
    t->zeta_.vmin = znew.vmin;
    t->zeta_.prec = znew.prec;
    t->zeta_.c = znew.c;
    return t;
}

LFE Tower::zeta(std::int64_t prec) const {
    LFE z;
    z.tw = shared_from_this();
    z.vmin = zeta_.vmin;
    z.prec = (prec < 0) ? zeta_.prec : std::min<std::int64_t>(prec, zeta_.prec);
    std::size_t len = 0;
    if (z.prec > z.vmin) len = std::min<std::size_t>(zeta_.c.size(), static_cast<std::size_t>(z.prec - z.vmin));
    z.c.assign(zeta_.c.begin(), zeta_.c.begin() + len);
    lfe_normalize(z);
    return z;
}

bool Tower::is_ancestor_of(const Tower* other) const {
    while (other) {
        if (other == this) return true;
        other = other->parent_.get();
    }
    return false;
}

LFE Tower::lift(const LFE& x) const {
    if (x.tw.get() == this) return x;
    if (!x.tw || !x.tw->is_ancestor_of(this)) throw InputError("tower: lift from non-ancestor");
    // Collect chain from x's tower (exclusive) to this (inclusive).
    std::vector<const Tower*> chain;
    for (const Tower* t = this; t != x.tw.get(); t = t->parent_.get()) chain.push_back(t);
    LFE cur = x;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        const Tower* t = *it;
        const Level& lv = t->level_;
        LFE nxt;
        nxt.tw = t->shared_from_this();
        switch (lv.kind) {
            case LevelKind::Unramified: {
                nxt.vmin = cur.vmin;
                nxt.prec = cur.prec;
                nxt.c.resize(cur.c.size());
                for (std::size_t i = 0; i < cur.c.size(); ++i) nxt.c[i] = lv.emb.apply(cur.c[i]);
                break;
            }
            case LevelKind::Radical: {
                const FiniteField& F = *t->F_;
                nxt.vmin = cur.vmin * lv.ram;
                nxt.prec = sat_mul(cur.prec, lv.ram);
                nxt.c.assign(cur.c.size() ? (cur.c.size() - 1) * lv.ram + 1 : 0, 0);
                ff_t cj = F.one();
                if (cur.vmin >= 0) {
                    for (std::int64_t i = 0; i < cur.vmin; ++i) cj = F.mul(cj, lv.radical_const);
                } else {
                    ff_t ci = F.inv(lv.radical_const);
                    for (std::int64_t i = 0; i < -cur.vmin; ++i) cj = F.mul(cj, ci);
                }
                for (std::size_t i = 0; i < cur.c.size(); ++i) {
                    if (cur.c[i] != 0) nxt.c[i * lv.ram] = F.mul(cur.c[i], cj);
                    cj = F.mul(cj, lv.radical_const);
                }
                break;
            }
            case LevelKind::Cohen: {
                // Substitute pi_old = P(pi_new) by Horner on the polynomial part.
                LFE P = lfe_from_raw(t->shared_from_this(), lv.cohen_pi_old);
                std::int64_t target_prec = std::min(sat_mul(cur.prec, lv.ram), P.prec);
                LFE r = lfe_zero(t->shared_from_this(), target_prec);
                for (std::size_t i = cur.c.size(); i-- > 0;) {
                    r = lfe_mul(r, P);
                    r = lfe_truncate(r, target_prec);
                    if (cur.c[i] != 0) r = lfe_add(r, lfe_const(t->shared_from_this(), cur.c[i], target_prec));
                }
                // multiply by P^{vmin}
                if (cur.vmin != 0) {
                    LFE Pp = lfe_pow(P, cur.vmin);
                    r = lfe_mul(r, Pp);
                }
                r.prec = std::min(r.prec, target_prec);
                nxt = r;
                break;
            }
            case LevelKind::Base:
                throw Error("tower: malformed chain");
        }
        lfe_normalize(nxt);
        cur = std::move(nxt);
    }
    return cur;
}

std::string Tower::describe() const {
    std::ostringstream os;
    std::vector<const Tower*> chain;
    for (const Tower* t = this; t; t = t->parent_.get()) chain.push_back(t);
    os << "GF(" << Feps_->q() << ")";
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        const Tower* t = *it;
        switch (t->level_.kind) {
            case LevelKind::Base:
                os << "((pi))[k=GF(" << t->F_->q() << "), v(zeta)=" << t->zeta_val_ << "]";
                break;
            case LevelKind::Unramified:
                os << " -> unram GF(" << t->F_->q() << ")";
                break;
            case LevelKind::Radical:
                os << " -> radical e=" << t->level_.ram;
                break;
            case LevelKind::Cohen:
                os << " -> wild e=" << t->level_.ram;
                break;
        }
    }
    return os.str();
}

// --- LFE basics ---------------------------------------------------------------

Rational LFE::val_zeta() const {
    if (c.empty()) throw PrecisionExhausted("val_zeta of zero-to-precision element");
    return Rational(vmin, tw->zeta_val());
}

LFE lfe_zero(const TowerPtr& tw, std::int64_t prec) {
    LFE x;
    x.tw = tw;
    x.vmin = prec;
    x.prec = prec;
    return x;
}

LFE lfe_const(const TowerPtr& tw, ff_t a, std::int64_t prec) {
    LFE x;
    x.tw = tw;
    x.vmin = 0;
    x.prec = prec;
    if (a != 0 && prec > 0) x.c = {a};
    if (x.c.empty()) x.vmin = prec;
    return x;
}

LFE lfe_one(const TowerPtr& tw, std::int64_t prec) { return lfe_const(tw, tw->field()->one(), prec); }

LFE lfe_monomial(const TowerPtr& tw, ff_t a, std::int64_t exp, std::int64_t prec) {
    LFE x;
    x.tw = tw;
    x.prec = prec;
    if (a != 0 && exp < prec) {
        x.vmin = exp;
        x.c = {a};
    } else {
        x.vmin = prec;
    }
    return x;
}

LFE lfe_from_raw(const TowerPtr& tw, RawSeries raw) {
    LFE x;
    x.tw = tw;
    x.vmin = raw.vmin;
    x.prec = raw.prec;
    x.c = std::move(raw.c);
    lfe_normalize(x);
    return x;
}

void lfe_normalize(LFE& x) {
    std::size_t lead = 0;
    while (lead < x.c.size() && x.c[lead] == 0) ++lead;
    if (lead) {
        x.c.erase(x.c.begin(), x.c.begin() + lead);
        x.vmin += static_cast<std::int64_t>(lead);
    }
    // clip stored tail to prec
    if (x.vmin + static_cast<std::int64_t>(x.c.size()) > x.prec) {
        std::int64_t keep = x.prec - x.vmin;
        x.c.resize(keep > 0 ? static_cast<std::size_t>(keep) : 0);
    }
    while (!x.c.empty() && x.c.back() == 0) x.c.pop_back();
    if (x.c.empty()) x.vmin = x.prec;
}

void lfe_unify(LFE& a, LFE& b) {
    if (a.tw.get() == b.tw.get()) return;
    if (a.tw->is_ancestor_of(b.tw.get())) {
        a = b.tw->lift(a);
    } else if (b.tw->is_ancestor_of(a.tw.get())) {
        b = a.tw->lift(b);
    } else {
        throw IncompatibleAmbient("lfe: elements live in unrelated towers");
    }
}

LFE lfe_truncate(const LFE& a, std::int64_t new_prec) {
    LFE x = a;
    if (new_prec < x.prec) {
        x.prec = new_prec;
        lfe_normalize(x);
    }
    return x;
}

ff_t lfe_coeff(const LFE& a, std::int64_t exp) {
    if (exp >= a.prec) throw PrecisionExhausted("lfe_coeff beyond precision");
    if (exp < a.vmin || exp >= a.vmin + static_cast<std::int64_t>(a.c.size())) return 0;
    return a.c[static_cast<std::size_t>(exp - a.vmin)];
}

bool lfe_is_feps_constant(const LFE& a, ff_t* value) {
    LFE x = a;
    lfe_normalize(x);
    if (x.c.empty()) {
        if (value) *value = 0;
        return true;
    }
    if (x.vmin != 0 || x.c.size() != 1) return false;
    ff_t pre = 0;
    if (!in_subfield(x.tw->feps_embedding(), x.c[0], &pre)) return false;
    if (value) *value = pre;
    return true;
}

// --- LFE arithmetic -----------------------------------------------------------

LFE lfe_add(const LFE& a0, const LFE& b0) {
    LFE a = a0, b = b0;
    lfe_unify(a, b);
    const FiniteField& F = *a.tw->field();
    LFE r;
    r.tw = a.tw;
    r.prec = std::min(a.prec, b.prec);
    std::int64_t lo = std::min(a.vmin, b.vmin);
    std::int64_t hi = std::max(a.vmin + static_cast<std::int64_t>(a.c.size()),
                               b.vmin + static_cast<std::int64_t>(b.c.size()));
    hi = std::min(hi, r.prec);
    if (hi < lo) hi = lo;
    r.vmin = lo;
    r.c.assign(static_cast<std::size_t>(hi - lo), 0);
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        std::int64_t e = a.vmin + static_cast<std::int64_t>(i);
        if (e >= hi) break;
        r.c[e - lo] = a.c[i];
    }
    for (std::size_t i = 0; i < b.c.size(); ++i) {
        std::int64_t e = b.vmin + static_cast<std::int64_t>(i);
        if (e >= hi) break;
        r.c[e - lo] = F.add(r.c[e - lo], b.c[i]);
    }
    lfe_normalize(r);
    return r;
}

LFE lfe_neg(const LFE& a) {
    LFE r = a;
    const FiniteField& F = *a.tw->field();
    for (auto& x : r.c) x = F.neg(x);
    return r;
}

LFE lfe_sub(const LFE& a, const LFE& b) { return lfe_add(a, lfe_neg(b)); }

LFE lfe_scale(const LFE& a, ff_t cst) {
    const FiniteField& F = *a.tw->field();
    if (cst == 0) return lfe_zero(a.tw, a.prec);
    LFE r = a;
    for (auto& x : r.c) x = F.mul(x, cst);
    return r;
}

LFE lfe_shift(const LFE& a, std::int64_t e) {
    LFE r = a;
    r.vmin = sat_add(r.vmin, e);
    r.prec = sat_add(r.prec, e);
    return r;
}

LFE lfe_mul(const LFE& a0, const LFE& b0) {
    LFE a = a0, b = b0;
    lfe_unify(a, b);
    const FiniteField& F = *a.tw->field();
    // valuation lower bounds
    std::int64_t va = a.val_or_prec(), vb = b.val_or_prec();
    LFE r;
    r.tw = a.tw;
    r.prec = std::min(sat_add(a.prec, vb), sat_add(b.prec, va));
    if (a.c.empty() || b.c.empty()) {
        r.vmin = r.prec;
        return r;
    }
    r.vmin = a.vmin + b.vmin;
    std::int64_t hi = std::min(r.prec, r.vmin + static_cast<std::int64_t>(a.c.size() + b.c.size()) - 1);
    if (hi <= r.vmin) {
        r.vmin = r.prec;
        return r;
    }
    std::size_t L = static_cast<std::size_t>(hi - r.vmin);
    r.c.assign(L, 0);
    conv_dispatch(F, a.c.data(), a.c.size(), b.c.data(), b.c.size(), r.c.data(), L);
    lfe_normalize(r);
    return r;
}

LFE lfe_inv(const LFE& a0) {
    LFE a = a0;
    lfe_normalize(a);
    if (a.c.empty()) throw NotAUnit("lfe_inv: zero to precision");
    const FiniteField& F = *a.tw->field();
    std::int64_t v = a.vmin;
    // unit part y = a * pi^{-v}, reciprocal by Newton iteration
    LFE y = lfe_shift(a, -v);
    std::int64_t P = y.prec;  // absolute target precision of the reciprocal
    LFE r = lfe_const(a.tw, F.inv(y.c[0]), 1);
    std::int64_t cur = 1;
    while (cur < P) {
        cur = std::min<std::int64_t>(2 * cur, P);
        LFE yt = lfe_truncate(y, cur);
        r.prec = cur;
        LFE e = lfe_sub(lfe_one(a.tw, cur), lfe_mul(yt, r));
        r = lfe_add(r, lfe_mul(r, e));
        r = lfe_truncate(r, cur);
    }
    return lfe_shift(r, -v);
}

LFE lfe_div(const LFE& a, const LFE& b) { return lfe_mul(a, lfe_inv(b)); }

LFE lfe_pow(const LFE& a, std::int64_t e) {
    if (e == 0) return lfe_one(a.tw, a.prec > a.vmin ? a.prec - a.vmin : 1);
    LFE base = e < 0 ? lfe_inv(a) : a;
    std::uint64_t n = static_cast<std::uint64_t>(e < 0 ? -e : e);
    LFE r = base;
    n -= 1;
    while (n) {
        if (n & 1) r = lfe_mul(r, base);
        base = lfe_mul(base, base);
        n >>= 1;
    }
    return r;
}

bool lfe_eq(const LFE& a0, const LFE& b0) {
    LFE d = lfe_sub(a0, b0);
    return d.c.empty();
}

LFE lfe_frob(const LFE& a, std::uint64_t pk_log) {
    if (pk_log == 0) return a;
    const FiniteField& F = *a.tw->field();
    std::int64_t scale = 1;
    for (std::uint64_t i = 0; i < pk_log; ++i) {
        scale = sat_mul(scale, F.p());
        if (scale >= kPrecCap) break;
    }
    LFE r;
    r.tw = a.tw;
    r.prec = sat_mul(a.prec, scale >= kPrecCap ? kPrecCap : scale);
    if (a.c.empty()) {
        r.vmin = r.prec;
        return r;
    }
    r.vmin = a.vmin * scale;
    r.c.assign((a.c.size() - 1) * static_cast<std::size_t>(scale) + 1, 0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
        if (a.c[i] != 0) r.c[i * scale] = F.frobenius(a.c[i], pk_log);
    lfe_normalize(r);
    return r;
}

LFE lfe_sigma(const LFE& a, std::uint64_t j) {
    return lfe_frob(a, static_cast<std::uint64_t>(a.tw->feps()->m()) * j);
}

bool lfe_sigma_inv_possible(const LFE& a, std::uint64_t j) {
    std::int64_t qj = 1;
    for (std::uint64_t i = 0; i < j; ++i) qj *= static_cast<std::int64_t>(a.tw->qhat());
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        if (a.c[i] == 0) continue;
        if ((a.vmin + static_cast<std::int64_t>(i)) % qj != 0) return false;
    }
    return true;
}

LFE lfe_sigma_inv(const LFE& a, std::uint64_t j) {
    if (j == 0) return a;
    const FiniteField& F = *a.tw->field();
    std::int64_t qj = 1;
    for (std::uint64_t i = 0; i < j; ++i) qj *= static_cast<std::int64_t>(a.tw->qhat());
    if (!lfe_sigma_inv_possible(a, j))
        throw PrecisionExhausted("lfe_sigma_inv: exponents not divisible; adjoin radical level");
    LFE r;
    r.tw = a.tw;
    // unknown region of a starts at a.prec; root known below ceil(prec/qj)
    auto ceil_div = [](std::int64_t x, std::int64_t d) {
        return x >= 0 ? (x + d - 1) / d : -((-x) / d);
    };
    r.prec = ceil_div(a.prec, qj);
    if (a.c.empty()) {
        r.vmin = r.prec;
        return r;
    }
    r.vmin = a.vmin / qj;
    std::int64_t last = a.vmin + static_cast<std::int64_t>(a.c.size()) - 1;
    r.c.assign(static_cast<std::size_t>(last / qj - r.vmin) + 1, 0);
    std::uint64_t flog = static_cast<std::uint64_t>(a.tw->feps()->m()) * j;
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        if (a.c[i] == 0) continue;
        std::int64_t e = a.vmin + static_cast<std::int64_t>(i);
        r.c[static_cast<std::size_t>(e / qj - r.vmin)] = F.root_frobenius(a.c[i], flog);
    }
    lfe_normalize(r);
    return r;
}

std::string lfe_str(const LFE& a, int max_terms) {
    std::ostringstream os;
    const FiniteField& F = *a.tw->field();
    int shown = 0;
    bool first = true;
    for (std::size_t i = 0; i < a.c.size() && shown < max_terms; ++i) {
        if (a.c[i] == 0) continue;
        if (!first) os << " + ";
        os << F.index(a.c[i]) << "*pi^" << (a.vmin + static_cast<std::int64_t>(i));
        first = false;
        ++shown;
    }
    if (first) os << "0";
    os << " + O(pi^" << a.prec << ")";
    return os.str();
}

// --- Newton polygon -----------------------------------------------------------

NewtonPolygonData newton_polygon(const std::vector<std::pair<std::int64_t, Rational>>& pts_in) {
    if (pts_in.size() < 2) throw DegenerateInput("newton_polygon: need at least two finite points");
    auto pts = pts_in;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    // Keep min valuation for duplicate x.
    std::vector<std::pair<std::int64_t, Rational>> uniq;
    for (auto& p : pts) {
        if (!uniq.empty() && uniq.back().first == p.first) continue;
        uniq.push_back(p);
    }
    if (uniq.size() < 2) throw DegenerateInput("newton_polygon: need two distinct degrees");

    NewtonPolygonData out;
    out.points = uniq;
    std::vector<std::pair<std::int64_t, Rational>> hull;
    for (auto& p : uniq) {
        while (hull.size() >= 2) {
            auto& a = hull[hull.size() - 2];
            auto& b = hull[hull.size() - 1];
            Rational s1 = (b.second - a.second) / Rational(b.first - a.first);
            Rational s2 = (p.second - b.second) / Rational(p.first - b.first);
            if (s1 >= s2)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    out.hull = hull;
    for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
        NewtonSegment seg;
        seg.slope = (hull[i + 1].second - hull[i].second) / Rational(hull[i + 1].first - hull[i].first);
        seg.length = hull[i + 1].first - hull[i].first;
        out.segments.push_back(seg);
    }
    return out;
}

}  // namespace shtukalab
