#include "shtukalab/zseries.hpp"

#include <algorithm>

namespace shtukalab {

namespace {
constexpr std::int64_t kNoBound = (std::int64_t(1) << 50);

std::int64_t uz_min_prec(const UZSeries& a) {
    std::int64_t m = kNoBound;
    for (auto& x : a.c) m = std::min(m, x.prec);
    return m;
}

// binomial C(n, k) mod p for n possibly negative, via Lucas.
std::uint64_t binom_nonneg_mod_p(std::uint64_t n, std::uint64_t k, std::uint32_t p) {
    std::uint64_t out = 1;
    while (n || k) {
        std::uint64_t nd = n % p, kd = k % p;
        if (kd > nd) return 0;
        std::uint64_t bb = 1;
        for (std::uint64_t t = 0; t < kd; ++t) {
            std::uint64_t num = (nd - t) % p;
            std::uint64_t den = (t + 1) % p;
            std::uint64_t dinv = 1, b2 = den, e2 = p - 2;
            while (e2) {
                if (e2 & 1) dinv = dinv * b2 % p;
                b2 = b2 * b2 % p;
                e2 >>= 1;
            }
            bb = bb * num % p * dinv % p;
        }
        out = out * bb % p;
        n /= p;
        k /= p;
    }
    return out;
}

// C(i, k) mod p with integer i (negative allowed).
std::pair<std::uint64_t, bool> binom_mod_p(std::int64_t i, std::int64_t k, std::uint32_t p) {
    if (k < 0) return {0, false};
    if (i >= 0) {
        if (k > i) return {0, false};
        return {binom_nonneg_mod_p(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k), p), false};
    }
    // C(i, k) = (-1)^k C(k - i - 1, k)
    std::uint64_t v = binom_nonneg_mod_p(static_cast<std::uint64_t>(k - i - 1),
                                         static_cast<std::uint64_t>(k), p);
    return {v, k % 2 == 1};
}
}  // namespace

UZSeries uz_zero(const TowerPtr& tw, std::int64_t umin, std::int64_t uprec, std::int64_t pi_prec) {
    UZSeries s;
    s.tw = tw;
    s.umin = umin;
    s.uprec = uprec;
    s.c.assign(static_cast<std::size_t>(std::max<std::int64_t>(uprec - umin, 0)), lfe_zero(tw, pi_prec));
    return s;
}

UZSeries uz_const(const LFE& a, std::int64_t uprec) {
    UZSeries s = uz_zero(a.tw, 0, uprec, a.prec);
    if (uprec > 0) s.c[0] = a;
    return s;
}

UZSeries uz_monomial(const LFE& a, std::int64_t uexp, std::int64_t uprec) {
    UZSeries s = uz_zero(a.tw, std::min(uexp, uprec), uprec, a.prec);
    if (uexp < uprec) s.c[static_cast<std::size_t>(uexp - s.umin)] = a;
    return s;
}

LFE uz_coeff(const UZSeries& a, std::int64_t i) {
    if (i >= a.uprec) throw PrecisionExhausted("uz_coeff: beyond u-precision");
    if (i < a.umin) return lfe_zero(a.tw, a.c.empty() ? 0 : a.c[0].prec);
    return a.c[static_cast<std::size_t>(i - a.umin)];
}

UZSeries uz_lift(const TowerPtr& tw, const UZSeries& a) {
    if (tw.get() == a.tw.get()) return a;
    UZSeries out = a;
    out.tw = tw;
    for (auto& x : out.c) x = tw->lift(x);
    return out;
}

namespace {
void uz_unify(UZSeries& a, UZSeries& b) {
    if (a.tw.get() == b.tw.get()) return;
    if (a.tw->is_ancestor_of(b.tw.get()))
        a = uz_lift(b.tw, a);
    else if (b.tw->is_ancestor_of(a.tw.get()))
        b = uz_lift(a.tw, b);
    else
        throw IncompatibleAmbient("uz: unrelated towers");
}
}  // namespace

UZSeries uz_add(const UZSeries& a0, const UZSeries& b0) {
    UZSeries a = a0, b = b0;
    uz_unify(a, b);
    UZSeries out;
    out.tw = a.tw;
    out.umin = std::min(a.umin, b.umin);
    out.uprec = std::min(a.uprec, b.uprec);
    out.umin = std::min(out.umin, out.uprec);
    std::int64_t pi_prec = std::min(uz_min_prec(a), uz_min_prec(b));
    out.c.assign(static_cast<std::size_t>(out.uprec - out.umin), lfe_zero(out.tw, pi_prec));
    for (std::int64_t i = out.umin; i < out.uprec; ++i) {
        LFE va = (i >= a.umin && i < a.uprec) ? a.c[static_cast<std::size_t>(i - a.umin)]
                                              : lfe_zero(a.tw, pi_prec);
        LFE vb = (i >= b.umin && i < b.uprec) ? b.c[static_cast<std::size_t>(i - b.umin)]
                                              : lfe_zero(b.tw, pi_prec);
        out.c[static_cast<std::size_t>(i - out.umin)] = lfe_add(va, vb);
    }
    return out;
}

UZSeries uz_neg(const UZSeries& a) {
    UZSeries out = a;
    for (auto& x : out.c) x = lfe_neg(x);
    return out;
}

UZSeries uz_sub(const UZSeries& a, const UZSeries& b) { return uz_add(a, uz_neg(b)); }

UZSeries uz_mul(const UZSeries& a0, const UZSeries& b0) {
    UZSeries a = a0, b = b0;
    uz_unify(a, b);
    UZSeries out;
    out.tw = a.tw;
    out.umin = a.umin + b.umin;
    out.uprec = std::min(a.uprec + b.umin, b.uprec + a.umin);
    constexpr std::int64_t kBig = (std::int64_t(1) << 40);
    out.c.assign(static_cast<std::size_t>(std::max<std::int64_t>(out.uprec - out.umin, 0)),
                 lfe_zero(out.tw, kBig));
    std::vector<std::int64_t> caps(out.c.size(), kBig);
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        bool azero = a.c[i].zero_to_prec();
        for (std::size_t j = 0; j < b.c.size(); ++j) {
            bool bzero = b.c[j].zero_to_prec();
            std::int64_t k = a.umin + static_cast<std::int64_t>(i) + b.umin + static_cast<std::int64_t>(j);
            if (k < out.umin || k >= out.uprec) continue;
            std::size_t slot = static_cast<std::size_t>(k - out.umin);
            if (azero || bzero) {
                std::int64_t cap = std::min(a.c[i].prec + b.c[j].val_or_prec(),
                                            b.c[j].prec + a.c[i].val_or_prec());
                caps[slot] = std::min(caps[slot], cap);
                continue;
            }
            out.c[slot] = lfe_add(out.c[slot], lfe_mul(a.c[i], b.c[j]));
        }
    }
    for (std::size_t s = 0; s < out.c.size(); ++s)
        if (caps[s] < out.c[s].prec) out.c[s] = lfe_truncate(out.c[s], caps[s]);
    return out;
}

UZSeries uz_scale(const UZSeries& a, const LFE& s) {
    UZSeries out = a;
    for (auto& x : out.c) {
        LFE xs = x, ss = s;
        lfe_unify(xs, ss);
        x = lfe_mul(xs, ss);
        out.tw = x.tw;
    }
    for (auto& x : out.c) x = out.tw->lift(x);
    return out;
}

UZSeries uz_shift(const UZSeries& a, std::int64_t k) {
    UZSeries out = a;
    out.umin += k;
    out.uprec += k;
    return out;
}

UZSeries uz_truncate(const UZSeries& a, std::int64_t new_uprec) {
    UZSeries out = a;
    if (new_uprec < out.uprec) {
        out.uprec = new_uprec;
        if (out.umin > out.uprec) out.umin = out.uprec;
        out.c.resize(static_cast<std::size_t>(std::max<std::int64_t>(out.uprec - out.umin, 0)));
    }
    return out;
}

bool uz_zero_to_prec(const UZSeries& a) {
    for (auto& x : a.c)
        if (!x.zero_to_prec()) return false;
    return true;
}

std::optional<std::int64_t> uz_order(const UZSeries& a) {
    for (std::int64_t i = a.umin; i < a.uprec; ++i)
        if (!a.c[static_cast<std::size_t>(i - a.umin)].zero_to_prec()) return i;
    return std::nullopt;
}

UZSeries uz_inv(const UZSeries& a) {
    auto ord = uz_order(a);
    if (!ord) throw NotAUnit("uz_inv: zero to precision");
    std::int64_t v = *ord;
    UZSeries u = uz_shift(a, -v);
    // drop below-order slots
    if (u.umin < 0) {
        u.c.erase(u.c.begin(), u.c.begin() + static_cast<std::ptrdiff_t>(-u.umin));
        u.umin = 0;
    }
    std::int64_t N = u.uprec;
    if (N <= 0) throw PrecisionExhausted("uz_inv: empty window");
    LFE c0inv = lfe_inv(u.c[0]);
    UZSeries r = uz_const(c0inv, 1);
    std::int64_t cur = 1;
    while (cur < N) {
        cur = std::min<std::int64_t>(2 * cur, N);
        UZSeries ut = uz_truncate(u, cur);
        r.uprec = cur;
        r.c.resize(static_cast<std::size_t>(cur - r.umin), lfe_zero(r.tw, c0inv.prec));
        UZSeries one = uz_const(lfe_one(r.tw, c0inv.prec), cur);
        UZSeries e = uz_sub(one, uz_truncate(uz_mul(ut, r), cur));
        r = uz_add(r, uz_truncate(uz_mul(r, e), cur));
        r = uz_truncate(r, cur);
    }
    return uz_shift(r, -v);
}

UZSeries to_u_expansion(const ZSeries& a, std::int64_t u_prec) {
    if (a.tail.kind == TailBound::Geometric && a.tail.growth.num <= 0)
        throw DivergentReexpansion("to_u_expansion: tail growth condition fails");
    const TowerPtr& tw = a.tw;
    std::int64_t vz = tw->zeta_val();
    std::int64_t pi_prec = zs_min_coeff_prec(a);
    // zeta powers needed: a.zmin .. a.zprec-1 minus j
    UZSeries out = uz_zero(tw, 0, u_prec, pi_prec);
    LFE zeta = tw->zeta(pi_prec + (std::max<std::int64_t>(-a.zmin + u_prec, 1) + 1) * vz);
    for (std::int64_t j = 0; j < u_prec; ++j) {
        LFE acc = lfe_zero(tw, pi_prec);
        for (std::int64_t i = a.zmin; i < a.zprec; ++i) {
            const LFE& b = a.c[static_cast<std::size_t>(i - a.zmin)];
            if (b.zero_to_prec() && b.prec >= pi_prec + std::max<std::int64_t>(0, j - i) * vz) continue;
            auto [bn, neg] = binom_mod_p(i, j, tw->p());
            if (bn == 0) continue;
            std::int64_t e = i - j;
            LFE zp = e >= 0 ? lfe_pow(zeta, e) : lfe_inv(lfe_pow(zeta, -e));
            LFE term = lfe_scale(lfe_mul(b, zp), tw->field()->from_prime(bn));
            if (neg) term = lfe_neg(term);
            acc = lfe_add(acc, term);
        }
        // cap precision by the unknown-window and tail bounds
        std::int64_t cap = acc.prec;
        if (a.val_floor) {
            Rational rb = *a.val_floor + Rational((a.zprec - j) * vz);
            cap = std::min(cap, rb.num >= 0 ? rb.num / rb.den : -((-rb.num + rb.den - 1) / rb.den));
        } else {
            cap = std::min(cap, (a.zprec - j) * vz);
        }
        if (a.tail.kind == TailBound::Geometric) {
            for (std::int64_t t = 1; t <= a.tail.t0 + 40; ++t) {
                std::int64_t shift = t - a.tail.t0;
                Rational g = shift <= 0 ? Rational(0) : Rational(1);
                (void)g;
                Rational bound = a.tail.base;
                if (shift > 0) {
                    Rational qe(1);
                    bool overflow = false;
                    std::int64_t r = 1;
                    for (std::int64_t s2 = 0; s2 < shift; ++s2) {
                        if (r > (std::int64_t(1) << 45) / static_cast<std::int64_t>(tw->qhat())) {
                            overflow = true;
                            break;
                        }
                        r *= static_cast<std::int64_t>(tw->qhat());
                    }
                    if (overflow) break;
                    qe = Rational(r);
                    bound = a.tail.base + a.tail.growth * qe;
                }
                Rational tot = bound + Rational((a.zmin - t - j) * vz);
                std::int64_t ti = tot.num >= 0 ? tot.num / tot.den : -((-tot.num + tot.den - 1) / tot.den);
                cap = std::min(cap, ti);
            }
        }
        out.c[static_cast<std::size_t>(j)] = lfe_truncate(acc, cap);
    }
    return out;
}

UZSeries to_u_expansion(const ZZetaFrac& f, std::int64_t u_prec) {
    UZSeries num = to_u_expansion(f.num, u_prec + f.pole);
    return uz_shift(num, -f.pole);
}

ZSeries from_u_polynomial(const UZSeries& a, std::int64_t zprec) {
    std::int64_t pi_prec = uz_min_prec(a);
    ZSeries zmz = zs_z_minus_zeta(a.tw, zprec, pi_prec);
    ZSeries out = zs_zero(a.tw, 0, zprec, pi_prec);
    // Horner over nonnegative part; negative exponents via expanded inverses
    for (std::int64_t i = a.uprec - 1; i >= std::max<std::int64_t>(a.umin, 0); --i) {
        out = zs_mul(out, zmz);
        out = zs_truncate(out, zprec);
        out = zs_add(out, zs_const(uz_coeff(a, i), zprec));
    }
    if (a.umin < 0) {
        ZZetaFrac inv{zs_z_minus_zeta(a.tw, zprec, pi_prec), 0};
        ZSeries invz = zzf_expand(ZZetaFrac{zs_const(lfe_one(a.tw, pi_prec), zprec), 1});
        ZSeries negpart = zs_zero(a.tw, 0, zprec, pi_prec);
        for (std::int64_t i = a.umin; i < std::min<std::int64_t>(a.uprec, 0); ++i) {
            ZSeries t = zs_const(uz_coeff(a, i), zprec);
            for (std::int64_t k = 0; k < -i; ++k) t = zs_truncate(zs_mul(t, invz), zprec);
            negpart = zs_add(negpart, t);
        }
        out = zs_add(out, negpart);
        (void)inv;
    }
    return out;
}

}  // namespace shtukalab
