#include "shtukalab/zseries.hpp"

#include <algorithm>

namespace shtukalab {

namespace {

constexpr std::int64_t kNoBound = (std::int64_t(1) << 50);

Rational qpow_rational(std::int64_t q, std::int64_t e) {
    if (e > 40) return Rational(kNoBound);
    std::int64_t r = 1;
    for (std::int64_t i = 0; i < e; ++i) {
        if (r > kNoBound / q) return Rational(kNoBound);
        r *= q;
    }
    return Rational(r);
}

// Lower bound (pi-units) for the coefficient at zmin - t, t >= 1.
Rational tail_bound_at(const TailBound& tb, std::int64_t qhat, std::int64_t t) {
    if (tb.kind == TailBound::ExactZero) return Rational(kNoBound);
    std::int64_t shift = t - tb.t0;
    if (shift <= 0) return tb.base;
    Rational g = qpow_rational(qhat, shift);
    if (g.num >= kNoBound) return Rational(kNoBound);
    return tb.base + tb.growth * g;
}

TailBound tail_min(const TailBound& a, const TailBound& b) {
    if (a.kind == TailBound::ExactZero) return b;
    if (b.kind == TailBound::ExactZero) return a;
    TailBound out;
    out.kind = TailBound::Geometric;
    out.base = rmin(a.base, b.base);
    out.growth = rmin(a.growth, b.growth);
    out.t0 = std::max(a.t0, b.t0);
    return out;
}

// Tail of a product: contributions shift by the window span of the other
// factor and gain its minimal valuation.
TailBound tail_product(const TailBound& ta, std::int64_t span_b, Rational minval_b) {
    if (ta.kind == TailBound::ExactZero) return ta;
    TailBound out = ta;
    out.t0 += std::max<std::int64_t>(span_b - 1, 0);
    out.base = ta.base + minval_b;
    return out;
}

Rational min_stored_val(const ZSeries& a) {
    Rational m(kNoBound);
    for (auto& x : a.c) {
        if (x.zero_to_prec()) continue;
        m = rmin(m, Rational(*x.val()));
    }
    if (m.num >= kNoBound && a.val_floor) m = *a.val_floor;
    return m;
}

std::int64_t span_of(const ZSeries& a) { return a.zprec - a.zmin; }

}  // namespace

bool ZSeries::zero_window() const {
    for (auto& x : c)
        if (!x.zero_to_prec()) return false;
    return true;
}

ZSeries zs_zero(const TowerPtr& tw, std::int64_t zmin, std::int64_t zprec, std::int64_t pi_prec) {
    ZSeries s;
    s.tw = tw;
    s.zmin = zmin;
    s.zprec = zprec;
    s.c.assign(static_cast<std::size_t>(std::max<std::int64_t>(zprec - zmin, 0)), lfe_zero(tw, pi_prec));
    return s;
}

ZSeries zs_const(const LFE& a, std::int64_t zprec) {
    ZSeries s = zs_zero(a.tw, 0, zprec, a.prec);
    if (zprec > 0) s.c[0] = a;
    return s;
}

ZSeries zs_monomial(const LFE& a, std::int64_t zexp, std::int64_t zprec) {
    ZSeries s = zs_zero(a.tw, std::min(zexp, zprec), zprec, a.prec);
    if (zexp < zprec) s.c[static_cast<std::size_t>(zexp - s.zmin)] = a;
    return s;
}

ZSeries zs_z_minus_zeta(const TowerPtr& tw, std::int64_t zprec, std::int64_t pi_prec) {
    ZSeries s = zs_zero(tw, 0, zprec, pi_prec);
    if (zprec > 0) s.c[0] = lfe_neg(tw->zeta(pi_prec));
    if (zprec > 1) s.c[1] = lfe_one(tw, pi_prec);
    s.val_floor = Rational(0);
    return s;
}

LFE zs_coeff(const ZSeries& a, std::int64_t i) {
    if (i >= a.zprec) throw PrecisionExhausted("zs_coeff: beyond z-precision");
    if (i < a.zmin) {
        if (a.tail.kind == TailBound::ExactZero) return lfe_zero(a.tw, a.c.empty() ? 0 : a.c[0].prec);
        throw PrecisionExhausted("zs_coeff: below stored tail window");
    }
    return a.c[static_cast<std::size_t>(i - a.zmin)];
}

void zs_set_coeff(ZSeries& a, std::int64_t i, const LFE& v) {
    if (i < a.zmin || i >= a.zprec) throw InputError("zs_set_coeff: outside window");
    a.c[static_cast<std::size_t>(i - a.zmin)] = a.tw->lift(v);
}

ZSeries zs_lift(const TowerPtr& tw, const ZSeries& a) {
    if (tw.get() == a.tw.get()) return a;
    ZSeries out = a;
    out.tw = tw;
    for (auto& x : out.c) x = tw->lift(x);
    // tail bounds are in pi-units: rescale by the ramification factor
    if (out.tail.kind == TailBound::Geometric) {
        Rational f(tw->zeta_val(), a.tw->zeta_val());
        out.tail.base = out.tail.base * f;
        out.tail.growth = out.tail.growth * f;
    }
    if (out.val_floor) out.val_floor = *out.val_floor * Rational(tw->zeta_val(), a.tw->zeta_val());
    return out;
}

void zs_unify(ZSeries& a, ZSeries& b) {
    if (a.tw.get() == b.tw.get()) return;
    if (a.tw->is_ancestor_of(b.tw.get()))
        a = zs_lift(b.tw, a);
    else if (b.tw->is_ancestor_of(a.tw.get()))
        b = zs_lift(a.tw, b);
    else
        throw IncompatibleAmbient("zs: unrelated towers");
}

ZSeries zs_add(const ZSeries& a0, const ZSeries& b0) {
    ZSeries a = a0, b = b0;
    zs_unify(a, b);
    ZSeries out;
    out.tw = a.tw;
    out.zprec = std::min(a.zprec, b.zprec);
    // stored window: cannot extend below a tailed operand's zmin
    std::int64_t lo_a = a.tail.kind == TailBound::ExactZero ? std::min(a.zmin, b.zmin) : a.zmin;
    std::int64_t lo_b = b.tail.kind == TailBound::ExactZero ? std::min(a.zmin, b.zmin) : b.zmin;
    out.zmin = std::max(lo_a, lo_b);
    out.zmin = std::min(out.zmin, out.zprec);
    std::int64_t pi_prec = std::min(zs_min_coeff_prec(a), zs_min_coeff_prec(b));
    out.c.assign(static_cast<std::size_t>(out.zprec - out.zmin), lfe_zero(out.tw, pi_prec));
    for (std::int64_t i = out.zmin; i < out.zprec; ++i) {
        LFE va = (i >= a.zmin && i < a.zprec) ? a.c[static_cast<std::size_t>(i - a.zmin)]
                                              : lfe_zero(a.tw, pi_prec);
        LFE vb = (i >= b.zmin && i < b.zprec) ? b.c[static_cast<std::size_t>(i - b.zmin)]
                                              : lfe_zero(b.tw, pi_prec);
        out.c[static_cast<std::size_t>(i - out.zmin)] = lfe_add(va, vb);
    }
    // absorbed stored coefficients (below out.zmin) weaken the tail base
    TailBound ta = a.tail, tb = b.tail;
    auto absorb = [&](const ZSeries& s, TailBound& t) {
        if (s.zmin >= out.zmin) return;
        Rational mv(kNoBound);
        for (std::int64_t i = s.zmin; i < out.zmin; ++i) {
            const LFE& x = s.c[static_cast<std::size_t>(i - s.zmin)];
            if (!x.zero_to_prec()) mv = rmin(mv, Rational(*x.val()));
        }
        if (t.kind == TailBound::ExactZero) {
            if (mv.num >= kNoBound) return;  // nothing nonzero absorbed
            t.kind = TailBound::Geometric;
            t.base = mv;
            t.growth = Rational(1, out.tw->zeta_val());
            t.t0 = out.zmin - s.zmin;
        } else {
            t.base = rmin(t.base, mv);
            t.t0 += out.zmin - s.zmin;
        }
    };
    absorb(a, ta);
    absorb(b, tb);
    out.tail = tail_min(ta, tb);
    if (a.val_floor && b.val_floor) out.val_floor = rmin(*a.val_floor, *b.val_floor);
    return out;
}

ZSeries zs_neg(const ZSeries& a) {
    ZSeries out = a;
    for (auto& x : out.c) x = lfe_neg(x);
    return out;
}

ZSeries zs_sub(const ZSeries& a, const ZSeries& b) { return zs_add(a, zs_neg(b)); }

ZSeries zs_scale(const ZSeries& a, const LFE& s0) {
    ZSeries out = a;
    LFE s = s0;
    for (auto& x : out.c) {
        LFE xs = x;
        LFE ss = s;
        lfe_unify(xs, ss);
        x = lfe_mul(xs, ss);
        out.tw = x.tw;
    }
    for (auto& x : out.c) x = out.tw->lift(x);
    if (out.tail.kind == TailBound::Geometric) {
        LFE sl = out.tw->lift(s0);
        lfe_normalize(sl);
        Rational vs = sl.zero_to_prec() ? Rational(sl.prec) : Rational(*sl.val());
        Rational f(out.tw->zeta_val(), a.tw->zeta_val());
        out.tail.base = out.tail.base * f + vs;
        out.tail.growth = out.tail.growth * f;
    }
    if (out.val_floor) {
        LFE sl = out.tw->lift(s0);
        lfe_normalize(sl);
        if (!sl.zero_to_prec())
            out.val_floor = *out.val_floor * Rational(out.tw->zeta_val(), a.tw->zeta_val()) +
                            Rational(*sl.val());
        else
            out.val_floor.reset();
    }
    return out;
}

ZSeries zs_shift_z(const ZSeries& a, std::int64_t k) {
    ZSeries out = a;
    out.zmin += k;
    out.zprec += k;
    return out;
}

ZSeries zs_truncate(const ZSeries& a, std::int64_t new_zprec) {
    ZSeries out = a;
    if (new_zprec < out.zprec) {
        out.zprec = new_zprec;
        if (out.zmin > out.zprec) out.zmin = out.zprec;
        out.c.resize(static_cast<std::size_t>(std::max<std::int64_t>(out.zprec - out.zmin, 0)));
    }
    return out;
}

bool zs_zero_to_prec(const ZSeries& a) { return a.zero_window(); }

Rational zs_min_coeff_val_zeta(const ZSeries& a) {
    Rational m(kNoBound);
    for (auto& x : a.c) {
        if (x.zero_to_prec())
            m = rmin(m, Rational(x.prec, a.tw->zeta_val()));
        else
            m = rmin(m, x.val_zeta());
    }
    return m;
}

std::int64_t zs_min_coeff_prec(const ZSeries& a) {
    std::int64_t m = kNoBound;
    for (auto& x : a.c) m = std::min(m, x.prec);
    return m;
}

ZSeries zs_mul(const ZSeries& a0, const ZSeries& b0) {
    ZSeries a = a0, b = b0;
    zs_unify(a, b);
    ZSeries out;
    out.tw = a.tw;
    out.zmin = a.zmin + b.zmin;
    // worst-case z-precision: unknown coefficients of one factor meet the
    // lowest stored exponent of the other
    out.zprec = std::min(a.zprec + b.zmin, b.zprec + a.zmin);
    constexpr std::int64_t kBig = (std::int64_t(1) << 40);
    out.c.assign(static_cast<std::size_t>(std::max<std::int64_t>(out.zprec - out.zmin, 0)),
                 lfe_zero(out.tw, kBig));
    std::vector<std::int64_t> caps(out.c.size(), kBig);
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        bool azero = a.c[i].zero_to_prec();
        for (std::size_t j = 0; j < b.c.size(); ++j) {
            bool bzero = b.c[j].zero_to_prec();
            std::int64_t k = a.zmin + static_cast<std::int64_t>(i) + b.zmin + static_cast<std::int64_t>(j);
            if (k < out.zmin || k >= out.zprec) continue;
            std::size_t slot = static_cast<std::size_t>(k - out.zmin);
            if (azero || bzero) {
                // a pair with an unknown factor caps the slot precision
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
    // Stored coefficients also receive uncomputed contributions from the tail
    // region of a tailed factor; cap their precision by those bounds.
    auto contaminate = [&](const ZSeries& ta, const ZSeries& tb) {
        if (ta.tail.kind != TailBound::Geometric) return;
        std::int64_t qh = static_cast<std::int64_t>(out.tw->qhat());
        for (std::int64_t k = out.zmin; k < out.zprec; ++k) {
            Rational cap(std::int64_t(1) << 50);
            for (std::int64_t j = tb.zmin; j < tb.zprec; ++j) {
                std::int64_t t = ta.zmin + j - k;
                if (t < 1) continue;
                const LFE& bj = tb.c[static_cast<std::size_t>(j - tb.zmin)];
                Rational vb = bj.zero_to_prec() ? Rational(bj.prec) : Rational(*bj.val());
                cap = rmin(cap, tail_bound_at(ta.tail, qh, t) + vb);
            }
            if (cap.num < (std::int64_t(1) << 49)) {
                std::int64_t ci = cap.num >= 0 ? cap.num / cap.den
                                               : -((-cap.num + cap.den - 1) / cap.den);
                auto& slot = out.c[static_cast<std::size_t>(k - out.zmin)];
                slot = lfe_truncate(slot, ci);
            }
        }
    };
    contaminate(a, b);
    contaminate(b, a);
    TailBound tpa = tail_product(a.tail, span_of(b), min_stored_val(b));
    TailBound tpb = tail_product(b.tail, span_of(a), min_stored_val(a));
    out.tail = tail_min(tpa, tpb);
    if (a.val_floor && b.val_floor) out.val_floor = *a.val_floor + *b.val_floor;
    return out;
}

ZSeries zs_inv(const ZSeries& a0) {
    ZSeries a = a0;
    // lowest stored coefficient must be a unit of known valuation
    std::size_t lead = 0;
    while (lead < a.c.size() && a.c[lead].zero_to_prec()) ++lead;
    if (lead == a.c.size()) throw NotAUnit("zs_inv: zero window");
    if (a.tail.kind != TailBound::ExactZero)
        throw NotAUnit("zs_inv: inverse of a tailed series is not supported");
    std::int64_t v = a.zmin + static_cast<std::int64_t>(lead);
    ZSeries u = zs_shift_z(a, -v);  // unit part with nonzero constant term
    if (lead) u.c.erase(u.c.begin(), u.c.begin() + static_cast<std::ptrdiff_t>(lead));
    u.zmin = 0;
    std::int64_t N = u.zprec;
    if (N <= 0) throw PrecisionExhausted("zs_inv: empty precision window");
    // direct recursion r_k = -r_0 * sum_{j=1..k} u_j r_{k-j}; this is
    // precision-optimal per coefficient, unlike Newton doubling
    LFE c0inv = lfe_inv(u.c[0]);
    ZSeries r = zs_zero(u.tw, 0, N, c0inv.prec);
    r.c[0] = c0inv;
    for (std::int64_t k = 1; k < N; ++k) {
        LFE acc;
        bool first = true;
        for (std::int64_t j = 1; j <= k; ++j) {
            LFE uj = (j < static_cast<std::int64_t>(u.c.size())) ? u.c[static_cast<std::size_t>(j)]
                                                                 : lfe_zero(u.tw, u.c[0].prec);
            LFE term = lfe_mul(uj, r.c[static_cast<std::size_t>(k - j)]);
            acc = first ? term : lfe_add(acc, term);
            first = false;
        }
        r.c[static_cast<std::size_t>(k)] = lfe_neg(lfe_mul(c0inv, acc));
    }
    return zs_shift_z(r, -v);
}

ZSeries zs_sigma(const ZSeries& a, unsigned j) {
    ZSeries out = a;
    for (auto& x : out.c) x = lfe_sigma(x, j);
    std::int64_t qj = 1;
    for (unsigned i = 0; i < j; ++i) qj *= static_cast<std::int64_t>(a.tw->qhat());
    if (out.tail.kind == TailBound::Geometric) {
        out.tail.base = out.tail.base * Rational(qj);
        out.tail.growth = out.tail.growth * Rational(qj);
    }
    if (out.val_floor) out.val_floor = *out.val_floor * Rational(qj);
    return out;
}

ZSeries zs_mul_z_minus_zeta(const ZSeries& a) {
    ZSeries zmz = zs_z_minus_zeta(a.tw, std::max<std::int64_t>(a.zprec - a.zmin + 2, 2),
                                  zs_min_coeff_prec(a));
    return zs_mul(a, zmz);
}

ZSeries zs_div_z_minus_zeta(const ZSeries& a) {
    // back-substitution from the top: q_{i-1} = n_i + zeta*q_i.  The division
    // is exact only up to the remainder a(zeta); per the worst-case rule the
    // quotient coefficient at z^{zmin+k} keeps precision
    // v(remainder) - (k+1) v(zeta).
    ZSeries out;
    out.tw = a.tw;
    out.zmin = a.zmin;
    out.zprec = a.zprec - 1;
    if (out.zprec <= out.zmin) throw PrecisionExhausted("zs_div_z_minus_zeta: window too small");
    std::int64_t pi_prec = zs_min_coeff_prec(a);
    std::int64_t vz = a.tw->zeta_val();
    LFE zeta = a.tw->zeta(pi_prec + (a.zprec - a.zmin + 1) * vz);
    out.c.assign(static_cast<std::size_t>(out.zprec - out.zmin), lfe_zero(a.tw, pi_prec));
    LFE carry = lfe_zero(a.tw, pi_prec);
    for (std::int64_t i = a.zprec - 1; i > a.zmin; --i) {
        LFE q = lfe_add(zs_coeff(a, i), lfe_mul(zeta, carry));
        out.c[static_cast<std::size_t>(i - 1 - out.zmin)] = q;
        carry = q;
    }
    // remainder = a_{zmin} + zeta * q_{zmin}
    LFE rem = lfe_add(zs_coeff(a, a.zmin), lfe_mul(zeta, out.c[0]));
    lfe_normalize(rem);
    std::int64_t rv = rem.val_or_prec();
    for (std::size_t k = 0; k < out.c.size(); ++k) {
        std::int64_t cap = rv - static_cast<std::int64_t>(k + 1) * vz;
        out.c[k] = lfe_truncate(out.c[k], std::min(out.c[k].prec, cap));
    }
    out.tail = a.tail;
    out.val_floor = a.val_floor;  // integral stays integral when divisible
    return out;
}

LFE zs_evaluate_at_zeta(const ZSeries& a) {
    std::int64_t pi_prec = zs_min_coeff_prec(a);
    std::int64_t vz = a.tw->zeta_val();
    // contribution bound from the unknown right window
    Rational right_bound = a.val_floor
                               ? *a.val_floor + Rational(a.zprec * vz)
                               : Rational(-kNoBound);
    if (!a.val_floor && a.zprec * vz < pi_prec)
        right_bound = Rational(0);  // marker, refined below
    // tail contribution bound
    Rational tail_bound(kNoBound);
    if (a.tail.kind == TailBound::Geometric) {
        if (a.tail.growth.num <= 0) throw DivergentEvaluation("evaluate_at_zeta: tail does not converge");
        for (std::int64_t t = 1; t <= a.tail.t0 + 40; ++t) {
            Rational b = tail_bound_at(a.tail, static_cast<std::int64_t>(a.tw->qhat()), t);
            if (b.num >= kNoBound) break;
            tail_bound = rmin(tail_bound, b + Rational((a.zmin - t) * vz));
        }
    }
    LFE sum = lfe_zero(a.tw, pi_prec);
    LFE zeta = a.tw->zeta(pi_prec + std::max<std::int64_t>(0, -a.zmin) * vz + 1);
    for (std::int64_t i = a.zmin; i < a.zprec; ++i) {
        const LFE& b = a.c[static_cast<std::size_t>(i - a.zmin)];
        if (b.zero_to_prec() && b.prec >= pi_prec + std::max<std::int64_t>(0, -i) * vz) continue;
        LFE zi = i >= 0 ? lfe_pow(zeta, i) : lfe_inv(lfe_pow(zeta, -i));
        sum = lfe_add(sum, lfe_mul(b, zi));
    }
    // cap the precision by the certified bounds
    std::int64_t cap = sum.prec;
    if (tail_bound.num < kNoBound) {
        std::int64_t tb = tail_bound.num >= 0 ? tail_bound.num / tail_bound.den
                                              : -((-tail_bound.num + tail_bound.den - 1) / tail_bound.den);
        cap = std::min(cap, tb);
    }
    if (a.val_floor) {
        Rational rb = *a.val_floor + Rational(a.zprec * vz);
        std::int64_t rbi = rb.num >= 0 ? rb.num / rb.den : -((-rb.num + rb.den - 1) / rb.den);
        cap = std::min(cap, rbi);
    } else {
        cap = std::min(cap, a.zprec * vz);
    }
    if (cap <= sum.val_or_prec() && sum.zero_to_prec())
        return lfe_truncate(sum, cap);
    return lfe_truncate(sum, cap);
}

NormResult zs_norm(const ZSeries& a, Rational s) {
    if (!(s > Rational(0))) throw InputError("zs_norm: s must be positive");
    NormResult out{Rational(kNoBound), true};
    for (std::int64_t i = a.zmin; i < a.zprec; ++i) {
        const LFE& b = a.c[static_cast<std::size_t>(i - a.zmin)];
        if (b.zero_to_prec()) {
            // could hide smaller terms beyond the coefficient precision
            Rational bound = Rational(b.prec, a.tw->zeta_val()) + s * Rational(i);
            if (bound < out.value) out.exact = false;
            continue;
        }
        out.value = rmin(out.value, b.val_zeta() + s * Rational(i));
    }
    // right window
    if (a.val_floor) {
        Rational rb = *a.val_floor / Rational(a.tw->zeta_val()) + s * Rational(a.zprec);
        if (rb < out.value) out.exact = false;
    } else {
        out.exact = false;
    }
    // tail
    if (a.tail.kind == TailBound::Geometric) {
        if (a.tail.growth.num <= 0) {
            out.exact = false;
        } else {
            for (std::int64_t t = 1; t <= a.tail.t0 + 40; ++t) {
                Rational b = tail_bound_at(a.tail, static_cast<std::int64_t>(a.tw->qhat()), t);
                if (b.num >= kNoBound) break;
                Rational bound = b / Rational(a.tw->zeta_val()) + s * Rational(a.zmin - t);
                if (bound < out.value) out.exact = false;
            }
        }
    }
    return out;
}

// --- localization at (z - zeta) ------------------------------------------------

ZZetaFrac zzf_make(ZSeries num, std::int64_t pole) {
    ZZetaFrac f{std::move(num), pole};
    zzf_normalize(f);
    return f;
}

void zzf_normalize(ZZetaFrac& f) {
    while (f.pole > 0) {
        LFE at = zs_evaluate_at_zeta(f.num);
        lfe_normalize(at);
        if (!at.zero_to_prec()) break;
        if (f.num.zprec - f.num.zmin < 2) break;
        f.num = zs_div_z_minus_zeta(f.num);
        --f.pole;
    }
}

ZZetaFrac zzf_mul(const ZZetaFrac& a, const ZZetaFrac& b) {
    return zzf_make(zs_mul(a.num, b.num), a.pole + b.pole);
}

ZSeries zzf_expand(const ZZetaFrac& f) {
    if (f.pole == 0) return f.num;
    // (z - zeta)^{-1} = -sum_{i>=0} zeta^{-i-1} z^i
    std::int64_t pi_prec = zs_min_coeff_prec(f.num);
    std::int64_t N = f.num.zprec - std::min<std::int64_t>(f.num.zmin, 0);
    N = std::max<std::int64_t>(N, 2);
    ZSeries inv = zs_zero(f.num.tw, 0, N, pi_prec);
    LFE zinv = lfe_inv(f.num.tw->zeta(pi_prec + (N + 1) * f.num.tw->zeta_val()));
    LFE cur = zinv;
    for (std::int64_t i = 0; i < N; ++i) {
        inv.c[static_cast<std::size_t>(i)] = lfe_neg(cur);
        cur = lfe_mul(cur, zinv);
    }
    ZSeries out = f.num;
    for (std::int64_t k = 0; k < f.pole; ++k) out = zs_mul(out, inv);
    return out;
}

}  // namespace shtukalab
