#include "shtukalab/shtuka.hpp"

#include <algorithm>

#include "shtukalab/fq_poly.hpp"
#include "shtukalab/solve.hpp"

namespace shtukalab {

// --- ZSeries matrix helpers -----------------------------------------------------

namespace {
TowerPtr zs_deepest(const Mat<ZSeries>& a) {
    TowerPtr tw = a.a[0].tw;
    for (auto& x : a.a)
        if (x.tw->depth() > tw->depth()) tw = x.tw;
    return tw;
}
}  // namespace

Mat<ZSeries> mat_zs_lift(const TowerPtr& tw, const Mat<ZSeries>& a) {
    return mat_map(a, [&](const ZSeries& x) { return zs_lift(tw, x); });
}

Mat<ZSeries> mat_zs_mul(const Mat<ZSeries>& a0, const Mat<ZSeries>& b0) {
    TowerPtr tw = zs_deepest(a0);
    if (zs_deepest(b0)->depth() > tw->depth()) tw = zs_deepest(b0);
    Mat<ZSeries> a = mat_zs_lift(tw, a0), b = mat_zs_lift(tw, b0);
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : a.a) pp = std::min(pp, zs_min_coeff_prec(x));
    std::int64_t zp = a.a[0].zprec;
    for (auto& x : a.a) zp = std::max(zp, x.zprec);
    for (auto& x : b.a) zp = std::max(zp, x.zprec);
    return mat_mul_with(a, b, zs_zero(tw, 0, zp, pp),
                        [](const ZSeries& x, const ZSeries& y) { return zs_add(x, y); },
                        [](const ZSeries& x, const ZSeries& y) { return zs_mul(x, y); });
}

Mat<ZSeries> mat_zs_add(const Mat<ZSeries>& a, const Mat<ZSeries>& b) {
    return mat_add_with(a, b, [](const ZSeries& x, const ZSeries& y) { return zs_add(x, y); });
}
Mat<ZSeries> mat_zs_sub(const Mat<ZSeries>& a, const Mat<ZSeries>& b) {
    return mat_add_with(a, b, [](const ZSeries& x, const ZSeries& y) { return zs_sub(x, y); });
}

ZSeries mat_zs_det(const Mat<ZSeries>& a0) {
    TowerPtr tw = zs_deepest(a0);
    Mat<ZSeries> a = mat_zs_lift(tw, a0);
    std::int64_t pp = (std::int64_t(1) << 40), zp = 1;
    for (auto& x : a.a) {
        pp = std::min(pp, zs_min_coeff_prec(x));
        zp = std::max(zp, x.zprec);
    }
    return mat_det_with(a, zs_zero(tw, 0, zp, pp), zs_zero(tw, 0, zp, pp),
                        [](const ZSeries& x, const ZSeries& y) { return zs_add(x, y); },
                        [](const ZSeries& x, const ZSeries& y) { return zs_mul(x, y); },
                        [](const ZSeries& x) { return zs_neg(x); });
}

Mat<ZSeries> mat_zs_adjugate(const Mat<ZSeries>& a) {
    int n = a.rows;
    if (n == 1) {
        Mat<ZSeries> r(1, 1);
        r.at(0, 0) = zs_const(lfe_one(zs_deepest(a), zs_min_coeff_prec(a.a[0])), a.a[0].zprec);
        return r;
    }
    // adj(A)_{ji} = (-1)^{i+j} det(A with row i, column j removed)
    Mat<ZSeries> out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Mat<ZSeries> sub(n - 1, n - 1);
            int rr = 0;
            for (int r2 = 0; r2 < n; ++r2) {
                if (r2 == i) continue;
                int cc = 0;
                for (int c2 = 0; c2 < n; ++c2) {
                    if (c2 == j) continue;
                    sub.at(rr, cc++) = a.at(r2, c2);
                }
                ++rr;
            }
            ZSeries d = mat_zs_det(sub);
            if ((i + j) % 2 == 1) d = zs_neg(d);
            out.at(j, i) = d;
        }
    return out;
}

Mat<ZSeries> mat_zs_sigma(const Mat<ZSeries>& a, unsigned j) {
    return mat_map(a, [&](const ZSeries& x) { return zs_sigma(x, j); });
}

Mat<ZSeries> mat_zs_identity(const TowerPtr& tw, int n, std::int64_t zprec, std::int64_t pi_prec) {
    Mat<ZSeries> m(n, n, zs_zero(tw, 0, zprec, pi_prec));
    for (int i = 0; i < n; ++i) m.at(i, i) = zs_const(lfe_one(tw, pi_prec), zprec);
    return m;
}

Mat<ZSeries> mat_zs_truncate(const Mat<ZSeries>& a, std::int64_t zprec) {
    return mat_map(a, [&](const ZSeries& x) { return zs_truncate(x, zprec); });
}

bool mat_zs_zero_to_prec(const Mat<ZSeries>& a) {
    for (auto& x : a.a)
        if (!zs_zero_to_prec(x)) return false;
    return true;
}

Rational mat_zs_residual_val(const Mat<ZSeries>& a) {
    Rational m((std::int64_t(1) << 40));
    for (auto& x : a.a) m = rmin(m, zs_min_coeff_val_zeta(x));
    return m;
}

Mat<ZSeries> mat_zs_inv(const Mat<ZSeries>& a0) {
    // z-digit recursion: X_0 = A_0^{-1}, X_k = -X_0 sum_{j>=1} A_j X_{k-j}
    TowerPtr tw = zs_deepest(a0);
    Mat<ZSeries> a = mat_zs_lift(tw, a0);
    int n = a.rows;
    std::int64_t zp = a.a[0].zprec;
    for (auto& x : a.a) zp = std::min(zp, x.zprec);
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : a.a) pp = std::min(pp, zs_min_coeff_prec(x));
    auto digit = [&](const Mat<ZSeries>& m, std::int64_t k) {
        Mat<LFE> d(n, n, lfe_zero(tw, pp));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (k >= m.at(i, j).zmin && k < m.at(i, j).zprec) d.at(i, j) = zs_coeff(m.at(i, j), k);
        return d;
    };
    Mat<LFE> A0 = digit(a, 0);
    Mat<LFE> X0 = mat_lfe_inv(A0);
    std::vector<Mat<LFE>> X{X0};
    for (std::int64_t k = 1; k < zp; ++k) {
        Mat<LFE> acc(n, n, lfe_zero(tw, pp));
        for (std::int64_t j = 1; j <= k; ++j) {
            Mat<LFE> Aj = digit(a, j);
            acc = mat_lfe_add(acc, mat_lfe_mul(Aj, X[static_cast<std::size_t>(k - j)]));
        }
        X.push_back(mat_lfe_mul(mat_map(X0, [](const LFE& x) { return lfe_neg(x); }), acc));
    }
    Mat<ZSeries> out(n, n, zs_zero(tw, 0, zp, pp));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ZSeries s = zs_zero(tw, 0, zp, pp);
            for (std::int64_t k = 0; k < zp; ++k)
                zs_set_coeff(s, k, X[static_cast<std::size_t>(k)].at(i, j));
            out.at(i, j) = s;
        }
    return out;
}

// --- local shtukas ---------------------------------------------------------------

namespace {
// All entries vanish at z = zeta (to precision)?
bool all_vanish_at_zeta(const Mat<ZSeries>& m) {
    for (auto& x : m.a) {
        LFE v = zs_evaluate_at_zeta(x);
        lfe_normalize(v);
        if (!v.zero_to_prec()) return false;
        if (v.prec <= 0) return false;  // no certification left
    }
    return true;
}
std::int64_t min_zwindow(const Mat<ZSeries>& m) {
    std::int64_t zp = m.a[0].zprec;
    for (auto& x : m.a) zp = std::min(zp, x.zprec);
    return zp;
}
}  // namespace

void LocalShtuka::normalize() {
    while (pole > 0 && min_zwindow(num) > 1 && all_vanish_at_zeta(num)) {
        num = mat_map(num, [](const ZSeries& x) { return zs_div_z_minus_zeta(x); });
        --pole;
    }
}

LocalShtuka make_shtuka(const TowerPtr& tw, Mat<ZSeries> num, std::int64_t pole) {
    LocalShtuka sh;
    sh.tower = tw;
    sh.rank = num.rows;
    sh.num = mat_zs_lift(tw, num);
    for (auto& x : sh.num.a) x.val_floor = Rational(0);
    sh.pole = pole;
    sh.normalize();
    return sh;
}

LocalShtuka unit_shtuka(const TowerPtr& tw, int rank, std::int64_t zprec, std::int64_t pi_prec) {
    return make_shtuka(tw, mat_zs_identity(tw, rank, zprec, pi_prec), 0);
}

LocalShtuka carlitz_shtuka(const TowerPtr& tw, std::int64_t zprec, std::int64_t pi_prec) {
    Mat<ZSeries> m(1, 1, zs_z_minus_zeta(tw, zprec, pi_prec));
    return make_shtuka(tw, m, 0);
}

DetFactor det_factor(const LocalShtuka& sh) {
    ZSeries det = mat_zs_det(sh.num);
    std::int64_t e = 0;
    while (true) {
        LFE at = zs_evaluate_at_zeta(det);
        lfe_normalize(at);
        if (!at.zero_to_prec()) break;
        if (det.zprec - det.zmin < 2)
            throw PrecisionExhausted("det_factor: z-precision too small for the pole order");
        det = zs_div_z_minus_zeta(det);
        ++e;
    }
    // unit check: constant z-coefficient must be a pi-unit
    LFE c0 = zs_coeff(det, 0);
    lfe_normalize(c0);
    if (c0.zero_to_prec() || *c0.val() != 0)
        throw PrecisionExhausted("det_factor: could not certify the unit part");
    DetFactor out;
    out.d = e - sh.rank * sh.pole;
    out.unit = det;
    return out;
}

namespace {
// (z-zeta)-order of a series (up to the window); nullopt if identically 0 to prec.
std::optional<std::int64_t> z_minus_zeta_order(ZSeries s, std::int64_t cap) {
    std::int64_t e = 0;
    while (e <= cap) {
        if (zs_zero_to_prec(s)) return std::nullopt;
        LFE at = zs_evaluate_at_zeta(s);
        lfe_normalize(at);
        if (!at.zero_to_prec()) return e;
        if (s.zprec - s.zmin < 2) return std::nullopt;
        s = zs_div_z_minus_zeta(s);
        ++e;
    }
    return e;
}

// i-th exterior power matrix (minors), with sign conventions for bases
Mat<ZSeries> wedge_matrix(const Mat<ZSeries>& m, int k) {
    int n = m.rows;
    std::vector<std::vector<int>> subsets;
    std::vector<int> cur;
    std::function<void(int)> gen = [&](int start) {
        if (static_cast<int>(cur.size()) == k) {
            subsets.push_back(cur);
            return;
        }
        for (int i = start; i < n; ++i) {
            cur.push_back(i);
            gen(i + 1);
            cur.pop_back();
        }
    };
    gen(0);
    int N = static_cast<int>(subsets.size());
    Mat<ZSeries> out(N, N);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            Mat<ZSeries> sub(k, k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) sub.at(i, j) = m.at(subsets[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)],
                                                                subsets[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]);
            out.at(a, b) = mat_zs_det(sub);
        }
    return out;
}
}  // namespace

bool boundedness_check(const LocalShtuka& sh, const std::vector<std::int64_t>& mu) {
    if (static_cast<int>(mu.size()) != sh.rank) throw InputError("boundedness_check: mu length");
    for (std::size_t i = 0; i + 1 < mu.size(); ++i)
        if (mu[i] < mu[i + 1]) throw InputError("boundedness_check: mu must be decreasing");
    int r = sh.rank;
    for (int i = 1; i <= r; ++i) {
        std::int64_t mi = 0;
        for (int j = r - i; j < r; ++j) mi += mu[static_cast<std::size_t>(j)];
        Mat<ZSeries> w = wedge_matrix(sh.num, i);
        std::int64_t need = mi + static_cast<std::int64_t>(i) * sh.pole;
        if (i == r) {
            // equality: det order exactly need
            auto ord = z_minus_zeta_order(w.at(0, 0), need + 1);
            if (!ord || *ord != need) return false;
        } else {
            for (auto& x : w.a) {
                auto ord = z_minus_zeta_order(x, need);
                if (ord && *ord < need) return false;
            }
        }
    }
    return true;
}

bool height_check(const LocalShtuka& sh, std::int64_t d) {
    if (sh.pole > 0) return false;  // not effective
    DetFactor df = det_factor(sh);
    // (z-zeta)^d tau^{-1} integral <=> each adjugate entry has order >= e - d
    std::int64_t e = df.d;
    if (e > d) return false;
    if (e == 0) return true;
    Mat<ZSeries> adj = mat_zs_adjugate(sh.num);
    for (auto& x : adj.a) {
        auto ord = z_minus_zeta_order(x, e);
        if (ord && *ord < e - d) return false;
    }
    return true;
}

LocalShtuka shtuka_tensor(const LocalShtuka& a, const LocalShtuka& b) {
    TowerPtr tw = a.tower->depth() >= b.tower->depth() ? a.tower : b.tower;
    Mat<ZSeries> A = mat_zs_lift(tw, a.num), B = mat_zs_lift(tw, b.num);
    int n = a.rank * b.rank;
    Mat<ZSeries> out(n, n);
    for (int i1 = 0; i1 < a.rank; ++i1)
        for (int j1 = 0; j1 < a.rank; ++j1)
            for (int i2 = 0; i2 < b.rank; ++i2)
                for (int j2 = 0; j2 < b.rank; ++j2)
                    out.at(i1 * b.rank + i2, j1 * b.rank + j2) = zs_mul(A.at(i1, j1), B.at(i2, j2));
    return make_shtuka(tw, out, a.pole + b.pole);
}

LocalShtuka shtuka_dual(const LocalShtuka& a, std::int64_t twist) {
    DetFactor df = det_factor(a);
    std::int64_t e = df.d + a.rank * a.pole;  // (z-zeta)-order of det(num)
    Mat<ZSeries> adj = mat_zs_adjugate(a.num);
    ZSeries uinv = zs_inv(df.unit);
    Mat<ZSeries> numdual(a.rank, a.rank);
    for (int i = 0; i < a.rank; ++i)
        for (int j = 0; j < a.rank; ++j) numdual.at(i, j) = zs_mul(adj.at(j, i), uinv);
    // tau_dual = (z-zeta)^{twist} (tau^T)^{-1} = (z-zeta)^{twist+pole-e} adj^T unit^{-1}
    std::int64_t shift = twist + a.pole - e;
    std::int64_t pole = shift < 0 ? -shift : 0;
    if (shift > 0) {
        ZSeries zmz = zs_z_minus_zeta(a.tower, numdual.a[0].zprec, zs_min_coeff_prec(numdual.a[0]));
        for (std::int64_t k = 0; k < shift; ++k)
            numdual = mat_map(numdual, [&](const ZSeries& x) { return zs_mul(x, zmz); });
    }
    return make_shtuka(a.tower, numdual, pole);
}

// --- A-motives ---------------------------------------------------------------------

LocalShtuka motive_to_local_shtuka(const AMotiveLocalData& mot, std::int64_t z_prec) {
    const FieldPtr& fq = mot.fq;
    int f = static_cast<int>(mot.z_poly.size()) - 1;
    if (f < 1 || mot.z_poly.back() != fq->one())
        throw InputError("motive: z(t) must be monic of positive degree");
    {
        fqpoly::Poly zp(mot.z_poly.begin(), mot.z_poly.end());
        if (!fqpoly::is_irreducible(*fq, zp)) throw InputError("motive: z(t) must be irreducible");
    }
    const TowerPtr& base = mot.base;
    const FieldPtr& k = base->field();
    if (k->p() != fq->p()) throw CharacteristicMismatch("motive: characteristic mismatch");
    Embedding fq_in_k = make_embedding(fq, k);
    // residue of theta must be a root of z(t) generating F_eps inside k
    LFE theta = base->lift(mot.theta);
    lfe_normalize(theta);
    if (theta.zero_to_prec() || *theta.val() != 0)
        throw CharacteristicMismatch("motive: theta must be a unit of R");
    ff_t lambda = lfe_coeff(theta, 0);
    {
        ff_t acc = 0;
        for (std::size_t i = mot.z_poly.size(); i-- > 0;)
            acc = k->add(k->mul(acc, lambda), fq_in_k.apply(mot.z_poly[i]));
        if (acc != 0) throw CharacteristicMismatch("motive: residue of theta is not a root of z(t)");
    }
    // F_eps = F_q(lambda); require k = F_eps here (deg matches)
    if (k->m() != fq->m() * static_cast<std::uint32_t>(f))
        throw CharacteristicMismatch("motive: residue field must equal F_eps = F_q[t]/(z)");
    std::int64_t pi_prec = theta.prec;
    // zeta = z(theta)
    LFE zeta = lfe_zero(base, pi_prec);
    {
        LFE acc = lfe_zero(base, pi_prec);
        for (std::size_t i = mot.z_poly.size(); i-- > 0;) {
            acc = lfe_mul(acc, theta);
            acc = lfe_add(acc, lfe_const(base, fq_in_k.apply(mot.z_poly[i]), pi_prec));
        }
        zeta = acc;
    }
    lfe_normalize(zeta);
    if (zeta.zero_to_prec() || *zeta.val() <= 0)
        throw CharacteristicMismatch("motive: z(theta) is not topologically nilpotent");
    // fresh tower with this zeta; F_eps is the residue field k itself
    Embedding keps;
    keps.src = k;
    keps.dst = k;
    keps.gen_image = k->m() > 1 ? k->from_digits({0, 1}) : 0;
    TowerPtr tw = Tower::base(k, k, keps, RawSeries{zeta.vmin, zeta.prec, zeta.c});
    LFE zeta_tw = tw->zeta(-1);
    LFE theta_tw = lfe_from_raw(tw, RawSeries{theta.vmin, theta.prec, theta.c});

    // t(z) over F_eps[[z]] via Hensel: z_poly(T) = z, T = lambda + O(z);
    // coefficients are residue constants
    ZSeries T = zs_const(lfe_const(tw, lambda, pi_prec), z_prec);
    {
        fqpoly::Poly zp_k;
        for (ff_t c : mot.z_poly) zp_k.push_back(fq_in_k.apply(c));
        fqpoly::Poly dzp = fqpoly::formal_derivative(*k, zp_k);
        ZSeries zvar = zs_monomial(lfe_one(tw, pi_prec), 1, z_prec);
        for (int it = 0; it < 64; ++it) {
            // evaluate z_poly at T
            ZSeries val = zs_zero(tw, 0, z_prec, pi_prec);
            for (std::size_t i = zp_k.size(); i-- > 0;) {
                val = zs_truncate(zs_mul(val, T), z_prec);
                val = zs_add(val, zs_const(lfe_const(tw, zp_k[i], pi_prec), z_prec));
            }
            ZSeries err = zs_sub(val, zvar);
            if (zs_zero_to_prec(err)) break;
            ZSeries dval = zs_zero(tw, 0, z_prec, pi_prec);
            for (std::size_t i = dzp.size(); i-- > 0;) {
                dval = zs_truncate(zs_mul(dval, T), z_prec);
                dval = zs_add(dval, zs_const(lfe_const(tw, dzp[i], pi_prec), z_prec));
            }
            T = zs_sub(T, zs_mul(err, zs_inv(dval)));
            T = zs_truncate(T, z_prec);
        }
    }
    // evaluate the f-fold twisted product
    int r = mot.tau_t.rows;
    Mat<ZSeries> acc = mat_zs_identity(tw, r, z_prec, pi_prec);
    std::int64_t total_pole = 0;
    for (int j = 0; j < f; ++j) {
        // sigma^j tau_M: coefficients q^j-powered
        std::uint64_t frob_log = static_cast<std::uint64_t>(fq->m()) * static_cast<std::uint64_t>(j);
        Mat<ZSeries> factor(r, r, zs_zero(tw, 0, z_prec, pi_prec));
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) {
                const auto& coeffs = mot.tau_t.at(a, b);
                ZSeries val = zs_zero(tw, 0, z_prec, pi_prec);
                for (std::size_t i = coeffs.size(); i-- > 0;) {
                    val = zs_truncate(zs_mul(val, T), z_prec);
                    LFE ci = lfe_from_raw(tw, RawSeries{coeffs[i].vmin, coeffs[i].prec, coeffs[i].c});
                    val = zs_add(val, zs_const(lfe_frob(ci, frob_log), z_prec));
                }
                factor.at(a, b) = val;
            }
        if (mot.pole_t > 0) {
            // divide by (t(z) - theta^{q^j})^{pole_t}
            LFE thetaj = lfe_frob(theta_tw, frob_log);
            ZSeries den = zs_sub(T, zs_const(thetaj, z_prec));
            if (j == 0) {
                // den = (z - zeta) * unit: factor out the pole
                ZSeries unit = zs_div_z_minus_zeta(den);
                ZSeries uinv = zs_inv(unit);
                for (std::int64_t kdiv = 0; kdiv < mot.pole_t; ++kdiv)
                    factor = mat_map(factor, [&](const ZSeries& x) { return zs_mul(x, uinv); });
                total_pole += mot.pole_t;
            } else {
                ZSeries dinv = zs_inv(den);
                for (std::int64_t kdiv = 0; kdiv < mot.pole_t; ++kdiv)
                    factor = mat_map(factor, [&](const ZSeries& x) { return zs_mul(x, dinv); });
            }
        }
        acc = j == 0 ? factor : mat_zs_mul(acc, factor);
    }
    return make_shtuka(tw, acc, total_pole);
}

CarlitzUnitW carlitz_unit_w(const LocalShtuka& sh) {
    if (sh.rank != 1 || sh.pole != 0) throw InputError("carlitz_unit_w: need an effective rank-1 shtuka");
    DetFactor df = det_factor(sh);
    if (df.d != 1) throw InputError("carlitz_unit_w: need d = 1");
    CarlitzUnitW out;
    out.u = zs_div_z_minus_zeta(sh.num.at(0, 0));
    // u = 1 mod zeta
    {
        ZSeries diff = zs_sub(out.u, zs_const(lfe_one(sh.tower, zs_min_coeff_prec(out.u)), out.u.zprec));
        for (std::int64_t i = diff.zmin; i < diff.zprec; ++i) {
            LFE c = zs_coeff(diff, i);
            lfe_normalize(c);
            if (!c.zero_to_prec() && *c.val() <= 0)
                throw InputError("carlitz_unit_w: u is not congruent to 1 mod zeta");
        }
    }
    // w = prod sigma^n(u), convergent since sigma^n(u) = 1 mod zeta^{qhat^n}.
    // The division by z - zeta degrades the high z-coefficients of u, so the
    // reported w keeps the well-certified half window.
    std::int64_t halfwin = (out.u.zprec + 1) / 2;
    std::int64_t target = zs_min_coeff_prec(zs_truncate(out.u, halfwin));
    ZSeries w = out.u;
    ZSeries term = zs_sigma(out.u);
    int guard = 0;
    while (guard++ < 64) {
        ZSeries d = zs_sub(term, zs_const(lfe_one(sh.tower, target), term.zprec));
        Rational mv = zs_min_coeff_val_zeta(d);
        if (zs_zero_to_prec(d) || mv * Rational(sh.tower->zeta_val()) >= Rational(target)) break;
        w = zs_truncate(zs_mul(w, term), out.u.zprec);
        term = zs_sigma(term);
    }
    out.w = zs_truncate(w, halfwin);
    ZSeries resid = zs_sub(out.w, zs_truncate(zs_mul(out.u, zs_sigma(out.w)), out.w.zprec));
    out.residual = mat_zs_residual_val(Mat<ZSeries>(1, 1, resid));
    if (!zs_zero_to_prec(resid))
        throw PrecisionExhausted("carlitz_unit_w: defining identity failed to certify");
    return out;
}

// --- torsion local shtukas ------------------------------------------------------------

TorsionShtuka make_torsion(const TowerPtr& tw, std::vector<std::int64_t> divisors, Mat<ZSeries> num,
                           std::int64_t pole) {
    TorsionShtuka t;
    t.tower = tw;
    t.divisors = std::move(divisors);
    int r = static_cast<int>(t.divisors.size());
    if (num.rows != r || num.cols != r) throw InputError("make_torsion: matrix size mismatch");
    // reduce row i mod z^{n_i} and validate the grading condition
    t.num = Mat<ZSeries>(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            ZSeries e = zs_truncate(zs_lift(tw, num.at(i, j)), t.divisors[static_cast<std::size_t>(i)]);
            // Hom(R/(z^{n_j}), R/(z^{n_i})) needs ord_z >= n_i - n_j
            std::int64_t need = t.divisors[static_cast<std::size_t>(i)] - t.divisors[static_cast<std::size_t>(j)];
            for (std::int64_t kk = e.zmin; kk < std::min(e.zprec, need); ++kk) {
                LFE c = zs_coeff(e, kk);
                lfe_normalize(c);
                if (!c.zero_to_prec()) throw InputError("make_torsion: tau violates the grading");
            }
            e.val_floor = Rational(0);
            t.num.at(i, j) = e;
        }
    t.pole = pole;
    return t;
}

TorsionShtuka torsion_model(const TowerPtr& tw, std::int64_t n, std::int64_t d, std::int64_t pi_prec) {
    // tau = (z - zeta)^d mod z^n
    ZSeries zmz = zs_z_minus_zeta(tw, n, pi_prec);
    ZSeries acc = zs_const(lfe_one(tw, pi_prec), n);
    for (std::int64_t i = 0; i < d; ++i) acc = zs_truncate(zs_mul(acc, zmz), n);
    Mat<ZSeries> m(1, 1, acc);
    return make_torsion(tw, {n}, m, 0);
}

std::int64_t torsion_rank(const TorsionShtuka& t) {
    std::int64_t s = 0;
    for (auto n : t.divisors) s += n;
    return s;
}

// R-module view: basis (component i, z-power t), t < n_i.
namespace {
struct RBasis {
    std::vector<std::pair<int, std::int64_t>> gens;
    std::vector<std::vector<std::size_t>> index;  // index[i][t] -> flat position
};

RBasis torsion_rbasis(const TorsionShtuka& t) {
    RBasis b;
    b.index.resize(t.divisors.size());
    for (std::size_t i = 0; i < t.divisors.size(); ++i)
        for (std::int64_t s = 0; s < t.divisors[i]; ++s) {
            b.index[i].push_back(b.gens.size());
            b.gens.emplace_back(static_cast<int>(i), s);
        }
    return b;
}

// tau(sigma* m_{(j,s)}) as an R-vector: z^s * column j of num, expanded.
std::vector<LFE> torsion_tau_column(const TorsionShtuka& t, const RBasis& rb, int j, std::int64_t s,
                                    std::int64_t pi_prec) {
    std::vector<LFE> out(rb.gens.size(), lfe_zero(t.tower, pi_prec));
    for (std::size_t i = 0; i < t.divisors.size(); ++i) {
        const ZSeries& entry = t.num.at(static_cast<int>(i), j);
        for (std::int64_t k = entry.zmin; k < entry.zprec; ++k) {
            std::int64_t target = k + s;
            if (target >= t.divisors[i]) continue;
            out[rb.index[i][static_cast<std::size_t>(target)]] =
                lfe_add(out[rb.index[i][static_cast<std::size_t>(target)]], zs_coeff(entry, k));
        }
    }
    return out;
}

// Column reduction over the DVR: reduce v against the triangular basis and
// return the remainder.  basis columns are kept pivot-normalized.
struct DvrBasis {
    std::vector<std::vector<LFE>> cols;
    std::vector<std::size_t> pivot;  // pivot row per column
};

bool dvr_reduce(const DvrBasis& B, std::vector<LFE>& v) {
    for (std::size_t c = 0; c < B.cols.size(); ++c) {
        std::size_t pr = B.pivot[c];
        LFE pv = B.cols[c][pr];
        LFE x = v[pr];
        lfe_normalize(x);
        if (x.zero_to_prec()) continue;
        if (*x.val() < *pv.val()) return false;  // not reducible: pivot too deep
        LFE q = lfe_div(x, pv);
        for (std::size_t r = 0; r < v.size(); ++r) v[r] = lfe_sub(v[r], lfe_mul(q, B.cols[c][r]));
    }
    for (auto& x : v) {
        lfe_normalize(x);
        if (!x.zero_to_prec()) return false;
    }
    return true;
}

void dvr_insert(DvrBasis& B, std::vector<LFE> v) {
    // reduce against existing pivots first
    for (std::size_t c = 0; c < B.cols.size(); ++c) {
        std::size_t pr = B.pivot[c];
        LFE x = v[pr];
        lfe_normalize(x);
        if (x.zero_to_prec()) continue;
        LFE pv = B.cols[c][pr];
        if (*x.val() >= *pv.val()) {
            LFE q = lfe_div(x, pv);
            for (std::size_t r = 0; r < v.size(); ++r) v[r] = lfe_sub(v[r], lfe_mul(q, B.cols[c][r]));
        } else {
            // swap roles: v becomes the new pivot column for this row
            std::swap(B.cols[c], v);
            LFE q = lfe_div(v[pr], B.cols[c][pr]);
            for (std::size_t r = 0; r < v.size(); ++r) v[r] = lfe_sub(v[r], lfe_mul(q, B.cols[c][r]));
        }
    }
    // find a pivot for the remainder
    std::optional<std::size_t> best;
    std::int64_t bestv = 0;
    for (std::size_t r = 0; r < v.size(); ++r) {
        LFE x = v[r];
        lfe_normalize(x);
        if (x.zero_to_prec()) continue;
        if (!best || *x.val() < bestv) {
            best = r;
            bestv = *x.val();
        }
    }
    if (best) {
        B.cols.push_back(std::move(v));
        B.pivot.push_back(*best);
    }
}
}  // namespace

bool torsion_height_check(const TorsionShtuka& t, std::int64_t d) {
    if (t.pole > 0) return false;
    RBasis rb = torsion_rbasis(t);
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : t.num.a) pp = std::min(pp, zs_min_coeff_prec(x));
    // image of tau as an R-module
    DvrBasis img;
    for (std::size_t j = 0; j < t.divisors.size(); ++j)
        for (std::int64_t s = 0; s < t.divisors[j]; ++s)
            dvr_insert(img, torsion_tau_column(t, rb, static_cast<int>(j), s, pp));
    // (z-zeta)^d e_i must reduce to zero against the image
    ZSeries zmzd;
    {
        std::int64_t nmax = 1;
        for (auto n : t.divisors) nmax = std::max(nmax, n);
        ZSeries zmz = zs_z_minus_zeta(t.tower, nmax, pp);
        ZSeries acc = zs_const(lfe_one(t.tower, pp), nmax);
        for (std::int64_t k = 0; k < d; ++k) acc = zs_truncate(zs_mul(acc, zmz), nmax);
        zmzd = acc;
    }
    for (std::size_t i = 0; i < t.divisors.size(); ++i) {
        for (std::int64_t s = 0; s < t.divisors[i]; ++s) {
            // (z-zeta)^d z^s e_i expanded over the R-basis
            std::vector<LFE> v(rb.gens.size(), lfe_zero(t.tower, pp));
            for (std::int64_t k = zmzd.zmin; k < zmzd.zprec; ++k) {
                std::int64_t target = k + s;
                if (target >= t.divisors[i]) continue;
                v[rb.index[i][static_cast<std::size_t>(target)]] = zs_coeff(zmzd, k);
            }
            if (!dvr_reduce(img, v)) return false;
        }
    }
    return true;
}

Isogeny make_isogeny(LocalShtuka source, LocalShtuka target, Mat<ZSeries> map) {
    Isogeny f;
    f.source = std::move(source);
    f.target = std::move(target);
    TowerPtr tw = f.source.tower->depth() >= f.target.tower->depth() ? f.source.tower : f.target.tower;
    f.map = mat_zs_lift(tw, map);
    // equivariance: F num_src (z-zeta)^{p_tgt} == num_tgt sigma(F) (z-zeta)^{p_src}
    Mat<ZSeries> lhs = mat_zs_mul(f.map, mat_zs_lift(tw, f.source.num));
    Mat<ZSeries> rhs = mat_zs_mul(mat_zs_lift(tw, f.target.num), mat_zs_sigma(f.map));
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : lhs.a) pp = std::min(pp, zs_min_coeff_prec(x));
    std::int64_t zp = lhs.a[0].zprec;
    ZSeries zmz = zs_z_minus_zeta(tw, zp + std::max(f.source.pole, f.target.pole) + 1, pp);
    for (std::int64_t k = 0; k < f.target.pole; ++k)
        lhs = mat_map(lhs, [&](const ZSeries& x) { return zs_mul(x, zmz); });
    for (std::int64_t k = 0; k < f.source.pole; ++k)
        rhs = mat_map(rhs, [&](const ZSeries& x) { return zs_mul(x, zmz); });
    Mat<ZSeries> diff = mat_zs_sub(lhs, rhs);
    if (!mat_zs_zero_to_prec(diff)) throw NotAnIsogeny("make_isogeny: tau-equivariance fails");
    return f;
}

TorsionShtuka isogeny_cokernel(const Isogeny& f) {
    // Smith reduction of the map over R[[z]] with unit-leading pivots.
    TowerPtr tw = f.map.a[0].tw;
    int r = f.map.rows;
    std::int64_t pp = (std::int64_t(1) << 40), zp = (std::int64_t(1) << 40);
    for (auto& x : f.map.a) {
        pp = std::min(pp, zs_min_coeff_prec(x));
        zp = std::min(zp, x.zprec);
    }
    Mat<ZSeries> W = mat_zs_truncate(f.map, zp);
    Mat<ZSeries> U = mat_zs_identity(tw, r, zp, pp);
    std::vector<std::int64_t> divisors(static_cast<std::size_t>(r), 0);
    // residue z-order of a series: least k with unit coefficient
    auto res_order = [&](const ZSeries& s) -> std::optional<std::int64_t> {
        for (std::int64_t k = s.zmin; k < s.zprec; ++k) {
            LFE c = zs_coeff(s, k);
            lfe_normalize(c);
            if (!c.zero_to_prec() && *c.val() == 0) return k;
        }
        return std::nullopt;
    };
    for (int step = 0; step < r; ++step) {
        // pick pivot with minimal residue order among rows/cols >= step
        std::optional<std::int64_t> best;
        int bi = -1, bj = -1;
        for (int i = step; i < r; ++i)
            for (int j = step; j < r; ++j) {
                auto o = res_order(W.at(i, j));
                if (o && (!best || *o < *best)) {
                    best = *o;
                    bi = i;
                    bj = j;
                }
            }
        if (!best) throw NotAnIsogeny("isogeny_cokernel: no unit pivot (z-power torsion not detected)");
        // entries with smaller plain z-order than the pivot indicate pi-torsion
        for (int i = step; i < r; ++i)
            for (int j = step; j < r; ++j) {
                const ZSeries& s = W.at(i, j);
                for (std::int64_t k = s.zmin; k < std::min(*best, s.zprec); ++k) {
                    LFE c = zs_coeff(s, k);
                    lfe_normalize(c);
                    if (!c.zero_to_prec())
                        throw NotAnIsogeny("isogeny_cokernel: cokernel has pi-torsion to precision");
                }
            }
        if (bi != step)
            for (int j = 0; j < r; ++j) {
                std::swap(W.at(bi, j), W.at(step, j));
                std::swap(U.at(bi, j), U.at(step, j));
            }
        if (bj != step)
            for (int i = 0; i < r; ++i) std::swap(W.at(i, bj), W.at(i, step));
        // clear column (row ops, tracked in U) and row (col ops, untracked)
        ZSeries piv = W.at(step, step);
        // divide by pivot: piv = z^{n} * unit; division valid for ord >= n entries
        ZSeries unit = zs_shift_z(piv, -*best);
        ZSeries unit_inv = zs_inv(unit);
        for (int i = step + 1; i < r; ++i) {
            ZSeries e = W.at(i, step);
            if (zs_zero_to_prec(e)) continue;
            ZSeries q = zs_mul(zs_shift_z(e, -*best), unit_inv);
            q = zs_truncate(q, zp);
            // drop negative z-part of q below 0 (sound: those coefficients are 0)
            for (int j = 0; j < r; ++j) {
                W.at(i, j) = zs_sub(W.at(i, j), zs_truncate(zs_mul(q, W.at(step, j)), zp));
                U.at(i, j) = zs_sub(U.at(i, j), zs_truncate(zs_mul(q, U.at(step, j)), zp));
            }
        }
        for (int j = step + 1; j < r; ++j) {
            ZSeries e = W.at(step, j);
            if (zs_zero_to_prec(e)) continue;
            ZSeries q = zs_mul(zs_shift_z(e, -*best), unit_inv);
            q = zs_truncate(q, zp);
            for (int i = 0; i < r; ++i)
                W.at(i, j) = zs_sub(W.at(i, j), zs_truncate(zs_mul(q, W.at(i, step)), zp));
        }
        divisors[static_cast<std::size_t>(step)] = *best;
    }
    // cokernel tau: U T0 sigma(U)^{-1} with rows reduced mod z^{n_i}
    Mat<ZSeries> T0 = mat_zs_lift(tw, f.target.num);
    Mat<ZSeries> tau = mat_zs_mul(mat_zs_mul(U, T0), mat_zs_inv(mat_zs_sigma(U)));
    // keep rows with n_i > 0
    std::vector<int> keep;
    std::vector<std::int64_t> divs;
    for (int i = 0; i < r; ++i)
        if (divisors[static_cast<std::size_t>(i)] > 0) {
            keep.push_back(i);
            divs.push_back(divisors[static_cast<std::size_t>(i)]);
        }
    Mat<ZSeries> tq(static_cast<int>(keep.size()), static_cast<int>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j)
            tq.at(static_cast<int>(i), static_cast<int>(j)) = tau.at(keep[i], keep[j]);
    if (keep.empty()) throw NotAnIsogeny("isogeny_cokernel: trivial cokernel");
    return make_torsion(tw, divs, tq, f.target.pole);
}

TorsionShtuka torsion_dual(const TorsionShtuka& t, std::int64_t d) {
    // tau_dual = (z-zeta)^d (tau^T)^{-1}; z - zeta is already a unit in the
    // truncated ring R[[z]]/(z^n), so tau can be inverted directly there.
    TowerPtr tw = t.tower;
    int r = static_cast<int>(t.divisors.size());
    std::int64_t nmax = 0;
    for (auto n : t.divisors) nmax = std::max(nmax, n);
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : t.num.a) pp = std::min(pp, zs_min_coeff_prec(x));
    std::int64_t zp = nmax;
    Mat<ZSeries> C(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            ZSeries e = zs_zero(tw, 0, zp, pp);
            const ZSeries& s = t.num.at(i, j);
            for (std::int64_t k = std::max<std::int64_t>(s.zmin, 0); k < std::min(s.zprec, zp); ++k)
                zs_set_coeff(e, k, zs_coeff(s, k));
            C.at(i, j) = e;
        }
    Mat<ZSeries> Cinv = mat_zs_inv(C);
    ZSeries zmz = zs_z_minus_zeta(tw, zp + 1, pp);
    Mat<ZSeries> out(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            ZSeries v = Cinv.at(j, i);
            for (std::int64_t k = 0; k < d; ++k) v = zs_truncate(zs_mul(v, zmz), zp);
            // integrality certifies the height; fail otherwise
            for (std::int64_t k = v.zmin; k < v.zprec; ++k) {
                LFE c = zs_coeff(v, k);
                lfe_normalize(c);
                if (!c.zero_to_prec() && *c.val() < 0)
                    throw InputError("torsion_dual: twist too small for the height");
            }
            out.at(i, j) = v;
        }
    return make_torsion(tw, t.divisors, out, 0);
}

namespace {
// Expanded (z - zeta)^{-1} on [0, N) as an exact geometric series.
ZSeries zmz_inverse_expanded(const TowerPtr& tw, std::int64_t N, std::int64_t pp) {
    ZSeries inv = zs_zero(tw, 0, N, pp);
    LFE zinv = lfe_inv(tw->zeta(pp + (N + 1) * tw->zeta_val()));
    LFE cur = zinv;
    for (std::int64_t i = 0; i < N; ++i) {
        zs_set_coeff(inv, i, lfe_neg(cur));
        cur = lfe_mul(cur, zinv);
    }
    return inv;
}

// Largest d <= cap with (z-zeta)^{-d} x integral on the window; also returns
// the (integral, unit-at-z^0 if fully reduced) cofactor.
std::pair<std::int64_t, ZSeries> zmz_integral_order(const ZSeries& x, std::int64_t cap) {
    ZSeries inv = zmz_inverse_expanded(x.tw, x.zprec - std::min<std::int64_t>(x.zmin, 0) + 1,
                                       zs_min_coeff_prec(x));
    ZSeries cur = x;
    std::int64_t d = 0;
    while (d < cap) {
        ZSeries nxt = zs_truncate(zs_mul(cur, inv), x.zprec);
        bool integral = true;
        for (std::int64_t k = nxt.zmin; k < nxt.zprec; ++k) {
            LFE c = zs_coeff(nxt, k);
            lfe_normalize(c);
            if (!c.zero_to_prec() && *c.val() < 0) {
                integral = false;
                break;
            }
        }
        if (!integral) break;
        cur = nxt;
        ++d;
    }
    return {d, cur};
}
}  // namespace

Isogeny torsion_resolution(const TorsionShtuka& t) {
    if (t.pole != 0) throw NotEffective("torsion_resolution: input must be effective");
    TowerPtr tw = t.tower;
    int r = static_cast<int>(t.divisors.size());
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : t.num.a) pp = std::min(pp, zs_min_coeff_prec(x));
    std::int64_t nmax = 0;
    for (auto n : t.divisors) nmax = std::max(nmax, n);
    std::int64_t zp = 2 * nmax + 4;
    // Work modulo z^{nmax} with integral row/column operations, pivoting on
    // the (z-zeta)-integral order; this yields W = L * diag((z-zeta)^{d_i} v_i) * U
    // with L, U integral with unit determinant mod z^{nmax}.
    Mat<ZSeries> W(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            ZSeries e = zs_zero(tw, 0, nmax, pp);
            const ZSeries& s = t.num.at(i, j);
            for (std::int64_t k = std::max<std::int64_t>(0, s.zmin); k < std::min(s.zprec, nmax); ++k)
                zs_set_coeff(e, k, zs_coeff(s, k));
            W.at(i, j) = e;
        }
    Mat<ZSeries> L = mat_zs_identity(tw, r, nmax, pp);
    Mat<ZSeries> Umat = mat_zs_identity(tw, r, nmax, pp);
    std::int64_t dmax = r * nmax + 2;
    std::vector<std::int64_t> dvals(static_cast<std::size_t>(r), 0);
    std::vector<ZSeries> units;
    for (int step = 0; step < r; ++step) {
        // pivot: entry with minimal (z-zeta)-integral order whose cofactor is a
        // unit; everything else in the block then divides it
        int bi = -1, bj = -1;
        std::int64_t bestd = -1, mind_any = dmax + 1;
        ZSeries bestco;
        for (int i = step; i < r; ++i)
            for (int j = step; j < r; ++j) {
                if (zs_zero_to_prec(W.at(i, j))) continue;
                auto [d, co] = zmz_integral_order(W.at(i, j), dmax);
                mind_any = std::min(mind_any, d);
                LFE c0 = zs_coeff(co, 0);
                lfe_normalize(c0);
                bool unit = !c0.zero_to_prec() && *c0.val() == 0;
                if (unit && (bestd < 0 || d < bestd)) {
                    bestd = d;
                    bi = i;
                    bj = j;
                    bestco = co;
                }
            }
        if (bi < 0) throw NotEffective("torsion_resolution: no unit pivot in the (z-zeta)-reduction");
        if (mind_any < bestd)
            throw NotEffective("torsion_resolution: pi-torsion obstruction in the reduction");
        if (bi != step)
            for (int j = 0; j < r; ++j) {
                std::swap(W.at(bi, j), W.at(step, j));
                std::swap(L.at(bi, j), L.at(step, j));
            }
        if (bj != step)
            for (int i = 0; i < r; ++i) {
                std::swap(W.at(i, bj), W.at(i, step));
                std::swap(Umat.at(i, bj), Umat.at(i, step));
            }
        dvals[static_cast<std::size_t>(step)] = bestd;
        units.push_back(bestco);
        // clear: for entries below/right, subtract integral multiples
        ZSeries pivinv_cof = zs_inv(bestco);
        ZSeries zmzinv = zmz_inverse_expanded(tw, nmax + 1, pp);
        auto divide_by_pivot = [&](const ZSeries& x) {
            // q = x / ((z-zeta)^{bestd} * cof): integral when iord(x) >= bestd
            ZSeries q = x;
            for (std::int64_t k = 0; k < bestd; ++k) q = zs_truncate(zs_mul(q, zmzinv), nmax);
            return zs_truncate(zs_mul(q, pivinv_cof), nmax);
        };
        for (int i = step + 1; i < r; ++i) {
            ZSeries q = divide_by_pivot(W.at(i, step));
            for (int j = 0; j < r; ++j) {
                W.at(i, j) = zs_truncate(zs_sub(W.at(i, j), zs_mul(q, W.at(step, j))), nmax);
                L.at(i, j) = zs_truncate(zs_sub(L.at(i, j), zs_mul(q, L.at(step, j))), nmax);
            }
        }
        for (int j = step + 1; j < r; ++j) {
            ZSeries q = divide_by_pivot(W.at(step, j));
            for (int i = 0; i < r; ++i) {
                W.at(i, j) = zs_truncate(zs_sub(W.at(i, j), zs_mul(W.at(i, step), q)), nmax);
                Umat.at(i, j) = zs_truncate(zs_sub(Umat.at(i, j), zs_mul(Umat.at(i, step), q)), nmax);
            }
        }
    }
    // T := L_pad * diag((z-zeta)^{d_i} * pad(v_i)) * U_pad over the window [0, zp)
    auto pad = [&](const ZSeries& s) {
        ZSeries e = zs_zero(tw, 0, zp, pp);
        for (std::int64_t k = std::max<std::int64_t>(0, s.zmin); k < std::min(s.zprec, zp); ++k)
            zs_set_coeff(e, k, zs_coeff(s, k));
        e.val_floor = Rational(0);
        return e;
    };
    // W_final = L * W0 * U, so the structured lift is T = L^{-1} Dg U^{-1}
    Mat<ZSeries> Lp = mat_map(L, pad), Up = mat_map(Umat, pad);
    Mat<ZSeries> Dg(r, r, zs_zero(tw, 0, zp, pp));
    ZSeries zmz = zs_z_minus_zeta(tw, zp, pp);
    for (int i = 0; i < r; ++i) {
        ZSeries v = pad(units[static_cast<std::size_t>(i)]);
        for (std::int64_t k = 0; k < dvals[static_cast<std::size_t>(i)]; ++k)
            v = zs_truncate(zs_mul(v, zmz), zp);
        Dg.at(i, i) = v;
    }
    Mat<ZSeries> T = mat_zs_mul(mat_zs_mul(mat_zs_inv(Lp), Dg), mat_zs_inv(Up));
    // congruence check against the torsion tau, row i mod z^{n_i}
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            ZSeries diff = zs_sub(zs_truncate(T.at(i, j), t.divisors[static_cast<std::size_t>(i)]),
                                  t.num.at(i, j));
            if (!zs_zero_to_prec(diff))
                throw NotEffective("torsion_resolution: lift does not reduce to tau");
        }
    Mat<ZSeries> T1(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            T1.at(i, j) = zs_shift_z(T.at(i, j), t.divisors[static_cast<std::size_t>(j)] -
                                                     t.divisors[static_cast<std::size_t>(i)]);
    Mat<ZSeries> D = mat_zs_identity(tw, r, zp, pp);
    for (int i = 0; i < r; ++i)
        D.at(i, i) = zs_monomial(lfe_one(tw, pp), t.divisors[static_cast<std::size_t>(i)], zp);
    LocalShtuka M0 = make_shtuka(tw, T, 0);
    LocalShtuka M1 = make_shtuka(tw, T1, 0);
    return make_isogeny(M1, M0, D);
}

DrinfeldPresentation drinfeld_presentation(const TorsionShtuka& t) {
    if (t.pole != 0) throw NotEffective("drinfeld_presentation: torsion shtuka must be effective");
    RBasis rb = torsion_rbasis(t);
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : t.num.a) pp = std::min(pp, zs_min_coeff_prec(x));
    DrinfeldPresentation out;
    out.gens = rb.gens;
    for (std::size_t g = 0; g < rb.gens.size(); ++g) {
        auto [j, s] = rb.gens[g];
        out.rel.push_back(torsion_tau_column(t, rb, j, s, pp));
        auto [i, tt] = rb.gens[g];
        if (tt + 1 < t.divisors[static_cast<std::size_t>(i)])
            out.z_next.push_back(static_cast<int>(rb.index[static_cast<std::size_t>(i)][static_cast<std::size_t>(tt + 1)]));
        else
            out.z_next.push_back(-1);
    }
    return out;
}

// --- sum / intersection in a common ambient -------------------------------------------

namespace {

// z-action matrix of the ambient torsion shtuka on its R-basis.
std::vector<std::vector<LFE>> ambient_z_action(const TorsionShtuka& amb, const RBasis& rb,
                                               std::int64_t pp) {
    std::vector<std::vector<LFE>> Z(rb.gens.size(),
                                    std::vector<LFE>(rb.gens.size(), lfe_zero(amb.tower, pp)));
    for (std::size_t g = 0; g < rb.gens.size(); ++g) {
        auto [i, t] = rb.gens[g];
        if (t + 1 < amb.divisors[static_cast<std::size_t>(i)]) {
            std::size_t h = rb.index[static_cast<std::size_t>(i)][static_cast<std::size_t>(t + 1)];
            Z[h][g] = lfe_one(amb.tower, pp);
        }
    }
    return Z;
}

// Expand embedding columns into R-vectors and close under the z-action.
void embed_columns(const TorsionShtuka& amb, const RBasis& rb, const AmbientEmbedding& e,
                   std::int64_t pp, DvrBasis& span, std::vector<std::vector<LFE>>& vecs) {
    for (int j = 0; j < e.cols.cols; ++j) {
        std::vector<LFE> v(rb.gens.size(), lfe_zero(amb.tower, pp));
        for (int i = 0; i < e.cols.rows; ++i) {
            const ZSeries& s = e.cols.at(i, j);
            for (std::int64_t k = s.zmin; k < s.zprec; ++k) {
                if (k < 0 || k >= amb.divisors[static_cast<std::size_t>(i)]) continue;
                v[rb.index[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]] =
                    lfe_add(v[rb.index[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]],
                            zs_coeff(s, k));
            }
        }
        // z-closure
        auto Z = ambient_z_action(amb, rb, pp);
        std::vector<LFE> cur = v;
        for (std::int64_t step = 0; step <= torsion_rank(amb); ++step) {
            vecs.push_back(cur);
            dvr_insert(span, cur);
            std::vector<LFE> nxt(rb.gens.size(), lfe_zero(amb.tower, pp));
            bool nonzero = false;
            for (std::size_t a = 0; a < rb.gens.size(); ++a) {
                LFE acc = lfe_zero(amb.tower, pp);
                for (std::size_t b = 0; b < rb.gens.size(); ++b)
                    if (!Z[a][b].zero_to_prec() && !cur[b].zero_to_prec())
                        acc = lfe_add(acc, lfe_mul(Z[a][b], cur[b]));
                lfe_normalize(acc);
                if (!acc.zero_to_prec()) nonzero = true;
                nxt[a] = acc;
            }
            if (!nonzero) break;
            cur = nxt;
        }
    }
}

std::int64_t nmax_of(const std::vector<std::int64_t>& divisors) {
    std::int64_t n = 1;
    for (auto d : divisors) n = std::max(n, d);
    return n;
}

// Build a torsion shtuka from an R-submodule (column span) of the ambient,
// closed under z and tau.
TorsionShtuka submodule_to_torsion(const TorsionShtuka& amb, const RBasis& rb,
                                   const DvrBasis& span, std::int64_t pp) {
    std::size_t N = rb.gens.size();
    std::size_t m = span.cols.size();
    if (m == 0) throw IncompatibleAmbient("torsion submodule is zero");
    // z-action on the submodule basis: solve span * X = Z * span
    auto Z = ambient_z_action(amb, rb, pp);
    // coordinates of a vector in the span basis (it must reduce to zero)
    auto coords = [&](std::vector<LFE> v) {
        std::vector<LFE> co(m, lfe_zero(amb.tower, pp));
        for (std::size_t c = 0; c < m; ++c) {
            std::size_t pr = span.pivot[c];
            LFE x = v[pr];
            lfe_normalize(x);
            if (x.zero_to_prec()) continue;
            LFE pv = span.cols[c][pr];
            if (*x.val() < *pv.val()) throw IncompatibleAmbient("submodule not z/tau-stable");
            LFE q = lfe_div(x, pv);
            co[c] = q;
            for (std::size_t rr = 0; rr < N; ++rr) v[rr] = lfe_sub(v[rr], lfe_mul(q, span.cols[c][rr]));
        }
        for (auto& x : v) {
            lfe_normalize(x);
            if (!x.zero_to_prec()) throw IncompatibleAmbient("submodule not z/tau-stable");
        }
        return co;
    };
    std::vector<std::vector<LFE>> Zsub(m, std::vector<LFE>(m));
    for (std::size_t c = 0; c < m; ++c) {
        std::vector<LFE> zv(N, lfe_zero(amb.tower, pp));
        for (std::size_t a = 0; a < N; ++a) {
            LFE acc = lfe_zero(amb.tower, pp);
            for (std::size_t b = 0; b < N; ++b)
                if (!Z[a][b].zero_to_prec()) acc = lfe_add(acc, lfe_mul(Z[a][b], span.cols[c][b]));
            zv[a] = acc;
        }
        auto co = coords(zv);
        for (std::size_t rr = 0; rr < m; ++rr) Zsub[rr][c] = co[rr];
    }
    // divisors from the nilpotent Jordan partition of Zsub mod m_R
    const FieldPtr& F = amb.tower->field();
    std::vector<fqpoly::Poly> zmat;  // (z I - Zbar) over F[z], row major
    std::vector<ff_t> Zbar(m * m, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            LFE x = Zsub[i][j];
            lfe_normalize(x);
            ff_t c0 = 0;
            if (!x.zero_to_prec() && *x.val() == 0) c0 = lfe_coeff(x, 0);
            else if (!x.zero_to_prec() && *x.val() < 0)
                throw IncompatibleAmbient("submodule z-action not integral");
            Zbar[i * m + j] = c0;
        }
    // Jordan partition from ranks of powers of Zbar
    std::vector<std::size_t> rank_pow;
    {
        std::vector<ff_t> P(m * m, 0);
        for (std::size_t i = 0; i < m; ++i) P[i * m + i] = F->one();
        for (std::size_t e = 0; e <= m; ++e) {
            // rank of P over F
            std::vector<ff_t> M = P;
            std::size_t rank = 0;
            for (std::size_t c = 0; c < m && rank < m; ++c) {
                std::size_t sel = m;
                for (std::size_t rr = rank; rr < m; ++rr)
                    if (M[rr * m + c] != 0) {
                        sel = rr;
                        break;
                    }
                if (sel == m) continue;
                for (std::size_t cc = 0; cc < m; ++cc) std::swap(M[sel * m + cc], M[rank * m + cc]);
                ff_t inv = F->inv(M[rank * m + c]);
                for (std::size_t cc = 0; cc < m; ++cc) M[rank * m + cc] = F->mul(M[rank * m + cc], inv);
                for (std::size_t rr = 0; rr < m; ++rr) {
                    if (rr == rank || M[rr * m + c] == 0) continue;
                    ff_t fct = M[rr * m + c];
                    for (std::size_t cc = 0; cc < m; ++cc)
                        M[rr * m + cc] = F->sub(M[rr * m + cc], F->mul(fct, M[rank * m + cc]));
                }
                ++rank;
            }
            rank_pow.push_back(rank);
            // P <- P * Zbar
            std::vector<ff_t> Q(m * m, 0);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t kk = 0; kk < m; ++kk) {
                    if (P[i * m + kk] == 0) continue;
                    for (std::size_t j = 0; j < m; ++j)
                        Q[i * m + j] = F->add(Q[i * m + j], F->mul(P[i * m + kk], Zbar[kk * m + j]));
                }
            P = std::move(Q);
        }
    }
    // partition: number of blocks of size >= s is rank_pow[s-1] - rank_pow[s]
    std::vector<std::int64_t> divisors;
    {
        std::vector<std::size_t> blocks_ge(m + 1, 0);
        for (std::size_t s = 1; s <= m; ++s)
            blocks_ge[s] = rank_pow[s - 1] - (s < rank_pow.size() ? rank_pow[s] : 0);
        for (std::size_t s = m; s >= 1; --s) {
            std::size_t count = blocks_ge[s] >= (s < m ? blocks_ge[s + 1] : 0)
                                    ? blocks_ge[s] - (s < m ? blocks_ge[s + 1] : 0)
                                    : 0;
            for (std::size_t c2 = 0; c2 < count; ++c2) divisors.push_back(static_cast<std::int64_t>(s));
        }
    }
    std::sort(divisors.begin(), divisors.end(), std::greater<>());
    // generators: Jordan chain tops over F, lifted
    std::vector<std::vector<LFE>> gens;  // in ambient coordinates
    {
        // greedy: pick vectors maximizing nilpotency order modulo the span of
        // shorter chains (dimensions are tiny here)
        std::vector<std::vector<ff_t>> chain_span;  // F-vectors in submodule coords
        auto in_span = [&](const std::vector<ff_t>& v) {
            if (chain_span.empty()) return false;
            std::vector<std::vector<ff_t>> M = chain_span;
            M.push_back(v);
            std::size_t rank_with = 0, rank_without = 0;
            auto rank_of = [&](std::vector<std::vector<ff_t>> rows) {
                std::size_t rank = 0;
                for (std::size_t c = 0; c < m && rank < rows.size(); ++c) {
                    std::size_t sel = rows.size();
                    for (std::size_t rr = rank; rr < rows.size(); ++rr)
                        if (rows[rr][c] != 0) {
                            sel = rr;
                            break;
                        }
                    if (sel == rows.size()) continue;
                    std::swap(rows[sel], rows[rank]);
                    ff_t inv = F->inv(rows[rank][c]);
                    for (std::size_t cc = 0; cc < m; ++cc) rows[rank][cc] = F->mul(rows[rank][cc], inv);
                    for (std::size_t rr = 0; rr < rows.size(); ++rr) {
                        if (rr == rank || rows[rr][c] == 0) continue;
                        ff_t fct = rows[rr][c];
                        for (std::size_t cc = 0; cc < m; ++cc)
                            rows[rr][cc] = F->sub(rows[rr][cc], F->mul(fct, rows[rank][cc]));
                    }
                    ++rank;
                }
                return rank;
            };
            rank_with = rank_of(M);
            rank_without = rank_of(chain_span);
            return rank_with == rank_without;
        };
        auto apply_Zbar = [&](const std::vector<ff_t>& v) {
            std::vector<ff_t> out(m, 0);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    if (Zbar[i * m + j] != 0 && v[j] != 0)
                        out[i] = F->add(out[i], F->mul(Zbar[i * m + j], v[j]));
            return out;
        };
        for (std::int64_t want : divisors) {
            // find v with Zbar^{want-1} v not in span and Zbar^{want} v == 0
            bool found = false;
            for (std::uint64_t trial = 1; trial < (std::uint64_t(1) << std::min<std::size_t>(2 * m, 16)) && !found; ++trial) {
                std::vector<ff_t> v(m, 0);
                std::uint64_t tt = trial;
                for (std::size_t i = 0; i < m; ++i) {
                    v[i] = F->from_index(tt % F->q());
                    tt /= F->q();
                }
                std::vector<ff_t> w = v;
                for (std::int64_t s = 1; s < want; ++s) w = apply_Zbar(w);
                std::vector<ff_t> w2 = apply_Zbar(w);
                bool zero2 = true;
                for (auto x : w2)
                    if (x != 0) zero2 = false;
                bool indep = !in_span(w);
                if (zero2 && indep) {
                    // accept chain v, Zv, ..., Z^{want-1}v
                    std::vector<ff_t> cur = v;
                    for (std::int64_t s = 0; s < want; ++s) {
                        chain_span.push_back(cur);
                        cur = apply_Zbar(cur);
                    }
                    // lift v to ambient coordinates
                    std::vector<LFE> gen(N, lfe_zero(amb.tower, pp));
                    for (std::size_t c = 0; c < m; ++c) {
                        if (v[c] == 0) continue;
                        for (std::size_t rr = 0; rr < N; ++rr)
                            gen[rr] = lfe_add(gen[rr], lfe_scale(span.cols[c][rr], v[c]));
                    }
                    gens.push_back(gen);
                    found = true;
                }
            }
            if (!found) throw IncompatibleAmbient("could not realize the divisor decomposition");
        }
    }
    // new basis vectors: z^t g_i; express tau(sigma* z^t g_i) in that basis
    RBasis nrb;
    nrb.index.resize(divisors.size());
    for (std::size_t i = 0; i < divisors.size(); ++i)
        for (std::int64_t s = 0; s < divisors[i]; ++s) {
            nrb.index[i].push_back(nrb.gens.size());
            nrb.gens.emplace_back(static_cast<int>(i), s);
        }
    auto apply_Z = [&](const std::vector<LFE>& v) {
        std::vector<LFE> out(N, lfe_zero(amb.tower, pp));
        auto Z2 = ambient_z_action(amb, rb, pp);
        for (std::size_t a = 0; a < N; ++a) {
            LFE acc = lfe_zero(amb.tower, pp);
            for (std::size_t b = 0; b < N; ++b)
                if (!Z2[a][b].zero_to_prec() && !v[b].zero_to_prec())
                    acc = lfe_add(acc, lfe_mul(Z2[a][b], v[b]));
            out[a] = acc;
        }
        return out;
    };
    // full new R-basis in ambient coordinates
    std::vector<std::vector<LFE>> nb;
    for (std::size_t i = 0; i < divisors.size(); ++i) {
        std::vector<LFE> cur = gens[i];
        for (std::int64_t s = 0; s < divisors[i]; ++s) {
            nb.push_back(cur);
            cur = apply_Z(cur);
        }
    }
    DvrBasis nbB;
    for (auto& v : nb) dvr_insert(nbB, v);
    if (nbB.cols.size() != nb.size()) throw IncompatibleAmbient("lifted basis degenerate");
    auto coords_nb = [&](std::vector<LFE> v) {
        // solve nb * x = v by Gaussian elimination over the fraction field
        std::size_t n2 = nb.size();
        std::vector<std::vector<LFE>> M(N, std::vector<LFE>(n2 + 1, lfe_zero(amb.tower, pp)));
        for (std::size_t c = 0; c < n2; ++c)
            for (std::size_t rr2 = 0; rr2 < N; ++rr2) M[rr2][c] = nb[c][rr2];
        for (std::size_t rr2 = 0; rr2 < N; ++rr2) M[rr2][n2] = v[rr2];
        std::vector<std::size_t> pivot_row;
        std::size_t rank = 0;
        for (std::size_t c = 0; c < n2 && rank < N; ++c) {
            std::size_t sel = N;
            std::int64_t bestv = INT64_MAX;
            for (std::size_t rr2 = rank; rr2 < N; ++rr2) {
                LFE x = M[rr2][c];
                lfe_normalize(x);
                if (!x.zero_to_prec() && *x.val() < bestv) {
                    bestv = *x.val();
                    sel = rr2;
                }
            }
            if (sel == N) throw IncompatibleAmbient("degenerate basis in coordinate solve");
            std::swap(M[sel], M[rank]);
            LFE inv = lfe_inv(M[rank][c]);
            for (std::size_t cc = 0; cc <= n2; ++cc) M[rank][cc] = lfe_mul(M[rank][cc], inv);
            for (std::size_t rr2 = 0; rr2 < N; ++rr2) {
                if (rr2 == rank) continue;
                LFE fct = M[rr2][c];
                lfe_normalize(fct);
                if (fct.zero_to_prec()) continue;
                for (std::size_t cc = 0; cc <= n2; ++cc)
                    M[rr2][cc] = lfe_sub(M[rr2][cc], lfe_mul(fct, M[rank][cc]));
            }
            pivot_row.push_back(rank);
            ++rank;
        }
        std::vector<LFE> x(n2, lfe_zero(amb.tower, pp));
        for (std::size_t c = 0; c < n2; ++c) x[c] = M[c][n2];
        return x;
    };
    // ambient tau on R-vectors
    auto amb_tau = [&](const std::vector<LFE>& v) {
        // tau(sigma* sum c_g m_g) = sum sigma(c_g) tau(sigma* m_g)
        std::vector<LFE> out(N, lfe_zero(amb.tower, pp));
        for (std::size_t g = 0; g < N; ++g) {
            LFE cg = v[g];
            lfe_normalize(cg);
            if (cg.zero_to_prec()) continue;
            auto [j, s] = rb.gens[g];
            auto col = torsion_tau_column(amb, rb, j, s, pp);
            LFE sc = lfe_sigma(cg);
            for (std::size_t a = 0; a < N; ++a) out[a] = lfe_add(out[a], lfe_mul(sc, col[a]));
        }
        return out;
    };
    // tau matrix on the new generators, as z-series columns
    int rn = static_cast<int>(divisors.size());
    Mat<ZSeries> tau(rn, rn, zs_zero(amb.tower, 0, nmax_of(divisors), pp));
    for (int j = 0; j < rn; ++j) {
        auto img = amb_tau(gens[static_cast<std::size_t>(j)]);
        auto co = coords_nb(img);
        for (int i = 0; i < rn; ++i) {
            ZSeries s = zs_zero(amb.tower, 0, divisors[static_cast<std::size_t>(i)], pp);
            for (std::int64_t tpow = 0; tpow < divisors[static_cast<std::size_t>(i)]; ++tpow)
                zs_set_coeff(s, tpow, co[nrb.index[static_cast<std::size_t>(i)][static_cast<std::size_t>(tpow)]]);
            tau.at(i, j) = s;
        }
    }
    return make_torsion(amb.tower, divisors, tau, amb.pole);
}

}  // namespace

TorsionShtuka torsion_sum(const TorsionShtuka& ambient, const AmbientEmbedding& a,
                          const AmbientEmbedding& b) {
    RBasis rb = torsion_rbasis(ambient);
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : ambient.num.a) pp = std::min(pp, zs_min_coeff_prec(x));
    DvrBasis span;
    std::vector<std::vector<LFE>> vecs;
    embed_columns(ambient, rb, a, pp, span, vecs);
    embed_columns(ambient, rb, b, pp, span, vecs);
    return submodule_to_torsion(ambient, rb, span, pp);
}

TorsionShtuka torsion_intersection(const TorsionShtuka& ambient, const AmbientEmbedding& a,
                                   const AmbientEmbedding& b) {
    RBasis rb = torsion_rbasis(ambient);
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : ambient.num.a) pp = std::min(pp, zs_min_coeff_prec(x));
    DvrBasis spanA, spanB;
    std::vector<std::vector<LFE>> va, vb;
    embed_columns(ambient, rb, a, pp, spanA, va);
    embed_columns(ambient, rb, b, pp, spanB, vb);
    // intersection: solve spanA x = spanB y over the fraction field; the
    // intersection is spanned by the resulting spanA-combinations.
    std::size_t N = rb.gens.size();
    std::size_t ma = spanA.cols.size(), mb = spanB.cols.size();
    // kernel of [A | -B] over the field, saturated to primitive vectors
    std::size_t cols = ma + mb;
    std::vector<std::vector<LFE>> M(N, std::vector<LFE>(cols, lfe_zero(ambient.tower, pp)));
    for (std::size_t c = 0; c < ma; ++c)
        for (std::size_t r2 = 0; r2 < N; ++r2) M[r2][c] = spanA.cols[c][r2];
    for (std::size_t c = 0; c < mb; ++c)
        for (std::size_t r2 = 0; r2 < N; ++r2) M[r2][ma + c] = lfe_neg(spanB.cols[c][r2]);
    // Gaussian elimination tracking free columns
    std::vector<int> pivot_of_col(cols, -1);
    std::size_t rank = 0;
    std::vector<std::vector<LFE>> R = M;
    for (std::size_t c = 0; c < cols && rank < N; ++c) {
        std::size_t sel = N;
        std::int64_t bestv = INT64_MAX;
        for (std::size_t r2 = rank; r2 < N; ++r2) {
            LFE x = R[r2][c];
            lfe_normalize(x);
            if (!x.zero_to_prec() && *x.val() < bestv) {
                bestv = *x.val();
                sel = r2;
            }
        }
        if (sel == N) continue;
        std::swap(R[sel], R[rank]);
        LFE inv = lfe_inv(R[rank][c]);
        for (std::size_t cc = 0; cc < cols; ++cc) R[rank][cc] = lfe_mul(R[rank][cc], inv);
        for (std::size_t r2 = 0; r2 < N; ++r2) {
            if (r2 == rank) continue;
            LFE fct = R[r2][c];
            lfe_normalize(fct);
            if (fct.zero_to_prec()) continue;
            for (std::size_t cc = 0; cc < cols; ++cc)
                R[r2][cc] = lfe_sub(R[r2][cc], lfe_mul(fct, R[rank][cc]));
        }
        pivot_of_col[c] = static_cast<int>(rank);
        ++rank;
    }
    DvrBasis inter;
    for (std::size_t c = 0; c < cols; ++c) {
        if (pivot_of_col[c] >= 0) continue;
        // kernel vector: free column c
        std::vector<LFE> k(cols, lfe_zero(ambient.tower, pp));
        k[c] = lfe_one(ambient.tower, pp);
        for (std::size_t cc = 0; cc < cols; ++cc)
            if (pivot_of_col[cc] >= 0) k[cc] = lfe_neg(R[static_cast<std::size_t>(pivot_of_col[cc])][c]);
        // normalize to primitive (min valuation 0)
        std::int64_t mv = INT64_MAX;
        for (auto& x : k) {
            LFE xx = x;
            lfe_normalize(xx);
            if (!xx.zero_to_prec()) mv = std::min(mv, *xx.val());
        }
        if (mv == INT64_MAX) continue;
        // intersection element = A-part combination
        std::vector<LFE> v(N, lfe_zero(ambient.tower, pp));
        for (std::size_t c2 = 0; c2 < ma; ++c2) {
            LFE coeff = lfe_shift(k[c2], -mv);
            lfe_normalize(coeff);
            if (coeff.zero_to_prec()) continue;
            for (std::size_t r2 = 0; r2 < N; ++r2)
                v[r2] = lfe_add(v[r2], lfe_mul(coeff, spanA.cols[c2][r2]));
        }
        dvr_insert(inter, v);
    }
    return submodule_to_torsion(ambient, rb, inter, pp);
}

}  // namespace shtukalab
