#include "shtukalab/galois.hpp"

#include <algorithm>

namespace shtukalab {

namespace {

// Expansion of tau itself (pole opened up) as a ZSeries matrix on [0, N).
Mat<ZSeries> expand_tau(const LocalShtuka& sh, std::int64_t N, std::int64_t pp) {
    Mat<ZSeries> num = mat_zs_truncate(mat_zs_lift(sh.tower, sh.num), N);
    num = mat_map(num, [&](const ZSeries& x) {
        ZSeries e = zs_zero(sh.tower, 0, N, pp);
        for (std::int64_t k = std::max<std::int64_t>(0, x.zmin); k < std::min(x.zprec, N); ++k)
            zs_set_coeff(e, k, zs_coeff(x, k));
        return e;
    });
    if (sh.pole == 0) return num;
    ZZetaFrac inv{zs_const(lfe_one(sh.tower, pp), N), 1};
    ZSeries invz = zzf_expand(inv);
    for (std::int64_t k = 0; k < sh.pole; ++k)
        num = mat_map(num, [&](const ZSeries& x) { return zs_truncate(zs_mul(x, invz), N); });
    return num;
}

Mat<LFE> z_digit(const Mat<ZSeries>& m, std::int64_t k, const TowerPtr& tw, std::int64_t pp) {
    Mat<LFE> out(m.rows, m.cols, lfe_zero(tw, pp));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) {
            const ZSeries& s = m.at(i, j);
            if (k >= s.zmin && k < s.zprec) out.at(i, j) = zs_coeff(s, k);
        }
    return out;
}

}  // namespace

Trivialization tate_trivialize(const LocalShtuka& sh, std::int64_t z_prec, std::int64_t pi_prec,
                               const SolveOptions& opt) {
    // pi_prec is the working budget in zeta-digits; pi-digit budgets scale
    // with the ramification of whatever tower the solver lands in.
    const int r = sh.rank;
    TowerPtr tw = sh.tower;
    auto ppz = [&](const TowerPtr& t) { return pi_prec * t->zeta_val(); };
    std::int64_t pp = ppz(sh.tower);
    // T expanded on the window; the recursion solves T sigma(U) = U
    Mat<ZSeries> T = expand_tau(sh, z_prec, pp);
    Mat<LFE> B0 = z_digit(T, 0, tw, pp);
    LangResult lang = semilinear_fixed_basis(tw, B0, opt);
    tw = lang.tower;
    Mat<LFE> U0 = lang.U;
    Mat<LFE> U0inv = mat_lfe_inv(U0);
    std::vector<Mat<LFE>> digits{U0};
    // U_n = U_0 X_n with sigma(X_n) - X_n = U_0^{-1} R_n,
    // R_n = -sum_{i<n} B_{n-i} sigma(U_i)
    for (std::int64_t n = 1; n < z_prec; ++n) {
        Mat<LFE> R(r, r, lfe_zero(tw, ppz(tw)));
        for (std::int64_t i = 0; i < n; ++i) {
            Mat<LFE> Bni = mat_lfe_lift(tw, z_digit(T, n - i, sh.tower, pp));
            R = mat_lfe_add(R, mat_lfe_mul(Bni, mat_lfe_sigma(mat_lfe_lift(tw, digits[static_cast<std::size_t>(i)]))));
        }
        Mat<LFE> C = mat_lfe_mul(mat_lfe_lift(tw, U0inv), mat_map(R, [](const LFE& x) { return lfe_neg(x); }));
        Mat<LFE> X(r, r, lfe_zero(tw, pp));
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) {
                ScalarResult s = solve_as_scalar(tw, C.at(a, b), opt, 1);
                if (s.tower.get() != tw.get()) {
                    // re-expand all state into the extended tower
                    tw = s.tower;
                    U0 = mat_lfe_lift(tw, U0);
                    U0inv = mat_lfe_lift(tw, U0inv);
                    for (auto& d : digits) d = mat_lfe_lift(tw, d);
                    X = mat_lfe_lift(tw, X);
                    C = mat_lfe_lift(tw, C);
                }
                X.at(a, b) = s.x;
            }
        digits.push_back(mat_lfe_mul(mat_lfe_lift(tw, U0), X));
    }
    Trivialization out;
    out.tower = tw;
    out.U = Mat<ZSeries>(r, r, zs_zero(tw, 0, z_prec, ppz(tw)));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            ZSeries s = zs_zero(tw, 0, z_prec, ppz(tw));
            for (std::int64_t n = 0; n < z_prec; ++n)
                zs_set_coeff(s, n, tw->lift(digits[static_cast<std::size_t>(n)].at(i, j)));
            out.U.at(i, j) = s;
        }
    // residual: T sigma(U) - U
    Mat<ZSeries> Tl = mat_zs_lift(tw, T);
    Mat<ZSeries> resid = mat_zs_sub(mat_zs_mul(Tl, mat_zs_sigma(out.U)), out.U);
    out.residual = mat_zs_residual_val(resid);
    // norm bound: v(c) = min_i (v_zeta(T^{-1}-digit i) + qhat i); by the
    // relation T^{-1} digits control the recursion through sigma(U) = T^{-1}U.
    {
        // T^{-1} expanded: (z-zeta)^{pole} num^{-1}
        Mat<ZSeries> numinv = mat_zs_inv(mat_zs_lift(sh.tower, expand_tau(
            LocalShtuka{sh.tower, sh.rank, sh.num, 0}, z_prec, pp)));
        ZSeries zmz = zs_z_minus_zeta(sh.tower, z_prec, pp);
        for (std::int64_t k = 0; k < sh.pole; ++k)
            numinv = mat_map(numinv, [&](const ZSeries& x) { return zs_truncate(zs_mul(x, zmz), z_prec); });
        Rational vc((std::int64_t(1) << 40));
        for (std::int64_t n = 0; n < z_prec; ++n) {
            Mat<LFE> Tn = z_digit(numinv, n, sh.tower, pp);
            for (auto& x : Tn.a) {
                LFE xx = x;
                lfe_normalize(xx);
                if (!xx.zero_to_prec())
                    vc = rmin(vc, xx.val_zeta() + Rational(static_cast<std::int64_t>(sh.tower->qhat()) * n));
            }
        }
        out.norm_bound = vc / Rational(static_cast<std::int64_t>(sh.tower->qhat()) - 1);
        out.norm_ok = true;
        for (std::int64_t n = 0; n < z_prec; ++n) {
            Mat<LFE> Un = z_digit(out.U, n, tw, pp);
            for (auto& x : Un.a) {
                LFE xx = x;
                lfe_normalize(xx);
                if (!xx.zero_to_prec() && xx.val_zeta() + Rational(n) < out.norm_bound) out.norm_ok = false;
            }
        }
    }
    return out;
}

SepRadiusReport verify_sep_radius(const Trivialization& triv, Rational s) {
    // On the finite window the membership test is: the weighted valuations
    // v(coeff of z^n) + s n attain their minimum in the early part of the
    // window and do not dip again on the last quarter (the decay trend).
    SepRadiusReport rep;
    if (!(s > Rational(1, static_cast<std::int64_t>(triv.tower->qhat()))) || s > Rational(1))
        throw InputError("verify_sep_radius: need 1/qhat < s <= 1");
    rep.ok = true;
    rep.uniform_bound = Rational((std::int64_t(1) << 40));
    auto scan = [&](const Mat<ZSeries>& M) {
        std::int64_t zp = M.a[0].zprec;
        std::int64_t tail_start = zp - std::max<std::int64_t>(zp / 4, 1);
        Rational head_min((std::int64_t(1) << 40)), tail_min((std::int64_t(1) << 40));
        std::int64_t wn = 0;
        int wi = 0, wj = 0;
        for (int i = 0; i < M.rows; ++i)
            for (int j = 0; j < M.cols; ++j) {
                const ZSeries& x = M.at(i, j);
                for (std::int64_t n = x.zmin; n < x.zprec; ++n) {
                    LFE c = zs_coeff(x, n);
                    lfe_normalize(c);
                    if (c.zero_to_prec()) continue;
                    Rational v = c.val_zeta() + s * Rational(n);
                    rep.uniform_bound = rmin(rep.uniform_bound, v);
                    if (n < tail_start) {
                        head_min = rmin(head_min, v);
                    } else if (v < tail_min) {
                        tail_min = v;
                        wn = n;
                        wi = i;
                        wj = j;
                    }
                }
            }
        if (tail_min < head_min) {
            rep.ok = false;
            rep.witness_n = wn;
            rep.witness_i = wi;
            rep.witness_j = wj;
        }
    };
    scan(triv.U);
    if (rep.ok) {
        try {
            Mat<ZSeries> Uinv = mat_zs_inv(triv.U);
            scan(Uinv);
        } catch (const NotAUnit&) {
            rep.ok = false;
        }
    }
    return rep;
}

TorsionTatePoints torsion_tate_points(const TorsionShtuka& t, const SolveOptions& opt) {
    if (t.pole != 0) throw InputError("torsion_tate_points: torsion shtuka must be effective");
    TowerPtr base = t.tower;
    TowerPtr tw = t.tower;
    int r = static_cast<int>(t.divisors.size());
    std::int64_t pp = (std::int64_t(1) << 40);
    for (auto& x : t.num.a) pp = std::min(pp, zs_min_coeff_prec(x));
    std::int64_t nmax = 0;
    for (auto n : t.divisors) nmax = std::max(nmax, n);
    // digit-0 fixed basis on all components
    Mat<LFE> A0 = z_digit(t.num, 0, tw, pp);
    LangResult lang = semilinear_fixed_basis(tw, A0, opt);
    tw = lang.tower;
    // columns of solutions, digit by digit; each column c is a vector of
    // z-series (component i alive while the digit index is < n_i)
    std::vector<std::vector<std::vector<LFE>>> cols(
        static_cast<std::size_t>(r),
        std::vector<std::vector<LFE>>(static_cast<std::size_t>(r)));
    for (int c = 0; c < r; ++c)
        for (int i = 0; i < r; ++i)
            cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)].push_back(lang.U.at(i, c));
    auto relift_all = [&](const TowerPtr& nt) {
        for (auto& col : cols)
            for (auto& comp : col)
                for (auto& x : comp) x = nt->lift(x);
        tw = nt;
    };
    for (std::int64_t digit = 1; digit < nmax; ++digit) {
        // alive components at this digit
        std::vector<int> alive;
        for (int i = 0; i < r; ++i)
            if (digit < t.divisors[static_cast<std::size_t>(i)]) alive.push_back(i);
        if (alive.empty()) break;
        int ra = static_cast<int>(alive.size());
        Mat<LFE> Ba(ra, ra, lfe_zero(tw, pp));
        for (int a = 0; a < ra; ++a)
            for (int b = 0; b < ra; ++b)
                Ba.at(a, b) = tw->lift(z_digit(t.num, 0, t.tower, pp).at(alive[static_cast<std::size_t>(a)],
                                                                        alive[static_cast<std::size_t>(b)]));
        // gauge: W with Ba sigma(W) = W on the alive block
        LangResult Wl = semilinear_fixed_basis(tw, Ba, opt);
        if (Wl.tower.get() != tw.get()) relift_all(Wl.tower);
        Mat<LFE> W = mat_lfe_lift(tw, Wl.U);
        Mat<LFE> Winv = mat_lfe_inv(W);
        for (int c = 0; c < r; ++c) {
            // residual of column c at this digit
            std::vector<LFE> rho(static_cast<std::size_t>(ra), lfe_zero(tw, pp));
            for (int a = 0; a < ra; ++a) {
                int i = alive[static_cast<std::size_t>(a)];
                LFE acc = lfe_zero(tw, pp);
                // (C sigma(m))_i digit: sum_j sum_{s<=digit} C_{ij}[digit-s] sigma(m_j[s])
                for (int j = 0; j < r; ++j) {
                    const ZSeries& entry = t.num.at(i, j);
                    auto& comp = cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
                    for (std::int64_t s2 = 0; s2 <= digit && s2 < static_cast<std::int64_t>(comp.size()); ++s2) {
                        std::int64_t k = digit - s2;
                        if (k < entry.zmin || k >= entry.zprec) continue;
                        LFE cij = tw->lift(zs_coeff(entry, k));
                        acc = lfe_add(acc, lfe_mul(cij, lfe_sigma(tw->lift(comp[static_cast<std::size_t>(s2)]))));
                    }
                }
                // minus the known digit of m_i (which is the unknown x itself):
                rho[static_cast<std::size_t>(a)] = acc;
            }
            // unknown x (digit of alive components of column c):
            // Ba sigma(x) - x = -(rho - x-term)... the equation is
            // rho + Ba sigma(x) = x, i.e. (Ba sigma - 1)(x) = -rho
            // via the gauge: x = W y with sigma(y) - y = W^{-1} * (-rho twisted)
            // derivation: Ba sigma(W y) = Ba sigma(W) sigma(y) = W sigma(y):
            // W sigma(y) + rho = W y -> sigma(y) - y = -W^{-1} rho
            std::vector<LFE> crhs(static_cast<std::size_t>(ra), lfe_zero(tw, pp));
            for (int a = 0; a < ra; ++a) {
                LFE acc = lfe_zero(tw, pp);
                for (int b = 0; b < ra; ++b)
                    acc = lfe_add(acc, lfe_mul(Winv.at(a, b), rho[static_cast<std::size_t>(b)]));
                crhs[static_cast<std::size_t>(a)] = lfe_neg(acc);
            }
            std::vector<LFE> y(static_cast<std::size_t>(ra), lfe_zero(tw, pp));
            for (int a = 0; a < ra; ++a) {
                ScalarResult s = solve_as_scalar(tw, crhs[static_cast<std::size_t>(a)], opt, 1);
                if (s.tower.get() != tw.get()) {
                    relift_all(s.tower);
                    W = mat_lfe_lift(tw, W);
                    Winv = mat_lfe_lift(tw, Winv);
                    for (auto& yy : y) yy = tw->lift(yy);
                    for (auto& cc : crhs) cc = tw->lift(cc);
                }
                y[static_cast<std::size_t>(a)] = s.x;
            }
            for (int a = 0; a < ra; ++a) {
                LFE acc = lfe_zero(tw, pp);
                for (int b = 0; b < ra; ++b)
                    acc = lfe_add(acc, lfe_mul(W.at(a, b), tw->lift(y[static_cast<std::size_t>(b)])));
                cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(alive[static_cast<std::size_t>(a)])]
                    .push_back(acc);
            }
        }
    }
    TorsionTatePoints out;
    out.tower = tw;
    for (int c = 0; c < r; ++c) {
        std::vector<ZSeries> gen;
        for (int i = 0; i < r; ++i) {
            std::int64_t ni = t.divisors[static_cast<std::size_t>(i)];
            ZSeries s = zs_zero(tw, 0, ni, pp);
            auto& comp = cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
            for (std::int64_t k = 0; k < ni && k < static_cast<std::int64_t>(comp.size()); ++k)
                zs_set_coeff(s, k, tw->lift(comp[static_cast<std::size_t>(k)]));
            gen.push_back(s);
        }
        out.basis.push_back(gen);
        // verify the fixed-point equation for this generator
        for (int i = 0; i < r; ++i) {
            std::int64_t ni = t.divisors[static_cast<std::size_t>(i)];
            ZSeries acc = zs_zero(tw, 0, ni, pp);
            for (int j = 0; j < r; ++j)
                acc = zs_add(acc, zs_truncate(zs_mul(zs_lift(tw, t.num.at(i, j)),
                                                     zs_sigma(out.basis.back()[static_cast<std::size_t>(j)])),
                                              ni));
            ZSeries diff = zs_sub(acc, out.basis.back()[static_cast<std::size_t>(i)]);
            if (!zs_zero_to_prec(diff))
                throw PrecisionExhausted("torsion_tate_points: fixed-point residual nonzero");
        }
    }
    out.length = torsion_rank(t);
    out.rational_over_base = tw.get() == base.get();
    return out;
}

Differential residue_form(const std::vector<ff_t>& lambda) {
    Differential d;
    d.c = lambda;
    return d;
}

PairingResult pairing_evaluate(const CarlitzTower& ct, const std::vector<LFE>& division_points,
                               const ZSeries& m) {
    PairingResult out;
    std::size_t N = division_points.size();
    for (std::size_t j = 0; j < N; ++j) {
        // lambda(z^{-1-j}) = sum_k m_k phi_z^k(P_j)
        LFE acc = lfe_zero(ct.tower, ct.zeta.prec);
        LFE cur = ct.tower->lift(division_points[j]);
        for (std::int64_t k = 0; k < m.zprec; ++k) {
            if (k >= m.zmin) {
                LFE mk = ct.tower->lift(zs_coeff(m, k));
                acc = lfe_add(acc, lfe_mul(mk, cur));
            }
            cur = carlitz_phi_z(ct, cur);
        }
        ff_t v = 0;
        if (!lfe_is_feps_constant(acc, &v))
            throw NotFrobeniusFixed("pairing_evaluate: value not in F_eps");
        out.lambda.push_back(v);
    }
    out.omega = residue_form(out.lambda);
    // perfect at this level iff the differential is a unit of A_eps/(z^N) dz
    out.perfect = !out.lambda.empty() && out.lambda[0] != 0;
    return out;
}

}  // namespace shtukalab
