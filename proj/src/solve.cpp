#include "shtukalab/solve.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "shtukalab/fq_poly.hpp"

namespace shtukalab {

namespace {

// ---------- F_p linear algebra (for residue semilinear systems) ----------

struct FpLin {
    std::uint32_t p;
    int rows = 0, cols = 0;
    std::vector<std::uint32_t> a;  // row major

    FpLin(std::uint32_t p_, int r, int c) : p(p_), rows(r), cols(c), a(std::size_t(r) * c, 0) {}
    std::uint32_t& at(int i, int j) { return a[std::size_t(i) * cols + j]; }
    std::uint32_t get(int i, int j) const { return a[std::size_t(i) * cols + j]; }

    std::uint32_t inv_mod(std::uint32_t x) const {
        std::uint64_t r = 1, b = x, e = p - 2;
        while (e) {
            if (e & 1) r = r * b % p;
            b = b * b % p;
            e >>= 1;
        }
        return static_cast<std::uint32_t>(r);
    }

    std::vector<int> rref() {
        std::vector<int> pivots;
        int r = 0;
        for (int c = 0; c < cols && r < rows; ++c) {
            int sel = -1;
            for (int i = r; i < rows; ++i)
                if (get(i, c)) { sel = i; break; }
            if (sel < 0) continue;
            for (int j = 0; j < cols; ++j) std::swap(at(sel, j), at(r, j));
            std::uint32_t iv = inv_mod(get(r, c));
            for (int j = 0; j < cols; ++j) at(r, j) = std::uint32_t(std::uint64_t(at(r, j)) * iv % p);
            for (int i = 0; i < rows; ++i) {
                if (i == r || !get(i, c)) continue;
                std::uint64_t f = get(i, c);
                for (int j = 0; j < cols; ++j)
                    at(i, j) = modp_sub(at(i, j), std::uint32_t(f * get(r, j) % p), p);
            }
            pivots.push_back(c);
            ++r;
        }
        return pivots;
    }
};

struct FpSolveOut {
    bool solvable = false;
    std::vector<std::uint32_t> x;
    std::vector<std::vector<std::uint32_t>> kernel;
};

FpSolveOut fp_solve(std::uint32_t p, int dim_out, const std::vector<std::vector<std::uint32_t>>& cols,
                    const std::vector<std::uint32_t>& b) {
    int n = static_cast<int>(cols.size());
    FpLin A(p, dim_out, n + 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < dim_out; ++i) A.at(i, j) = cols[j][i];
    for (int i = 0; i < dim_out; ++i) A.at(i, n) = i < static_cast<int>(b.size()) ? b[i] : 0;
    auto pivots = A.rref();
    FpSolveOut out;
    for (int pc : pivots)
        if (pc == n) return out;
    out.solvable = true;
    out.x.assign(n, 0);
    std::vector<int> pivot_of_col(n, -1);
    for (std::size_t r = 0; r < pivots.size(); ++r) pivot_of_col[pivots[r]] = static_cast<int>(r);
    for (std::size_t r = 0; r < pivots.size(); ++r) out.x[pivots[r]] = A.get(static_cast<int>(r), n);
    for (int j = 0; j < n; ++j) {
        if (pivot_of_col[j] >= 0) continue;
        std::vector<std::uint32_t> v(n, 0);
        v[j] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r)
            v[pivots[r]] = modp_sub(0, A.get(static_cast<int>(r), j), p);
        out.kernel.push_back(std::move(v));
    }
    return out;
}

std::vector<std::uint32_t> fp_coords(const FieldPtr& F, const std::vector<ff_t>& v) {
    std::vector<std::uint32_t> out;
    out.reserve(v.size() * F->m());
    for (ff_t x : v) {
        auto d = F->to_digits(x);
        out.insert(out.end(), d.begin(), d.end());
    }
    return out;
}

// Greedy extraction of an F_eps-basis from F_p-kernel vectors.
std::vector<std::vector<ff_t>> feps_basis_from_kernel(const FieldPtr& F, const Embedding& feps_emb,
                                                      const std::vector<std::vector<ff_t>>& vecs,
                                                      std::size_t want) {
    std::uint32_t p = F->p();
    std::uint32_t f = feps_emb.src->m();
    std::vector<ff_t> eps_basis;
    {
        ff_t g = feps_emb.src->m() > 1 ? feps_emb.apply(feps_emb.src->from_digits({0, 1})) : F->one();
        ff_t cur = F->one();
        for (std::uint32_t i = 0; i < f; ++i) {
            eps_basis.push_back(cur);
            cur = F->mul(cur, g);
        }
    }
    std::vector<std::vector<ff_t>> basis;
    std::vector<std::vector<std::uint32_t>> span;
    auto rank_of = [&](const std::vector<std::vector<std::uint32_t>>& rows) {
        if (rows.empty()) return std::size_t(0);
        FpLin M(p, static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < rows[i].size(); ++j)
                M.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
        return M.rref().size();
    };
    for (auto& v : vecs) {
        bool zero = true;
        for (ff_t x : v)
            if (x) zero = false;
        if (zero) continue;
        auto coords = fp_coords(F, v);
        auto with = span;
        with.push_back(coords);
        if (rank_of(with) == rank_of(span)) continue;
        basis.push_back(v);
        for (ff_t e : eps_basis) {
            std::vector<ff_t> ev(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) ev[i] = F->mul(e, v[i]);
            span.push_back(fp_coords(F, ev));
        }
        if (basis.size() == want) break;
    }
    return basis;
}

std::int64_t ipow64(std::int64_t b, unsigned e) {
    std::int64_t r = 1;
    while (e--) r *= b;
    return r;
}

std::pair<FieldPtr, Embedding> extend_field(const FieldPtr& F, std::uint32_t d, std::uint64_t seed) {
    if (d == 1) {
        Embedding e;
        e.src = F;
        e.dst = F;
        e.gen_image = F->m() > 1 ? F->from_digits({0, 1}) : 0;
        return {F, e};
    }
    auto big = FiniteField::make_default(F->p(), F->m() * d);
    return {big, make_embedding(F, big, seed)};
}

}  // namespace

// ---------- residue-field solvers ----------

ResidueASResult artin_schreier_residue(const FieldPtr& F, std::uint64_t qhat, ff_t c,
                                       const SolveOptions& opt, unsigned j, bool allow_extension) {
    std::uint32_t p = F->p();
    std::uint64_t Q = 1;
    for (unsigned i = 0; i < j; ++i) Q *= qhat;
    for (std::uint32_t d = 1;; d *= p) {
        if (d > 1 && !allow_extension)
            throw ExtensionBudgetExceeded("artin_schreier: root not in field");
        if (d > Q) throw Error("artin_schreier: no splitting field found");
        FieldPtr Fd;
        Embedding emb;
        try {
            std::tie(Fd, emb) = extend_field(F, d, opt.seed);
        } catch (const InputError&) {
            throw ExtensionBudgetExceeded("artin_schreier: field too large");
        }
        ff_t cd = emb.apply(c);
        int dim = static_cast<int>(Fd->m());
        std::vector<std::vector<std::uint32_t>> cols(dim);
        for (int i = 0; i < dim; ++i) {
            std::vector<std::uint32_t> digs(dim, 0);
            digs[i] = 1;
            ff_t e = Fd->from_digits(digs);
            ff_t img = Fd->sub(Fd->pow(e, Q), e);
            cols[i] = fp_coords(Fd, {img});
        }
        auto sol = fp_solve(p, dim, cols, fp_coords(Fd, {cd}));
        if (!sol.solvable) continue;
        ResidueASResult out;
        out.field = Fd;
        out.emb = emb;
        ff_t x0 = Fd->from_digits(std::vector<std::uint32_t>(sol.x.begin(), sol.x.end()));
        // enumerate the kernel span (it is F_p-small: contained in F_{Q})
        std::vector<ff_t> span{0};
        for (auto& kv : sol.kernel) {
            ff_t k = Fd->from_digits(std::vector<std::uint32_t>(kv.begin(), kv.end()));
            std::vector<ff_t> next;
            for (ff_t s : span) {
                ff_t add = s;
                for (std::uint32_t t = 0; t < p; ++t) {
                    next.push_back(add);
                    add = Fd->add(add, k);
                }
            }
            span = std::move(next);
            if (span.size() > 4096) break;
        }
        for (ff_t s : span) out.roots.push_back(Fd->add(x0, s));
        std::sort(out.roots.begin(), out.roots.end(),
                  [&](ff_t a, ff_t b) { return Fd->index(a) < Fd->index(b); });
        out.roots.erase(std::unique(out.roots.begin(), out.roots.end()), out.roots.end());
        return out;
    }
}

ResidueFixedResult residue_fixed_basis(const FieldPtr& F, const FieldPtr& Feps, std::uint64_t qhat,
                                       const Mat<ff_t>& A, const SolveOptions& opt) {
    std::uint32_t p = F->p();
    int r = A.rows;
    for (std::uint32_t d = 1;; ++d) {
        if (F->m() * d > Feps->m() * static_cast<std::uint32_t>(opt.extension_cap))
            throw ExtensionBudgetExceeded("lang: residue extension cap exceeded");
        FieldPtr Fd;
        Embedding emb;
        try {
            std::tie(Fd, emb) = extend_field(F, d, opt.seed);
        } catch (const InputError&) {
            throw ExtensionBudgetExceeded("lang: residue field too large");
        }
        Mat<ff_t> Ad(r, r);
        for (int i = 0; i < r; ++i)
            for (int jc = 0; jc < r; ++jc) Ad.at(i, jc) = emb.apply(A.at(i, jc));
        Embedding fe = make_embedding(Feps, Fd, opt.seed);
        int dim = static_cast<int>(Fd->m()) * r;
        std::vector<std::vector<std::uint32_t>> cols;
        cols.reserve(dim);
        for (int comp = 0; comp < r; ++comp) {
            for (std::uint32_t bb = 0; bb < Fd->m(); ++bb) {
                std::vector<std::uint32_t> digs(Fd->m(), 0);
                digs[bb] = 1;
                ff_t e = Fd->from_digits(digs);
                std::vector<ff_t> img(static_cast<std::size_t>(r), 0);
                ff_t se = Fd->pow(e, qhat);
                for (int i = 0; i < r; ++i) img[static_cast<std::size_t>(i)] = Fd->mul(Ad.at(i, comp), se);
                img[static_cast<std::size_t>(comp)] = Fd->sub(img[static_cast<std::size_t>(comp)], e);
                cols.push_back(fp_coords(Fd, img));
            }
        }
        auto sol = fp_solve(p, dim, cols, std::vector<std::uint32_t>(static_cast<std::size_t>(dim), 0));
        std::vector<std::vector<ff_t>> vecs;
        for (auto& kv : sol.kernel) {
            std::vector<ff_t> v(static_cast<std::size_t>(r));
            for (int comp = 0; comp < r; ++comp) {
                std::vector<std::uint32_t> digs(Fd->m());
                for (std::uint32_t bb = 0; bb < Fd->m(); ++bb) digs[bb] = kv[comp * Fd->m() + bb];
                v[static_cast<std::size_t>(comp)] = Fd->from_digits(digs);
            }
            vecs.push_back(std::move(v));
        }
        auto basis = feps_basis_from_kernel(Fd, fe, vecs, static_cast<std::size_t>(r));
        if (static_cast<int>(basis.size()) >= r) {
            ResidueFixedResult out;
            out.field = Fd;
            out.emb = emb;
            out.basis = Mat<ff_t>(r, r);
            for (int jc = 0; jc < r; ++jc)
                for (int i = 0; i < r; ++i) out.basis.at(i, jc) = basis[static_cast<std::size_t>(jc)][static_cast<std::size_t>(i)];
            return out;
        }
    }
}

// ---------- matrix helpers over LFE ----------

namespace {
TowerPtr deepest_tower(const Mat<LFE>& a) {
    TowerPtr tw = a.a[0].tw;
    for (auto& x : a.a)
        if (x.tw->depth() > tw->depth()) tw = x.tw;
    return tw;
}
TowerPtr deepest_tower2(const Mat<LFE>& a, const Mat<LFE>& b) {
    TowerPtr ta = deepest_tower(a), tb = deepest_tower(b);
    return ta->depth() >= tb->depth() ? ta : tb;
}
}  // namespace

Mat<LFE> mat_lfe_mul(const Mat<LFE>& a0, const Mat<LFE>& b0) {
    TowerPtr tw = deepest_tower2(a0, b0);
    Mat<LFE> a = mat_lfe_lift(tw, a0), b = mat_lfe_lift(tw, b0);
    return mat_mul_with(a, b, lfe_zero(tw, mat_lfe_min_prec(a)),
                        [](const LFE& x, const LFE& y) { return lfe_add(x, y); },
                        [](const LFE& x, const LFE& y) { return lfe_mul(x, y); });
}
Mat<LFE> mat_lfe_add(const Mat<LFE>& a, const Mat<LFE>& b) {
    return mat_add_with(a, b, [](const LFE& x, const LFE& y) { return lfe_add(x, y); });
}
Mat<LFE> mat_lfe_sub(const Mat<LFE>& a, const Mat<LFE>& b) {
    return mat_add_with(a, b, [](const LFE& x, const LFE& y) { return lfe_sub(x, y); });
}
LFE mat_lfe_det(const Mat<LFE>& a0) {
    TowerPtr tw = deepest_tower(a0);
    Mat<LFE> a = mat_lfe_lift(tw, a0);
    return mat_det_with(a, lfe_zero(tw, mat_lfe_min_prec(a)), lfe_one(tw, mat_lfe_min_prec(a)),
                        [](const LFE& x, const LFE& y) { return lfe_add(x, y); },
                        [](const LFE& x, const LFE& y) { return lfe_mul(x, y); },
                        [](const LFE& x) { return lfe_neg(x); });
}
Mat<LFE> mat_lfe_sigma(const Mat<LFE>& a, unsigned j) {
    return mat_map(a, [&](const LFE& x) { return lfe_sigma(x, j); });
}
Mat<LFE> mat_lfe_identity(const TowerPtr& tw, int n, std::int64_t prec) {
    Mat<LFE> m(n, n, lfe_zero(tw, prec));
    for (int i = 0; i < n; ++i) m.at(i, i) = lfe_one(tw, prec);
    return m;
}
Mat<LFE> mat_lfe_lift(const TowerPtr& tw, const Mat<LFE>& a) {
    return mat_map(a, [&](const LFE& x) { return tw->lift(x); });
}
std::int64_t mat_lfe_min_val(const Mat<LFE>& a) {
    std::int64_t v = a.a[0].prec;
    for (auto& x : a.a) v = std::min(v, x.val_or_prec());
    return v;
}
std::int64_t mat_lfe_min_prec(const Mat<LFE>& a) {
    std::int64_t v = a.a[0].prec;
    for (auto& x : a.a) v = std::min(v, x.prec);
    return v;
}

Mat<LFE> mat_lfe_inv(const Mat<LFE>& a0) {
    int n = a0.rows;
    if (n != a0.cols) throw InputError("mat_lfe_inv: non-square");
    TowerPtr tw = deepest_tower(a0);
    Mat<LFE> L = mat_lfe_lift(tw, a0);
    std::int64_t prec = mat_lfe_min_prec(L);
    Mat<LFE> R = mat_lfe_identity(tw, n, prec);
    for (int c = 0; c < n; ++c) {
        int sel = -1;
        std::int64_t best = INT64_MAX;
        for (int i = c; i < n; ++i) {
            auto v = L.at(i, c).val();
            if (v && *v < best) {
                best = *v;
                sel = i;
            }
        }
        if (sel < 0) throw NotAUnit("mat_lfe_inv: singular to precision");
        if (sel != c)
            for (int j = 0; j < n; ++j) {
                std::swap(L.at(sel, j), L.at(c, j));
                std::swap(R.at(sel, j), R.at(c, j));
            }
        LFE piv_inv = lfe_inv(L.at(c, c));
        for (int j = 0; j < n; ++j) {
            L.at(c, j) = lfe_mul(L.at(c, j), piv_inv);
            R.at(c, j) = lfe_mul(R.at(c, j), piv_inv);
        }
        for (int i = 0; i < n; ++i) {
            if (i == c) continue;
            LFE f = L.at(i, c);
            if (f.zero_to_prec()) continue;
            for (int j = 0; j < n; ++j) {
                L.at(i, j) = lfe_sub(L.at(i, j), lfe_mul(f, L.at(c, j)));
                R.at(i, j) = lfe_sub(R.at(i, j), lfe_mul(f, R.at(c, j)));
            }
        }
    }
    return R;
}

// ---------- Kummer roots ----------

ScalarResult kummer_root(const TowerPtr& tw0, const LFE& a0, std::int64_t n, const SolveOptions& opt) {
    if (n <= 0 || n % tw0->p() == 0) throw InputError("kummer_root: order must be positive, prime to p");
    TowerPtr tw = tw0;
    LFE a = tw->lift(a0);
    lfe_normalize(a);
    if (a.zero_to_prec()) throw NotAUnit("kummer_root: zero to precision");
    std::int64_t v = *a.val();
    std::int64_t vm = ((v % n) + n) % n;
    if (vm != 0) {
        std::int64_t g = std::gcd(vm, n);
        std::int64_t e = n / g;
        if (tw->zeta_val() * e > opt.ram_cap) throw PrecisionExhausted("kummer_root: ramification cap");
        tw = tw->adjoin_radical(e, tw->field()->one());
        a = tw->lift(a);
        v = *a.val();
    }
    std::int64_t w = v / n;
    LFE u = lfe_shift(a, -v);
    ff_t ubar = u.c[0];
    ff_t xi = 0;
    bool found = false;
    for (std::uint32_t d = 1; !found; ++d) {
        if (tw->field()->m() * d > tw->feps()->m() * static_cast<std::uint32_t>(opt.extension_cap) && d > 1)
            throw ExtensionBudgetExceeded("kummer_root: residue cap");
        if (d > static_cast<std::uint32_t>(n) + 1)
            throw Error("kummer_root: no residue root within degree n");
        FieldPtr Fd = tw->field();
        if (d > 1) {
            try {
                auto [fd, emb] = extend_field(tw->field(), d, opt.seed);
                (void)emb;
                tw = tw->adjoin_unramified(fd, opt.seed);
                a = tw->lift(a);
                u = lfe_shift(a, -v);
                ubar = u.c[0];
                Fd = fd;
            } catch (const InputError&) {
                throw ExtensionBudgetExceeded("kummer_root: residue field too large");
            }
        }
        fqpoly::Poly f(static_cast<std::size_t>(n) + 1, 0);
        f[0] = Fd->neg(ubar);
        f[static_cast<std::size_t>(n)] = Fd->one();
        auto rts = fqpoly::roots(*Fd, f, opt.seed);
        if (!rts.empty()) {
            xi = opt.tie_break_high ? rts.back() : rts.front();
            found = true;
        }
    }
    std::int64_t target = u.prec;
    LFE y = lfe_const(tw, xi, 1);
    std::int64_t cur = 1;
    ff_t nmodp = tw->field()->from_prime(static_cast<std::uint64_t>(n % tw->p()));
    while (cur < target) {
        cur = std::min<std::int64_t>(2 * cur, target);
        LFE ut = lfe_truncate(u, cur);
        y.prec = cur;
        LFE err = lfe_sub(lfe_pow(y, n), ut);
        if (err.zero_to_prec()) continue;
        LFE dy = lfe_scale(lfe_pow(y, n - 1), nmodp);
        y = lfe_truncate(lfe_sub(y, lfe_div(err, dy)), cur);
    }
    ScalarResult out;
    out.tower = tw;
    out.x = lfe_shift(y, w);
    return out;
}

ScalarResult solve_twisted_homogeneous(const TowerPtr& tw, const LFE& alpha, const SolveOptions& opt) {
    return kummer_root(tw, alpha, static_cast<std::int64_t>(tw->qhat()) - 1, opt);
}

// ---------- additive operators ----------

LFE additive_apply(const std::vector<LFE>& coeffs, const LFE& x0) {
    TowerPtr tw = x0.tw;
    for (auto& c : coeffs)
        if (c.tw->depth() > tw->depth()) tw = c.tw;
    LFE x = tw->lift(x0);
    LFE acc = lfe_zero(tw, x.prec);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        LFE c = tw->lift(coeffs[k]);
        if (c.zero_to_prec()) continue;
        acc = lfe_add(acc, lfe_mul(c, lfe_sigma(x, static_cast<unsigned>(k))));
    }
    return acc;
}

namespace {

TowerPtr make_divisible(TowerPtr tw, std::vector<LFE*> elems, std::int64_t Q, const SolveOptions& opt) {
    std::int64_t g = Q;
    for (LFE* e : elems)
        for (std::size_t i = 0; i < e->c.size(); ++i) {
            if (e->c[i] == 0) continue;
            std::int64_t ex = e->vmin + static_cast<std::int64_t>(i);
            std::int64_t r = ((ex % Q) + Q) % Q;
            if (r != 0) g = std::gcd(g, r);
        }
    std::int64_t d = Q / g;
    if (d <= 1) return tw;
    if (tw->zeta_val() * d > opt.ram_cap) throw PrecisionExhausted("radical adjunction: ram cap");
    TowerPtr nt = tw->adjoin_radical(d, tw->field()->one());
    for (LFE* e : elems) *e = nt->lift(*e);
    return nt;
}

// Wild Artin-Schreier level: solve sigma^j(x) - x = c for v(c) = -a < 0,
// gcd(a, Q) = 1, adjoining one Cohen level of degree Q = qhat^j.
ScalarResult cohen_as_level(TowerPtr tw, LFE c, unsigned j, const SolveOptions& opt) {
    const FieldPtr F = tw->field();
    std::int64_t Q = ipow64(static_cast<std::int64_t>(tw->qhat()), j);
    lfe_normalize(c);
    std::int64_t a = -*c.val();
    if (a <= 0 || std::gcd(a, Q) != 1) throw Error("cohen_as_level: bad input valuation");
    if (tw->zeta_val() * Q > opt.ram_cap) throw PrecisionExhausted("cohen level: ram cap");
    // tQ - as = 1 with p not dividing t
    std::int64_t t = 1, s = 0;
    if (a == 1) {
        t = 1;
        s = Q - 1;
    } else {
        std::int64_t q0 = ((Q % a) + a) % a;
        std::int64_t x0 = 0, x1 = 1, r0 = a, r1 = q0;
        while (r1) {
            std::int64_t qd = r0 / r1;
            std::int64_t r2 = r0 - qd * r1;
            std::int64_t x2 = x0 - qd * x1;
            r0 = r1; r1 = r2;
            x0 = x1; x1 = x2;
        }
        t = ((x0 % a) + a) % a;  // t * Q = 1 mod a
        if (t == 0) t = a;
        s = (t * Q - 1) / a;
    }
    while (t % tw->p() == 0) {
        t += a;
        s += Q;
    }
    // scratch model of F((pi_L)); only field arithmetic is used on it
    RawSeries dummy_zeta{1, 8, {F->one()}};
    TowerPtr scratch = Tower::base(F, tw->feps(), tw->feps_embedding(), dummy_zeta);

    std::int64_t target = (c.prec - c.vmin) * Q;
    target = std::max<std::int64_t>(target, 2 * a * Q + 8);
    target = std::min<std::int64_t>(target, (std::int64_t(1) << 26));

    ff_t cbar = c.c[0];
    auto powz = [&](ff_t b, std::int64_t e) {
        std::uint64_t order = F->q() - 1;
        std::uint64_t ee = static_cast<std::uint64_t>(((e % static_cast<std::int64_t>(order)) +
                                                       static_cast<std::int64_t>(order)) %
                                                      static_cast<std::int64_t>(order));
        return F->pow(b, ee);
    };
    ff_t xi = powz(cbar, t);
    ff_t rho = powz(cbar, -s);
    LFE X = lfe_monomial(scratch, xi, -a, target - a * Q);
    LFE P = lfe_monomial(scratch, rho, Q, target);

    auto compose = [&](const LFE& series, const LFE& at, std::int64_t tprec) {
        LFE r = lfe_zero(scratch, tprec);
        for (std::size_t i = series.c.size(); i-- > 0;) {
            r = lfe_truncate(lfe_mul(r, at), tprec);
            if (series.c[i] != 0) r = lfe_add(r, lfe_const(scratch, series.c[i], tprec));
        }
        if (series.vmin != 0) r = lfe_mul(r, lfe_pow(at, series.vmin));
        return lfe_truncate(r, tprec);
    };
    LFE cder;
    {
        cder.tw = tw;
        cder.vmin = c.vmin - 1;
        cder.prec = c.prec - 1;
        cder.c.assign(c.c.size(), 0);
        for (std::size_t i = 0; i < c.c.size(); ++i) {
            std::int64_t e = c.vmin + static_cast<std::int64_t>(i);
            std::int64_t em = ((e % tw->p()) + tw->p()) % tw->p();
            if (em && c.c[i]) cder.c[i] = F->mul(c.c[i], F->from_prime(static_cast<std::uint64_t>(em)));
        }
        lfe_normalize(cder);
    }
    ff_t s_over_t = F->mul(F->from_prime(static_cast<std::uint64_t>(s % tw->p())),
                           F->inv(F->from_prime(static_cast<std::uint64_t>(t % tw->p()))));

    auto refresh_P = [&]() {
        LFE g = lfe_mul(lfe_monomial(scratch, F->one(), 1, target + Q + 1), lfe_pow(X, -s));
        g = lfe_truncate(g, target + Q + 1);
        ff_t tmodp = F->from_prime(static_cast<std::uint64_t>(t % tw->p()));
        for (int it = 0; it < 80; ++it) {
            LFE err = lfe_sub(lfe_pow(P, t), g);
            lfe_normalize(err);
            if (err.zero_to_prec()) break;
            LFE dP = lfe_scale(lfe_pow(P, t - 1), tmodp);
            P = lfe_truncate(lfe_sub(P, lfe_div(err, dP)), target + Q);
        }
    };
    auto residual = [&]() {
        LFE CP = compose(c, P, target - a * Q);
        LFE XQ = lfe_sigma(X, j);
        return lfe_sub(CP, lfe_sub(XQ, X));
    };
    refresh_P();
    LFE R = residual();
    int guard = 0;
    while (!R.zero_to_prec()) {
        if (++guard > opt.max_digits) throw PrecisionExhausted("cohen level: digit budget");
        LFE CdP = compose(cder, P, target - a * Q);
        LFE Lam = lfe_scale(lfe_div(lfe_mul(CdP, P), X), s_over_t);
        Lam = lfe_sub(Lam, lfe_one(scratch, target));
        lfe_normalize(Lam);
        // G := X^Q - X - C(P) = -R; a correction delta changes G by
        // delta^Q + Lam*delta, so we want delta^Q + Lam*delta = R.
        std::vector<LFE> cands;
        if (!Lam.zero_to_prec()) cands.push_back(lfe_div(R, Lam));
        if (*R.val() % Q == 0) {
            ff_t rc = F->root_frobenius(R.c[0], static_cast<std::uint64_t>(tw->feps()->m()) * j);
            cands.push_back(lfe_monomial(scratch, rc, *R.val() / Q, target - a * Q));
        }
        // balanced-vertex candidate: delta^Q + Lam0*delta = R at matching valuation
        if (!Lam.zero_to_prec()) {
            std::int64_t w = *R.val() - *Lam.val();
            {
                if (Q * w == *R.val()) {
                    int dim = static_cast<int>(F->m());
                    std::vector<std::vector<std::uint32_t>> cols(dim);
                    for (int i = 0; i < dim; ++i) {
                        std::vector<std::uint32_t> digs(dim, 0);
                        digs[static_cast<std::size_t>(i)] = 1;
                        ff_t e = F->from_digits(digs);
                        ff_t img = F->add(F->pow(e, static_cast<std::uint64_t>(Q)), F->mul(Lam.c[0], e));
                        cols[static_cast<std::size_t>(i)] = fp_coords(F, {img});
                    }
                    auto so = fp_solve(F->p(), dim, cols, fp_coords(F, {R.c[0]}));
                    if (so.solvable) {
                        ff_t dxi = F->from_digits(std::vector<std::uint32_t>(so.x.begin(), so.x.end()));
                        if (dxi) cands.push_back(lfe_monomial(scratch, dxi, w, target - a * Q));
                    }
                }
            }
        }
        std::sort(cands.begin(), cands.end(),
                  [](const LFE& x, const LFE& y) { return x.val_or_prec() < y.val_or_prec(); });
        bool progressed = false;
        for (auto& d : cands) {
            if (d.zero_to_prec()) continue;
            LFE Xsave = X, Psave = P;
            X = lfe_add(X, d);
            refresh_P();
            LFE Rtry = residual();
            if (Rtry.val_or_prec() > R.val_or_prec()) {
                R = Rtry;
                progressed = true;
                break;
            }
            X = Xsave;
            P = Psave;
        }
        if (!progressed) throw PrecisionExhausted("cohen level: no digit candidate progressed");
    }
    RawSeries Praw{P.vmin, P.prec, P.c};
    TowerPtr nt = tw->adjoin_cohen(Q, Praw);
    ScalarResult out;
    out.tower = nt;
    out.x = lfe_from_raw(nt, RawSeries{X.vmin, X.prec, X.c});
    return out;
}

}  // namespace

ScalarResult solve_as_scalar(const TowerPtr& tw0, const LFE& c0, const SolveOptions& opt, unsigned j) {
    TowerPtr tw = tw0;
    LFE c = tw->lift(c0);
    lfe_normalize(c);
    std::int64_t Q = ipow64(static_cast<std::int64_t>(tw->qhat()), j);
    LFE x = lfe_zero(tw, c.prec);
    int guard = 0;
    while (true) {
        if (++guard > opt.max_digits) throw PrecisionExhausted("solve_as_scalar: digit budget");
        lfe_normalize(c);
        if (c.zero_to_prec()) break;
        std::int64_t v = *c.val();
        if (v > 0) {
            LFE s = lfe_zero(tw, c.prec);
            LFE t = c;
            while (!t.zero_to_prec()) {
                s = lfe_add(s, t);
                t = lfe_truncate(lfe_sigma(t, j), c.prec);
            }
            x = lfe_sub(x, s);
            c = lfe_zero(tw, c.prec);
            continue;
        }
        if (v == 0) {
            ff_t c0bar = c.c[0];
            auto res = artin_schreier_residue(tw->field(), tw->qhat(), c0bar, opt, j, true);
            if (res.field.get() != tw->field().get()) {
                std::uint32_t reldeg = res.field->m() / tw->field()->m();
                if (tw->field()->m() * reldeg > tw->feps()->m() * static_cast<std::uint32_t>(opt.extension_cap))
                    throw ExtensionBudgetExceeded("solve_as_scalar: residue cap");
                tw = tw->adjoin_unramified(res.field, opt.seed);
                c = tw->lift(c);
                x = tw->lift(x);
                c0bar = res.emb.apply(c0bar);
            }
            ff_t root = opt.tie_break_high ? res.roots.back() : res.roots.front();
            x = lfe_add(x, lfe_const(tw, root, c.prec));
            c = lfe_sub(c, lfe_const(tw, c0bar, c.prec));
            continue;
        }
        std::int64_t a = -v;
        std::int64_t g = std::gcd(a, Q);
        if (g > 1) {
            std::int64_t d = Q / g;
            if (d > 1) {
                if (tw->zeta_val() * d > opt.ram_cap)
                    throw PrecisionExhausted("solve_as_scalar: ram cap while peeling");
                tw = tw->adjoin_radical(d, tw->field()->one());
                c = tw->lift(c);
                x = tw->lift(x);
                a *= d;
            }
            LFE head = lfe_monomial(
                tw, tw->field()->root_frobenius(c.c[0], static_cast<std::uint64_t>(tw->feps()->m()) * j),
                -a / Q, c.prec);
            x = lfe_add(x, head);
            c = lfe_sub(c, lfe_sub(lfe_sigma(head, j), head));
            continue;
        }
        ScalarResult lvl = cohen_as_level(tw, c, j, opt);
        TowerPtr nt = lvl.tower;
        x = lfe_add(nt->lift(x), lvl.x);
        c = lfe_zero(nt, nt->lift(c).prec);
        tw = nt;
    }
    // certify: residual of the accumulated solution
    ScalarResult out;
    out.tower = tw;
    out.x = x;
    return out;
}

VectorResult artin_schreier_solve(const LFE& c, bool allow_extension, const SolveOptions& opt) {
    LFE cc = c;
    lfe_normalize(cc);
    if (!cc.zero_to_prec() && *cc.val() < 0)
        throw InputError("artin_schreier_solve: c must have non-negative valuation");
    SolveOptions o = opt;
    if (!allow_extension) o.extension_cap = static_cast<int>(c.tw->residue_degree());
    ScalarResult one = solve_as_scalar(c.tw, cc, o, 1);
    VectorResult out;
    out.tower = one.tower;
    const FieldPtr& Feps = out.tower->feps();
    for (std::uint64_t i = 0; i < Feps->q(); ++i) {
        ff_t e = Feps->from_index(i);
        ff_t im = out.tower->feps_embedding().apply(e);
        out.sols.push_back(lfe_add(one.x, lfe_const(out.tower, im, one.x.prec)));
    }
    return out;
}

ScalarResult solve_twisted_affine(const TowerPtr& tw0, const LFE& a0, const LFE& b0, const LFE& c0,
                                  const SolveOptions& opt, unsigned j) {
    TowerPtr tw = tw0;
    LFE a = tw->lift(a0), b = tw->lift(b0), c = tw->lift(c0);
    lfe_normalize(a);
    lfe_normalize(b);
    if (a.zero_to_prec()) {
        ScalarResult out;
        out.tower = tw;
        out.x = lfe_div(c, b);
        return out;
    }
    if (b.zero_to_prec()) {
        LFE rhs = lfe_div(c, a);
        std::int64_t Q = ipow64(static_cast<std::int64_t>(tw->qhat()), j);
        tw = make_divisible(tw, {&rhs}, Q, opt);
        ScalarResult out;
        out.tower = tw;
        out.x = lfe_sigma_inv(rhs, j);
        return out;
    }
    std::int64_t Q = ipow64(static_cast<std::int64_t>(tw->qhat()), j);
    LFE ratio = lfe_neg(lfe_div(b, a));
    ScalarResult mu = kummer_root(tw, ratio, Q - 1, opt);
    tw = mu.tower;
    a = tw->lift(a);
    c = tw->lift(c);
    LFE muQ = lfe_pow(mu.x, Q);
    LFE rhs = lfe_div(c, lfe_mul(a, muQ));
    ScalarResult y = solve_as_scalar(tw, rhs, opt, j);
    ScalarResult out;
    out.tower = y.tower;
    out.x = lfe_mul(y.x, out.tower->lift(mu.x));
    return out;
}

// ---------- additive solve ----------

namespace {

struct ResidueAdditive {
    FieldPtr field;
    bool extended = false;
    bool solvable = false;
    std::vector<ff_t> sols;
    std::vector<ff_t> kernel;  // F_eps-basis
};

ResidueAdditive residue_additive(const FieldPtr& F0, const FieldPtr& Feps, std::uint64_t qhat,
                                 const std::vector<std::pair<unsigned, ff_t>>& terms, ff_t b,
                                 const SolveOptions& opt, std::size_t want_kernel_dim) {
    for (std::uint32_t d = 1;; ++d) {
        if (F0->m() * d > Feps->m() * static_cast<std::uint32_t>(opt.extension_cap))
            throw ExtensionBudgetExceeded("residue_additive: extension cap");
        FieldPtr Fd;
        Embedding emb;
        try {
            std::tie(Fd, emb) = extend_field(F0, d, opt.seed);
        } catch (const InputError&) {
            throw ExtensionBudgetExceeded("residue_additive: field too large");
        }
        std::vector<std::pair<unsigned, ff_t>> td;
        for (auto& [e, aco] : terms) td.emplace_back(e, emb.apply(aco));
        ff_t bd = emb.apply(b);
        int dim = static_cast<int>(Fd->m());
        std::vector<std::vector<std::uint32_t>> cols(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            std::vector<std::uint32_t> digs(static_cast<std::size_t>(dim), 0);
            digs[static_cast<std::size_t>(i)] = 1;
            ff_t e = Fd->from_digits(digs);
            ff_t img = 0;
            for (auto& [ek, ak] : td) {
                std::uint64_t Qe = 1;
                for (unsigned q2 = 0; q2 < ek; ++q2) Qe *= qhat;
                img = Fd->add(img, Fd->mul(ak, Fd->pow(e, Qe)));
            }
            cols[static_cast<std::size_t>(i)] = fp_coords(Fd, {img});
        }
        auto so = fp_solve(Fd->p(), dim, cols, fp_coords(Fd, {bd}));
        std::vector<std::vector<ff_t>> kv;
        for (auto& k : so.kernel)
            kv.push_back({Fd->from_digits(std::vector<std::uint32_t>(k.begin(), k.end()))});
        Embedding fe = make_embedding(Feps, Fd, opt.seed);
        auto kb = feps_basis_from_kernel(Fd, fe, kv, want_kernel_dim ? want_kernel_dim : kv.size());
        bool enough_kernel = want_kernel_dim == 0 || kb.size() >= want_kernel_dim;
        bool solvable = so.solvable || b == 0;
        if (solvable && enough_kernel) {
            ResidueAdditive out;
            out.field = Fd;
            out.extended = d > 1;
            out.solvable = true;
            if (so.solvable)
                out.sols.push_back(Fd->from_digits(std::vector<std::uint32_t>(so.x.begin(), so.x.end())));
            else
                out.sols.push_back(0);
            for (auto& v : kb) out.kernel.push_back(v[0]);
            return out;
        }
    }
}

struct AdditiveCtx {
    TowerPtr tw;
    std::vector<LFE> coeffs;
    SolveOptions opt;

    void relift(const TowerPtr& nt) {
        for (auto& c : coeffs) c = nt->lift(c);
        tw = nt;
    }
};

// One solution of B(x) = rhs with all digits of valuation > floor_val.
LFE additive_one(AdditiveCtx& ctx, LFE rhs, Rational floor_zeta, int depth) {
    if (depth > 24) throw PrecisionExhausted("additive_one: recursion depth");
    rhs = ctx.tw->lift(rhs);
    lfe_normalize(rhs);
    LFE x = lfe_zero(ctx.tw, rhs.prec);
    int guard = 0;
    while (true) {
        if (++guard > ctx.opt.max_digits) throw PrecisionExhausted("additive_one: digit budget");
        lfe_normalize(rhs);
        if (rhs.zero_to_prec()) return x;
        std::int64_t vr = *rhs.val();
        struct Cand {
            Rational w_zeta;  // digit valuation in zeta units
        };
        std::vector<Rational> cands;
        for (std::size_t k = 0; k < ctx.coeffs.size(); ++k) {
            if (ctx.coeffs[k].zero_to_prec()) continue;
            std::int64_t Qk = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k));
            Rational w(vr - *ctx.coeffs[k].val(), Qk);
            bool ok = true;
            for (std::size_t k2 = 0; k2 < ctx.coeffs.size(); ++k2) {
                if (ctx.coeffs[k2].zero_to_prec()) continue;
                std::int64_t Q2 = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k2));
                if (Rational(*ctx.coeffs[k2].val()) + Rational(Q2) * w < Rational(vr)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            Rational wz = w / Rational(ctx.tw->zeta_val());
            if (!(wz > floor_zeta)) continue;
            cands.push_back(wz);
        }
        std::sort(cands.begin(), cands.end());
        cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
        bool progressed = false;
        for (Rational wz : cands) {
            TowerPtr tw_old = ctx.tw;
            auto coeffs_old = ctx.coeffs;
            LFE rhs_l = rhs, x_l = x;
            // integralize the digit valuation
            Rational wpi = wz * Rational(ctx.tw->zeta_val());
            if (wpi.den > 1) {
                if (ctx.tw->zeta_val() * wpi.den > ctx.opt.ram_cap) continue;
                // a fractional digit whose balance set avoids sigma^0 belongs
                // to a twisted segment: leave it to the two-term route below
                // instead of stacking radical levels
                bool has_linear = false;
                for (std::size_t k = 0; k < ctx.coeffs.size(); ++k) {
                    if (ctx.coeffs[k].zero_to_prec()) continue;
                    std::int64_t Qk = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k));
                    if (Rational(*ctx.coeffs[k].val()) + Rational(Qk) * wpi == Rational(vr) && k == 0)
                        has_linear = true;
                }
                if (!has_linear) continue;
                TowerPtr nt = ctx.tw->adjoin_radical(wpi.den, ctx.tw->field()->one());
                ctx.relift(nt);
                rhs_l = nt->lift(rhs_l);
                x_l = nt->lift(x_l);
                wpi = wz * Rational(ctx.tw->zeta_val());
            }
            std::int64_t w = wpi.num;
            std::int64_t vloc = *rhs_l.val();
            std::vector<std::pair<unsigned, ff_t>> terms;
            for (std::size_t k = 0; k < ctx.coeffs.size(); ++k) {
                if (ctx.coeffs[k].zero_to_prec()) continue;
                std::int64_t Qk = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k));
                if (*ctx.coeffs[k].val() + Qk * w == vloc)
                    terms.emplace_back(static_cast<unsigned>(k), ctx.coeffs[k].c[0]);
            }
            ResidueAdditive ra;
            bool ra_ok = true;
            try {
                ra = residue_additive(ctx.tw->field(), ctx.tw->feps(), ctx.tw->qhat(), terms, rhs_l.c[0],
                                      ctx.opt, 0);
            } catch (const ExtensionBudgetExceeded&) {
                ra_ok = false;
            }
            if (!ra_ok || !ra.solvable) {
                ctx.tw = tw_old;
                ctx.coeffs = coeffs_old;
                continue;
            }
            if (ra.extended) {
                TowerPtr nt = ctx.tw->adjoin_unramified(ra.field, ctx.opt.seed);
                ctx.relift(nt);
                rhs_l = nt->lift(rhs_l);
                x_l = nt->lift(x_l);
            }
            ff_t digit = ra.sols[0];
            if (digit == 0 && !ra.kernel.empty()) digit = ra.kernel[0];
            if (digit == 0) {
                ctx.tw = tw_old;
                ctx.coeffs = coeffs_old;
                continue;
            }
            if (ctx.opt.tie_break_high && !ra.kernel.empty())
                digit = ctx.tw->field()->add(ra.sols[0], ra.kernel[0]);
            LFE dx = lfe_monomial(ctx.tw, digit, w, rhs_l.prec);
            LFE newrhs = lfe_sub(rhs_l, additive_apply(ctx.coeffs, dx));
            lfe_normalize(newrhs);
            if (newrhs.val_or_prec() > vloc) {
                x = lfe_add(x_l, dx);
                rhs = newrhs;
                progressed = true;
                break;
            }
            ctx.tw = tw_old;
            ctx.coeffs = coeffs_old;
        }
        if (progressed) continue;
        // wild fallback: dominant two-term first-order solve
        if (cands.empty()) throw NoSlope("additive_one: no candidate digit");
        {
            Rational wz = cands.front();
            std::vector<std::pair<std::size_t, Rational>> vals;
            for (std::size_t k = 0; k < ctx.coeffs.size(); ++k) {
                if (ctx.coeffs[k].zero_to_prec()) continue;
                std::int64_t Qk = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k));
                vals.emplace_back(k, Rational(*ctx.coeffs[k].val(), ctx.tw->zeta_val()) + Rational(Qk) * wz);
            }
            std::sort(vals.begin(), vals.end(), [](auto& a, auto& b) { return a.second < b.second; });
            if (vals.size() < 2) throw NoSlope("additive_one: degenerate operator");
            std::size_t k1 = std::min(vals[0].first, vals[1].first);
            std::size_t k2 = std::max(vals[0].first, vals[1].first);
            if (k1 == k2) throw NoSlope("additive_one: cannot split terms");
            ScalarResult y = solve_twisted_affine(ctx.tw, ctx.coeffs[k2], ctx.coeffs[k1], rhs, ctx.opt,
                                                  static_cast<unsigned>(k2 - k1));
            ctx.relift(y.tower);
            LFE yv = y.x;
            std::int64_t Qk1 = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k1));
            TowerPtr nt = make_divisible(ctx.tw, {&yv}, Qk1, ctx.opt);
            if (nt.get() != ctx.tw.get()) ctx.relift(nt);
            yv = ctx.tw->lift(yv);
            LFE dx = lfe_sigma_inv(yv, static_cast<unsigned>(k1));
            LFE rhs_l = ctx.tw->lift(rhs);
            LFE newrhs = lfe_sub(rhs_l, additive_apply(ctx.coeffs, dx));
            lfe_normalize(newrhs);
            if (newrhs.val_or_prec() <= rhs_l.val_or_prec())
                throw PrecisionExhausted("additive_one: wild fallback made no progress");
            x = lfe_add(ctx.tw->lift(x), dx);
            rhs = newrhs;
        }
    }
}

void separability_normalize(AdditiveCtx& ctx, LFE* rhs) {
    std::size_t k0 = 0;
    while (k0 < ctx.coeffs.size() && ctx.coeffs[k0].zero_to_prec()) ++k0;
    if (k0 == ctx.coeffs.size()) throw DegenerateInput("additive operator is zero");
    if (k0 == 0) return;
    std::int64_t Qk = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k0));
    std::vector<LFE> shifted(ctx.coeffs.begin() + static_cast<std::ptrdiff_t>(k0), ctx.coeffs.end());
    std::vector<LFE*> all;
    for (auto& c : shifted) all.push_back(&c);
    if (rhs) all.push_back(rhs);
    TowerPtr nt = make_divisible(ctx.tw, all, Qk, ctx.opt);
    ctx.tw = nt;
    std::vector<LFE> newco;
    for (auto& c : shifted) newco.push_back(lfe_sigma_inv(nt->lift(c), static_cast<unsigned>(k0)));
    ctx.coeffs = newco;
    if (rhs) *rhs = lfe_sigma_inv(nt->lift(*rhs), static_cast<unsigned>(k0));
}

}  // namespace

ScalarResult solve_additive(const TowerPtr& tw, const std::vector<LFE>& coeffs0, const LFE& rhs0,
                            const SolveOptions& opt) {
    AdditiveCtx ctx{tw, coeffs0, opt};
    for (auto& c : ctx.coeffs) c = tw->lift(c);
    LFE r = tw->lift(rhs0);
    separability_normalize(ctx, &r);
    LFE x = additive_one(ctx, r, Rational(std::int64_t(-1) << 40), 0);
    ScalarResult out;
    out.tower = ctx.tw;
    out.x = x;
    return out;
}

VectorResult additive_kernel(const TowerPtr& tw, const std::vector<LFE>& coeffs0, const SolveOptions& opt) {
    AdditiveCtx ctx{tw, coeffs0, opt};
    for (auto& c : ctx.coeffs) c = tw->lift(c);
    separability_normalize(ctx, nullptr);
    VectorResult out;
    // Newton polygon in zeta-units (stable under radical adjunction)
    auto slopes_zeta = [&]() {
        std::vector<std::pair<std::int64_t, Rational>> pts;
        for (std::size_t k = 0; k < ctx.coeffs.size(); ++k) {
            if (ctx.coeffs[k].zero_to_prec()) continue;
            pts.emplace_back(ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k)),
                             Rational(*ctx.coeffs[k].val(), ctx.tw->zeta_val()));
        }
        auto np = newton_polygon(pts);
        std::vector<Rational> out2;
        for (auto& s : np.segments) out2.push_back(Rational(0) - s.slope);
        return out2;
    };
    for (Rational lam_zeta : slopes_zeta()) {
        Rational wpi = lam_zeta * Rational(ctx.tw->zeta_val());
        if (wpi.den > 1) {
            if (ctx.tw->zeta_val() * wpi.den > opt.ram_cap)
                throw PrecisionExhausted("additive_kernel: ram cap");
            TowerPtr nt = ctx.tw->adjoin_radical(wpi.den, ctx.tw->field()->one());
            ctx.relift(nt);
            for (auto& s : out.sols) s = nt->lift(s);
            wpi = lam_zeta * Rational(ctx.tw->zeta_val());
        }
        std::int64_t w = wpi.num;
        std::int64_t minval = INT64_MAX;
        for (std::size_t k = 0; k < ctx.coeffs.size(); ++k) {
            if (ctx.coeffs[k].zero_to_prec()) continue;
            std::int64_t Qk = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k));
            minval = std::min(minval, *ctx.coeffs[k].val() + Qk * w);
        }
        std::vector<std::pair<unsigned, ff_t>> terms;
        unsigned kmin = 0, kmax = 0;
        bool first = true;
        for (std::size_t k = 0; k < ctx.coeffs.size(); ++k) {
            if (ctx.coeffs[k].zero_to_prec()) continue;
            std::int64_t Qk = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), static_cast<unsigned>(k));
            if (*ctx.coeffs[k].val() + Qk * w == minval) {
                terms.emplace_back(static_cast<unsigned>(k), ctx.coeffs[k].c[0]);
                if (first) kmin = static_cast<unsigned>(k);
                kmax = static_cast<unsigned>(k);
                first = false;
            }
        }
        std::int64_t prec_guess = INT64_MAX;
        for (auto& c : ctx.coeffs) prec_guess = std::min(prec_guess, c.prec);
        std::vector<LFE> seeds;
        if (kmin >= 1 && terms.size() == 2) {
            // twisted segment: exact two-term solutions by a Kummer root of
            // y^{qhat^delta - 1} = -c_{kmin}/c_{kmax}, x = sigma^{-kmin}(y)
            unsigned delta = kmax - kmin;
            std::int64_t Qd = ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), delta);
            LFE ratio = lfe_neg(lfe_div(ctx.coeffs[kmin], ctx.coeffs[kmax]));
            ScalarResult y = kummer_root(ctx.tw, ratio, Qd - 1, opt);
            ctx.relift(y.tower);
            for (auto& s : out.sols) s = ctx.tw->lift(s);
            // scalars: an F_eps-basis of F_{qhat^delta} inside the residue field
            std::uint32_t need = ctx.tw->feps()->m() * delta;
            if (ctx.tw->field()->m() % need != 0) {
                auto big = FiniteField::make_default(ctx.tw->p(),
                                                     std::lcm(ctx.tw->field()->m(), need));
                TowerPtr nt = ctx.tw->adjoin_unramified(big, opt.seed);
                ctx.relift(nt);
                for (auto& s : out.sols) s = nt->lift(s);
            }
            auto sub = FiniteField::make_default(ctx.tw->p(), need);
            Embedding se = make_embedding(sub, ctx.tw->field(), opt.seed);
            ff_t gen = sub->m() > 1 ? se.apply(sub->from_digits({0, 1})) : ctx.tw->field()->one();
            ff_t cur = ctx.tw->field()->one();
            LFE yl = ctx.tw->lift(y.x);
            for (unsigned t2 = 0; t2 < delta; ++t2) {
                LFE yt = lfe_scale(yl, cur);
                std::vector<LFE*> ptr{&yt};
                TowerPtr nt = make_divisible(ctx.tw, ptr, ipow64(static_cast<std::int64_t>(ctx.tw->qhat()), kmin), opt);
                if (nt.get() != ctx.tw.get()) {
                    ctx.relift(nt);
                    for (auto& s : out.sols) s = nt->lift(s);
                    yl = nt->lift(yl);
                }
                seeds.push_back(lfe_sigma_inv(yt, kmin));
                cur = ctx.tw->field()->mul(cur, gen);
            }
        } else {
            auto ra = residue_additive(ctx.tw->field(), ctx.tw->feps(), ctx.tw->qhat(), terms, 0, opt,
                                       static_cast<std::size_t>(kmax - kmin));
            if (ra.extended) {
                TowerPtr nt = ctx.tw->adjoin_unramified(ra.field, opt.seed);
                ctx.relift(nt);
                for (auto& s : out.sols) s = nt->lift(s);
            }
            for (ff_t kb : ra.kernel) {
                if (kb == 0) continue;
                seeds.push_back(lfe_monomial(ctx.tw, kb, w, prec_guess + std::max<std::int64_t>(w, 0) + 1));
            }
        }
        for (auto& seed : seeds) {
            LFE x0 = ctx.tw->lift(seed);
            LFE res = lfe_neg(additive_apply(ctx.coeffs, x0));
            lfe_normalize(res);
            LFE corr;
            if (res.zero_to_prec()) {
                corr = lfe_zero(ctx.tw, x0.prec);
            } else {
                corr = additive_one(ctx, res, x0.val_zeta(), 0);
            }
            LFE sol = lfe_add(ctx.tw->lift(x0), corr);
            for (auto& s : out.sols) s = ctx.tw->lift(s);
            out.sols.push_back(sol);
        }
    }
    out.tower = ctx.tw;
    for (auto& s : out.sols) s = ctx.tw->lift(s);
    return out;
}

// ---------- Lang solve and semilinear fixed bases ----------

namespace {

Mat<ff_t> mat_residue(const Mat<LFE>& A) {
    Mat<ff_t> out(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) {
            const LFE& x = A.at(i, j);
            bool haszero = !x.zero_to_prec() && x.vmin <= 0 &&
                           x.vmin + static_cast<std::int64_t>(x.c.size()) > 0;
            out.at(i, j) = haszero ? lfe_coeff(x, 0) : 0;
        }
    return out;
}

bool mat_integral(const Mat<LFE>& A) {
    for (auto& x : A.a)
        if (!x.zero_to_prec() && *x.val() < 0) return false;
    return true;
}

Mat<LFE> lift_fixed_integral(const TowerPtr& tw, const Mat<LFE>& A, const Mat<ff_t>& U0bar,
                             std::int64_t prec) {
    int r = A.rows;
    Mat<LFE> U0(r, r);
    for (int i = 0; i < r; ++i)
        for (int jc = 0; jc < r; ++jc) U0.at(i, jc) = lfe_const(tw, U0bar.at(i, jc), prec);
    Mat<LFE> B = mat_lfe_mul(mat_lfe_inv(U0), mat_lfe_mul(A, mat_lfe_sigma(U0)));
    Mat<LFE> X = mat_lfe_identity(tw, r, prec);
    Mat<LFE> term = B;
    int guard = 0;
    while (true) {
        Mat<LFE> diff = mat_lfe_sub(term, mat_lfe_identity(tw, r, prec));
        std::int64_t v = mat_lfe_min_val(diff);
        if (v >= prec) break;
        if (v <= 0) throw Error("lift_fixed_integral: gauge not congruent to 1");
        X = mat_lfe_mul(X, term);
        term = mat_lfe_sigma(term);
        if (++guard > 80) break;
    }
    return mat_lfe_mul(U0, X);
}

}  // namespace

LangResult semilinear_fixed_basis(const TowerPtr& tw0, const Mat<LFE>& A0, const SolveOptions& opt) {
    TowerPtr tw = deepest_tower(A0);
    if (tw0->depth() > tw->depth()) tw = tw0;
    Mat<LFE> A = mat_lfe_lift(tw, A0);
    int r = A.rows;
    std::int64_t prec = mat_lfe_min_prec(A);
    if (r == 1) {
        ScalarResult k = kummer_root(tw, lfe_inv(A.at(0, 0)), static_cast<std::int64_t>(tw->qhat()) - 1, opt);
        LangResult out;
        out.tower = k.tower;
        out.U = Mat<LFE>(1, 1, k.x);
        return out;
    }
    auto try_integral = [&](const Mat<LFE>& M, const TowerPtr& twm) -> std::optional<LangResult> {
        if (!mat_integral(M)) return std::nullopt;
        LFE det = mat_lfe_det(M);
        lfe_normalize(det);
        if (det.zero_to_prec() || *det.val() != 0) return std::nullopt;
        Mat<ff_t> Mbar = mat_residue(M);
        ResidueFixedResult rf;
        try {
            rf = residue_fixed_basis(twm->field(), twm->feps(), twm->qhat(), Mbar, opt);
        } catch (const ExtensionBudgetExceeded&) {
            return std::nullopt;
        }
        TowerPtr nt = twm;
        Mat<LFE> Ml = M;
        if (rf.field.get() != twm->field().get()) {
            nt = twm->adjoin_unramified(rf.field, opt.seed);
            Ml = mat_lfe_lift(nt, M);
        }
        LangResult out;
        out.tower = nt;
        out.U = lift_fixed_integral(nt, Ml, rf.basis, mat_lfe_min_prec(Ml));
        return out;
    };
    if (auto got = try_integral(A, tw)) return *got;
    // monomial gauge: A' = pi^{(qhat-1) w0} A for a uniform exponent shift
    {
        LFE det = mat_lfe_det(A);
        lfe_normalize(det);
        if (!det.zero_to_prec()) {
            std::int64_t vd = *det.val();
            std::int64_t denom = static_cast<std::int64_t>(tw->qhat() - 1) * r;
            TowerPtr twc = tw;
            Mat<LFE> Ac = A;
            if (((vd % denom) + denom) % denom != 0) {
                std::int64_t rmod = ((vd % denom) + denom) % denom;
                std::int64_t g = std::gcd(rmod, denom);
                std::int64_t e = denom / g;
                if (twc->zeta_val() * e <= opt.ram_cap) {
                    twc = twc->adjoin_radical(e, twc->field()->one());
                    Ac = mat_lfe_lift(twc, A);
                    vd *= e;
                }
            }
            if (((vd % denom) + denom) % denom == 0) {
                std::int64_t lam = -vd / denom;
                for (std::int64_t delta = 0; delta <= 2 && true; ++delta) {
                    for (std::int64_t w0 : {lam - delta, lam + delta}) {
                        Mat<LFE> Ap = mat_map(Ac, [&](const LFE& x) {
                            return lfe_shift(x, (static_cast<std::int64_t>(twc->qhat()) - 1) * w0);
                        });
                        if (auto got = try_integral(Ap, twc)) {
                            for (auto& x : got->U.a) x = lfe_shift(x, w0);
                            return *got;
                        }
                        if (delta == 0) break;
                    }
                }
            }
        }
    }
    // twisted cyclic vector reduction
    for (int attempt = 0; attempt < 2 * r; ++attempt) {
        std::vector<LFE> e(static_cast<std::size_t>(r), lfe_zero(tw, prec));
        if (attempt < r) {
            e[static_cast<std::size_t>(attempt)] = lfe_one(tw, prec);
        } else {
            for (int i = 0; i <= attempt - r && i < r; ++i) e[static_cast<std::size_t>(i)] = lfe_one(tw, prec);
            e[static_cast<std::size_t>(std::min(attempt - r + 1, r - 1))] = lfe_one(tw, prec);
        }
        std::vector<std::vector<LFE>> w(static_cast<std::size_t>(r + 1));
        w[0] = e;
        for (int i = 1; i <= r; ++i) {
            std::vector<LFE>& prev = w[static_cast<std::size_t>(i - 1)];
            std::vector<LFE> cur(static_cast<std::size_t>(r), lfe_zero(tw, prec));
            for (int row = 0; row < r; ++row) {
                LFE acc = lfe_zero(tw, prec);
                for (int col = 0; col < r; ++col)
                    acc = lfe_add(acc, lfe_mul(A.at(row, col), lfe_sigma(prev[static_cast<std::size_t>(col)])));
                cur[static_cast<std::size_t>(row)] = acc;
            }
            w[static_cast<std::size_t>(i)] = cur;
        }
        Mat<LFE> W(r, r, lfe_zero(tw, prec));
        for (int i = 0; i < r; ++i)
            for (int jc = 0; jc < r; ++jc)
                W.at(i, jc) = w[static_cast<std::size_t>(jc)][static_cast<std::size_t>(i)];
        Mat<LFE> Winv;
        try {
            Winv = mat_lfe_inv(W);
        } catch (const NotAUnit&) {
            continue;
        }
        std::vector<LFE> b(static_cast<std::size_t>(r), lfe_zero(tw, prec));
        for (int i = 0; i < r; ++i) {
            LFE acc = lfe_zero(tw, prec);
            for (int jc = 0; jc < r; ++jc)
                acc = lfe_add(acc,
                              lfe_mul(Winv.at(i, jc), Winv.at(0, 0).tw->lift(
                                                          w[static_cast<std::size_t>(r)][static_cast<std::size_t>(jc)])));
            b[static_cast<std::size_t>(i)] = acc;
        }
        std::vector<LFE> coeffs(static_cast<std::size_t>(r + 1), lfe_zero(tw, prec));
        coeffs[0] = lfe_neg(lfe_one(tw, prec));
        for (int k = 1; k <= r; ++k)
            coeffs[static_cast<std::size_t>(k)] =
                lfe_sigma(b[static_cast<std::size_t>(r - k)], static_cast<unsigned>(k - 1));
        VectorResult ker;
        try {
            ker = additive_kernel(tw, coeffs, opt);
        } catch (const Error&) {
            continue;
        }
        if (static_cast<int>(ker.sols.size()) < r) continue;
        TowerPtr nt = ker.tower;
        std::vector<LFE> bl;
        for (auto& bb : b) bl.push_back(nt->lift(bb));
        std::vector<std::vector<LFE>> wl;
        for (auto& wv : w) {
            std::vector<LFE> lw;
            for (auto& x : wv) lw.push_back(nt->lift(x));
            wl.push_back(lw);
        }
        Mat<LFE> U(r, r, lfe_zero(nt, prec));
        for (int col = 0; col < r; ++col) {
            LFE y = ker.sols[static_cast<std::size_t>(col)];
            std::vector<LFE> ys(static_cast<std::size_t>(r), lfe_zero(nt, y.prec));
            LFE sy = lfe_sigma(y);
            ys[0] = lfe_mul(bl[0], sy);
            for (int i = 1; i < r - 1; ++i)
                ys[static_cast<std::size_t>(i)] = lfe_add(lfe_sigma(ys[static_cast<std::size_t>(i - 1)]),
                                                          lfe_mul(bl[static_cast<std::size_t>(i)], sy));
            ys[static_cast<std::size_t>(r - 1)] = y;
            for (int row = 0; row < r; ++row) {
                LFE acc = lfe_zero(nt, y.prec);
                for (int l = 0; l < r; ++l)
                    acc = lfe_add(acc, lfe_mul(ys[static_cast<std::size_t>(l)],
                                               wl[static_cast<std::size_t>(l)][static_cast<std::size_t>(row)]));
                U.at(row, col) = acc;
            }
        }
        LFE det = mat_lfe_det(U);
        lfe_normalize(det);
        if (det.zero_to_prec()) continue;
        LangResult out;
        out.tower = deepest_tower(U);
        out.U = mat_lfe_lift(out.tower, U);
        return out;
    }
    throw PrecisionExhausted("semilinear_fixed_basis: all strategies failed");
}

LangResult lang_solve(const TowerPtr& tw, const Mat<LFE>& T0, const SolveOptions& opt) {
    Mat<LFE> A = mat_lfe_inv(T0);
    return semilinear_fixed_basis(tw, A, opt);
}

// ---------- general polynomial root finding ----------

namespace {
ff_t binom_mod_p(std::uint64_t i, std::uint64_t k, std::uint32_t p, const FiniteField& F) {
    std::uint64_t binom = 1;
    while (i || k) {
        std::uint64_t id = i % p, kd = k % p;
        if (kd > id) return 0;
        std::uint64_t bb = 1;
        for (std::uint64_t t2 = 0; t2 < kd; ++t2) {
            std::uint64_t num = (id - t2) % p;
            std::uint64_t den = (t2 + 1) % p;
            std::uint64_t deninv = 1, b2 = den, e2 = p - 2;
            while (e2) {
                if (e2 & 1) deninv = deninv * b2 % p;
                b2 = b2 * b2 % p;
                e2 >>= 1;
            }
            bb = bb * num % p * deninv % p;
        }
        binom = binom * bb % p;
        i /= p;
        k /= p;
    }
    return F.from_prime(binom);
}
}  // namespace

ScalarResult lf_root_find(const TowerPtr& tw0, const std::vector<LFE>& poly, Rational target_val,
                          std::int64_t prec, const SolveOptions& opt) {
    TowerPtr tw = tw0;
    std::vector<LFE> f;
    for (auto& c : poly) f.push_back(tw->lift(c));
    // target slope check (valuations in zeta units for stability)
    {
        std::vector<std::pair<std::int64_t, Rational>> pts;
        for (std::size_t i = 0; i < f.size(); ++i) {
            LFE c = f[i];
            lfe_normalize(c);
            if (!c.zero_to_prec())
                pts.emplace_back(static_cast<std::int64_t>(i), Rational(*c.val(), tw->zeta_val()));
        }
        if (pts.size() < 2) throw DegenerateInput("lf_root_find: constant polynomial");
        auto np = newton_polygon(pts);
        bool ok = false;
        for (auto& s : np.segments)
            if ((Rational(0) - s.slope) == target_val) ok = true;
        if (!ok) throw NoSlope("lf_root_find: target valuation is not a Newton slope");
    }
    // additive shape goes to the dedicated solver
    {
        bool additive = true;
        std::vector<LFE> acoeffs;
        std::int64_t q = static_cast<std::int64_t>(tw->qhat());
        for (std::size_t i = 1; i < f.size(); ++i) {
            LFE c = f[i];
            lfe_normalize(c);
            if (c.zero_to_prec()) continue;
            std::int64_t n = static_cast<std::int64_t>(i);
            unsigned k = 0;
            while (n > 1 && n % q == 0) {
                n /= q;
                ++k;
            }
            if (n != 1) {
                additive = false;
                break;
            }
            if (acoeffs.size() <= k) acoeffs.resize(k + 1, lfe_zero(tw, c.prec));
            acoeffs[k] = c;
        }
        if (additive && !acoeffs.empty()) {
            LFE rhs = lfe_neg(f[0]);
            return solve_additive(tw, acoeffs, rhs, opt);
        }
    }
    // generic digit peeling with Taylor shifts
    LFE x = lfe_zero(tw, prec);
    Rational floor_zeta(std::int64_t(-1) << 30, 1);
    bool first_digit = true;
    int guard = 0;
    while (true) {
        if (++guard > 4096) throw PrecisionExhausted("lf_root_find: digit budget");
        std::vector<LFE> g(f.size());
        {
            std::size_t n = f.size();
            std::vector<LFE> xpow(n, lfe_one(tw, tw->lift(x).prec + 1));
            LFE xl = tw->lift(x);
            for (std::size_t i = 1; i < n; ++i) xpow[i] = lfe_mul(xpow[i - 1], xl);
            for (std::size_t k = 0; k < n; ++k) {
                LFE acc = lfe_zero(tw, xl.prec);
                for (std::size_t i = k; i < n; ++i) {
                    ff_t bi = binom_mod_p(i, k, tw->p(), *tw->field());
                    if (bi == 0) continue;
                    acc = lfe_add(acc, lfe_scale(lfe_mul(tw->lift(f[i]), xpow[i - k]), bi));
                }
                g[k] = acc;
            }
        }
        LFE g0 = g[0];
        lfe_normalize(g0);
        if (g0.zero_to_prec() ||
            Rational(g0.val_or_prec(), tw->zeta_val()) >= Rational(prec, tw0->zeta_val()))
            break;
        std::vector<std::pair<std::int64_t, Rational>> pts;
        for (std::size_t i = 0; i < g.size(); ++i) {
            LFE c = g[i];
            lfe_normalize(c);
            if (!c.zero_to_prec())
                pts.emplace_back(static_cast<std::int64_t>(i), Rational(*c.val(), tw->zeta_val()));
        }
        if (pts.size() < 2) throw NoSlope("lf_root_find: no refinement slope");
        auto np = newton_polygon(pts);
        bool found = false;
        Rational wz(0);
        for (auto& s : np.segments) {
            Rational cand = Rational(0) - s.slope;
            if (first_digit ? (cand == target_val) : (cand > floor_zeta)) {
                wz = cand;
                found = true;
                break;
            }
        }
        if (!found) throw NoSlope("lf_root_find: no admissible slope while refining");
        Rational wpi = wz * Rational(tw->zeta_val());
        if (wpi.den > 1) {
            if (tw->zeta_val() * wpi.den > opt.ram_cap) throw PrecisionExhausted("lf_root_find: ram cap");
            tw = tw->adjoin_radical(wpi.den, tw->field()->one());
            x = tw->lift(x);
            for (auto& c : f) c = tw->lift(c);
            continue;
        }
        std::int64_t wi = wpi.num;
        std::int64_t minv = INT64_MAX;
        std::vector<LFE> gl;
        for (auto& gg : g) gl.push_back(tw->lift(gg));
        for (std::size_t i = 0; i < gl.size(); ++i) {
            lfe_normalize(gl[i]);
            if (gl[i].zero_to_prec()) continue;
            minv = std::min(minv, *gl[i].val() + static_cast<std::int64_t>(i) * wi);
        }
        fqpoly::Poly rp;
        for (std::size_t i = 0; i < gl.size(); ++i) {
            ff_t cv = 0;
            if (!gl[i].zero_to_prec() && *gl[i].val() + static_cast<std::int64_t>(i) * wi == minv)
                cv = gl[i].c[0];
            rp.push_back(cv);
        }
        fqpoly::trim(rp);
        auto rts = fqpoly::roots(*tw->field(), rp, opt.seed);
        std::vector<ff_t> nz;
        for (ff_t rt : rts)
            if (rt != 0) nz.push_back(rt);
        if (nz.empty()) {
            bool done = false;
            for (std::uint32_t d = 2;
                 tw->field()->m() * d <= tw->feps()->m() * static_cast<std::uint32_t>(opt.extension_cap); ++d) {
                FieldPtr Fd;
                Embedding emb;
                try {
                    std::tie(Fd, emb) = extend_field(tw->field(), d, opt.seed);
                } catch (const InputError&) {
                    break;
                }
                fqpoly::Poly rp2;
                for (ff_t cv : rp) rp2.push_back(emb.apply(cv));
                auto rts2 = fqpoly::roots(*Fd, rp2, opt.seed);
                std::vector<ff_t> nz2;
                for (ff_t rt : rts2)
                    if (rt != 0) nz2.push_back(rt);
                if (!nz2.empty()) {
                    tw = tw->adjoin_unramified(Fd, opt.seed);
                    x = tw->lift(x);
                    for (auto& c : f) c = tw->lift(c);
                    nz = nz2;
                    done = true;
                    break;
                }
            }
            if (!done) throw ExtensionBudgetExceeded("lf_root_find: residue roots not found");
        }
        ff_t pick = opt.tie_break_high ? nz.back() : nz.front();
        std::int64_t xprec = prec * tw->zeta_val() / tw0->zeta_val();
        x = lfe_add(tw->lift(x), lfe_monomial(tw, pick, wi, xprec));
        floor_zeta = wz;
        first_digit = false;
    }
    ScalarResult out;
    out.tower = tw;
    out.x = x;
    return out;
}

}  // namespace shtukalab
