#pragma once

#include <cstdint>
#include <vector>

#include "shtukalab/matrix.hpp"
#include "shtukalab/tower.hpp"

namespace shtukalab {

// Knobs for the field-level solvers.  extension_cap bounds the residue
// extension degree over F_eps; ram_cap bounds total ramification growth.
struct SolveOptions {
    int extension_cap = 12;
    int root_depth = 4;
    std::int64_t ram_cap = 1 << 20;
    int max_digits = 100000;
    bool tie_break_high = false;  // Artin-Schreier root choice
    std::uint64_t seed = 1;
};

// --- residue-field solvers ---------------------------------------------------

struct ResidueASResult {
    FieldPtr field;      // field containing the roots (== input or an extension)
    Embedding emb;       // input field -> field
    std::vector<ff_t> roots;  // all q-hat^j roots, sorted by index
};

// All roots of x^{qhat^j} - x = c over the smallest extension containing one.
ResidueASResult artin_schreier_residue(const FieldPtr& F, std::uint64_t qhat, ff_t c,
                                       const SolveOptions& opt, unsigned j = 1,
                                       bool allow_extension = true);

struct ResidueFixedResult {
    FieldPtr field;
    Embedding emb;
    Mat<ff_t> basis;  // columns: an F_eps-basis of {u : A sigma(u) = u}
};

// F_eps-basis of the fixed space of u -> A sigma(u) over a finite extension.
ResidueFixedResult residue_fixed_basis(const FieldPtr& F, const FieldPtr& Feps, std::uint64_t qhat,
                                       const Mat<ff_t>& A, const SolveOptions& opt);

// --- tower-level solvers -------------------------------------------------------

struct ScalarResult {
    TowerPtr tower;  // possibly extended
    LFE x;
};

struct VectorResult {
    TowerPtr tower;
    std::vector<LFE> sols;
};

// Kummer root: y with y^n = a, p not dividing n; extends the tower as needed.
ScalarResult kummer_root(const TowerPtr& tw, const LFE& a, std::int64_t n, const SolveOptions& opt);

// One solution of sigma^j(x) - x = c over the tower (any valuation of c);
// wild negative-valuation inputs adjoin Artin-Schreier (Cohen) levels.
ScalarResult solve_as_scalar(const TowerPtr& tw, const LFE& c, const SolveOptions& opt, unsigned j = 1);

// Spec operation: all roots of x^{qhat} - x = c (v(c) >= 0); the solution set
// is one root plus the F_qhat-translates.
VectorResult artin_schreier_solve(const LFE& c, bool allow_extension, const SolveOptions& opt);

// One nonzero solution of sigma(x) = alpha x  (equivalently x^{qhat-1} = alpha).
ScalarResult solve_twisted_homogeneous(const TowerPtr& tw, const LFE& alpha, const SolveOptions& opt);

// One solution of  a*sigma^j(x) + b*x = c  (first-order twisted-affine).
ScalarResult solve_twisted_affine(const TowerPtr& tw, const LFE& a, const LFE& b, const LFE& c,
                                  const SolveOptions& opt, unsigned j = 1);

// Additive operator  B(x) = sum_k coeffs[k] * sigma^k(x).
LFE additive_apply(const std::vector<LFE>& coeffs, const LFE& x);

// One solution of B(x) = rhs; with want_kernel, an F_eps-basis of ker B.
ScalarResult solve_additive(const TowerPtr& tw, const std::vector<LFE>& coeffs, const LFE& rhs,
                            const SolveOptions& opt);
VectorResult additive_kernel(const TowerPtr& tw, const std::vector<LFE>& coeffs,
                             const SolveOptions& opt);

// Spec operation lang_solve: U with sigma(U) = T0 U.  Over a finite field
// (constant entries) or over R (integral entries, unit determinant).
struct LangResult {
    TowerPtr tower;
    Mat<LFE> U;
};
LangResult lang_solve(const TowerPtr& tw, const Mat<LFE>& T0, const SolveOptions& opt);

// Basis of the fixed space {u : A sigma(u) = u} for A in GL_r(K); handles
// non-integral A via monomial gauges and the twisted cyclic-vector reduction.
LangResult semilinear_fixed_basis(const TowerPtr& tw, const Mat<LFE>& A, const SolveOptions& opt);

// Root of a general univariate polynomial with LFE coefficients at a
// prescribed Newton slope (valuation of the root, in pi-units of tw).
ScalarResult lf_root_find(const TowerPtr& tw, const std::vector<LFE>& poly, Rational target_val,
                          std::int64_t prec, const SolveOptions& opt);

// --- helpers -------------------------------------------------------------------

// Matrix utilities over LFE entries.
Mat<LFE> mat_lfe_mul(const Mat<LFE>& a, const Mat<LFE>& b);
Mat<LFE> mat_lfe_add(const Mat<LFE>& a, const Mat<LFE>& b);
Mat<LFE> mat_lfe_sub(const Mat<LFE>& a, const Mat<LFE>& b);
LFE mat_lfe_det(const Mat<LFE>& a);
Mat<LFE> mat_lfe_inv(const Mat<LFE>& a);  // Gaussian elimination, valuation pivoting
Mat<LFE> mat_lfe_sigma(const Mat<LFE>& a, unsigned j = 1);
Mat<LFE> mat_lfe_identity(const TowerPtr& tw, int n, std::int64_t prec);
Mat<LFE> mat_lfe_lift(const TowerPtr& tw, const Mat<LFE>& a);
// Minimum valuation lower bound over entries (prec for zero entries).
std::int64_t mat_lfe_min_val(const Mat<LFE>& a);
// Minimum precision over entries.
std::int64_t mat_lfe_min_prec(const Mat<LFE>& a);

}  // namespace shtukalab
