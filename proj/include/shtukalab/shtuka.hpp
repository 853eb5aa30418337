#pragma once

#include <vector>

#include "shtukalab/matrix.hpp"
#include "shtukalab/zseries.hpp"

namespace shtukalab {

// --- matrix helpers over ZSeries ------------------------------------------------

Mat<ZSeries> mat_zs_mul(const Mat<ZSeries>& a, const Mat<ZSeries>& b);
Mat<ZSeries> mat_zs_add(const Mat<ZSeries>& a, const Mat<ZSeries>& b);
Mat<ZSeries> mat_zs_sub(const Mat<ZSeries>& a, const Mat<ZSeries>& b);
ZSeries mat_zs_det(const Mat<ZSeries>& a);
Mat<ZSeries> mat_zs_adjugate(const Mat<ZSeries>& a);
Mat<ZSeries> mat_zs_sigma(const Mat<ZSeries>& a, unsigned j = 1);
Mat<ZSeries> mat_zs_identity(const TowerPtr& tw, int n, std::int64_t zprec, std::int64_t pi_prec);
Mat<ZSeries> mat_zs_lift(const TowerPtr& tw, const Mat<ZSeries>& a);
// Inverse of a matrix whose constant z-term is invertible over the tower.
Mat<ZSeries> mat_zs_inv(const Mat<ZSeries>& a);
Mat<ZSeries> mat_zs_truncate(const Mat<ZSeries>& a, std::int64_t zprec);
bool mat_zs_zero_to_prec(const Mat<ZSeries>& a);
// Minimal certified zeta-valuation across entries (used for residuals).
Rational mat_zs_residual_val(const Mat<ZSeries>& a);

// --- local shtukas -----------------------------------------------------------------

// tau = (z - zeta)^{-pole} * num, num an r x r matrix over R[[z]].
struct LocalShtuka {
    TowerPtr tower;
    int rank = 0;
    Mat<ZSeries> num;
    std::int64_t pole = 0;

    // normal form: divides z - zeta out of num while possible
    void normalize();
};

LocalShtuka make_shtuka(const TowerPtr& tw, Mat<ZSeries> num, std::int64_t pole);
LocalShtuka unit_shtuka(const TowerPtr& tw, int rank, std::int64_t zprec, std::int64_t pi_prec);
LocalShtuka carlitz_shtuka(const TowerPtr& tw, std::int64_t zprec, std::int64_t pi_prec);

struct DetFactor {
    std::int64_t d = 0;  // det tau = (z-zeta)^d * unit
    ZSeries unit;
};
DetFactor det_factor(const LocalShtuka& sh);

// bounded by (mu_1 >= ... >= mu_r)?
bool boundedness_check(const LocalShtuka& sh, const std::vector<std::int64_t>& mu);
// (z-zeta)^d M in tau(sigma* M) in M?
bool height_check(const LocalShtuka& sh, std::int64_t d);

LocalShtuka shtuka_tensor(const LocalShtuka& a, const LocalShtuka& b);
LocalShtuka shtuka_dual(const LocalShtuka& a, std::int64_t twist);

// --- A-motives at epsilon -----------------------------------------------------------

// tau_M over R[t][1/(t-theta)]: entries are polynomials in t with LFE
// coefficients; pole_t counts the (t-theta)-denominator.
struct AMotiveLocalData {
    FieldPtr fq;                       // F_q
    std::vector<ff_t> z_poly;          // monic irreducible z(t) over F_q
    TowerPtr base;                     // R = k[[pi]] (its declared zeta is ignored)
    LFE theta;                         // gamma(t) in R
    Mat<std::vector<LFE>> tau_t;       // entry (i,j): coefficients in t
    std::int64_t pole_t = 0;
};

// The local shtuka at epsilon: the f-fold twisted product specialized along
// t -> t(z); the returned shtuka lives over a tower with zeta = z(theta).
LocalShtuka motive_to_local_shtuka(const AMotiveLocalData& mot, std::int64_t z_prec);

// For effective rank-1 motives with d = 1: tau = (z - zeta) u with u = 1 mod zeta,
// and the convergent unit w = prod_n sigma^n(u) with w = u sigma(w).
struct CarlitzUnitW {
    ZSeries u;
    ZSeries w;
    Rational residual;  // certified valuation of w - u*sigma(w)
};
CarlitzUnitW carlitz_unit_w(const LocalShtuka& sh);

// --- torsion local shtukas -----------------------------------------------------------

// M = sum R[[z]]/(z^{n_i}) with tau given by a matrix whose (i,j) entry is
// taken mod z^{n_i}; effective when pole == 0.
struct TorsionShtuka {
    TowerPtr tower;
    std::vector<std::int64_t> divisors;
    Mat<ZSeries> num;
    std::int64_t pole = 0;
};

TorsionShtuka make_torsion(const TowerPtr& tw, std::vector<std::int64_t> divisors, Mat<ZSeries> num,
                           std::int64_t pole = 0);
// The model (R[[z]]/(z^n), (z-zeta)^d).
TorsionShtuka torsion_model(const TowerPtr& tw, std::int64_t n, std::int64_t d, std::int64_t pi_prec);
// Total R-rank sum n_i.
std::int64_t torsion_rank(const TorsionShtuka& t);
bool torsion_height_check(const TorsionShtuka& t, std::int64_t d);

struct Isogeny {
    LocalShtuka source;
    LocalShtuka target;
    Mat<ZSeries> map;  // columns: images of source basis vectors
};

// Checks tau-equivariance; throws NotAnIsogeny on failure.
Isogeny make_isogeny(LocalShtuka source, LocalShtuka target, Mat<ZSeries> map);

TorsionShtuka isogeny_cokernel(const Isogeny& f);
TorsionShtuka torsion_dual(const TorsionShtuka& t, std::int64_t d);
Isogeny torsion_resolution(const TorsionShtuka& t);

// Finite flat algebra presentation: generators m_{(i,t)} = z^t e_i with
// relations m^{qhat} = tau(sigma* m) expressed over the R-basis.
struct DrinfeldPresentation {
    std::vector<std::pair<int, std::int64_t>> gens;  // (component i, z-power t)
    // rel[g][h]: coefficient of generator h in tau(sigma* m_g)
    std::vector<std::vector<LFE>> rel;
    // z-action: z * m_g = m_{z_next[g]} (or -1 when it dies)
    std::vector<int> z_next;
};
DrinfeldPresentation drinfeld_presentation(const TorsionShtuka& t);

// Sum and intersection of two torsion submodules of a common ambient torsion
// shtuka; the embeddings give the images of each model's R[[z]]-generators.
struct AmbientEmbedding {
    Mat<ZSeries> cols;  // ambient coordinates of the submodule generators
};
TorsionShtuka torsion_sum(const TorsionShtuka& ambient, const AmbientEmbedding& a,
                          const AmbientEmbedding& b);
TorsionShtuka torsion_intersection(const TorsionShtuka& ambient, const AmbientEmbedding& a,
                                   const AmbientEmbedding& b);

}  // namespace shtukalab
