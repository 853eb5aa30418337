#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shtukalab/finite_field.hpp"
#include "shtukalab/rational.hpp"

namespace shtukalab {

class Tower;
using TowerPtr = std::shared_ptr<const Tower>;

// Dense coefficient window of a pi-expansion, without the tower reference.
struct RawSeries {
    std::int64_t vmin = 0;   // exponent of c[0]
    std::int64_t prec = 0;   // exponents >= prec unknown; [vmin+c.size(), prec) known zero
    std::vector<ff_t> c;
};

// Element of the fraction field of the tower's top level, as a truncated
// pi-expansion with residue-field coefficients.  Exponents >= prec are
// unknown; everything stored is exact.
struct LFE {
    TowerPtr tw;
    std::int64_t vmin = 0;
    std::int64_t prec = 0;
    std::vector<ff_t> c;

    bool zero_to_prec() const { return c.empty(); }
    // Valuation if a nonzero coefficient is stored; nullopt means >= prec.
    std::optional<std::int64_t> val() const {
        if (c.empty()) return std::nullopt;
        return vmin;
    }
    std::int64_t val_or_prec() const { return c.empty() ? prec : vmin; }
    Rational val_zeta() const;  // valuation in zeta-units (throws on zero-to-prec)
};

enum class LevelKind { Base, Unramified, Radical, Cohen };

struct Level {
    LevelKind kind = LevelKind::Base;
    std::int64_t ram = 1;       // ramification index of this level
    Embedding emb;              // Unramified: old residue field -> new
    ff_t radical_const = 1;     // Radical: pi_old = radical_const * pi_new^ram
    RawSeries cohen_pi_old;     // Cohen: expansion of pi_old in the new uniformizer
};

// A complete discretely valued field F((pi)) containing F_eps((zeta)),
// presented as a chain of levels over a base.  Immutable; extensions
// produce new towers sharing the ancestry chain.
class Tower : public std::enable_shared_from_this<Tower> {
public:
    // Base tower with residue field k containing F_eps, and zeta given as an
    // explicit expansion (positive valuation, unit leading coefficient).
    static TowerPtr base(FieldPtr k, FieldPtr feps, Embedding feps_in_k, RawSeries zeta);
    // k = F_eps, zeta = pi^e (gamma of ramification e).
    static TowerPtr eisenstein_base(FieldPtr feps, std::int64_t e, std::int64_t zeta_prec);

    TowerPtr adjoin_unramified(FieldPtr new_k, std::uint64_t seed = 1) const;
    TowerPtr adjoin_radical(std::int64_t e, ff_t cconst) const;
    TowerPtr adjoin_cohen(std::int64_t e, RawSeries pi_old_expansion) const;

    const FieldPtr& field() const { return F_; }
    const FieldPtr& feps() const { return Feps_; }
    const Embedding& feps_embedding() const { return feps_in_k_; }
    std::uint64_t qhat() const { return qhat_; }
    std::uint32_t p() const { return F_->p(); }
    std::int64_t zeta_val() const { return zeta_val_; }  // = total ramification
    std::int64_t zeta_prec() const { return zeta_.prec; }
    LFE zeta(std::int64_t prec = -1) const;  // default: full stored precision
    const TowerPtr& parent() const { return parent_; }
    const Level& level() const { return level_; }
    int depth() const { return depth_; }
    // Residue extension degree of k over F_eps.
    std::uint32_t residue_degree() const { return F_->m() / Feps_->m(); }

    bool is_ancestor_of(const Tower* other) const;
    // Re-expands an element of an ancestor tower into this tower.
    LFE lift(const LFE& x) const;

    std::string describe() const;

private:
    Tower() = default;
    FieldPtr F_;
    FieldPtr Feps_;
    Embedding feps_in_k_;
    std::uint64_t qhat_ = 2;
    std::int64_t zeta_val_ = 1;
    RawSeries zeta_;
    TowerPtr parent_;
    Level level_;
    int depth_ = 0;
};

// --- element constructors -------------------------------------------------

LFE lfe_zero(const TowerPtr& tw, std::int64_t prec);
LFE lfe_const(const TowerPtr& tw, ff_t a, std::int64_t prec);
LFE lfe_one(const TowerPtr& tw, std::int64_t prec);
LFE lfe_monomial(const TowerPtr& tw, ff_t a, std::int64_t exp, std::int64_t prec);
LFE lfe_from_raw(const TowerPtr& tw, RawSeries raw);
void lfe_normalize(LFE& x);

// --- arithmetic -------------------------------------------------------------

LFE lfe_add(const LFE& a, const LFE& b);
LFE lfe_sub(const LFE& a, const LFE& b);
LFE lfe_neg(const LFE& a);
LFE lfe_mul(const LFE& a, const LFE& b);
LFE lfe_scale(const LFE& a, ff_t c);
LFE lfe_shift(const LFE& a, std::int64_t e);  // multiply by pi^e
LFE lfe_inv(const LFE& a);                    // throws NotAUnit if zero to precision
LFE lfe_div(const LFE& a, const LFE& b);
LFE lfe_pow(const LFE& a, std::int64_t e);
bool lfe_eq(const LFE& a, const LFE& b);  // equal to joint precision

// p^k-power ring endomorphism (coefficientwise power, exponents scaled).
LFE lfe_frob(const LFE& a, std::uint64_t pk_log);  // x -> x^{p^{pk_log}}
// sigma-hat and its inverse: q-hat-power.
LFE lfe_sigma(const LFE& a, std::uint64_t j = 1);
// q-hat^j-th root; requires all exponents divisible by qhat^j (adjoin radical
// levels first if they are not). Fails with PrecisionExhausted otherwise.
LFE lfe_sigma_inv(const LFE& a, std::uint64_t j = 1);
bool lfe_sigma_inv_possible(const LFE& a, std::uint64_t j = 1);

LFE lfe_truncate(const LFE& a, std::int64_t new_prec);
ff_t lfe_coeff(const LFE& a, std::int64_t exp);
// Is the element a constant from F_eps (to precision)?
bool lfe_is_feps_constant(const LFE& a, ff_t* value = nullptr);

// Moves both operands into a common tower (one must be an ancestor of the other).
void lfe_unify(LFE& a, LFE& b);

std::string lfe_str(const LFE& a, int max_terms = 8);

// --- Newton polygons --------------------------------------------------------

struct NewtonSegment {
    Rational slope;       // slope of the hull segment
    std::int64_t length;  // horizontal length = number of roots of valuation -slope
};

struct NewtonPolygonData {
    std::vector<std::pair<std::int64_t, Rational>> points;  // finite points (x, val)
    std::vector<std::pair<std::int64_t, Rational>> hull;    // lower hull vertices, increasing x
    std::vector<NewtonSegment> segments;
};

// Lower convex hull of (degree, valuation) points. Points with unknown
// (infinite) valuation are passed implicitly by omission.
NewtonPolygonData newton_polygon(const std::vector<std::pair<std::int64_t, Rational>>& pts);

}  // namespace shtukalab
