#include "shtukalab/fq_poly.hpp"

#include <algorithm>

namespace shtukalab {
namespace fqpoly {

namespace {
std::uint64_t splitmix(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::vector<std::uint32_t> prime_factors_u32(std::uint32_t n) {
    std::vector<std::uint32_t> fs;
    for (std::uint32_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            fs.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) fs.push_back(n);
    return fs;
}
}  // namespace

void trim(Poly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

int deg(const Poly& f) { return static_cast<int>(f.size()) - 1; }

Poly add(const FiniteField& F, const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        ff_t x = i < a.size() ? a[i] : 0;
        ff_t y = i < b.size() ? b[i] : 0;
        r[i] = F.add(x, y);
    }
    trim(r);
    return r;
}

Poly sub(const FiniteField& F, const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        ff_t x = i < a.size() ? a[i] : 0;
        ff_t y = i < b.size() ? b[i] : 0;
        r[i] = F.sub(x, y);
    }
    trim(r);
    return r;
}

Poly mul(const FiniteField& F, const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b[j] == 0) continue;
            r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
        }
    }
    trim(r);
    return r;
}

Poly scale(const FiniteField& F, const Poly& a, ff_t c) {
    Poly r = a;
    for (auto& x : r) x = F.mul(x, c);
    trim(r);
    return r;
}

void divmod(const FiniteField& F, const Poly& a, const Poly& b, Poly& quo, Poly& rem) {
    if (b.empty()) throw InputError("fqpoly: division by zero polynomial");
    rem = a;
    trim(rem);
    quo.clear();
    int db = deg(b);
    if (deg(rem) < db) return;
    quo.assign(rem.size() - db, 0);
    ff_t lead_inv = F.inv(b.back());
    for (int i = deg(rem); i >= db; --i) {
        if (rem[i] == 0) continue;
        ff_t c = F.mul(rem[i], lead_inv);
        quo[i - db] = c;
        for (int j = 0; j <= db; ++j)
            rem[i - db + j] = F.sub(rem[i - db + j], F.mul(c, b[j]));
    }
    trim(rem);
    trim(quo);
}

Poly mod(const FiniteField& F, const Poly& a, const Poly& b) {
    Poly q, r;
    divmod(F, a, b, q, r);
    return r;
}

Poly monic(const FiniteField& F, Poly f) {
    trim(f);
    if (f.empty()) return f;
    ff_t c = F.inv(f.back());
    for (auto& x : f) x = F.mul(x, c);
    return f;
}

Poly gcd(const FiniteField& F, Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = mod(F, a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return monic(F, a);
}

ff_t eval(const FiniteField& F, const Poly& f, ff_t x) {
    ff_t r = 0;
    for (std::size_t i = f.size(); i-- > 0;) r = F.add(F.mul(r, x), f[i]);
    return r;
}

Poly powmod(const FiniteField& F, Poly base, std::uint64_t e, const Poly& f) {
    Poly r{F.one()};
    base = mod(F, base, f);
    while (e) {
        if (e & 1) r = mod(F, mul(F, r, base), f);
        base = mod(F, mul(F, base, base), f);
        e >>= 1;
    }
    return r;
}

Poly xq_pow_mod(const FiniteField& F, std::uint64_t k, const Poly& f) {
    // h := x; repeat k times: h <- h^p mod f (coefficient Frobenius + exponent scaling).
    Poly h{0, F.one()};
    h = mod(F, h, f);
    std::uint32_t p = F.p();
    for (std::uint64_t step = 0; step < k; ++step) {
        Poly hp;
        hp.assign(h.size() ? (h.size() - 1) * p + 1 : 0, 0);
        for (std::size_t i = 0; i < h.size(); ++i)
            if (h[i] != 0) hp[i * p] = F.pow(h[i], p);
        h = mod(F, hp, f);
    }
    return h;
}

Poly compose_mod(const FiniteField& F, const Poly& g, const Poly& h, const Poly& f) {
    Poly r;
    for (std::size_t i = g.size(); i-- > 0;) {
        r = mod(F, mul(F, r, h), f);
        if (g[i] != 0) r = add(F, r, Poly{g[i]});
    }
    return r;
}

Poly formal_derivative(const FiniteField& F, const Poly& f) {
    Poly r;
    if (f.size() <= 1) return r;
    r.assign(f.size() - 1, 0);
    for (std::size_t i = 1; i < f.size(); ++i) {
        std::uint64_t c = i % F.p();
        if (c) r[i - 1] = F.mul(f[i], F.from_prime(c));
    }
    trim(r);
    return r;
}

bool is_irreducible(const FiniteField& F, const Poly& fin) {
    Poly f = fin;
    trim(f);
    int n = deg(f);
    if (n <= 0) return false;
    if (n == 1) return true;
    // Rabin: x^{q^n} == x mod f, and gcd(x^{q^{n/l}} - x, f) == 1 for each prime l | n.
    std::uint64_t steps_per_q = F.m();
    Poly xqn = xq_pow_mod(F, steps_per_q * static_cast<std::uint64_t>(n), f);
    Poly x{0, F.one()};
    if (sub(F, xqn, x) != Poly{}) return false;
    for (std::uint32_t l : prime_factors_u32(static_cast<std::uint32_t>(n))) {
        Poly xql = xq_pow_mod(F, steps_per_q * (n / l), f);
        Poly g = gcd(F, sub(F, xql, x), f);
        if (deg(g) != 0) return false;
    }
    return true;
}

namespace {
// Equal-degree-1 splitting of a squarefree product of linear factors.
void split_linear(const FiniteField& F, const Poly& g, std::vector<ff_t>& out, std::uint64_t& rng) {
    if (deg(g) <= 0) return;
    if (deg(g) == 1) {
        // root of c0 + c1 x
        out.push_back(F.neg(F.mul(g[0], F.inv(g[1]))));
        return;
    }
    std::uint64_t q = F.q();
    for (int attempt = 0; attempt < 256; ++attempt) {
        Poly t;
        if (F.p() != 2) {
            ff_t a = F.from_index(splitmix(rng) % q);
            Poly xa{a, F.one()};
            Poly h = powmod(F, xa, (q - 1) / 2, g);
            t = sub(F, h, Poly{F.one()});
        } else {
            // trace map of a*x over F2
            ff_t a = F.from_index(splitmix(rng) % q);
            Poly ax{0, a};
            Poly acc = mod(F, ax, g);
            Poly cur = acc;
            std::uint64_t e = F.m();
            // total degree over F_2 of the field where roots live = F.m()
            for (std::uint64_t i = 1; i < e; ++i) {
                cur = mod(F, mul(F, cur, cur), g);
                acc = add(F, acc, cur);
            }
            t = acc;
        }
        Poly d = gcd(F, t, g);
        if (deg(d) > 0 && deg(d) < deg(g)) {
            Poly q2, r2;
            divmod(F, g, d, q2, r2);
            split_linear(F, d, out, rng);
            split_linear(F, q2, out, rng);
            return;
        }
    }
    throw Error("fqpoly: equal-degree splitting failed");
}
}  // namespace

std::vector<ff_t> roots(const FiniteField& F, const Poly& fin, std::uint64_t seed) {
    Poly f = monic(F, fin);
    std::vector<ff_t> out;
    if (deg(f) <= 0) return out;
    if (f[0] == 0) {
        out.push_back(0);
        std::size_t k = 0;
        while (k < f.size() && f[k] == 0) ++k;
        f.erase(f.begin(), f.begin() + k);
    }
    if (deg(f) <= 0) return out;
    // Keep only roots in F: g = gcd(f, x^q - x).
    Poly xq = xq_pow_mod(F, F.m(), f);
    Poly x{0, F.one()};
    Poly g = gcd(F, sub(F, xq, x), f);
    if (deg(g) <= 0) return out;
    std::uint64_t rng = seed ? seed : 1;
    split_linear(F, g, out, rng);
    std::sort(out.begin(), out.end(), [&](ff_t a, ff_t b) { return F.index(a) < F.index(b); });
    return out;
}

Poly find_irreducible(const FiniteField& F, std::uint32_t n) {
    if (n == 1) return Poly{0, F.one()};
    // Enumerate lower coefficients by counter in base q.
    std::uint64_t q = F.q();
    for (std::uint64_t counter = 1;; ++counter) {
        Poly f(n + 1, 0);
        f[n] = F.one();
        std::uint64_t c = counter;
        for (std::uint32_t i = 0; i < n && c; ++i) {
            f[i] = F.from_index(c % q);
            c /= q;
        }
        if (c) throw Error("fqpoly: no irreducible found");
        if (f[0] == 0) continue;
        if (is_irreducible(F, f)) return f;
    }
}

}  // namespace fqpoly
}  // namespace shtukalab
