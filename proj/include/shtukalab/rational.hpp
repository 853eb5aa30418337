#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "shtukalab/errors.hpp"

namespace shtukalab {

// Exact rational numbers for valuations and Newton-polygon slopes.
// Always kept normalized with positive denominator.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {}
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw InputError("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    friend Rational operator+(Rational a, Rational b) { return Rational(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend Rational operator-(Rational a, Rational b) { return Rational(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend Rational operator*(Rational a, Rational b) { return Rational(a.num * b.num, a.den * b.den); }
    friend Rational operator/(Rational a, Rational b) {
        if (b.num == 0) throw InputError("Rational: division by zero");
        return Rational(a.num * b.den, a.den * b.num);
    }
    Rational operator-() const { return Rational(-num, den); }

    friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(Rational a, Rational b) { return !(a == b); }
    friend bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }
    friend bool operator<=(Rational a, Rational b) { return a.num * b.den <= b.num * a.den; }
    friend bool operator>(Rational a, Rational b) { return b < a; }
    friend bool operator>=(Rational a, Rational b) { return b <= a; }

    bool is_integer() const { return den == 1; }
    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

inline Rational rmin(Rational a, Rational b) { return a < b ? a : b; }
inline Rational rmax(Rational a, Rational b) { return a < b ? b : a; }

}  // namespace shtukalab
