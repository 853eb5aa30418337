#pragma once

#include <functional>
#include <vector>

#include "shtukalab/errors.hpp"

namespace shtukalab {

// Small dense matrix over an arbitrary coefficient type; the ring operations
// are supplied by the element type's free functions at the call sites.
template <class T>
struct Mat {
    int rows = 0, cols = 0;
    std::vector<T> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}
    Mat(int r, int c, const T& fill) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

    T& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    const T& at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    bool square() const { return rows == cols; }
};

template <class T, class F>
Mat<T> mat_map(const Mat<T>& m, F&& f) {
    Mat<T> r(m.rows, m.cols);
    for (std::size_t i = 0; i < m.a.size(); ++i) r.a[i] = f(m.a[i]);
    return r;
}

template <class T, class Add, class Mul>
Mat<T> mat_mul_with(const Mat<T>& x, const Mat<T>& y, const T& zero, Add&& add, Mul&& mul) {
    if (x.cols != y.rows) throw InputError("matrix: dimension mismatch");
    Mat<T> r(x.rows, y.cols, zero);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k)
            for (int j = 0; j < y.cols; ++j)
                r.at(i, j) = add(r.at(i, j), mul(x.at(i, k), y.at(k, j)));
    return r;
}

template <class T, class Add>
Mat<T> mat_add_with(const Mat<T>& x, const Mat<T>& y, Add&& add) {
    if (x.rows != y.rows || x.cols != y.cols) throw InputError("matrix: dimension mismatch");
    Mat<T> r(x.rows, x.cols);
    for (std::size_t i = 0; i < x.a.size(); ++i) r.a[i] = add(x.a[i], y.a[i]);
    return r;
}

// Determinant by cofactor expansion (matrices here are tiny).
template <class T, class Add, class Mul, class Neg>
T mat_det_with(const Mat<T>& m, const T& zero, const T& /*one*/, Add&& add, Mul&& mul, Neg&& neg) {
    if (!m.square()) throw InputError("matrix: determinant of non-square");
    int n = m.rows;
    if (n == 0) throw InputError("matrix: empty determinant");
    if (n == 1) return m.at(0, 0);
    T det = zero;
    std::vector<int> cols(n - 1);
    for (int j = 0; j < n; ++j) {
        Mat<T> sub(n - 1, n - 1);
        for (int i = 1; i < n; ++i) {
            int cc = 0;
            for (int c = 0; c < n; ++c) {
                if (c == j) continue;
                sub.at(i - 1, cc++) = m.at(i, c);
            }
        }
        T term = mul(m.at(0, j), mat_det_with(sub, zero, zero, add, mul, neg));
        if (j % 2 == 1) term = neg(term);
        det = add(det, term);
    }
    return det;
}

}  // namespace shtukalab
