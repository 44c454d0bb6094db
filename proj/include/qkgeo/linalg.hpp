#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qkgeo/jet.hpp"

namespace qkgeo {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;
using Ten3 = std::vector<Mat>;
using Ten4 = std::vector<Ten3>;
using Ten5 = std::vector<Ten4>;

using JetVec = std::vector<Jet>;
using JetMat = std::vector<JetVec>;

struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(double pivot)
        : std::runtime_error("singular matrix in linear solve"), pivot_magnitude(pivot) {}
    double pivot_magnitude;
};

inline Mat zeros(int n, int m) { return Mat(size_t(n), Vec(size_t(m), 0.0)); }
inline Ten3 zeros3(int n) { return Ten3(size_t(n), zeros(n, n)); }
inline Ten4 zeros4(int n) { return Ten4(size_t(n), zeros3(n)); }

inline double pivot_mag(double x) { return std::fabs(x); }
inline double pivot_mag(const Jet& x) { return std::fabs(x.value()); }

inline double recip_entry(double x) { return 1.0 / x; }
inline Jet recip_entry(const Jet& x) { return recip(x); }

// Gauss-Jordan inverse with partial pivoting; works for double and Jet entries.
template <typename T>
std::vector<std::vector<T>> gauss_inverse(std::vector<std::vector<T>> a) {
    const size_t n = a.size();
    // identity of matching element shape
    std::vector<std::vector<T>> inv(n, std::vector<T>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            T e = a[0][0] * 0.0;  // clone shape
            if (i == j) e = e + 1.0;
            inv[i][j] = e;
        }
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (pivot_mag(a[r][col]) > pivot_mag(a[piv][col])) piv = r;
        if (pivot_mag(a[piv][col]) < 1e-14) throw SingularMatrixError(pivot_mag(a[piv][col]));
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        T d = recip_entry(a[col][col]);
        for (size_t j = 0; j < n; ++j) {
            a[col][j] = a[col][j] * d;
            inv[col][j] = inv[col][j] * d;
        }
        for (size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            // note: no zero-value shortcut here; a Jet entry can have value 0
            // with nonzero derivative slots that must still be eliminated
            T f = a[r][col];
            for (size_t j = 0; j < n; ++j) {
                a[r][j] = a[r][j] - f * a[col][j];
                inv[r][j] = inv[r][j] - f * inv[col][j];
            }
        }
    }
    return inv;
}

template <typename T>
std::vector<T> gauss_solve(std::vector<std::vector<T>> a, std::vector<T> rhs) {
    const size_t n = a.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (pivot_mag(a[r][col]) > pivot_mag(a[piv][col])) piv = r;
        if (pivot_mag(a[piv][col]) < 1e-14) throw SingularMatrixError(pivot_mag(a[piv][col]));
        std::swap(a[piv], a[col]);
        std::swap(rhs[piv], rhs[col]);
        T d = recip_entry(a[col][col]);
        for (size_t j = col; j < n; ++j) a[col][j] = a[col][j] * d;
        rhs[col] = rhs[col] * d;
        for (size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            T f = a[r][col];
            for (size_t j = col; j < n; ++j) a[r][j] = a[r][j] - f * a[col][j];
            rhs[r] = rhs[r] - f * rhs[col];
        }
    }
    return rhs;
}

inline double mat_det(Mat a) {
    const size_t n = a.size();
    double det = 1.0;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (piv != col) {
            std::swap(a[piv], a[col]);
            det = -det;
        }
        if (std::fabs(a[col][col]) < 1e-300) return 0.0;
        det *= a[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
        }
    }
    return det;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline Vec symmetric_eigenvalues(Mat a) {
    const size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-28) break;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    Vec ev(n);
    for (size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace qkgeo
