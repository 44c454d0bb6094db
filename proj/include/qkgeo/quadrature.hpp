#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "qkgeo/jet.hpp"
#include "qkgeo/linalg.hpp"

namespace qkgeo {
namespace quad {

struct QuadratureResult {
    double value = 0.0;
    double error_bound = 0.0;
};

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline void adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                  double fb, double whole, double tol, int depth, QuadratureResult& acc) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    const double err = (left + right - whole) / 15.0;
    if (depth <= 0 || std::fabs(err) < tol) {
        acc.value += left + right + err;
        acc.error_bound += std::fabs(err);
        return;
    }
    adapt(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1, acc);
    adapt(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1, acc);
}

// 8-point Gauss-Legendre abscissae/weights on [-1, 1]
constexpr double kGlX[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                            0.7966664774136267,  0.9602898564975363};
constexpr double kGlW[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                            0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

}  // namespace detail

inline QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                         double tol = 1e-10, int max_depth = 24) {
    QuadratureResult acc;
    if (a == b) return acc;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = detail::simpson(f, a, b, fa, fm, fb);
    detail::adapt(f, a, b, fa, fm, fb, whole, tol, max_depth, acc);
    return acc;
}

/// Jet of I(p) = ∫_{s0}^{p[axis]} f(p with coordinate axis replaced by s) ds.
/// Derivatives in the axis direction come from the variable limit (Leibniz);
/// the other derivatives are taken under the integral sign. Supports order <= 2.
inline Jet integral_along_axis(const std::function<Jet(const Point&, int)>& f, const Point& p,
                               int axis, double s0, int order, int panels = 16) {
    if (order > 2) throw JetOrderError("integral_along_axis supports jet order <= 2");
    const int dim = static_cast<int>(p.size());
    Jet r = Jet::constant(0.0, dim, order);
    const double upper = p[size_t(axis)];
    const double h = (upper - s0) / panels;
    double value = 0.0;
    Vec d1(size_t(dim), 0.0);
    Mat d2 = order >= 2 ? Mat(size_t(dim), Vec(size_t(dim), 0.0)) : Mat();
    for (int pan = 0; pan < panels; ++pan) {
        const double lo = s0 + pan * h;
        for (int q = 0; q < 8; ++q) {
            const double s = lo + 0.5 * h * (detail::kGlX[q] + 1.0);
            const double w = 0.5 * h * detail::kGlW[q];
            Point node = p;
            node[size_t(axis)] = s;
            Jet fj = f(node, order);
            value += w * fj.value();
            if (order >= 1)
                for (int i = 0; i < dim; ++i)
                    if (i != axis) d1[size_t(i)] += w * fj.d1(i);
            if (order >= 2)
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j)
                        if (i != axis && j != axis) d2[size_t(i)][size_t(j)] += w * fj.d2(i, j);
        }
    }
    r.set_value(value);
    if (order >= 1) {
        Jet fb = f(p, order >= 2 ? 1 : 0);
        for (int i = 0; i < dim; ++i)
            if (i != axis) r.set_d1(i, d1[size_t(i)]);
        r.set_d1(axis, fb.value());
        if (order >= 2) {
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j)
                    if (i != axis && j != axis) r.set_d2(i, j, d2[size_t(i)][size_t(j)]);
            for (int i = 0; i < dim; ++i) r.set_d2(axis, i, fb.d1(i));
        }
    }
    return r;
}

}  // namespace quad
}  // namespace qkgeo
