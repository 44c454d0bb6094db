#pragma once

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkgeo {

/// Thrown when an operation needs higher derivatives than a Jet carries.
struct JetOrderError : std::runtime_error {
    explicit JetOrderError(const std::string& what) : std::runtime_error(what) {}
};

/// Truncated Taylor expansion of a scalar at a point: value plus partial
/// derivatives up to `order` (at most 3) in `dim` variables. Arithmetic
/// propagates derivatives exactly, so curvature-level quantities come out
/// to machine precision instead of finite-difference noise.
class Jet {
  public:
    Jet() = default;

    static Jet constant(double v, int dim, int order) {
        Jet j(dim, order);
        j.v = v;
        return j;
    }

    static Jet variable(double v, int index, int dim, int order) {
        Jet j(dim, order);
        j.v = v;
        if (order >= 1) j.g[static_cast<size_t>(index)] = 1.0;
        return j;
    }

    int dim() const { return dim_; }
    int order() const { return order_; }
    double value() const { return v; }

    double d1(int i) const { return g[idx1(i)]; }
    double d2(int i, int j) const { return h[idx2(i, j)]; }
    double d3(int i, int j, int k) const { return t[idx3(i, j, k)]; }

    Jet& operator+=(const Jet& o) {
        check(o);
        v += o.v;
        for (size_t i = 0; i < g.size(); ++i) g[i] += o.g[i];
        for (size_t i = 0; i < h.size(); ++i) h[i] += o.h[i];
        for (size_t i = 0; i < t.size(); ++i) t[i] += o.t[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        check(o);
        v -= o.v;
        for (size_t i = 0; i < g.size(); ++i) g[i] -= o.g[i];
        for (size_t i = 0; i < h.size(); ++i) h[i] -= o.h[i];
        for (size_t i = 0; i < t.size(); ++i) t[i] -= o.t[i];
        return *this;
    }
    Jet& operator*=(double s) {
        v *= s;
        for (double& x : g) x *= s;
        for (double& x : h) x *= s;
        for (double& x : t) x *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(Jet a) { return a *= -1.0; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator+(Jet a, double s) {
        a.v += s;
        return a;
    }
    friend Jet operator+(double s, Jet a) {
        a.v += s;
        return a;
    }
    friend Jet operator-(Jet a, double s) {
        a.v -= s;
        return a;
    }
    friend Jet operator-(double s, const Jet& a) { return -a + s; }
    friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }

    // Leibniz rule applied term by term up to the stored order.
    friend Jet operator*(const Jet& a, const Jet& b) {
        a.check(b);
        const int d = a.dim_;
        Jet r(d, a.order_);
        r.v = a.v * b.v;
        if (a.order_ >= 1) {
            for (int i = 0; i < d; ++i) r.g[size_t(i)] = a.g[size_t(i)] * b.v + a.v * b.g[size_t(i)];
        }
        if (a.order_ >= 2) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    r.h[size_t(i * d + j)] = a.h[size_t(i * d + j)] * b.v +
                                             a.g[size_t(i)] * b.g[size_t(j)] +
                                             a.g[size_t(j)] * b.g[size_t(i)] +
                                             a.v * b.h[size_t(i * d + j)];
        }
        if (a.order_ >= 3) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k) {
                        const size_t ijk = size_t((i * d + j) * d + k);
                        r.t[ijk] = a.t[ijk] * b.v + a.v * b.t[ijk] +
                                   a.h[size_t(i * d + j)] * b.g[size_t(k)] +
                                   a.h[size_t(i * d + k)] * b.g[size_t(j)] +
                                   a.h[size_t(j * d + k)] * b.g[size_t(i)] +
                                   a.g[size_t(i)] * b.h[size_t(j * d + k)] +
                                   a.g[size_t(j)] * b.h[size_t(i * d + k)] +
                                   a.g[size_t(k)] * b.h[size_t(i * d + j)];
                    }
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
    friend Jet operator/(double s, const Jet& b) { return recip(b) * s; }

    /// Univariate chain rule: composes f (given by derivatives at u.value())
    /// with the jet u. Unused higher derivatives may be passed as 0.
    friend Jet compose(const Jet& u, double f0, double f1, double f2, double f3) {
        const int d = u.dim_;
        Jet r(d, u.order_);
        r.v = f0;
        if (u.order_ >= 1) {
            for (int i = 0; i < d; ++i) r.g[size_t(i)] = f1 * u.g[size_t(i)];
        }
        if (u.order_ >= 2) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    r.h[size_t(i * d + j)] =
                        f2 * u.g[size_t(i)] * u.g[size_t(j)] + f1 * u.h[size_t(i * d + j)];
        }
        if (u.order_ >= 3) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k) {
                        const size_t ijk = size_t((i * d + j) * d + k);
                        r.t[ijk] = f3 * u.g[size_t(i)] * u.g[size_t(j)] * u.g[size_t(k)] +
                                   f2 * (u.h[size_t(i * d + j)] * u.g[size_t(k)] +
                                         u.h[size_t(i * d + k)] * u.g[size_t(j)] +
                                         u.h[size_t(j * d + k)] * u.g[size_t(i)]) +
                                   f1 * u.t[ijk];
                    }
        }
        return r;
    }

    friend Jet recip(const Jet& u) {
        const double x = u.v;
        return compose(u, 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x), -6.0 / (x * x * x * x));
    }
    friend Jet exp(const Jet& u) {
        const double e = std::exp(u.v);
        return compose(u, e, e, e, e);
    }
    friend Jet log(const Jet& u) {
        const double x = u.v;
        return compose(u, std::log(x), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x));
    }
    friend Jet sqrt(const Jet& u) {
        const double s = std::sqrt(u.v);
        return compose(u, s, 0.5 / s, -0.25 / (s * u.v), 0.375 / (s * u.v * u.v));
    }
    friend Jet pow(const Jet& u, double p) {
        const double x = u.v;
        return compose(u, std::pow(x, p), p * std::pow(x, p - 1),
                       p * (p - 1) * std::pow(x, p - 2), p * (p - 1) * (p - 2) * std::pow(x, p - 3));
    }
    friend Jet sin(const Jet& u) {
        const double s = std::sin(u.v), c = std::cos(u.v);
        return compose(u, s, c, -s, -c);
    }
    friend Jet cos(const Jet& u) {
        const double s = std::sin(u.v), c = std::cos(u.v);
        return compose(u, c, -s, -c, s);
    }
    friend Jet abs(const Jet& u) { return u.v < 0 ? -u : u; }

    void set_value(double x) { v = x; }
    void set_d1(int i, double x) { g[idx1(i)] = x; }
    void set_d2(int i, int j, double x) { h[idx2(i, j)] = x; h[idx2(j, i)] = x; }
    void set_d3(int i, int j, int k, double x) {
        t[idx3(i, j, k)] = x;
        t[idx3(i, k, j)] = x;
        t[idx3(j, i, k)] = x;
        t[idx3(j, k, i)] = x;
        t[idx3(k, i, j)] = x;
        t[idx3(k, j, i)] = x;
    }

    /// The jet of ∂_i(this), one order lower.
    Jet partial(int i) const {
        if (order_ < 1) throw JetOrderError("partial() needs order >= 1");
        Jet r(dim_, order_ - 1);
        r.v = d1(i);
        if (order_ >= 2)
            for (int j = 0; j < dim_; ++j) r.g[size_t(j)] = d2(i, j);
        if (order_ >= 3)
            for (int j = 0; j < dim_; ++j)
                for (int k = 0; k < dim_; ++k) r.h[size_t(j * dim_ + k)] = d3(i, j, k);
        return r;
    }

    /// Lowers the carried order (drops the unused derivative blocks).
    Jet truncated(int new_order) const {
        if (new_order > order_) throw JetOrderError("cannot raise jet order by truncation");
        Jet r(dim_, new_order);
        r.v = v;
        if (new_order >= 1) std::copy(g.begin(), g.end(), r.g.begin());
        if (new_order >= 2) std::copy(h.begin(), h.end(), r.h.begin());
        if (new_order >= 3) std::copy(t.begin(), t.end(), r.t.begin());
        return r;
    }

  private:
    Jet(int dim, int order) : dim_(dim), order_(order) {
        assert(dim >= 1 && order >= 0 && order <= 3);
        if (order >= 1) g.assign(size_t(dim), 0.0);
        if (order >= 2) h.assign(size_t(dim) * size_t(dim), 0.0);
        if (order >= 3) t.assign(size_t(dim) * size_t(dim) * size_t(dim), 0.0);
    }

    void check(const Jet& o) const {
        if (dim_ != o.dim_ || order_ != o.order_)
            throw JetOrderError("jet dim/order mismatch in arithmetic");
    }
    size_t idx1(int i) const {
        if (order_ < 1) throw JetOrderError("jet carries no first derivatives");
        return size_t(i);
    }
    size_t idx2(int i, int j) const {
        if (order_ < 2) throw JetOrderError("jet carries no second derivatives");
        return size_t(i * dim_ + j);
    }
    size_t idx3(int i, int j, int k) const {
        if (order_ < 3) throw JetOrderError("jet carries no third derivatives");
        return size_t((i * dim_ + j) * dim_ + k);
    }

    int dim_ = 0;
    int order_ = 0;
    double v = 0.0;
    std::vector<double> g, h, t;
};

using Point = std::vector<double>;
using JetPoint = std::vector<Jet>;

/// Coordinate jets at p: the i-th entry is the i-th coordinate function.
inline JetPoint seed_point(const Point& p, int order) {
    JetPoint jp;
    jp.reserve(p.size());
    const int d = static_cast<int>(p.size());
    for (int i = 0; i < d; ++i) jp.push_back(Jet::variable(p[size_t(i)], i, d, order));
    return jp;
}

}  // namespace qkgeo
