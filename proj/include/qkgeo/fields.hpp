#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qkgeo/chart.hpp"
#include "qkgeo/jet.hpp"
#include "qkgeo/linalg.hpp"

namespace qkgeo {

struct DegenerateMetricError : std::runtime_error {
    explicit DegenerateMetricError(double det)
        : std::runtime_error("metric is degenerate at the requested point"), determinant(det) {}
    double determinant;
};

struct AlmostComplexError : std::runtime_error {
    explicit AlmostComplexError(double dev)
        : std::runtime_error("endomorphism violates J^2 = -Id beyond tolerance"), deviation(dev) {}
    double deviation;
};

struct UnsupportedDimensionError : std::runtime_error {
    explicit UnsupportedDimensionError(const std::string& what) : std::runtime_error(what) {}
};

/// A scalar field evaluable through jets: the evaluator receives the point and
/// the requested derivative order. Derived fields may internally evaluate
/// their ingredients at higher order than requested.
class ScalarField {
  public:
    using Eval = std::function<Jet(const Point&, int)>;

    ScalarField() = default;
    ScalarField(Chart chart, Eval eval) : chart_(std::move(chart)), eval_(std::move(eval)) {}

    const Chart& chart() const { return chart_; }
    Jet eval(const Point& p, int order) const {
        chart_.require(p);
        return eval_(p, order);
    }
    double value(const Point& p) const { return eval(p, 0).value(); }

  private:
    Chart chart_;
    Eval eval_;
};

/// Common machinery for fields with a component array (vectors, one-forms).
class ComponentField {
  public:
    using Eval = std::function<JetVec(const Point&, int)>;

    ComponentField() = default;
    ComponentField(Chart chart, Eval eval) : chart_(std::move(chart)), eval_(std::move(eval)) {}

    const Chart& chart() const { return chart_; }
    JetVec eval(const Point& p, int order) const {
        chart_.require(p);
        return eval_(p, order);
    }
    Vec values(const Point& p) const {
        JetVec js = eval(p, 0);
        Vec v(js.size());
        for (size_t i = 0; i < js.size(); ++i) v[i] = js[i].value();
        return v;
    }

  private:
    Chart chart_;
    Eval eval_;
};

class VectorField : public ComponentField {
  public:
    using ComponentField::ComponentField;
};

class OneForm : public ComponentField {
  public:
    using ComponentField::ComponentField;
};

/// Matrix-valued fields; MetricField components are g_{ij} (symmetric),
/// EndoField components are J^i_j (first index contravariant).
class MatrixField {
  public:
    using Eval = std::function<JetMat(const Point&, int)>;

    MatrixField() = default;
    MatrixField(Chart chart, Eval eval) : chart_(std::move(chart)), eval_(std::move(eval)) {}

    const Chart& chart() const { return chart_; }
    JetMat eval(const Point& p, int order) const {
        chart_.require(p);
        return eval_(p, order);
    }
    Mat values(const Point& p) const {
        JetMat js = eval(p, 0);
        Mat m(js.size(), Vec(js.size()));
        for (size_t i = 0; i < js.size(); ++i)
            for (size_t j = 0; j < js.size(); ++j) m[i][j] = js[i][j].value();
        return m;
    }

  private:
    Chart chart_;
    Eval eval_;
};

class MetricField : public MatrixField {
  public:
    using MatrixField::MatrixField;
};

class EndoField : public MatrixField {
  public:
    using MatrixField::MatrixField;
};

/// Strictly increasing index tuples of length p in {0..dim-1}, lex order.
inline std::vector<std::vector<int>> index_combos(int dim, int p) {
    std::vector<std::vector<int>> out;
    if (p < 0 || p > dim) return out;
    if (p == 0) {
        out.push_back({});
        return out;
    }
    std::vector<int> c(static_cast<size_t>(p), 0);
    for (int i = 0; i < p; ++i) c[size_t(i)] = i;
    while (true) {
        out.push_back(c);
        int i = p - 1;
        while (i >= 0 && c[size_t(i)] == dim - p + i) --i;
        if (i < 0) break;
        ++c[size_t(i)];
        for (int j = i + 1; j < p; ++j) c[size_t(j)] = c[size_t(j - 1)] + 1;
    }
    return out;
}

/// Differential p-form with antisymmetric storage: the evaluator returns one
/// jet per strictly increasing index tuple, in the order of index_combos().
class PForm {
  public:
    using Eval = std::function<JetVec(const Point&, int)>;

    PForm() = default;
    PForm(Chart chart, int degree, Eval eval)
        : chart_(std::move(chart)), degree_(degree), eval_(std::move(eval)) {
        if (degree < 0) throw std::invalid_argument("negative form degree");
    }

    const Chart& chart() const { return chart_; }
    int degree() const { return degree_; }
    std::vector<std::vector<int>> combos() const { return index_combos(chart_.dim(), degree_); }

    JetVec eval(const Point& p, int order) const {
        chart_.require(p);
        if (degree_ > chart_.dim()) return {};
        return eval_(p, order);
    }
    Vec values(const Point& p) const {
        JetVec js = eval(p, 0);
        Vec v(js.size());
        for (size_t i = 0; i < js.size(); ++i) v[i] = js[i].value();
        return v;
    }

  private:
    Chart chart_;
    int degree_ = 0;
    Eval eval_;
};

/// Component of an antisymmetric value array (indexed by increasing tuples)
/// at an arbitrary multi-index, with the permutation sign applied.
double antisym_component(const Vec& comps, const std::vector<std::vector<int>>& combos,
                         std::vector<int> idx);

/// Sign of the permutation sorting idx ascending; 0 if any repeat.
inline int sort_sign(std::vector<int>& idx) {
    int sign = 1;
    for (size_t i = 0; i + 1 < idx.size(); ++i)
        for (size_t j = 0; j + 1 < idx.size() - i; ++j)
            if (idx[j] > idx[j + 1]) {
                std::swap(idx[j], idx[j + 1]);
                sign = -sign;
            }
    for (size_t i = 0; i + 1 < idx.size(); ++i)
        if (idx[i] == idx[i + 1]) return 0;
    return sign;
}

inline double antisym_component(const Vec& comps, const std::vector<std::vector<int>>& combos,
                                std::vector<int> idx) {
    const int sign = sort_sign(idx);
    if (sign == 0) return 0.0;
    for (size_t c = 0; c < combos.size(); ++c)
        if (combos[c] == idx) return sign * comps[c];
    throw std::logic_error("multi-index not found among combinations");
}

}  // namespace qkgeo
