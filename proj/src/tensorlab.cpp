#include "qkgeo/tensorlab.hpp"

#include <algorithm>
#include <cmath>

namespace qkgeo {
namespace tl {

namespace {

Jet jet_zero_like(const Jet& j) { return Jet::constant(0.0, j.dim(), j.order()); }

/// Antisymmetric component lookup on jet-valued storage.
Jet antisym_jet(const JetVec& comps, const std::vector<std::vector<int>>& combos,
                std::vector<int> idx, const Jet& zero) {
    const int sign = sort_sign(idx);
    if (sign == 0) return zero;
    for (size_t c = 0; c < combos.size(); ++c)
        if (combos[c] == idx) return sign > 0 ? comps[c] : -comps[c];
    return zero;
}

double minor_det(const Mat& frame, const std::vector<int>& rows, const std::vector<int>& cols) {
    const size_t p = rows.size();
    if (p == 1) return frame[size_t(rows[0])][size_t(cols[0])];
    double det = 0.0;
    std::vector<int> subcols;
    for (size_t k = 0; k < p; ++k) {
        subcols.clear();
        for (size_t j = 0; j < p; ++j)
            if (j != k) subcols.push_back(cols[j]);
        std::vector<int> subrows(rows.begin() + 1, rows.end());
        const double m = minor_det(frame, subrows, subcols);
        det += ((k % 2 == 0) ? 1.0 : -1.0) * frame[size_t(rows[0])][size_t(cols[k])] * m;
    }
    return det;
}

}  // namespace

const double kCurvatureNormConvention = 0.25;

JetMat metric_jets(const MetricField& g, const Point& p, int order) { return g.eval(p, order); }

JetMat jet_matrix_inverse(const JetMat& m) {
    Mat vals(m.size(), Vec(m.size()));
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < m.size(); ++j) vals[i][j] = m[i][j].value();
    const double det = mat_det(vals);
    if (std::fabs(det) < 1e-12) throw DegenerateMetricError(det);
    try {
        return gauss_inverse(m);
    } catch (const SingularMatrixError&) {
        throw DegenerateMetricError(det);
    }
}

JetTen3 christoffel_jets(const MetricField& g, const Point& p, int order) {
    const int n = g.chart().dim();
    JetMat gj = g.eval(p, order + 1);
    JetMat gtr(static_cast<size_t>(n), JetVec(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gtr[size_t(i)][size_t(j)] = gj[size_t(i)][size_t(j)].truncated(order);
    JetMat ginv = jet_matrix_inverse(gtr);

    // dg[l][i][j] = ∂_l g_ij at the working order
    std::vector<JetMat> dg(static_cast<size_t>(n), JetMat(static_cast<size_t>(n), JetVec(static_cast<size_t>(n))));
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dg[size_t(l)][size_t(i)][size_t(j)] = gj[size_t(i)][size_t(j)].partial(l);

    JetTen3 gam(static_cast<size_t>(n), JetMat(static_cast<size_t>(n), JetVec(static_cast<size_t>(n))));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet s = jet_zero_like(ginv[0][0]);
                for (int l = 0; l < n; ++l)
                    s += ginv[size_t(k)][size_t(l)] *
                         (dg[size_t(i)][size_t(l)][size_t(j)] + dg[size_t(j)][size_t(l)][size_t(i)] -
                          dg[size_t(l)][size_t(i)][size_t(j)]);
                gam[size_t(k)][size_t(i)][size_t(j)] = 0.5 * s;
            }
    return gam;
}

Ten3 christoffel(const MetricField& g, const Point& p) {
    JetTen3 gj = christoffel_jets(g, p, 0);
    const int n = g.chart().dim();
    Ten3 out = zeros3(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out[size_t(k)][size_t(i)][size_t(j)] = gj[size_t(k)][size_t(i)][size_t(j)].value();
    return out;
}

namespace {

/// R^l_{kij} as jets at the given order (g must be evaluable to order+2).
std::vector<JetTen3> riemann_jets(const MetricField& g, const Point& p, int order) {
    const int n = g.chart().dim();
    JetTen3 gam = christoffel_jets(g, p, order + 1);
    JetTen3 gtr(static_cast<size_t>(n), JetMat(static_cast<size_t>(n), JetVec(static_cast<size_t>(n))));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gtr[size_t(k)][size_t(i)][size_t(j)] = gam[size_t(k)][size_t(i)][size_t(j)].truncated(order);

    std::vector<JetTen3> R(static_cast<size_t>(n), JetTen3(static_cast<size_t>(n), JetMat(static_cast<size_t>(n), JetVec(static_cast<size_t>(n)))));
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Jet r = gam[size_t(l)][size_t(j)][size_t(k)].partial(i) -
                            gam[size_t(l)][size_t(i)][size_t(k)].partial(j);
                    for (int m = 0; m < n; ++m)
                        r += gtr[size_t(l)][size_t(i)][size_t(m)] * gtr[size_t(m)][size_t(j)][size_t(k)] -
                             gtr[size_t(l)][size_t(j)][size_t(m)] * gtr[size_t(m)][size_t(i)][size_t(k)];
                    R[size_t(l)][size_t(k)][size_t(i)][size_t(j)] = r;
                }
    return R;
}

}  // namespace

Ten4 riemann(const MetricField& g, const Point& p) {
    const int n = g.chart().dim();
    std::vector<JetTen3> Rj = riemann_jets(g, p, 0);
    Ten4 R = zeros4(n);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) R[size_t(l)][size_t(k)][size_t(i)][size_t(j)] = Rj[size_t(l)][size_t(k)][size_t(i)][size_t(j)].value();
    return R;
}

Ten4 riemann_lowered(const MetricField& g, const Point& p) {
    const int n = g.chart().dim();
    Ten4 Rup = riemann(g, p);
    Mat gv = g.values(p);
    Ten4 R = zeros4(n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l) s += gv[size_t(m)][size_t(l)] * Rup[size_t(l)][size_t(k)][size_t(i)][size_t(j)];
                    R[size_t(m)][size_t(k)][size_t(i)][size_t(j)] = s;
                }
    return R;
}

Mat ricci(const MetricField& g, const Point& p) {
    const int n = g.chart().dim();
    Ten4 R = riemann(g, p);
    Mat ric = zeros(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += R[size_t(i)][size_t(k)][size_t(i)][size_t(j)];
            ric[size_t(j)][size_t(k)] = s;
        }
    return ric;
}

double scalar_curvature(const MetricField& g, const Point& p) {
    const int n = g.chart().dim();
    Mat ric = ricci(g, p);
    Mat ginv = gauss_inverse(g.values(p));
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += ginv[size_t(i)][size_t(j)] * ric[size_t(i)][size_t(j)];
    return s;
}

double curvature_norm(const MetricField& g, const Point& p) {
    const int n = g.chart().dim();
    Ten4 Rlo = riemann_lowered(g, p);
    Mat ginv = gauss_inverse(g.values(p));
    // raise all four indices, then contract against the lowered tensor
    double total = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double up = 0.0;
                    for (int a2 = 0; a2 < n; ++a2)
                        for (int b2 = 0; b2 < n; ++b2)
                            for (int c2 = 0; c2 < n; ++c2)
                                for (int d2 = 0; d2 < n; ++d2)
                                    up += ginv[size_t(a)][size_t(a2)] * ginv[size_t(b)][size_t(b2)] *
                                          ginv[size_t(c)][size_t(c2)] * ginv[static_cast<size_t>(d)][size_t(d2)] *
                                          Rlo[size_t(a2)][size_t(b2)][size_t(c2)][size_t(d2)];
                    total += up * Rlo[size_t(a)][size_t(b)][size_t(c)][static_cast<size_t>(d)];
                }
    return kCurvatureNormConvention * total;
}

Ten5 nabla_riemann(const MetricField& g, const Point& p) {
    const int n = g.chart().dim();
    std::vector<JetTen3> Rj = riemann_jets(g, p, 1);
    Ten3 gam = christoffel(g, p);
    Ten4 R = zeros4(n);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) R[size_t(l)][size_t(k)][size_t(i)][size_t(j)] = Rj[size_t(l)][size_t(k)][size_t(i)][size_t(j)].value();

    Ten5 out(static_cast<size_t>(n), zeros4(n));
    for (int m = 0; m < n; ++m)
        for (int l = 0; l < n; ++l)
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double s = Rj[size_t(l)][size_t(k)][size_t(i)][size_t(j)].d1(m);
                        for (int q = 0; q < n; ++q) {
                            s += gam[size_t(l)][size_t(m)][size_t(q)] * R[size_t(q)][size_t(k)][size_t(i)][size_t(j)];
                            s -= gam[size_t(q)][size_t(m)][size_t(k)] * R[size_t(l)][size_t(q)][size_t(i)][size_t(j)];
                            s -= gam[size_t(q)][size_t(m)][size_t(i)] * R[size_t(l)][size_t(k)][size_t(q)][size_t(j)];
                            s -= gam[size_t(q)][size_t(m)][size_t(j)] * R[size_t(l)][size_t(k)][size_t(i)][size_t(q)];
                        }
                        out[size_t(m)][size_t(l)][size_t(k)][size_t(i)][size_t(j)] = s;
                    }
    return out;
}

JetMat covariant_derivative_vector_jets(const MetricField& g, const VectorField& V, const Point& p,
                                        int order) {
    const int n = g.chart().dim();
    JetTen3 gam = christoffel_jets(g, p, order);
    JetVec vj = V.eval(p, order + 1);
    JetMat out(static_cast<size_t>(n), JetVec(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Jet s = vj[size_t(i)].partial(j);
            for (int k = 0; k < n; ++k) s += gam[size_t(i)][size_t(j)][size_t(k)] * vj[size_t(k)].truncated(order);
            out[size_t(i)][size_t(j)] = s;
        }
    return out;
}

Mat covariant_derivative_vector(const MetricField& g, const VectorField& V, const Point& p) {
    JetMat jm = covariant_derivative_vector_jets(g, V, p, 0);
    const size_t n = jm.size();
    Mat out(n, Vec(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) out[i][j] = jm[i][j].value();
    return out;
}

Vec lie_bracket(const VectorField& V, const VectorField& W, const Point& p) {
    const int n = V.chart().dim();
    JetVec vj = V.eval(p, 1), wj = W.eval(p, 1);
    Vec out(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
            s += vj[size_t(k)].value() * wj[size_t(i)].d1(k) - wj[size_t(k)].value() * vj[size_t(i)].d1(k);
        out[size_t(i)] = s;
    }
    return out;
}

Mat lie_derivative_metric(const MetricField& g, const VectorField& V, const Point& p) {
    const int n = g.chart().dim();
    JetMat gj = g.eval(p, 1);
    JetVec vj = V.eval(p, 1);
    Mat out = zeros(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
                s += vj[size_t(k)].value() * gj[size_t(i)][size_t(j)].d1(k);
                s += gj[size_t(k)][size_t(j)].value() * vj[size_t(k)].d1(i);
                s += gj[size_t(i)][size_t(k)].value() * vj[size_t(k)].d1(j);
            }
            out[size_t(i)][size_t(j)] = s;
        }
    return out;
}

Mat lie_derivative_endo(const EndoField& J, const VectorField& V, const Point& p) {
    const int n = J.chart().dim();
    JetMat jj = J.eval(p, 1);
    JetVec vj = V.eval(p, 1);
    Mat out = zeros(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
                s += vj[size_t(k)].value() * jj[size_t(i)][size_t(j)].d1(k);
                s -= jj[size_t(k)][size_t(j)].value() * vj[size_t(i)].d1(k);
                s += jj[size_t(i)][size_t(k)].value() * vj[size_t(k)].d1(j);
            }
            out[size_t(i)][size_t(j)] = s;
        }
    return out;
}

PForm exterior_derivative(const PForm& w) {
    const int n = w.chart().dim();
    const int p = w.degree();
    const auto out_combos = index_combos(n, p + 1);
    const auto in_combos = index_combos(n, p);
    return PForm(w.chart(), p + 1, [w, out_combos, in_combos](const Point& pt, int order) {
        JetVec comps = w.eval(pt, order + 1);
        JetVec out;
        out.reserve(out_combos.size());
        for (const auto& c : out_combos) {
            Jet s = Jet::constant(0.0, int(pt.size()), order);
            for (size_t k = 0; k < c.size(); ++k) {
                std::vector<int> rest;
                for (size_t m = 0; m < c.size(); ++m)
                    if (m != k) rest.push_back(c[m]);
                // locate the sub-combination (already increasing)
                for (size_t ci = 0; ci < in_combos.size(); ++ci)
                    if (in_combos[ci] == rest) {
                        Jet term = comps[ci].partial(c[k]);
                        if (k % 2 == 0)
                            s += term;
                        else
                            s -= term;
                        break;
                    }
            }
            out.push_back(s);
        }
        return out;
    });
}

PForm wedge(const PForm& a, const PForm& b) {
    const int n = a.chart().dim();
    const int pa = a.degree(), pb = b.degree();
    const auto out_combos = index_combos(n, pa + pb);
    const auto a_combos = index_combos(n, pa);
    const auto b_combos = index_combos(n, pb);
    return PForm(a.chart(), pa + pb,
                 [a, b, out_combos, a_combos, b_combos, pa, pb](const Point& pt, int order) {
                     JetVec ca = a.eval(pt, order), cb = b.eval(pt, order);
                     const Jet zero = Jet::constant(0.0, int(pt.size()), order);
                     JetVec out;
                     out.reserve(out_combos.size());
                     for (const auto& c : out_combos) {
                         Jet s = zero;
                         const int total = pa + pb;
                         // choose pa of the positions for the first factor
                         for (unsigned mask = 0; mask < (1u << total); ++mask) {
                             if (__builtin_popcount(mask) != pa) continue;
                             std::vector<int> ia, ib;
                             int inversions = 0, seen_b = 0;
                             for (int q = 0; q < total; ++q) {
                                 if (mask & (1u << q)) {
                                     ia.push_back(c[size_t(q)]);
                                     inversions += seen_b;
                                 } else {
                                     ib.push_back(c[size_t(q)]);
                                     ++seen_b;
                                 }
                             }
                             Jet term = antisym_jet(ca, a_combos, ia, zero) *
                                        antisym_jet(cb, b_combos, ib, zero);
                             if (inversions % 2 == 0)
                                 s += term;
                             else
                                 s -= term;
                         }
                         out.push_back(s);
                     }
                     return out;
                 });
}

PForm interior_product(const VectorField& V, const PForm& w) {
    const int n = w.chart().dim();
    const int p = w.degree();
    if (p == 0) throw std::invalid_argument("interior product of a 0-form");
    const auto out_combos = index_combos(n, p - 1);
    const auto in_combos = index_combos(n, p);
    return PForm(w.chart(), p - 1, [V, w, out_combos, in_combos, n](const Point& pt, int order) {
        JetVec comps = w.eval(pt, order);
        JetVec vj = V.eval(pt, order);
        const Jet zero = Jet::constant(0.0, int(pt.size()), order);
        JetVec out;
        out.reserve(out_combos.size());
        for (const auto& c : out_combos) {
            Jet s = zero;
            for (int i = 0; i < n; ++i) {
                std::vector<int> idx;
                idx.push_back(i);
                idx.insert(idx.end(), c.begin(), c.end());
                s += vj[size_t(i)] * antisym_jet(comps, in_combos, idx, zero);
            }
            out.push_back(s);
        }
        return out;
    });
}

PForm oneform_to_pform(const OneForm& a) {
    return PForm(a.chart(), 1, [a](const Point& pt, int order) { return a.eval(pt, order); });
}

PForm scalar_d(const ScalarField& f) {
    const int n = f.chart().dim();
    return PForm(f.chart(), 1, [f, n](const Point& pt, int order) {
        Jet j = f.eval(pt, order + 1);
        JetVec out;
        out.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) out.push_back(j.partial(i));
        return out;
    });
}

PForm pform_add(const PForm& a, const PForm& b) {
    return PForm(a.chart(), a.degree(), [a, b](const Point& pt, int order) {
        JetVec ca = a.eval(pt, order), cb = b.eval(pt, order);
        for (size_t i = 0; i < ca.size(); ++i) ca[i] += cb[i];
        return ca;
    });
}

PForm pform_sub(const PForm& a, const PForm& b) {
    return PForm(a.chart(), a.degree(), [a, b](const Point& pt, int order) {
        JetVec ca = a.eval(pt, order), cb = b.eval(pt, order);
        for (size_t i = 0; i < ca.size(); ++i) ca[i] -= cb[i];
        return ca;
    });
}

PForm pform_scale(double s, const PForm& a) {
    return PForm(a.chart(), a.degree(), [s, a](const Point& pt, int order) {
        JetVec ca = a.eval(pt, order);
        for (auto& c : ca) c *= s;
        return ca;
    });
}

PForm pform_scale_field(const ScalarField& s, const PForm& a) {
    return PForm(a.chart(), a.degree(), [s, a](const Point& pt, int order) {
        Jet sj = s.eval(pt, order);
        JetVec ca = a.eval(pt, order);
        for (auto& c : ca) c = sj * c;
        return ca;
    });
}

Ten3 nijenhuis(const EndoField& J, const Point& p) {
    const int n = J.chart().dim();
    JetMat jj = J.eval(p, 1);
    // precondition: almost complex structure
    double dev = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = (i == j) ? 1.0 : 0.0;
            for (int k = 0; k < n; ++k) s += jj[size_t(i)][size_t(k)].value() * jj[size_t(k)][size_t(j)].value();
            dev = std::max(dev, std::fabs(s));
        }
    if (dev > 1e-6) throw AlmostComplexError(dev);

    Ten3 N = zeros3(n);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) {
                    s += jj[size_t(k)][size_t(a)].value() * jj[size_t(i)][size_t(b)].d1(k);
                    s -= jj[size_t(k)][size_t(b)].value() * jj[size_t(i)][size_t(a)].d1(k);
                    s += jj[size_t(i)][size_t(k)].value() * jj[size_t(k)][size_t(a)].d1(b);
                    s -= jj[size_t(i)][size_t(k)].value() * jj[size_t(k)][size_t(b)].d1(a);
                }
                N[size_t(i)][size_t(a)][size_t(b)] = s;
            }
    return N;
}

PForm fundamental_form(const MetricField& g, const EndoField& J) {
    const int n = g.chart().dim();
    const auto combos = index_combos(n, 2);
    return PForm(g.chart(), 2, [g, J, combos, n](const Point& pt, int order) {
        JetMat gj = g.eval(pt, order), jj = J.eval(pt, order);
        JetVec out;
        out.reserve(combos.size());
        for (const auto& c : combos) {
            Jet s = Jet::constant(0.0, n, order);
            for (int k = 0; k < n; ++k) s += jj[size_t(k)][size_t(c[0])] * gj[size_t(k)][size_t(c[1])];
            out.push_back(s);
        }
        return out;
    });
}

OneForm lee_form(const MetricField& g, const EndoField& J) {
    const int n = g.chart().dim();
    if (n != 4) throw UnsupportedDimensionError("Lee form solve requires dimension 4");
    PForm sigma = fundamental_form(g, J);
    PForm dsigma = exterior_derivative(sigma);
    const auto combos2 = index_combos(4, 2);
    const auto combos3 = index_combos(4, 3);
    return OneForm(g.chart(), [sigma, dsigma, combos2, combos3](const Point& pt, int order) {
        JetVec sj = sigma.eval(pt, order);
        JetVec dsj = dsigma.eval(pt, order);
        const Jet zero = Jet::constant(0.0, 4, order);
        // (θ∧σ)_{abc} = θ_a σ_bc − θ_b σ_ac + θ_c σ_ab : one row per 3-combo
        JetMat M(4, JetVec(4, zero));
        for (size_t r = 0; r < combos3.size(); ++r) {
            const int a = combos3[r][0], b = combos3[r][1], c = combos3[r][2];
            M[r][size_t(a)] += antisym_jet(sj, combos2, {b, c}, zero);
            M[r][size_t(b)] -= antisym_jet(sj, combos2, {a, c}, zero);
            M[r][size_t(c)] += antisym_jet(sj, combos2, {a, b}, zero);
        }
        try {
            return gauss_solve(M, dsj);
        } catch (const SingularMatrixError& e) {
            throw DegenerateMetricError(e.pivot_magnitude);
        }
    });
}

Mat orthonormal_frame(const MetricField& g, const Point& p) {
    const int n = g.chart().dim();
    Mat gv = g.values(p);
    auto ip = [&](const Vec& u, const Vec& v) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += gv[size_t(i)][size_t(j)] * u[size_t(i)] * v[size_t(j)];
        return s;
    };
    Mat frame;
    frame.reserve(static_cast<size_t>(n));
    for (int a = 0; a < n; ++a) {
        Vec v(static_cast<size_t>(n), 0.0);
        v[size_t(a)] = 1.0;
        for (int b = 0; b < a; ++b) {
            const double nb = ip(frame[size_t(b)], frame[size_t(b)]);
            const double coef = ip(v, frame[size_t(b)]) / nb;
            for (int i = 0; i < n; ++i) v[size_t(i)] -= coef * frame[size_t(b)][size_t(i)];
        }
        const double nv = ip(v, v);
        if (std::fabs(nv) < 1e-12) throw DegenerateMetricError(nv);
        const double inv = 1.0 / std::sqrt(std::fabs(nv));
        for (int i = 0; i < n; ++i) v[size_t(i)] *= inv;
        frame.push_back(std::move(v));
    }
    return frame;
}

Mat dual_coframe(const Mat& g_values, const Mat& frame) {
    const int n = static_cast<int>(frame.size());
    Mat co = zeros(n, n);
    for (int a = 0; a < n; ++a) {
        Vec ge(static_cast<size_t>(n), 0.0);
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += g_values[size_t(i)][size_t(j)] * frame[size_t(a)][size_t(j)];
            ge[size_t(i)] = s;
            norm += s * frame[size_t(a)][size_t(i)];
        }
        const double eps = norm >= 0 ? 1.0 : -1.0;  // frame vectors have |g(e,e)| = 1
        for (int i = 0; i < n; ++i) co[size_t(a)][size_t(i)] = eps * ge[size_t(i)];
    }
    return co;
}

double frame_max_vector(const Vec& v, const Mat& coframe) {
    double mx = 0.0;
    for (const auto& th : coframe) {
        double s = 0.0;
        for (size_t i = 0; i < v.size(); ++i) s += th[i] * v[i];
        mx = std::max(mx, std::fabs(s));
    }
    return mx;
}

double frame_max_oneform(const Vec& a, const Mat& frame) {
    double mx = 0.0;
    for (const auto& e : frame) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * e[i];
        mx = std::max(mx, std::fabs(s));
    }
    return mx;
}

double frame_max_sym2(const Mat& s, const Mat& frame) {
    const size_t n = frame.size();
    double mx = 0.0;
    for (size_t a = 0; a < n; ++a)
        for (size_t b = 0; b < n; ++b) {
            double v = 0.0;
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) v += frame[a][i] * s[i][j] * frame[b][j];
            mx = std::max(mx, std::fabs(v));
        }
    return mx;
}

double frame_max_endo(const Mat& a, const Mat& frame, const Mat& coframe) {
    const size_t n = frame.size();
    double mx = 0.0;
    for (size_t p = 0; p < n; ++p)
        for (size_t q = 0; q < n; ++q) {
            double v = 0.0;
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) v += coframe[p][i] * a[i][j] * frame[q][j];
            mx = std::max(mx, std::fabs(v));
        }
    return mx;
}

double frame_max_ten12(const Ten3& t, const Mat& frame, const Mat& coframe) {
    const size_t n = frame.size();
    double mx = 0.0;
    for (size_t p = 0; p < n; ++p)
        for (size_t a = 0; a < n; ++a)
            for (size_t b = 0; b < n; ++b) {
                double v = 0.0;
                for (size_t i = 0; i < n; ++i)
                    for (size_t j = 0; j < n; ++j)
                        for (size_t k = 0; k < n; ++k)
                            v += coframe[p][i] * t[i][j][k] * frame[a][j] * frame[b][k];
                mx = std::max(mx, std::fabs(v));
            }
    return mx;
}

double frame_max_form(const Vec& comps, int degree, const Mat& frame, int dim) {
    if (degree == 0) return comps.empty() ? 0.0 : std::fabs(comps[0]);
    const auto combos = index_combos(dim, degree);
    if (combos.empty()) return 0.0;
    double mx = 0.0;
    for (const auto& A : combos) {
        double v = 0.0;
        for (size_t c = 0; c < combos.size(); ++c) {
            // determinant of the frame minor rows A, columns combos[c]
            v += comps[c] * minor_det(frame, A, combos[c]);
        }
        mx = std::max(mx, std::fabs(v));
    }
    return mx;
}

}  // namespace tl
}  // namespace qkgeo
