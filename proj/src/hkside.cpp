#include "qkgeo/hkside.hpp"

#include <algorithm>
#include <cmath>

#include "qkgeo/quadrature.hpp"

namespace qkgeo {

namespace {

Jet jzero(const Point& p, int order) { return Jet::constant(0.0, int(p.size()), order); }

/// Rescale a jet's derivative slots per axis (chain rule for a diagonal
/// linear coordinate change x_i -> f_i x_i).
Jet scale_axes(const Jet& j, const Vec& f) {
    Jet r = j;
    const int d = j.dim();
    if (j.order() >= 1)
        for (int i = 0; i < d; ++i) r.set_d1(i, j.d1(i) * f[size_t(i)]);
    if (j.order() >= 2)
        for (int i = 0; i < d; ++i)
            for (int k = i; k < d; ++k) r.set_d2(i, k, j.d2(i, k) * f[size_t(i)] * f[size_t(k)]);
    if (j.order() >= 3)
        for (int i = 0; i < d; ++i)
            for (int k = i; k < d; ++k)
                for (int l = k; l < d; ++l)
                    r.set_d3(i, k, l, j.d3(i, k, l) * f[size_t(i)] * f[size_t(k)] * f[size_t(l)]);
    return r;
}

}  // namespace

// --- Toda solutions ----------------------------------------------------------

ScalarField TodaSolution::du_field(int axis) const {
    if (du) return (*du)[size_t(axis)];
    ScalarField uf = u;
    return ScalarField(chart, [uf, axis](const Point& p, int order) {
        return uf.eval(p, order + 1).partial(axis);
    });
}

double toda_residual(const TodaSolution& sol, const Point& p) {
    Jet uj = sol.u.eval(p, 2);
    const double eu = std::exp(uj.value());
    const double ur = uj.d1(0);
    return uj.d2(1, 1) + uj.d2(2, 2) + 2.0 * eu * (uj.d2(0, 0) + ur * ur);
}

ScalarField toda_residual_field(const TodaSolution& sol) {
    TodaSolution s = sol;
    return ScalarField(sol.chart, [s](const Point& p, int order) {
        if (order > 0) throw JetOrderError("toda residual is value-only");
        return Jet::constant(toda_residual(s, p), int(p.size()), 0);
    });
}

TodaSolution make_toda_solution_unchecked(Chart chart, ScalarField u,
                                          std::optional<std::array<ScalarField, 3>> du, double K) {
    TodaSolution sol;
    sol.chart = std::move(chart);
    sol.u = std::move(u);
    sol.du = std::move(du);
    sol.K = K;
    return sol;
}

TodaSolution make_toda_solution(Chart chart, ScalarField u,
                                std::optional<std::array<ScalarField, 3>> du, double K) {
    TodaSolution sol = make_toda_solution_unchecked(std::move(chart), std::move(u), std::move(du), K);
    double worst = 0.0;
    for (const Point& p : sol.chart.sample(40, 3)) {
        worst = std::max(worst, std::fabs(toda_residual(sol, p)));
        if (sol.du) {
            Jet uj = sol.u.eval(p, 1);
            for (int a = 0; a < 3; ++a)
                worst = std::max(worst, std::fabs((*sol.du)[size_t(a)].value(p) - uj.d1(a)));
        }
    }
    if (worst > 1e-8) throw InvalidTodaSolutionError(worst);
    return sol;
}

std::pair<double, double> family_rho_window(double a, double b, double c, double K,
                                            bool require_sign_rule) {
    const double lo_scan = 0.02, hi_scan = 6.0, step = 0.002, floor = 0.04;
    auto ok = [&](double r) {
        const double Q = a * r * r + b * r + c;
        const double B = b * r + 2.0 * c;
        if (r < floor || Q < floor || std::fabs(B) < floor) return false;
        if ((a != 0.0 || b != 0.0) && std::fabs(2.0 * a * r + b) < floor) return false;
        if (require_sign_rule && K * B >= -1e-9) return false;
        return true;
    };
    double best_lo = 0.0, best_hi = 0.0, run_lo = 0.0;
    bool in_run = false;
    for (double r = lo_scan; r <= hi_scan + 0.5 * step; r += step) {
        if (ok(r)) {
            if (!in_run) {
                run_lo = r;
                in_run = true;
            }
            if (r - run_lo > best_hi - best_lo) {
                best_lo = run_lo;
                best_hi = r;
            }
        } else {
            in_run = false;
        }
    }
    const double len = best_hi - best_lo;
    if (len < 0.05)
        throw std::invalid_argument("no admissible rho window for the given family parameters");
    return {best_lo + 0.12 * len, best_hi - 0.12 * len};
}

TodaSolution separable_toda(double a, double b, double c, double K) {
    auto window = family_rho_window(a, b, c, K, false);
    double xy_half = 0.75;
    if (a < 0) xy_half = std::min(0.75, 0.6 * std::sqrt(1.0 / (-a)));
    Chart::Box box = {
        {window.first, window.second}, {-xy_half, xy_half}, {-xy_half, xy_half}, {-1.0, 1.0}};
    auto pred = [a, b, c](const Point& p, double m) {
        const double r = p[0], x = p[1], y = p[2];
        const double Q = a * r * r + b * r + c;
        const double W = 1.0 + 0.5 * a * (x * x + y * y);
        if (r < m || Q < m || W < m) return false;
        if ((a != 0.0 || b != 0.0) && std::fabs(2.0 * a * r + b) < m) return false;
        return true;
    };
    Chart chart({"rho", "x", "y", "t"}, pred, box);
    return separable_toda_on(chart, a, b, c, K);
}

TodaSolution separable_toda_on(const Chart& chart, double a, double b, double c, double K) {
    ScalarField u(chart, [a, b, c](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        Jet Q = a * (z[0] * z[0]) + b * z[0] + c;
        Jet W = 1.0 + 0.5 * a * (z[1] * z[1] + z[2] * z[2]);
        return log(Q) - 2.0 * log(W);
    });
    ScalarField ur(chart, [a, b, c](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        Jet Q = a * (z[0] * z[0]) + b * z[0] + c;
        return (2.0 * a * z[0] + b) / Q;
    });
    ScalarField ux(chart, [a](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        Jet W = 1.0 + 0.5 * a * (z[1] * z[1] + z[2] * z[2]);
        return (-2.0 * a) * z[1] / W;
    });
    ScalarField uy(chart, [a](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        Jet W = 1.0 + 0.5 * a * (z[1] * z[1] + z[2] * z[2]);
        return (-2.0 * a) * z[2] / W;
    });
    return make_toda_solution(chart, u, std::array<ScalarField, 3>{ur, ux, uy}, K);
}

TodaSolution constant_toda(double c0, double K) { return separable_toda(0.0, 0.0, c0, K); }

TodaSolution perturbed_separable_toda(double a, double b, double c, double K, double eps) {
    TodaSolution base = separable_toda(a, b, c, K);
    ScalarField u0 = base.u;
    ScalarField u(base.chart, [u0, eps](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        return u0.eval(p, order) + eps * (z[0] * z[1]);
    });
    std::array<ScalarField, 3> du = *base.du;
    ScalarField ur0 = du[0], ux0 = du[1];
    du[0] = ScalarField(base.chart, [ur0, eps](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        return ur0.eval(p, order) + eps * z[1];
    });
    du[1] = ScalarField(base.chart, [ux0, eps](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        return ux0.eval(p, order) + eps * z[0];
    });
    return make_toda_solution_unchecked(base.chart, u, du, K);
}

TodaSolution gauge_scaled(const TodaSolution& sol, double s) {
    if (s == 0.0) throw std::invalid_argument("gauge scale must be nonzero");
    Chart::Box box = sol.chart.sample_box();
    for (int i : {1, 2}) {
        double lo = box[size_t(i)].first / s, hi = box[size_t(i)].second / s;
        box[size_t(i)] = {std::min(lo, hi), std::max(lo, hi)};
    }
    Chart base_chart = sol.chart;
    auto pred = [base_chart, s](const Point& p, double m) {
        Point q = p;
        q[1] *= s;
        q[2] *= s;
        return base_chart.contains(q, m);
    };
    Chart chart(sol.chart.coord_names(), pred, box);
    const double shift = 2.0 * std::log(std::fabs(s));
    const Vec factors = {1.0, s, s, 1.0};
    ScalarField u0 = sol.u;
    ScalarField u(chart, [u0, s, shift, factors](const Point& p, int order) {
        Point q = p;
        q[1] *= s;
        q[2] *= s;
        Jet j = scale_axes(u0.eval(q, order), factors);
        return j + shift;
    });
    std::optional<std::array<ScalarField, 3>> du;
    if (sol.du) {
        std::array<ScalarField, 3> d = *sol.du;
        std::array<ScalarField, 3> out;
        for (int a = 0; a < 3; ++a) {
            ScalarField da = d[size_t(a)];
            const double extra = (a == 0) ? 1.0 : s;  // chain-rule factor of the x,y scaling
            out[size_t(a)] = ScalarField(chart, [da, s, extra, factors](const Point& p, int order) {
                Point q = p;
                q[1] *= s;
                q[2] *= s;
                return scale_axes(da.eval(q, order), factors) * extra;
            });
        }
        du = out;
    }
    return make_toda_solution_unchecked(chart, u, du, sol.K);
}

// --- Boyer-Finley ansatz ----------------------------------------------------

MetricField boyer_finley_metric(const TodaSolution& sol) {
    ScalarField u = sol.u, ur = sol.du_field(0), ux = sol.du_field(1), uy = sol.du_field(2);
    const double K = sol.K;
    return MetricField(sol.chart, [u, ur, ux, uy, K](const Point& p, int order) {
        const int n = int(p.size());
        Jet urj = ur.eval(p, order);
        if (std::fabs(urj.value()) < 1e-9) throw DegenerateMetricError(0.0);
        Jet eu = exp(u.eval(p, order));
        Jet A = K * urj;                 // K du/drho
        Jet C = (4.0 * K) * recip(urj);  // the eta^2 coefficient
        Jet ex = -0.5 * uy.eval(p, order);
        Jet ey = 0.5 * ux.eval(p, order);
        // eta = dt + ex dx + ey dy
        JetMat g(static_cast<size_t>(n), JetVec(static_cast<size_t>(n), Jet::constant(0.0, n, order)));
        g[0][0] = A;
        g[1][1] = 2.0 * A * eu + C * ex * ex;
        g[2][2] = 2.0 * A * eu + C * ey * ey;
        g[1][2] = g[2][1] = C * ex * ey;
        g[1][3] = g[3][1] = C * ex;
        g[2][3] = g[3][2] = C * ey;
        g[3][3] = C;
        return g;
    });
}

PForm omega1_bf(const TodaSolution& sol) {
    ScalarField u = sol.u, ur = sol.du_field(0), ux = sol.du_field(1), uy = sol.du_field(2);
    const double K = sol.K;
    // components over increasing pairs: (01),(02),(03),(12),(13),(23)
    return PForm(sol.chart, 2, [u, ur, ux, uy, K](const Point& p, int order) {
        const int n = int(p.size());
        Jet eu = exp(u.eval(p, order));
        JetVec out(6, Jet::constant(0.0, n, order));
        out[0] = K * uy.eval(p, order);
        out[1] = (-K) * ux.eval(p, order);
        out[2] = Jet::constant(-2.0 * K, n, order);
        out[3] = (2.0 * K) * eu * ur.eval(p, order);
        return out;
    });
}

VectorField bf_vector_Z(const Chart& chart) {
    return VectorField(chart, [](const Point& p, int order) {
        const int n = int(p.size());
        JetVec z(static_cast<size_t>(n), Jet::constant(0.0, n, order));
        z[size_t(n - 1)] = Jet::constant(1.0, n, order);
        return z;
    });
}

ScalarField bf_f_Z(const TodaSolution& sol) {
    const double K = sol.K;
    return ScalarField(sol.chart, [K](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        return (-2.0 * K) * z[0];
    });
}

// --- rotating Killing data ---------------------------------------------------

RotatingKillingData rotating_data(const MetricField& g, const VectorField& Z,
                                  const ScalarField& f_Z, const PForm& omega1, double c_offset,
                                  std::vector<EndoField> triple) {
    RotatingKillingData d;
    d.chart = g.chart();
    d.g = g;
    d.Z = Z;
    d.f_Z = f_Z;
    d.omega1 = omega1;
    d.c_offset = c_offset;
    d.triple = triple;

    MetricField gf = g;
    VectorField Zf = Z;
    d.gZZ = ScalarField(d.chart, [gf, Zf](const Point& p, int order) {
        JetMat gj = gf.eval(p, order);
        JetVec zj = Zf.eval(p, order);
        Jet s = jzero(p, order);
        for (size_t i = 0; i < zj.size(); ++i)
            for (size_t j = 0; j < zj.size(); ++j) s += gj[i][j] * zj[i] * zj[j];
        return s;
    });

    ScalarField gZZ = d.gZZ, fZ = f_Z;
    d.f_H = ScalarField(d.chart, [fZ, gZZ, c_offset](const Point& p, int order) {
        return fZ.eval(p, order) + gZZ.eval(p, order) + c_offset;
    });

    // psi by pointwise least squares on d(g(Z,Z)) = 2 psi d f_Z
    d.psi = ScalarField(d.chart, [fZ, gZZ](const Point& p, int order) {
        Jet G = gZZ.eval(p, order + 1);
        Jet F = fZ.eval(p, order + 1);
        const int n = int(p.size());
        Jet num = jzero(p, order), den = jzero(p, order);
        for (int i = 0; i < n; ++i) {
            Jet Fi = F.partial(i);
            num += G.partial(i) * Fi;
            den += Fi * Fi;
        }
        if (den.value() < 1e-16) throw MomentMapDegenerateError();
        return num / (2.0 * den);
    });

    if (!triple.empty()) {
        d.I1 = triple[0];
        for (const EndoField& I : triple) d.omegas.push_back(tl::fundamental_form(g, I));
    } else {
        PForm w1 = omega1;
        const auto combos2 = index_combos(d.chart.dim(), 2);
        d.I1 = EndoField(d.chart, [gf, w1, combos2](const Point& p, int order) {
            const int n = int(p.size());
            JetMat ginv = tl::jet_matrix_inverse(gf.eval(p, order));
            JetVec wc = w1.eval(p, order);
            const Jet zero = Jet::constant(0.0, n, order);
            JetMat W(static_cast<size_t>(n), JetVec(static_cast<size_t>(n), zero));
            for (size_t c = 0; c < combos2.size(); ++c) {
                W[size_t(combos2[c][0])][size_t(combos2[c][1])] = wc[c];
                W[size_t(combos2[c][1])][size_t(combos2[c][0])] = -wc[c];
            }
            // I^i_j = g^{im} w_{jm}, so that g(I e_j, e_b) = w_{jb}
            JetMat I(static_cast<size_t>(n), JetVec(static_cast<size_t>(n), zero));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Jet s = zero;
                    for (int m = 0; m < n; ++m) s += ginv[size_t(i)][size_t(m)] * W[size_t(j)][size_t(m)];
                    I[size_t(i)][size_t(j)] = s;
                }
            return I;
        });
        d.omegas.push_back(omega1);
    }

    // omega_H = omega1 + d(g(Z,.))
    OneForm alpha0(d.chart, [gf, Zf](const Point& p, int order) {
        JetMat gj = gf.eval(p, order);
        JetVec zj = Zf.eval(p, order);
        JetVec out(zj.size(), jzero(p, order));
        for (size_t j = 0; j < zj.size(); ++j)
            for (size_t k = 0; k < zj.size(); ++k) out[j] += gj[j][k] * zj[k];
        return out;
    });
    d.omegaH = tl::pform_add(omega1, tl::exterior_derivative(tl::oneform_to_pform(alpha0)));

    // I_H = I1 + 2 nabla Z
    EndoField I1 = d.I1;
    d.I_H = EndoField(d.chart, [gf, Zf, I1](const Point& p, int order) {
        JetMat out = I1.eval(p, order);
        JetMat nz = tl::covariant_derivative_vector_jets(gf, Zf, p, order);
        for (size_t i = 0; i < out.size(); ++i)
            for (size_t j = 0; j < out.size(); ++j) out[i][j] += 2.0 * nz[i][j];
        return out;
    });
    return d;
}

double criterion_fit_residual(const RotatingKillingData& data, const Point& p) {
    const int n = data.chart.dim();
    Jet G = data.gZZ.eval(p, 1);
    Jet F = data.f_Z.eval(p, 1);
    const double psi = data.psi.value(p);
    Vec r(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) r[size_t(i)] = G.d1(i) - 2.0 * psi * F.d1(i);
    return tl::frame_max_oneform(r, tl::orthonormal_frame(data.g, p));
}

double integrability_criterion(const RotatingKillingData& data, const Point& p) {
    const int n = data.chart.dim();
    Jet H = data.f_H.eval(p, 1);
    Jet F = data.f_Z.eval(p, 1);
    const auto combos = index_combos(n, 2);
    Vec comps(combos.size());
    for (size_t c = 0; c < combos.size(); ++c) {
        const int i = combos[c][0], j = combos[c][1];
        comps[c] = H.d1(i) * F.d1(j) - H.d1(j) * F.d1(i);
    }
    return tl::frame_max_form(comps, 2, tl::orthonormal_frame(data.g, p), n);
}

double nabla_zz_span_residual(const RotatingKillingData& data, const Point& p) {
    const int n = data.chart.dim();
    Mat gv = data.g.values(p);
    Vec z = data.Z.values(p);
    Mat nz = tl::covariant_derivative_vector(data.g, data.Z, p);
    Mat I1 = data.I1.values(p);
    Vec v(static_cast<size_t>(n), 0.0), iz(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            v[size_t(i)] += nz[size_t(i)][size_t(j)] * z[size_t(j)];
            iz[size_t(i)] += I1[size_t(i)][size_t(j)] * z[size_t(j)];
        }
    auto ip = [&](const Vec& a, const Vec& b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += gv[size_t(i)][size_t(j)] * a[size_t(i)] * b[size_t(j)];
        return s;
    };
    // project v onto span(Z, I1 Z) with the 2x2 Gram solve
    Mat gram = {{ip(z, z), ip(z, iz)}, {ip(iz, z), ip(iz, iz)}};
    Vec rhs = {ip(v, z), ip(v, iz)};
    Vec coef;
    try {
        coef = gauss_solve(gram, rhs);
    } catch (const SingularMatrixError&) {
        throw RankDeficientError();
    }
    Vec w = v;
    for (int i = 0; i < n; ++i) w[size_t(i)] -= coef[0] * z[size_t(i)] + coef[1] * iz[size_t(i)];
    Mat frame = tl::orthonormal_frame(data.g, p);
    return tl::frame_max_vector(w, tl::dual_coframe(gv, frame));
}

IHReport prop_IH_checks(const RotatingKillingData& data, const Point& p) {
    const int n = data.chart.dim();
    Mat gv = data.g.values(p);
    Mat ih = data.I_H.values(p);
    Vec wH = data.omegaH.values(p);
    const auto combos2 = index_combos(n, 2);
    Mat W = zeros(n, n);
    for (size_t c = 0; c < combos2.size(); ++c) {
        W[size_t(combos2[c][0])][size_t(combos2[c][1])] = wH[c];
        W[size_t(combos2[c][1])][size_t(combos2[c][0])] = -wH[c];
    }
    Mat A = zeros(n, n);  // g(I_H e_i, e_j)
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) A[size_t(i)][size_t(j)] += ih[size_t(k)][size_t(i)] * gv[size_t(k)][size_t(j)];

    Mat frame = tl::orthonormal_frame(data.g, p);
    Mat coframe = tl::dual_coframe(gv, frame);
    IHReport rep;
    Mat diff = zeros(n, n), sym = zeros(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            diff[size_t(i)][size_t(j)] = A[size_t(i)][size_t(j)] - W[size_t(i)][size_t(j)];
            sym[size_t(i)][size_t(j)] = A[size_t(i)][size_t(j)] + A[size_t(j)][size_t(i)];
        }
    rep.omega_residual = tl::frame_max_sym2(diff, frame);
    rep.skew_residual = tl::frame_max_sym2(sym, frame);

    std::vector<Mat> structures;
    if (!data.triple.empty())
        for (const EndoField& I : data.triple) structures.push_back(I.values(p));
    else
        structures.push_back(data.I1.values(p));
    for (const Mat& I : structures) {
        Mat comm = zeros(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    comm[size_t(i)][size_t(j)] += ih[size_t(i)][size_t(k)] * I[size_t(k)][size_t(j)] -
                                                  I[size_t(i)][size_t(k)] * ih[size_t(k)][size_t(j)];
        rep.commute_residuals.push_back(tl::frame_max_endo(comm, frame, coframe));
    }
    return rep;
}

MetricField elementary_deformation(const MetricField& g, const RotatingKillingData& data) {
    const int n = g.chart().dim();
    MetricField gf = g;
    ScalarField fZ = data.f_Z, fH = data.f_H;
    if (n == 4) {
        // the quaternionic span is all of TN: pure conformal rescaling
        return MetricField(g.chart(), [gf, fZ, fH](const Point& p, int order) {
            JetMat gj = gf.eval(p, order);
            Jet f = fZ.eval(p, order);
            Jet scale = fH.eval(p, order) * recip(f * f);
            for (auto& row : gj)
                for (auto& e : row) e = scale * e;
            return gj;
        });
    }
    if (data.triple.size() < 3)
        throw std::invalid_argument("elementary deformation above dimension 4 needs the full triple");
    VectorField Zf = data.Z;
    std::vector<EndoField> triple = data.triple;
    ScalarField gZZ = data.gZZ;
    return MetricField(g.chart(), [gf, Zf, triple, fZ, fH, gZZ, n](const Point& p, int order) {
        JetMat gj = gf.eval(p, order);
        JetVec zj = Zf.eval(p, order);
        Jet q = gZZ.eval(p, order);
        if (std::fabs(q.value()) < 1e-10) throw RankDeficientError();
        Jet f = fZ.eval(p, order);
        Jet invf = recip(f);
        Jet span_scale = fH.eval(p, order) * invf * invf;

        // alpha_mu = lowered spans Z, I1 Z, I2 Z, I3 Z; each has g-norm g(Z,Z)
        std::vector<JetVec> alpha;
        alpha.push_back(JetVec(static_cast<size_t>(n), jzero(p, order)));
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) alpha[0][size_t(j)] += gj[size_t(j)][size_t(k)] * zj[size_t(k)];
        for (const EndoField& I : triple) {
            JetMat ij = I.eval(p, order);
            JetVec iz(static_cast<size_t>(n), jzero(p, order));
            for (int m = 0; m < n; ++m)
                for (int j = 0; j < n; ++j) iz[size_t(m)] += ij[size_t(m)][size_t(j)] * zj[size_t(j)];
            JetVec a(static_cast<size_t>(n), jzero(p, order));
            for (int j = 0; j < n; ++j)
                for (int m = 0; m < n; ++m) a[size_t(j)] += gj[size_t(m)][size_t(j)] * iz[size_t(m)];
            alpha.push_back(a);
        }
        Jet invq = recip(q);
        JetMat Pi(static_cast<size_t>(n), JetVec(static_cast<size_t>(n), jzero(p, order)));  // g restricted to HZ
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet s = jzero(p, order);
                for (const JetVec& a : alpha) s += a[size_t(i)] * a[size_t(j)];
                Pi[size_t(i)][size_t(j)] = s * invq;
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                gj[size_t(i)][size_t(j)] = invf * (gj[size_t(i)][size_t(j)] - Pi[size_t(i)][size_t(j)]) +
                                           span_scale * Pi[size_t(i)][size_t(j)];
        return gj;
    });
}

std::array<int, 3> signature_counts(const MetricField& g, const Point& p) {
    Vec ev = symmetric_eigenvalues(g.values(p));
    std::array<int, 3> out = {0, 0, 0};
    for (double e : ev) {
        if (e < -1e-9)
            ++out[0];
        else if (e > 1e-9)
            ++out[2];
        else
            ++out[1];
    }
    return out;
}

// --- sigma-tilde machinery ---------------------------------------------------

namespace {

struct TildeIngredients {
    std::vector<JetVec> alpha;  // alpha_0..alpha_3, lowered span one-forms
    JetMat wperp;               // omega_1 restricted to (HZ)-perp, full antisym
    Jet gZZ, fZ, fH;
};

TildeIngredients tilde_ingredients(const RotatingKillingData& d, const Point& p, int order) {
    if (d.triple.size() < 3)
        throw std::invalid_argument("sigma-tilde span formula needs the full triple");
    const int n = d.chart.dim();
    JetMat gj = d.g.eval(p, order);
    JetVec zj = d.Z.eval(p, order);
    const Jet zero = Jet::constant(0.0, n, order);

    TildeIngredients t;
    t.gZZ = d.gZZ.eval(p, order);
    if (std::fabs(t.gZZ.value()) < 1e-10) throw RankDeficientError();
    t.fZ = d.f_Z.eval(p, order);
    t.fH = d.f_H.eval(p, order);

    std::vector<JetVec> spans;  // the vectors Z, I1 Z, I2 Z, I3 Z
    spans.push_back(zj);
    for (const EndoField& I : d.triple) {
        JetMat ij = I.eval(p, order);
        JetVec iz(static_cast<size_t>(n), zero);
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j) iz[size_t(m)] += ij[size_t(m)][size_t(j)] * zj[size_t(j)];
        spans.push_back(iz);
    }
    for (const JetVec& s : spans) {
        JetVec a(static_cast<size_t>(n), zero);
        for (int j = 0; j < n; ++j)
            for (int m = 0; m < n; ++m) a[size_t(j)] += gj[size_t(m)][size_t(j)] * s[size_t(m)];
        t.alpha.push_back(a);
    }

    // projector onto HZ and the omega_1 restriction to its complement
    Jet invq = recip(t.gZZ);
    JetMat Pperp(static_cast<size_t>(n), JetVec(static_cast<size_t>(n), zero));
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) {
            Jet s = (a == i) ? Jet::constant(1.0, n, order) : zero;
            for (size_t mu = 0; mu < 4; ++mu)
                s -= spans[mu][size_t(a)] * t.alpha[mu][size_t(i)] * invq;
            Pperp[size_t(a)][size_t(i)] = s;
        }
    const auto combos2 = index_combos(n, 2);
    JetVec wc = d.omega1.eval(p, order);
    JetMat W(static_cast<size_t>(n), JetVec(static_cast<size_t>(n), zero));
    for (size_t c = 0; c < combos2.size(); ++c) {
        W[size_t(combos2[c][0])][size_t(combos2[c][1])] = wc[c];
        W[size_t(combos2[c][1])][size_t(combos2[c][0])] = -wc[c];
    }
    t.wperp = JetMat(static_cast<size_t>(n), JetVec(static_cast<size_t>(n), zero));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Jet s = zero;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    s += Pperp[size_t(a)][size_t(i)] * Pperp[size_t(b)][size_t(j)] * W[size_t(a)][size_t(b)];
            t.wperp[size_t(i)][size_t(j)] = s;
        }
    return t;
}

OneForm alpha_form(const RotatingKillingData& d, int mu) {
    MetricField gf = d.g;
    VectorField Zf = d.Z;
    if (mu == 0) {
        return OneForm(d.chart, [gf, Zf](const Point& p, int order) {
            JetMat gj = gf.eval(p, order);
            JetVec zj = Zf.eval(p, order);
            JetVec out(zj.size(), jzero(p, order));
            for (size_t j = 0; j < zj.size(); ++j)
                for (size_t k = 0; k < zj.size(); ++k) out[j] += gj[j][k] * zj[k];
            return out;
        });
    }
    EndoField I = d.triple[size_t(mu - 1)];
    return OneForm(d.chart, [gf, Zf, I](const Point& p, int order) {
        JetMat gj = gf.eval(p, order);
        JetVec zj = Zf.eval(p, order);
        JetMat ij = I.eval(p, order);
        const size_t n = zj.size();
        JetVec iz(n, jzero(p, order)), out(n, jzero(p, order));
        for (size_t m = 0; m < n; ++m)
            for (size_t j = 0; j < n; ++j) iz[m] += ij[m][j] * zj[j];
        for (size_t j = 0; j < n; ++j)
            for (size_t m = 0; m < n; ++m) out[j] += gj[m][j] * iz[m];
        return out;
    });
}

PForm omega1_perp_field(const RotatingKillingData& d) {
    RotatingKillingData data = d;
    const auto combos2 = index_combos(d.chart.dim(), 2);
    return PForm(d.chart, 2, [data, combos2](const Point& p, int order) {
        TildeIngredients t = tilde_ingredients(data, p, order);
        JetVec out;
        out.reserve(combos2.size());
        for (const auto& c : combos2) out.push_back(t.wperp[size_t(c[0])][size_t(c[1])]);
        return out;
    });
}

}  // namespace

PForm sigma_tilde(const RotatingKillingData& data) {
    const int n = data.chart.dim();
    const auto combos2 = index_combos(n, 2);
    RotatingKillingData d = data;
    if (data.triple.size() >= 3) {
        return PForm(data.chart, 2, [d, combos2](const Point& p, int order) {
            TildeIngredients t = tilde_ingredients(d, p, order);
            Jet C = t.fH * recip(t.fZ * t.fZ * t.gZZ);
            Jet invfZ = recip(t.fZ);
            JetVec out;
            out.reserve(combos2.size());
            for (const auto& c : combos2) {
                const size_t i = size_t(c[0]), j = size_t(c[1]);
                Jet s = C * (-(t.alpha[0][i] * t.alpha[1][j] - t.alpha[0][j] * t.alpha[1][i]) +
                             (t.alpha[2][i] * t.alpha[3][j] - t.alpha[2][j] * t.alpha[3][i]));
                s += invfZ * t.wperp[i][j];
                out.push_back(s);
            }
            return out;
        });
    }
    if (n != 4)
        throw std::invalid_argument("sigma-tilde needs the full triple above dimension 4");
    // dimension-4 form: HZ = TN, so sigma-tilde is the rescaled omega_1 with
    // the df_Z ^ alpha_0 correction
    return PForm(data.chart, 2, [d, combos2](const Point& p, int order) {
        JetMat gj = d.g.eval(p, order);
        JetVec zj = d.Z.eval(p, order);
        Jet q = d.gZZ.eval(p, order);
        if (std::fabs(q.value()) < 1e-10) throw RankDeficientError();
        Jet fZ1 = d.f_Z.eval(p, order + 1);
        Jet fZ = fZ1.truncated(order);
        Jet fH = d.f_H.eval(p, order);
        Jet inv2 = recip(fZ * fZ);
        JetVec wc = d.omega1.eval(p, order);
        const size_t n4 = zj.size();
        JetVec a0(n4, jzero(p, order));
        for (size_t j = 0; j < n4; ++j)
            for (size_t k = 0; k < n4; ++k) a0[j] += gj[j][k] * zj[k];
        Jet coef = 2.0 * fH * inv2 * recip(q);
        JetVec out;
        out.reserve(combos2.size());
        for (size_t c = 0; c < combos2.size(); ++c) {
            const size_t i = size_t(combos2[c][0]), j = size_t(combos2[c][1]);
            Jet s = fH * inv2 * wc[c];
            s -= coef * (fZ1.partial(int(i)) * a0[j] - fZ1.partial(int(j)) * a0[i]);
            out.push_back(s);
        }
        return out;
    });
}

PForm d_sigma_tilde_formula(const RotatingKillingData& data) {
    if (data.triple.size() < 3)
        throw std::invalid_argument("the displayed d sigma-tilde needs the full triple");
    ScalarField fZ = data.f_Z, fH = data.f_H, psi = data.psi, gZZ = data.gZZ;
    ScalarField C(data.chart, [fZ, fH, gZZ](const Point& p, int order) {
        Jet f = fZ.eval(p, order);
        return fH.eval(p, order) * recip(f * f * gZZ.eval(p, order));
    });
    ScalarField coef(data.chart, [fZ, fH, psi](const Point& p, int order) {
        Jet f = fZ.eval(p, order), h = fH.eval(p, order), s = psi.eval(p, order);
        return -(1.0 + 2.0 * s) * recip(h) + 2.0 * recip(f) + 2.0 * s * recip(h - f);
    });
    ScalarField inv_fZ(data.chart, [fZ](const Point& p, int order) {
        return recip(fZ.eval(p, order));
    });
    ScalarField inv_fZ2(data.chart, [fZ](const Point& p, int order) {
        Jet f = fZ.eval(p, order);
        return recip(f * f);
    });
    PForm a0 = tl::oneform_to_pform(alpha_form(data, 0));
    PForm a1 = tl::oneform_to_pform(alpha_form(data, 1));
    PForm a2 = tl::oneform_to_pform(alpha_form(data, 2));
    PForm a3 = tl::oneform_to_pform(alpha_form(data, 3));
    PForm wperp = omega1_perp_field(data);

    PForm inner = tl::pform_sub(tl::pform_scale_field(coef, tl::wedge(a2, a3)),
                                tl::exterior_derivative(a0));
    PForm term1 = tl::pform_scale_field(C, tl::wedge(inner, a1));
    PForm term2 = tl::pform_scale_field(
        C, tl::pform_add(tl::wedge(a2, data.omegas[1]), tl::wedge(a3, data.omegas[2])));
    PForm term3 = tl::pform_scale_field(inv_fZ2, tl::wedge(a1, wperp));
    PForm term4 = tl::pform_scale_field(inv_fZ, tl::exterior_derivative(wperp));
    return tl::pform_add(tl::pform_add(term1, term2), tl::pform_add(term3, term4));
}

double xi_formula(const RotatingKillingData& data, const Point& p) {
    return xi_field(data).value(p);
}

ScalarField xi_field(const RotatingKillingData& data) {
    ScalarField fZ = data.f_Z, fH = data.f_H, psi = data.psi;
    return ScalarField(data.chart, [fZ, fH, psi](const Point& p, int order) {
        Jet f = fZ.eval(p, order), h = fH.eval(p, order), s = psi.eval(p, order);
        return 2.0 * recip(f) - (2.0 + 4.0 * s) * recip(h) + (4.0 + 4.0 * s) * recip(h - f);
    });
}

ScalarField phi_by_quadrature(const RotatingKillingData& data, double rho0) {
    // scan the rho range for poles of xi before committing to the quadrature
    const Chart::Box& box = data.chart.sample_box();
    Point mid(size_t(data.chart.dim()));
    for (size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (box[i].first + box[i].second);
    const double lo = std::min(rho0, box[0].first), hi = std::max(rho0, box[0].second);
    for (int k = 0; k <= 240; ++k) {
        Point q = mid;
        q[0] = lo + (hi - lo) * k / 240.0;
        if (!data.chart.contains(q)) continue;
        const double f = data.f_Z.value(q), h = data.f_H.value(q);
        if (std::fabs(f) < 1e-8) throw QuadraturePoleError("f_Z");
        if (std::fabs(h) < 1e-8) throw QuadraturePoleError("f_H");
        if (std::fabs(h - f) < 1e-8) throw QuadraturePoleError("f_H - f_Z");
    }
    ScalarField xi = xi_field(data);
    ScalarField fZ = data.f_Z;
    ScalarField integrand(data.chart, [xi, fZ](const Point& p, int order) {
        return xi.eval(p, order) * fZ.eval(p, order + 1).partial(0);
    });
    return ScalarField(data.chart, [integrand, rho0](const Point& p, int order) {
        auto f = [&integrand](const Point& q, int o) { return integrand.eval(q, o); };
        return quad::integral_along_axis(f, p, 0, rho0, order);
    });
}

// --- flat rigid c-map models -------------------------------------------------

namespace {

double cmap_eps(int j) { return j == 0 ? -1.0 : 1.0; }

RigidCmapModel build_cmap_model(int n, bool perturbed) {
    if (n < 1) throw std::invalid_argument("rigid c-map model needs n >= 1");
    RigidCmapModel m;
    m.n = n;
    const int dim = 4 * n;
    std::vector<std::string> names;
    for (int j = 0; j < n; ++j) {
        names.push_back("x" + std::to_string(j));
        names.push_back("y" + std::to_string(j));
    }
    for (int j = 0; j < n; ++j) {
        names.push_back("u" + std::to_string(j));
        names.push_back("v" + std::to_string(j));
    }
    Chart::Box box(static_cast<size_t>(dim));
    box[0] = box[1] = {0.9, 1.7};
    for (int j = 1; j < n; ++j) box[size_t(2 * j)] = box[size_t(2 * j + 1)] = {-0.35, 0.35};
    for (int k = 2 * n; k < dim; ++k) box[size_t(k)] = {-0.9, 0.9};
    auto pred = [n](const Point& p, double margin) {
        double fz = 0.0;
        for (int j = 0; j < n; ++j)
            fz -= 0.5 * cmap_eps(j) * (p[size_t(2 * j)] * p[size_t(2 * j)] +
                                       p[size_t(2 * j + 1)] * p[size_t(2 * j + 1)]);
        return fz > margin;
    };
    m.chart = Chart(names, pred, box);

    m.g = MetricField(m.chart, [n, dim](const Point& p, int order) {
        JetMat g(static_cast<size_t>(dim), JetVec(static_cast<size_t>(dim), Jet::constant(0.0, dim, order)));
        for (int j = 0; j < n; ++j) {
            const double e = cmap_eps(j);
            for (int k : {2 * j, 2 * j + 1, 2 * n + 2 * j, 2 * n + 2 * j + 1})
                g[size_t(k)][size_t(k)] = Jet::constant(e, dim, order);
        }
        return g;
    });

    Mat I1 = zeros(dim, dim), I2 = zeros(dim, dim);
    for (int j = 0; j < n; ++j) {
        const double e = cmap_eps(j);
        const int bx = 2 * j, by = 2 * j + 1, fu = 2 * n + 2 * j, fv = 2 * n + 2 * j + 1;
        I1[size_t(by)][size_t(bx)] = 1.0;   // dx -> dy
        I1[size_t(bx)][size_t(by)] = -1.0;  // dy -> -dx
        I1[size_t(fv)][size_t(fu)] = -1.0;  // du -> -dv
        I1[size_t(fu)][size_t(fv)] = 1.0;   // dv -> du
        I2[size_t(fv)][size_t(bx)] = e;     // dx -> e dv
        I2[size_t(fu)][size_t(by)] = -e;    // dy -> -e du
        I2[size_t(by)][size_t(fu)] = e;     // du -> e dy
        I2[size_t(bx)][size_t(fv)] = -e;    // dv -> -e dx
    }
    Mat I3 = zeros(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k) I3[size_t(i)][size_t(j)] += I1[size_t(i)][size_t(k)] * I2[size_t(k)][size_t(j)];
    for (const Mat& I : {I1, I2, I3}) {
        m.triple.push_back(EndoField(m.chart, [I, dim](const Point&, int order) {
            JetMat out(static_cast<size_t>(dim), JetVec(static_cast<size_t>(dim)));
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    out[size_t(i)][size_t(j)] = Jet::constant(I[size_t(i)][size_t(j)], dim, order);
            return out;
        }));
    }
    for (const EndoField& I : m.triple) m.omegas.push_back(tl::fundamental_form(m.g, I));

    m.Z = VectorField(m.chart, [n, dim, perturbed](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        JetVec out(static_cast<size_t>(dim), Jet::constant(0.0, dim, order));
        for (int j = 0; j < n; ++j) {
            out[size_t(2 * j)] = z[size_t(2 * j + 1)];
            out[size_t(2 * j + 1)] = -z[size_t(2 * j)];
        }
        if (perturbed) out[1] += 0.1 * (z[0] * z[0]);
        return out;
    });
    m.xi_euler = VectorField(m.chart, [n, dim](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        JetVec out(static_cast<size_t>(dim), Jet::constant(0.0, dim, order));
        for (int j = 0; j < n; ++j) {
            out[size_t(2 * j)] = z[size_t(2 * j)];
            out[size_t(2 * j + 1)] = z[size_t(2 * j + 1)];
        }
        return out;
    });
    m.f_Z = ScalarField(m.chart, [n](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        Jet s = Jet::constant(0.0, int(p.size()), order);
        for (int j = 0; j < n; ++j)
            s -= 0.5 * cmap_eps(j) * (z[size_t(2 * j)] * z[size_t(2 * j)] +
                                      z[size_t(2 * j + 1)] * z[size_t(2 * j + 1)]);
        return s;
    });
    return m;
}

}  // namespace

RigidCmapModel rigid_cmap_model(int n) { return build_cmap_model(n, false); }
RigidCmapModel perturbed_cmap_model(int n) { return build_cmap_model(n, true); }

RotatingKillingData cmap_rotating_data(const RigidCmapModel& model, double c_offset) {
    return rotating_data(model.g, model.Z, model.f_Z, model.omegas[0], c_offset, model.triple);
}

HighdimResult highdim_condition(const RigidCmapModel& model, const Point& p) {
    const int n4 = model.chart.dim();
    Mat A = tl::covariant_derivative_vector(model.g, model.Z, p);
    Mat gv = model.g.values(p);
    Mat I1 = model.triple[0].values(p);
    Vec z = model.Z.values(p);

    HighdimResult res;
    // the flat metric is +-1 diagonal, so coordinate components of the
    // vertical restriction are already orthonormal-frame components
    for (int j = 2 * model.n; j < n4; ++j)
        for (int i = 0; i < n4; ++i)
            res.vertical_nabla_z_max = std::max(res.vertical_nabla_z_max, std::fabs(A[size_t(i)][size_t(j)]));

    auto ip = [&](const Vec& a, const Vec& b) {
        double s = 0.0;
        for (int i = 0; i < n4; ++i)
            for (int j = 0; j < n4; ++j) s += gv[size_t(i)][size_t(j)] * a[size_t(i)] * b[size_t(j)];
        return s;
    };
    std::vector<Vec> spans;
    spans.push_back(z);
    for (int k = 0; k < 3; ++k) {
        Mat I = model.triple[size_t(k)].values(p);
        Vec iz(static_cast<size_t>(n4), 0.0);
        for (int i = 0; i < n4; ++i)
            for (int j = 0; j < n4; ++j) iz[size_t(i)] += I[size_t(i)][size_t(j)] * z[size_t(j)];
        spans.push_back(iz);
    }
    const double q = ip(z, z);
    if (std::fabs(q) < 1e-10) throw RankDeficientError();
    auto project_out_span = [&](Vec v) {
        for (const Vec& s : spans) {
            const double c = ip(v, s) / ip(s, s);
            for (int i = 0; i < n4; ++i) v[size_t(i)] -= c * s[size_t(i)];
        }
        return v;
    };

    // I1-adapted orthonormal basis of the perpendicular complement (which is
    // positive definite on this family): pairs (b, I1 b)
    std::vector<Vec> basis;
    auto try_add = [&](Vec v) {
        v = project_out_span(std::move(v));
        for (const Vec& b : basis) {
            const double c = ip(v, b);
            for (int i = 0; i < n4; ++i) v[size_t(i)] -= c * b[size_t(i)];
        }
        const double nv = ip(v, v);
        if (nv < 1e-8) return false;
        const double inv = 1.0 / std::sqrt(nv);
        for (double& e : v) e *= inv;
        basis.push_back(std::move(v));
        return true;
    };
    for (int i = 0; i < n4 && int(basis.size()) < n4 - 4; ++i) {
        Vec e(static_cast<size_t>(n4), 0.0);
        e[size_t(i)] = 1.0;
        if (try_add(e)) {
            Vec ie(static_cast<size_t>(n4), 0.0);
            const Vec& b = basis.back();
            for (int r = 0; r < n4; ++r)
                for (int c = 0; c < n4; ++c) ie[size_t(r)] += I1[size_t(r)][size_t(c)] * b[size_t(c)];
            try_add(ie);
        }
    }
    if (int(basis.size()) != n4 - 4) throw RankDeficientError();

    // deviation D = (nabla Z + 1/2 I1) restricted to the complement
    Mat D = zeros(n4, n4);
    for (int i = 0; i < n4; ++i)
        for (int j = 0; j < n4; ++j) D[size_t(i)][size_t(j)] = A[size_t(i)][size_t(j)] + 0.5 * I1[size_t(i)][size_t(j)];
    for (const Vec& bs : basis) {
        Vec db(static_cast<size_t>(n4), 0.0);
        for (int i = 0; i < n4; ++i)
            for (int j = 0; j < n4; ++j) db[size_t(i)] += D[size_t(i)][size_t(j)] * bs[size_t(j)];
        for (const Vec& br : basis)
            res.deviation_max = std::max(res.deviation_max, std::fabs(ip(br, db)));
    }
    return res;
}

}  // namespace qkgeo
