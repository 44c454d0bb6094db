#include "qkgeo/qkside.hpp"

#include <algorithm>
#include <cmath>

#include "qkgeo/quadrature.hpp"

namespace qkgeo {

namespace {

double xy_half_width(double a) {
    if (a < 0) return std::min(0.75, 0.6 * std::sqrt(1.0 / (-a)));
    return 0.75;
}

/// Zero every derivative slot involving the given axis (used when a field is
/// evaluated with that coordinate frozen to a constant).
Jet freeze_axis(Jet j, int axis) {
    const int d = j.dim();
    if (j.order() >= 1) j.set_d1(axis, 0.0);
    if (j.order() >= 2)
        for (int i = 0; i < d; ++i) j.set_d2(axis, i, 0.0);
    if (j.order() >= 3)
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) j.set_d3(axis, i, k, 0.0);
    return j;
}

}  // namespace

// --- the explicit family -----------------------------------------------------

Chart gabc_chart(const GabcParams& params) {
    const double a = params.a, b = params.b, c = params.c, K = params.K;
    auto window = family_rho_window(a, b, c, K, true);
    const double h = xy_half_width(a);
    Chart::Box box = {{window.first, window.second}, {-h, h}, {-h, h}, {-1.0, 1.0}};
    auto pred = [a, b, c, K](const Point& p, double m) {
        const double r = p[0], x = p[1], y = p[2];
        const double Q = a * r * r + b * r + c;
        const double B = b * r + 2.0 * c;
        const double W = 1.0 + 0.5 * a * (x * x + y * y);
        if (r < m || Q < m || W < m || std::fabs(B) < m) return false;
        return K * B < 0.0;  // positivity factor P = -K B / Q > 0
    };
    return Chart({"rho", "x", "y", "t"}, pred, box);
}

MetricField gabc_metric(const GabcParams& params) {
    const double a = params.a, b = params.b, c = params.c, K = params.K;
    return MetricField(gabc_chart(params), [a, b, c, K](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        const int n = int(p.size());
        Jet Q = a * (z[0] * z[0]) + b * z[0] + c;
        Jet B = b * z[0] + 2.0 * c;
        Jet W = 1.0 + 0.5 * a * (z[1] * z[1] + z[2] * z[2]);
        Jet pre = (-0.25 * K) * recip(z[0] * z[0]);
        Jet invW = recip(W);
        JetVec beta(4, Jet::constant(0.0, n, order));
        beta[1] = b * z[2] * invW;
        beta[2] = (-b) * z[1] * invW;
        beta[3] = Jet::constant(-1.0 / K, n, order);
        Jet QB = Q * recip(B);
        JetMat g(4, JetVec(4, Jet::constant(0.0, n, order)));
        g[0][0] = B * recip(Q);
        g[1][1] = 2.0 * B * invW * invW;
        g[2][2] = g[1][1];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) g[size_t(i)][size_t(j)] = pre * (g[size_t(i)][size_t(j)] + QB * beta[size_t(i)] * beta[size_t(j)]);
        return g;
    });
}

OneForm gabc_theta(const GabcParams& params) {
    const double a = params.a, b = params.b, K = params.K;
    return OneForm(gabc_chart(params), [a, b, K](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        Jet W = 1.0 + 0.5 * a * (z[1] * z[1] + z[2] * z[2]);
        Jet invW = recip(W);
        JetVec th(4, Jet::constant(0.0, int(p.size()), order));
        th[1] = (-K * b) * z[2] * invW;
        th[2] = (K * b) * z[1] * invW;
        return th;
    });
}

TodaSolution gabc_toda(const GabcParams& params) {
    return separable_toda_on(gabc_chart(params), params.a, params.b, params.c, params.K);
}

double gabc_nu(const GabcParams& params) { return 2.0 / params.K; }

double curvature_norm_formula(const GabcParams& params, double rho) {
    const double B = params.b * rho + 2.0 * params.c;
    if (std::fabs(B) < 1e-12)
        throw FormulaPoleError("curvature-norm formula has a pole at b rho + 2c = 0");
    const double nu = gabc_nu(params);
    const double disc = params.b * params.b - 4.0 * params.a * params.c;
    const double ratio = rho / B;
    const double r6 = std::pow(ratio, 6);
    return 6.0 * nu * nu * (1.0 + params.b * params.b * disc * disc * r6);
}

// --- general Przanowski-Tod charts -------------------------------------------

PTChart pt_metric(const TodaSolution& sol, bool validate) {
    PTChart out;
    out.sol = sol;
    out.chart = sol.chart;
    const double K = sol.K;
    ScalarField u = sol.u;
    ScalarField ur = sol.du_field(0);

    out.P = ScalarField(out.chart, [ur, K](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        return K * (z[0] * ur.eval(p, order) - 2.0);
    });
    if (validate) {
        for (const Point& p : out.chart.sample(30, 5))
            if (out.P.value(p) <= 1e-8)
                throw SignatureError("the ansatz factor P is not positive on the chart");
    }

    // components of the prescribed dTheta
    ScalarField Frx(out.chart, [ur, K](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        return (-K) * z[0] * ur.eval(p, order + 1).partial(2);
    });
    ScalarField Fry(out.chart, [ur, K](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        return K * z[0] * ur.eval(p, order + 1).partial(1);
    });
    ScalarField Fxy(out.chart, [u, ur, K](const Point& p, int order) {
        JetPoint z = seed_point(p, order + 1);
        Jet pe = K * (z[0] * ur.eval(p, order + 1) - 2.0) * exp(u.eval(p, order + 1));
        return -2.0 * pe.partial(0);
    });

    const Chart::Box& box = out.chart.sample_box();
    const double rho0 = 0.5 * (box[0].first + box[0].second);
    const double x0 = 0.5 * (box[1].first + box[1].second);
    ScalarField P = out.P;
    out.Theta = OneForm(out.chart, [Frx, Fry, Fxy, rho0, x0](const Point& p, int order) {
        auto frx = [&Frx](const Point& q, int o) { return Frx.eval(q, o); };
        auto fry = [&Fry](const Point& q, int o) { return Fry.eval(q, o); };
        // the x-leg runs at the base value of rho, so rho-derivatives vanish
        auto fxy0 = [&Fxy, rho0](const Point& q, int o) {
            Point r = q;
            r[0] = rho0;
            return freeze_axis(Fxy.eval(r, o), 0);
        };
        JetVec th(4, Jet::constant(0.0, int(p.size()), order));
        th[1] = quad::integral_along_axis(frx, p, 0, rho0, order);
        th[2] = quad::integral_along_axis(fxy0, p, 1, x0, order) +
                quad::integral_along_axis(fry, p, 0, rho0, order);
        return th;
    });

    OneForm Theta = out.Theta;
    out.metric = MetricField(out.chart, [u, P, Theta, K](const Point& p, int order) {
        const int n = int(p.size());
        JetPoint z = seed_point(p, order);
        Jet Pj = P.eval(p, order);
        if (std::fabs(Pj.value()) < 1e-12) throw DegenerateMetricError(Pj.value());
        Jet eu = exp(u.eval(p, order));
        JetVec th = Theta.eval(p, order);
        Jet inv4r2 = 0.25 * recip(z[0] * z[0]);
        Jet invP = recip(Pj);
        // dt + Theta as a one-form
        JetVec eta = th;
        eta[3] = Jet::constant(1.0, n, order);
        JetMat g(4, JetVec(4, Jet::constant(0.0, n, order)));
        g[0][0] = Pj;
        g[1][1] = 2.0 * Pj * eu;
        g[2][2] = g[1][1];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                g[size_t(i)][size_t(j)] =
                    inv4r2 * (g[size_t(i)][size_t(j)] + invP * eta[size_t(i)] * eta[size_t(j)]);
        return g;
    });
    return out;
}

double liouville_residual(const ScalarField& G, double a, const Point& p) {
    Jet g = G.eval(p, 2);
    return 0.25 * (g.d2(1, 1) + g.d2(2, 2)) + a * std::exp(g.value());
}

std::pair<EndoField, EndoField> hermitian_pair(const PTChart& chart) {
    ScalarField P = chart.P;
    OneForm Theta = chart.Theta;
    auto build = [P, Theta](double flip) {
        return EndoField(P.chart(), [P, Theta, flip](const Point& p, int order) {
            const int n = int(p.size());
            Jet Pj = P.eval(p, order);
            Jet invP = recip(Pj);
            JetVec th = Theta.eval(p, order);
            const Jet zero = Jet::constant(0.0, n, order);
            JetMat J(4, JetVec(4, zero));
            // flip * (E1 (x) e0 - E0 (x) e1) + E3 (x) e2 - E2 (x) e3
            J[3][0] = flip * Pj;
            J[0][3] = -flip * invP;
            J[0][1] = -flip * invP * th[1];
            J[0][2] = -flip * invP * th[2];
            J[2][1] = Jet::constant(1.0, n, order);
            J[3][1] = -th[2];
            J[1][2] = Jet::constant(-1.0, n, order);
            J[3][2] = th[1];
            return J;
        });
    };
    return {build(1.0), build(-1.0)};
}

// --- Killing catalog ---------------------------------------------------------

std::string algebra_label_name(AlgebraLabel label) {
    switch (label) {
        case AlgebraLabel::o2_heis3: return "o2_heis3";
        case AlgebraLabel::u2: return "u2";
        case AlgebraLabel::u11: return "u11";
    }
    return "unknown";
}

KillingCatalog killing_fields(const GabcParams& params) {
    KillingCatalog cat;
    cat.params = params;
    cat.chart = gabc_chart(params);
    cat.expected_algebra = params.a == 0.0 ? AlgebraLabel::o2_heis3
                         : params.a > 0.0 ? AlgebraLabel::u2
                                          : AlgebraLabel::u11;
    const double a = params.a, b = params.b, K = params.K;
    auto field = [&cat](std::function<JetVec(const JetPoint&, int, int)> comps) {
        return VectorField(cat.chart, [comps](const Point& p, int order) {
            JetPoint z = seed_point(p, order);
            return comps(z, int(p.size()), order);
        });
    };
    cat.fields.push_back(field([a, b, K](const JetPoint& z, int n, int order) {
        JetVec v(4, Jet::constant(0.0, n, order));
        v[1] = 0.5 + 0.25 * a * (z[1] * z[1] - z[2] * z[2]);
        v[2] = 0.5 * a * z[1] * z[2];
        v[3] = (-0.5 * K * b) * z[2];
        return v;
    }));
    cat.fields.push_back(field([a, b, K](const JetPoint& z, int n, int order) {
        JetVec v(4, Jet::constant(0.0, n, order));
        v[1] = (-0.5 * a) * z[1] * z[2];
        v[2] = -0.5 + 0.25 * a * (z[1] * z[1] - z[2] * z[2]);
        v[3] = (-0.5 * K * b) * z[1];
        return v;
    }));
    cat.fields.push_back(field([a, b, K](const JetPoint& z, int n, int order) {
        JetVec v(4, Jet::constant(0.0, n, order));
        v[1] = (-0.5 * a) * z[2];
        v[2] = (0.5 * a) * z[1];
        v[3] = Jet::constant(-0.5 * K * b, n, order);
        return v;
    }));
    cat.fields.push_back(field([](const JetPoint& z, int n, int order) {
        JetVec v(4, Jet::constant(0.0, n, order));
        v[1] = 0.5 * z[2];
        v[2] = -0.5 * z[1];
        return v;
    }));
    return cat;
}

double killing_residual(const MetricField& g, const VectorField& V, const Point& p) {
    Mat L = tl::lie_derivative_metric(g, V, p);
    return tl::frame_max_sym2(L, tl::orthonormal_frame(g, p));
}

namespace {

struct StructureConstants {
    Ten3 c;          // c[k][i][j]: [V_i, V_j] = sum_k c[k][i][j] V_k
    double residual; // worst projection residual over pairs and points
};

StructureConstants structure_constants(const KillingCatalog& cat) {
    const int n = 4;
    std::vector<Point> pts = cat.chart.sample(6, 11);
    StructureConstants sc;
    sc.c = zeros3(n);
    sc.residual = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Mat A = zeros(n, n);
            Vec rhs(static_cast<size_t>(n), 0.0);
            std::vector<Vec> brackets;
            std::vector<Mat> vals;
            for (const Point& p : pts) {
                Vec br = tl::lie_bracket(cat.fields[size_t(i)], cat.fields[size_t(j)], p);
                Mat M = zeros(n, n);  // columns are the field values
                for (int k = 0; k < n; ++k) {
                    Vec vk = cat.fields[size_t(k)].values(p);
                    for (int r = 0; r < n; ++r) M[size_t(r)][size_t(k)] = vk[size_t(r)];
                }
                for (int r = 0; r < n; ++r) {
                    for (int k = 0; k < n; ++k) {
                        rhs[size_t(k)] += M[size_t(r)][size_t(k)] * br[size_t(r)];
                        for (int l = 0; l < n; ++l)
                            A[size_t(k)][size_t(l)] += M[size_t(r)][size_t(k)] * M[size_t(r)][size_t(l)];
                    }
                }
                brackets.push_back(std::move(br));
                vals.push_back(std::move(M));
            }
            Vec coef = gauss_solve(A, rhs);
            for (int k = 0; k < n; ++k) {
                sc.c[size_t(k)][size_t(i)][size_t(j)] = coef[size_t(k)];
                sc.c[size_t(k)][size_t(j)][size_t(i)] = -coef[size_t(k)];
            }
            for (size_t q = 0; q < pts.size(); ++q)
                for (int r = 0; r < n; ++r) {
                    double res = brackets[q][size_t(r)];
                    for (int k = 0; k < n; ++k) res -= vals[q][size_t(r)][size_t(k)] * coef[size_t(k)];
                    sc.residual = std::max(sc.residual, std::fabs(res));
                }
        }
    return sc;
}

}  // namespace

double bracket_closure_residual(const KillingCatalog& catalog) {
    return structure_constants(catalog).residual;
}

AlgebraLabel classify_algebra(const KillingCatalog& catalog) {
    StructureConstants sc = structure_constants(catalog);
    if (sc.residual > 1e-6) throw BracketClosureError(sc.residual);
    const int n = 4;

    // row space of the bracket coefficient vectors = derived subalgebra
    Mat rows;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Vec r(static_cast<size_t>(n));
            for (int k = 0; k < n; ++k) r[size_t(k)] = sc.c[size_t(k)][size_t(i)][size_t(j)];
            rows.push_back(std::move(r));
        }
    Mat basis;
    for (Vec r : rows) {
        for (const Vec& b : basis) {
            double dot = 0.0, nb = 0.0;
            for (int k = 0; k < n; ++k) {
                dot += r[size_t(k)] * b[size_t(k)];
                nb += b[size_t(k)] * b[size_t(k)];
            }
            for (int k = 0; k < n; ++k) r[size_t(k)] -= dot / nb * b[size_t(k)];
        }
        double nr = 0.0;
        for (int k = 0; k < n; ++k) nr += r[size_t(k)] * r[size_t(k)];
        if (nr > 1e-12) {
            const double inv = 1.0 / std::sqrt(nr);
            for (double& e : r) e *= inv;
            basis.push_back(std::move(r));
        }
    }

    // Killing form of the full algebra, then restricted to the derived part
    Mat B = zeros(n, n);
    for (int m = 0; m < n; ++m)
        for (int q = 0; q < n; ++q)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    B[size_t(m)][size_t(q)] += sc.c[size_t(i)][size_t(m)][size_t(j)] * sc.c[size_t(j)][size_t(q)][size_t(i)];
    const int d = int(basis.size());
    Mat Br = zeros(d, d);
    for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    Br[size_t(r)][size_t(s)] += basis[size_t(r)][size_t(i)] * B[size_t(i)][size_t(j)] * basis[size_t(s)][size_t(j)];
    Vec ev = symmetric_eigenvalues(Br);
    int zeros_ = 0, neg = 0, pos = 0;
    for (double e : ev) {
        if (std::fabs(e) < 1e-6)
            ++zeros_;
        else if (e < 0)
            ++neg;
        else
            ++pos;
    }
    if (zeros_ > 0) return AlgebraLabel::o2_heis3;
    if (pos == 0) return AlgebraLabel::u2;
    return AlgebraLabel::u11;
}

// --- coordinate identifications ----------------------------------------------

namespace {

Chart remap_chart(const Chart& old_chart, const CaseTransform& ct, const Chart::Box& box,
                  std::function<bool(const Point&, double)> extra) {
    auto map = ct.map;
    auto pred = [old_chart, map, extra](const Point& q, double m) {
        if (extra && !extra(q, m)) return false;
        Point p = map(q);
        for (double v : p)
            if (!std::isfinite(v)) return false;
        return old_chart.contains(p, m);
    };
    return Chart({"vr", "xi1", "xi2", "theta"}, pred, box);
}

}  // namespace

int applicable_case(const GabcParams& params) {
    const double a = params.a, b = params.b;
    if (a == 0.0 && b == 0.0) return 1;
    if (a == 0.0) return 2;
    if (b == 0.0) return a > 0 ? 4 : 8;
    auto window = family_rho_window(params.a, params.b, params.c, params.K, true);
    const double mid = 0.5 * (window.first + window.second);
    const bool patternA = (2.0 * a * mid + b) * b > 0.0;
    if (a > 0 && b > 0) return 3;
    if (a > 0) return patternA ? 5 : 6;
    if (b < 0) return 7;
    return patternA ? 9 : 10;
}

CaseTransform case_transform(int case_id, const GabcParams& params) {
    const double a = params.a, b = params.b, c = params.c, K = params.K;
    const double nu = gabc_nu(params);
    CaseTransform ct;
    ct.case_id = case_id;
    Chart gch = gabc_chart(params);
    const Chart::Box& gbox = gch.sample_box();

    if (case_id == 1 || case_id == 2) {
        if (a != 0.0) throw std::invalid_argument("cases 1 and 2 require a = 0");
        if (case_id == 1 && b != 0.0) throw std::invalid_argument("case 1 requires b = 0");
        if (case_id == 2 && b == 0.0) throw std::invalid_argument("case 2 requires b != 0");
        ct.lambda = 1.0;
        ct.chart = gch;
        ct.map = [](const Point& q) { return q; };
        ct.inverse = [](const Point& p) { return p; };
        ct.jacobian_diag = [](const Point&) { return Vec(4, 1.0); };
        ct.target = gabc_metric(params);
        return ct;
    }

    if (case_id == 4 || case_id == 8) {
        if (b != 0.0) throw std::invalid_argument("cases 4 and 8 require b = 0");
        if (case_id == 4 && a <= 0.0) throw std::invalid_argument("case 4 requires a > 0");
        if (case_id == 8 && (a >= 0.0 || c <= 0.0))
            throw std::invalid_argument("case 8 requires a < 0 and c > 0");
        if (c == 0.0) throw std::invalid_argument("cases 4 and 8 require c != 0");
        const bool plus = case_id == 4 && c > 0.0;  // whether c/a > 0
        const double s = std::sqrt(std::fabs(c / a));
        ct.lambda = 1.0;
        ct.map = [s](const Point& q) { return Point{s / q[0], q[1], q[2], s * q[3]}; };
        ct.inverse = [s](const Point& p) { return Point{s / p[0], p[1], p[2], p[3] / s}; };
        ct.jacobian_diag = [s](const Point& q) {
            return Vec{-s / (q[0] * q[0]), 1.0, 1.0, s};
        };
        double v1 = s / gbox[0].second, v2 = s / gbox[0].first;
        Chart::Box box = {{std::min(v1, v2), std::max(v1, v2)},
                          gbox[1],
                          gbox[2],
                          {gbox[3].first / s, gbox[3].second / s}};
        if (box[3].first > box[3].second) std::swap(box[3].first, box[3].second);
        auto extra = [plus](const Point& q, double m) {
            return std::fabs(q[0]) > m && (plus || std::fabs(1.0 - q[0] * q[0]) > m);
        };
        ct.chart = remap_chart(gch, ct, box, extra);
        ct.target = MetricField(ct.chart, [a, K, nu, plus](const Point& p, int order) {
            const int n = int(p.size());
            JetPoint z = seed_point(p, order);
            Jet vr2 = z[0] * z[0];
            Jet W = 1.0 + 0.5 * a * (z[1] * z[1] + z[2] * z[2]);
            Jet invW2 = recip(W * W);
            const double fac = plus ? -1.0 / nu : 1.0 / nu;
            Jet radial = plus ? (1.0 + vr2) : (1.0 - vr2);
            JetMat g(4, JetVec(4, Jet::constant(0.0, n, order)));
            g[0][0] = fac * recip(radial);
            g[1][1] = fac * (2.0 * a) * vr2 * invW2;
            g[2][2] = g[1][1];
            g[3][3] = fac * radial * (0.25 / (K * K));
            return g;
        });
        return ct;
    }

    if (case_id < 1 || case_id > 10) throw std::invalid_argument("case id must be in 1..10");
    if (a == 0.0 || b == 0.0)
        throw std::invalid_argument("cases 3,5,6,7,9,10 require a != 0 and b != 0");
    const bool patternB = case_id == 6 || case_id == 10;
    const double sgn = a > 0 ? 1.0 : -1.0;
    switch (case_id) {
        case 3:
            if (!(a > 0 && b > 0)) throw std::invalid_argument("case 3 requires a, b > 0");
            break;
        case 5:
        case 6:
            if (!(a > 0 && b < 0)) throw std::invalid_argument("cases 5, 6 require a > 0 > b");
            break;
        case 7:
            if (!(a < 0 && b < 0)) throw std::invalid_argument("case 7 requires a, b < 0");
            break;
        case 9:
        case 10:
            if (!(a < 0 && b > 0)) throw std::invalid_argument("cases 9, 10 require b > 0 > a");
            break;
        default:
            break;
    }
    // the chart's rho window must lie in the case's 2a rho + b sign region
    {
        const double mid = 0.5 * (gbox[0].first + gbox[0].second);
        const double region = 2.0 * a * mid + b;
        const double want = patternB ? -b : b;
        if (region * want <= 0.0)
            throw std::invalid_argument("parameters select the other 2a rho + b component");
    }
    const double k = 4.0 * a * c / (b * b) - 1.0;
    ct.pedersen_k = k;
    ct.has_pedersen_k = case_id == 3;
    ct.lambda = 4.0;
    const double xs = std::sqrt(2.0 / std::fabs(a));
    const double ts = -b * K / (2.0 * a);
    const double rc = b / (2.0 * a);
    ct.map = [patternB, rc, xs, ts](const Point& q) {
        const double iv2 = 1.0 / (q[0] * q[0]);
        const double rho = patternB ? -rc * (iv2 + 1.0) : rc * (iv2 - 1.0);
        return Point{rho, xs * q[1], xs * q[2], ts * q[3]};
    };
    ct.inverse = [patternB, a, b, xs, ts](const Point& p) {
        const double denom = 2.0 * a * p[0] + b;
        const double v2 = (patternB ? -b : b) / denom;
        return Point{std::sqrt(v2), p[1] / xs, p[2] / xs, p[3] / ts};
    };
    ct.jacobian_diag = [patternB, rc, xs, ts](const Point& q) {
        const double iv3 = 1.0 / (q[0] * q[0] * q[0]);
        return Vec{(patternB ? 2.0 * rc : -2.0 * rc) * iv3, xs, xs, ts};
    };
    double v1 = ct.inverse(Point{gbox[0].first, 0, 0, 0})[0];
    double v2 = ct.inverse(Point{gbox[0].second, 0, 0, 0})[0];
    const double xh = gbox[1].second / xs;
    const double th = std::fabs(1.0 / ts);
    Chart::Box box = {{std::min(v1, v2), std::max(v1, v2)}, {-xh, xh}, {-xh, xh}, {-th, th}};
    auto extra = [patternB, k](const Point& q, double m) {
        const double v2_ = q[0] * q[0], v4 = v2_ * v2_;
        if (std::fabs(q[0]) < m) return false;
        if (std::fabs(1.0 + k * v4) < m) return false;
        if (std::fabs(1.0 + (patternB ? -k : k) * v2_) < m) return false;
        return std::fabs(1.0 + (patternB ? 1.0 : -1.0) * v2_) > m;
    };
    ct.chart = remap_chart(gch, ct, box, extra);
    const double lam = ct.lambda;
    ct.target = MetricField(ct.chart, [patternB, sgn, k, nu, lam](const Point& p, int order) {
        const int n = int(p.size());
        JetPoint z = seed_point(p, order);
        Jet vr2 = z[0] * z[0];
        Jet vr4 = vr2 * vr2;
        Jet D = 1.0 + sgn * (z[1] * z[1] + z[2] * z[2]);
        Jet invD = recip(D);
        Jet ct_ = cos(z[3]), st = sin(z[3]);
        const Jet zero = Jet::constant(0.0, n, order);
        // invariant coframe: dvr, sigma1, sigma2, sigma3
        std::vector<JetVec> w(4, JetVec(4, zero));
        w[0][0] = Jet::constant(1.0, n, order);
        w[1][1] = ct_ * invD;
        w[1][2] = -st * invD;
        w[2][1] = st * invD;
        w[2][2] = ct_ * invD;
        w[3][1] = sgn * z[2] * invD;
        w[3][2] = -sgn * z[1] * invD;
        w[3][3] = Jet::constant(0.25, n, order);
        Jet kv2 = (patternB ? -k : k) * vr2;
        Jet kv4 = k * vr4;
        JetVec coef(4, zero);
        coef[0] = (1.0 + kv2) * recip(1.0 + kv4);
        coef[1] = sgn * vr2 * (1.0 + kv2);
        coef[2] = coef[1];
        coef[3] = vr2 * (1.0 + kv4) * recip(1.0 + kv2);
        Jet edge = 1.0 + (patternB ? 1.0 : -1.0) * vr2;
        const double front = (patternB ? 1.0 : -1.0) * lam / nu;
        Jet fac = front * recip(edge * edge);
        JetMat g(4, JetVec(4, zero));
        for (int r = 0; r < 4; ++r)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    g[size_t(i)][size_t(j)] += coef[size_t(r)] * w[size_t(r)][size_t(i)] * w[size_t(r)][size_t(j)];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) g[size_t(i)][size_t(j)] = fac * g[size_t(i)][size_t(j)];
        return g;
    });
    return ct;
}

double case_pullback_residual(const CaseTransform& ct, const GabcParams& params, const Point& q) {
    MetricField g = gabc_metric(params);
    Point p = ct.map(q);
    Mat gv = g.values(p);
    Vec jd = ct.jacobian_diag(q);
    Mat pb = zeros(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) pb[size_t(i)][size_t(j)] = jd[size_t(i)] * gv[size_t(i)][size_t(j)] * jd[size_t(j)];
    Mat tv = ct.target.values(q);
    Mat diff = zeros(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) diff[size_t(i)][size_t(j)] = pb[size_t(i)][size_t(j)] - tv[size_t(i)][size_t(j)];
    return tl::frame_max_sym2(diff, tl::orthonormal_frame(ct.target, q));
}

// --- incompleteness integral -------------------------------------------------

DistanceResult singularity_distance(const GabcParams& params, double rho0) {
    DistanceResult res;
    const double a = params.a, b = params.b, c = params.c, K = params.K;
    if (b == 0.0) return res;
    const double root = -2.0 * c / b;
    res.root = root;
    if (root <= 1e-9 || rho0 <= 0.0 || std::fabs(rho0 - root) < 1e-12) return res;
    const double B0 = b * rho0 + 2.0 * c;
    if (K * B0 >= 0.0) return res;  // rho0 outside the positivity region
    auto Q = [a, b, c](double r) { return a * r * r + b * r + c; };
    if (Q(root) <= 1e-9) return res;  // root not adjacent to an admissible interval
    for (int i = 1; i <= 256; ++i) {
        const double r = root + (rho0 - root) * double(i) / 256.0;
        if (r <= 1e-9 || Q(r) <= 1e-9) return res;
    }
    const double sigma = rho0 > root ? 1.0 : -1.0;
    const double w0 = std::sqrt(std::fabs(rho0 - root));
    auto f = [&](double w) {
        const double r = root + sigma * w * w;
        return w * w / (r * std::sqrt(Q(r)));
    };
    quad::QuadratureResult qr = quad::adaptive_simpson(f, 0.0, w0, 1e-12);
    const double pref = std::sqrt(std::fabs(K) * std::fabs(b));
    res.applicable = true;
    res.value = pref * qr.value;
    res.error_bound = pref * qr.error_bound + 1e-12;
    return res;
}

}  // namespace qkgeo
