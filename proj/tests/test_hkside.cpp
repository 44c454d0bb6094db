#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qkgeo/hkside.hpp"

using namespace qkgeo;

namespace {

std::vector<Point> pts(const Chart& c, int n, uint64_t seed = 7) { return c.sample(n, seed); }

double form_max(const PForm& w, const Point& p) {
    double m = 0.0;
    for (double x : w.values(p)) m = std::max(m, std::fabs(x));
    return m;
}

double mat_max(const Mat& m) {
    double r = 0.0;
    for (const auto& row : m)
        for (double x : row) r = std::max(r, std::fabs(x));
    return r;
}

Mat endo_values(const EndoField& e, const Point& p) { return e.values(p); }

double endo_sq_plus_id(const EndoField& e, const Point& p) {
    Mat j = endo_values(e, p);
    const size_t n = j.size();
    double r = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k) {
            double s = (i == k) ? 1.0 : 0.0;
            for (size_t l = 0; l < n; ++l) s += j[i][l] * j[l][k];
            r = std::max(r, std::fabs(s));
        }
    return r;
}

}  // namespace

TEST_CASE("the separable family and its gauge images solve the Toda equation") {
    for (auto [a, b, c] : {std::array<double, 3>{0, 1, 1}, {1, 1, 1}, {1, -1, 0.125}}) {
        TodaSolution sol = separable_toda(a, b, c, -1.0);
        for (const Point& p : pts(sol.chart, 4))
            CHECK(std::fabs(toda_residual(sol, p)) < 1e-10);
        TodaSolution scaled = gauge_scaled(sol, 1.7);
        for (const Point& p : pts(scaled.chart, 3))
            CHECK(std::fabs(toda_residual(scaled, p)) < 1e-10);
    }
    TodaSolution flat = constant_toda(0.3, -1.0);
    for (const Point& p : pts(flat.chart, 3)) CHECK(std::fabs(toda_residual(flat, p)) < 1e-14);

    TodaSolution bad = perturbed_separable_toda(0, 1, 1, -1.0, 0.05);
    double worst = 0.0;
    for (const Point& p : pts(bad.chart, 4))
        worst = std::max(worst, std::fabs(toda_residual(bad, p)));
    CHECK(worst > 1e-3);
    CHECK_THROWS_AS((void)make_toda_solution(bad.chart, bad.u, bad.du, bad.K),
                    InvalidTodaSolutionError);
}

TEST_CASE("the ansatz metric is Ricci-flat with a closed Kaehler form") {
    TodaSolution sol = separable_toda(1, 1, 1, -1.0);
    MetricField g = boyer_finley_metric(sol);
    PForm w1 = omega1_bf(sol);
    VectorField Z = bf_vector_Z(sol.chart);
    ScalarField fZ = bf_f_Z(sol);
    PForm dw1 = tl::exterior_derivative(w1);
    for (const Point& p : pts(sol.chart, 4)) {
        CHECK(mat_max(tl::ricci(g, p)) < 1e-9);
        CHECK(form_max(dw1, p) < 1e-10);
        CHECK(mat_max(tl::lie_derivative_metric(g, Z, p)) < 1e-11);
        // moment map for Z: i_Z omega1 = -d f_Z
        PForm resid = tl::pform_add(tl::interior_product(Z, w1), tl::scalar_d(fZ));
        CHECK(form_max(resid, p) < 1e-11);
        // f_Z is linear in rho with slope -2K
        CHECK(fZ.value(p) == doctest::Approx(2.0 * p[0]).epsilon(1e-12));
    }
}

TEST_CASE("rotating Killing data on the ansatz satisfies the fit conditions") {
    TodaSolution sol = separable_toda(0, 1, 1, -1.0);
    RotatingKillingData d = rotating_data(boyer_finley_metric(sol), bf_vector_Z(sol.chart),
                                          bf_f_Z(sol), omega1_bf(sol), 0.0);
    for (const Point& p : pts(d.chart, 4)) {
        CHECK(criterion_fit_residual(d, p) < 1e-9);
        CHECK(integrability_criterion(d, p) < 1e-9);
        CHECK(nabla_zz_span_residual(d, p) < 1e-9);
        CHECK(endo_sq_plus_id(d.I1, p) < 1e-10);
        IHReport r = prop_IH_checks(d, p);
        CHECK(r.omega_residual < 1e-9);
        CHECK(r.skew_residual < 1e-9);
        for (double x : r.commute_residuals) CHECK(x < 1e-9);
    }
}

TEST_CASE("sigma-tilde, the conformal factor, and the deformed metric in dim 4") {
    TodaSolution sol = separable_toda(0, 1, 1, -1.0);
    RotatingKillingData d = rotating_data(boyer_finley_metric(sol), bf_vector_Z(sol.chart),
                                          bf_f_Z(sol), omega1_bf(sol), 0.0);
    PForm st = sigma_tilde(d);
    PForm dst = tl::exterior_derivative(st);
    PForm dfz = tl::scalar_d(d.f_Z);
    ScalarField phi = phi_by_quadrature(d, 0.6);
    ScalarField xi = xi_field(d);
    MetricField q = elementary_deformation(d.g, d);
    for (const Point& p : pts(d.chart, 4)) {
        const double fz = d.f_Z.value(p), fh = d.f_H.value(p), ps = d.psi.value(p);
        // omega_H is proportional to sigma-tilde with the stated factor
        const double fac = fz * fz / fh * (1.0 + 2.0 * ps);
        PForm prop = tl::pform_add(d.omegaH, tl::pform_scale(fac, st));
        CHECK(form_max(prop, p) < 1e-9);
        // conformal-Kaehler condition on the quotient data
        PForm cond = tl::pform_add(
            tl::pform_add(tl::wedge(tl::pform_scale_field(xi, dfz), st), dst),
            tl::pform_scale_field(ScalarField(d.chart, [&](const Point& q2, int order) {
                                      Jet f = d.f_Z.eval(q2, order);
                                      return -recip(f * f);
                                  }), tl::wedge(dfz, d.omegaH)));
        CHECK(form_max(cond, p) < 1e-8);
        // d phi = xi d f_Z by construction of the quadrature
        PForm dphi_res = tl::pform_sub(tl::scalar_d(phi), tl::pform_scale_field(xi, dfz));
        CHECK(form_max(dphi_res, p) < 1e-7);
        // dim-4 elementary deformation is the single conformal rescaling
        Mat gv = d.g.values(p), qv = q.values(p);
        const double s = fh / (fz * fz);
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 4; ++j)
                CHECK(std::fabs(qv[i][j] - s * gv[i][j]) < 1e-10 * (1.0 + std::fabs(s * gv[i][j])));
        auto sig = signature_counts(q, p);
        CHECK(sig[1] == 0);
        CHECK(sig[0] + sig[2] == 4);
    }
}

TEST_CASE("flat models: quaternionic relations and the rotation of the triple") {
    RigidCmapModel m = rigid_cmap_model(1);
    RotatingKillingData d = cmap_rotating_data(m, 0.0);
    REQUIRE(m.triple.size() == 3);
    for (const Point& p : pts(m.chart, 3)) {
        for (const EndoField& I : m.triple) CHECK(endo_sq_plus_id(I, p) < 1e-12);
        // I1 I2 = I3
        Mat a = m.triple[0].values(p), b = m.triple[1].values(p), c = m.triple[2].values(p);
        double r = 0.0;
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < a.size(); ++j) {
                double s = -c[i][j];
                for (size_t k = 0; k < a.size(); ++k) s += a[i][k] * b[k][j];
                r = std::max(r, std::fabs(s));
            }
        CHECK(r < 1e-12);
        // Z preserves I1 and rotates I2 into I3 at unit rate
        CHECK(mat_max(tl::lie_derivative_metric(m.g, m.Z, p)) < 1e-12);
        CHECK(mat_max(tl::lie_derivative_endo(m.triple[0], m.Z, p)) < 1e-12);
        Mat l2 = tl::lie_derivative_endo(m.triple[1], m.Z, p);
        Mat l3 = tl::lie_derivative_endo(m.triple[2], m.Z, p);
        double r2 = 0.0, r3 = 0.0;
        for (size_t i = 0; i < l2.size(); ++i)
            for (size_t j = 0; j < l2.size(); ++j) {
                r2 = std::max(r2, std::fabs(l2[i][j] - c[i][j]));
                r3 = std::max(r3, std::fabs(l3[i][j] + b[i][j]));
            }
        CHECK(r2 < 1e-11);
        CHECK(r3 < 1e-11);
        // psi = -1 for these models
        CHECK(d.psi.value(p) == doctest::Approx(-1.0).epsilon(1e-10));
        CHECK(criterion_fit_residual(d, p) < 1e-10);
        CHECK(nabla_zz_span_residual(d, p) < 1e-10);
    }
    // the perturbed control breaks the Killing property
    RigidCmapModel bad = perturbed_cmap_model(1);
    double worst = 0.0;
    for (const Point& p : pts(bad.chart, 3))
        worst = std::max(worst, mat_max(tl::lie_derivative_metric(bad.g, bad.Z, p)));
    CHECK(worst > 1e-3);
}

TEST_CASE("the closed-form derivative of sigma-tilde matches the numeric one") {
    for (int n : {1, 2}) {
        RigidCmapModel m = rigid_cmap_model(n);
        RotatingKillingData d = cmap_rotating_data(m, 0.0);
        PForm st = sigma_tilde(d);
        PForm dst_num = tl::exterior_derivative(st);
        PForm dst_formula = d_sigma_tilde_formula(d);
        PForm resid = tl::pform_sub(dst_num, dst_formula);
        for (const Point& p : pts(m.chart, 3)) CHECK(form_max(resid, p) < 1e-8);
    }
}

TEST_CASE("higher-dimensional hypothesis: vertical invariance and the half rate") {
    for (int n : {2, 3}) {
        RigidCmapModel m = rigid_cmap_model(n);
        for (const Point& p : pts(m.chart, 2)) {
            HighdimResult h = highdim_condition(m, p);
            CHECK(h.vertical_nabla_z_max < 1e-10);
            CHECK(h.deviation_max == doctest::Approx(0.5).epsilon(1e-8));
        }
    }
    RigidCmapModel bad = perturbed_cmap_model(2);
    double worst = 0.0;
    for (const Point& p : pts(bad.chart, 2)) {
        HighdimResult h = highdim_condition(bad, p);
        worst = std::max(worst, std::fabs(h.deviation_max - 0.5) + h.vertical_nabla_z_max);
    }
    CHECK(worst > 1e-3);
}

TEST_CASE("the admissibility window for the family behaves sensibly") {
    auto [lo, hi] = family_rho_window(0, 1, 1, -1.0, true);
    CHECK(lo < hi);
    for (double t : {0.0, 0.5, 1.0}) {
        const double rho = lo + t * (hi - lo);
        CHECK(rho + 1.0 > 0.0);  // a rho^2 + b rho + c > 0 on the window
    }
    auto [lo2, hi2] = family_rho_window(1, -1, 0.125, -1.0, true);
    CHECK(lo2 < hi2);
    CHECK(lo2 * lo2 - lo2 + 0.125 > 0.0);
}
