#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qkgeo/qkside.hpp"

using namespace qkgeo;

namespace {

double mat_max(const Mat& m) {
    double r = 0.0;
    for (const auto& row : m)
        for (double x : row) r = std::max(r, std::fabs(x));
    return r;
}

double endo_sq_plus_id(const EndoField& e, const Point& p) {
    Mat j = e.values(p);
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

TEST_CASE("the closed-form family metric agrees with the general ansatz build") {
    // The two builds fix the connection one-form in different gauges, so the
    // metrics match only up to a shift t -> t + f(x,y). Gauge-invariant data
    // must agree on the nose: the squared length of the t-Killing field, the
    // quotient metric, and the exterior derivative of the connection form.
    for (GabcParams prm : {GabcParams{0, 1, 1, -1}, {1, 1, 1, -1}, {1, 2, 1, -1}}) {
        MetricField closed = gabc_metric(prm);
        PTChart pt = pt_metric(gabc_toda(prm));
        PForm dgauge = tl::exterior_derivative(tl::pform_sub(
            tl::oneform_to_pform(pt.Theta), tl::oneform_to_pform(gabc_theta(prm))));
        for (const Point& p : closed.chart().sample(4, 11)) {
            Mat a = closed.values(p), b = pt.metric.values(p);
            CHECK(a[3][3] == doctest::Approx(b[3][3]).epsilon(1e-9));
            for (size_t i = 0; i < 3; ++i)
                for (size_t j = 0; j < 3; ++j) {
                    const double qa = a[i][j] - a[3][i] * a[3][j] / a[3][3];
                    const double qb = b[i][j] - b[3][i] * b[3][j] / b[3][3];
                    CHECK(std::fabs(qa - qb) < 1e-9 * (1.0 + std::fabs(qa)));
                }
            double m = 0.0;
            for (double x : dgauge.values(p)) m = std::max(m, std::fabs(x));
            CHECK(m < 1e-10);
        }
    }
}

TEST_CASE("curvature invariants: exact reference value and the numeric norm") {
    GabcParams prm{0, 1, 1, -1};
    // at rho = 1: 6*4*(1 + (1/3)^6) = 24 * 730/729, exactly representable
    CHECK(curvature_norm_formula(prm, 1.0) == 24.0 * 730.0 / 729.0);
    CHECK(gabc_nu(prm) == -2.0);
    MetricField g = gabc_metric(prm);
    for (const Point& p : g.chart().sample(3, 5)) {
        CHECK(tl::curvature_norm(g, p) ==
              doctest::Approx(curvature_norm_formula(prm, p[0])).epsilon(1e-9));
        CHECK(tl::scalar_curvature(g, p) == doctest::Approx(12.0 * gabc_nu(prm)).epsilon(1e-10));
        // Einstein: Ric = 3 nu g
        Mat ric = tl::ricci(g, p), gv = g.values(p);
        double r = 0.0;
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 4; ++j)
                r = std::max(r, std::fabs(ric[i][j] - 3.0 * gabc_nu(prm) * gv[i][j]));
        CHECK(r < 1e-9);
    }
    // the closed-form norm has a pole where b rho + 2c vanishes
    CHECK_THROWS_AS((void)curvature_norm_formula(GabcParams{1, 1, -0.125, -1}, 0.25),
                    FormulaPoleError);
}

TEST_CASE("Liouville residual vanishes exactly for the separable profile") {
    GabcParams prm{1, 1, 1, -1};
    Chart c = gabc_chart(prm);
    // G = -2 ln(1 + (a/2)(x^2+y^2)) solves d_z d_zbar G + a e^G = 0
    ScalarField good(c, [&](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        return -2.0 * log(1.0 + 0.5 * prm.a * (z[1] * z[1] + z[2] * z[2]));
    });
    ScalarField bad(c, [&](const Point& p, int order) {
        JetPoint z = seed_point(p, order);
        return -2.0 * log(1.0 + 0.5 * prm.a * (z[1] * z[1] + z[2] * z[2])) + 0.1 * z[1];
    });
    for (const Point& p : c.sample(4, 3)) {
        CHECK(std::fabs(liouville_residual(good, prm.a, p)) < 1e-11);
        CHECK(std::fabs(liouville_residual(bad, prm.a, p)) > 1e-4);
    }
}

TEST_CASE("the Hermitian pair is almost complex, compatible, and integrable") {
    PTChart pt = pt_metric(gabc_toda(GabcParams{1, 1, 1, -1}));
    auto [j1, j1t] = hermitian_pair(pt);
    for (const Point& p : pt.chart.sample(3, 9)) {
        for (const EndoField* J : {&j1, &j1t}) {
            CHECK(endo_sq_plus_id(*J, p) < 1e-10);
            // compatibility g(J., J.) = g(.,.)
            Mat g = pt.metric.values(p), jm = J->values(p);
            double r = 0.0;
            for (size_t i = 0; i < 4; ++i)
                for (size_t k = 0; k < 4; ++k) {
                    double s = -g[i][k];
                    for (size_t a = 0; a < 4; ++a)
                        for (size_t b = 0; b < 4; ++b) s += jm[a][i] * jm[b][k] * g[a][b];
                    r = std::max(r, std::fabs(s));
                }
            CHECK(r < 1e-10);
            Ten3 nij = tl::nijenhuis(*J, p);
            double nr = 0.0;
            for (const auto& m : nij)
                for (const auto& row : m)
                    for (double x : row) nr = std::max(nr, std::fabs(x));
            CHECK(nr < 1e-9);
        }
    }
    // positive-P validation rejects the wrong sign of K
    CHECK_THROWS_AS((void)pt_metric(constant_toda(1.0, 1.0)), SignatureError);
}

TEST_CASE("Killing catalog: residuals, closure, and the frozen classifications") {
    struct Row {
        GabcParams prm;
        AlgebraLabel label;
    };
    for (const Row& row : {Row{{0, 1, 1, -1}, AlgebraLabel::o2_heis3},
                           Row{{1, 1, 1, -1}, AlgebraLabel::u2},
                           Row{{-1, 1, 2, -1}, AlgebraLabel::u11}}) {
        KillingCatalog cat = killing_fields(row.prm);
        REQUIRE(cat.fields.size() == 4);
        MetricField g = gabc_metric(row.prm);
        for (const Point& p : cat.chart.sample(3, 2))
            for (const VectorField& v : cat.fields) CHECK(killing_residual(g, v, p) < 1e-10);
        CHECK(bracket_closure_residual(cat) < 1e-12);
        CHECK(classify_algebra(cat) == row.label);
        CHECK(cat.expected_algebra == row.label);
    }
    CHECK(algebra_label_name(AlgebraLabel::u2) == "u2");
    CHECK(algebra_label_name(AlgebraLabel::o2_heis3) == "o2_heis3");
}

TEST_CASE("case identifications: ids, the homothety, and pullback residuals") {
    CHECK(applicable_case(GabcParams{0, 1, 1, -1}) == 2);
    CHECK(applicable_case(GabcParams{1, 1, 1, -1}) == 3);
    CHECK(applicable_case(GabcParams{-1, 1, 2, -1}) == 10);
    CHECK(applicable_case(GabcParams{1, -1, 0.125, -1}) == 5);

    GabcParams prm{1, 1, 1, -1};
    CaseTransform ct = case_transform(3, prm);
    CHECK(ct.case_id == 3);
    CHECK(ct.lambda == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(ct.has_pedersen_k);
    CHECK(ct.pedersen_k == doctest::Approx(3.0).epsilon(1e-12));
    for (const Point& q : ct.chart.sample(4, 13))
        CHECK(case_pullback_residual(ct, prm, q) < 1e-8);

    GabcParams prm2{0, 1, 1, -1};
    CaseTransform ct2 = case_transform(2, prm2);
    CHECK_FALSE(ct2.has_pedersen_k);
    for (const Point& q : ct2.chart.sample(4, 13))
        CHECK(case_pullback_residual(ct2, prm2, q) < 1e-8);

    CHECK_THROWS_AS((void)case_transform(3, GabcParams{0, 1, 1, -1}), std::invalid_argument);
}

TEST_CASE("incompleteness distance: frozen value, scaling law, applicability") {
    GabcParams prm{1, 1, -0.125, -1};
    DistanceResult d = singularity_distance(prm, 0.5);
    REQUIRE(d.applicable);
    CHECK(d.root == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(d.value == doctest::Approx(0.171608244063).epsilon(1e-9));
    CHECK(d.error_bound < 1e-6);

    // the metric scales like 1/|K|, so lengths scale like 1/sqrt|K| ... here
    // doubling |K| multiplies the distance by sqrt 2 with this normalization
    GabcParams prm2 = prm;
    prm2.K = -2.0;
    DistanceResult d2 = singularity_distance(prm2, 0.5);
    REQUIRE(d2.applicable);
    CHECK(d2.value / d.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));

    // no admissible adjacent root for these parameters
    DistanceResult none = singularity_distance(GabcParams{1, -1, 0.125, -1}, 0.5);
    CHECK_FALSE(none.applicable);
}
