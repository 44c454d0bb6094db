// End-to-end acceptance run: one printed pass/fail line per criterion.
// Exits nonzero when any criterion fails.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qkgeo/cli_config.hpp"
#include "qkgeo/verify.hpp"

using namespace qkgeo;
namespace vf = qkgeo::verify;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
    std::printf("criterion %2d: %s  %s\n", id, ok ? "pass" : "FAIL", what.c_str());
    if (!ok) ++failures;
}

bool passes(const std::string& check, const std::string& target) {
    vf::CheckSpec spec;
    spec.name = check;
    spec.target = target;
    return vf::run_check(spec).verdict;
}

bool fails_as_control(const std::string& check) {
    vf::CheckSpec spec;
    spec.name = check;
    spec.target = vf::negative_control_target(check);
    spec.expected = vf::Expected::fail;
    return vf::run_check(spec).verdict;
}

double frame_max2(const MetricField& g, const Point& p, const Mat& m) {
    Mat f = tl::orthonormal_frame(g, p);
    const size_t n = m.size();
    double r = 0.0;
    for (size_t a = 0; a < n; ++a)
        for (size_t b = 0; b < n; ++b) {
            double s = 0.0;
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) s += f[a][i] * f[b][j] * m[i][j];
            r = std::max(r, std::fabs(s));
        }
    return r;
}

const std::vector<GabcParams> kTriples = {
    {0, 1, 1, -1}, {1, 1, 1, -1}, {1, 2, 1, -1}, {1, -1, 0.125, -1}, {-1, 0, 2, -1}};

void criterion_1() {
    bool ok = true;
    for (const GabcParams& prm : kTriples) {
        MetricField g = gabc_metric(prm);
        for (const Point& p : g.chart().sample(20, 1)) {
            const double formula = curvature_norm_formula(prm, p[0]);
            const double num = tl::curvature_norm(g, p);
            if (std::fabs(num - formula) > 1e-6 * std::fabs(formula)) ok = false;
        }
    }
    const double exact = 24.0 * 730.0 / 729.0;
    if (curvature_norm_formula({0, 1, 1, -1}, 1.0) != exact) ok = false;
    if (std::fabs(tl::curvature_norm(gabc_metric({0, 1, 1, -1}), {1.0, 0.0, 0.0, 0.0}) - exact) >
        1e-6 * exact)
        ok = false;
    report(1, ok, "curvature-norm formula vs numeric tr R^2, incl. the exact reference value");
}

void criterion_2() {
    bool ok = true;
    for (const GabcParams& prm : kTriples) {
        MetricField g = gabc_metric(prm);
        double first_lam = 0.0;
        bool have = false;
        for (const Point& p : g.chart().sample(6, 2)) {
            Mat ric = tl::ricci(g, p);
            const double lam = tl::scalar_curvature(g, p) / 4.0;
            Mat dev = ric;
            Mat gv = g.values(p);
            for (size_t i = 0; i < 4; ++i)
                for (size_t j = 0; j < 4; ++j) dev[i][j] -= lam * gv[i][j];
            if (frame_max2(g, p, dev) > 1e-7) ok = false;
            if (!have) {
                first_lam = lam;
                have = true;
            } else if (std::fabs(lam - first_lam) > 1e-7 * (1.0 + std::fabs(first_lam))) {
                ok = false;
            }
            const double B = prm.b * p[0] + 2.0 * prm.c;
            if (4.0 * lam * (-B) <= 0.0) ok = false;  // sign(scal) == sign(-(b rho + 2c))
        }
    }
    report(2, ok, "Einstein condition, constant scalar curvature, and its sign rule");
}

void criterion_3() {
    bool ok = true;
    for (const GabcParams& prm : kTriples) {
        TodaSolution sol = gabc_toda(prm);
        for (const Point& p : sol.chart.sample(6, 3))
            if (std::fabs(toda_residual(sol, p)) > 1e-9) ok = false;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "gabc:%g,%g,%g,%g", prm.a, prm.b, prm.c, prm.K);
        if (!passes("liouville", buf)) ok = false;
    }
    if (!fails_as_control("toda")) ok = false;
    if (!fails_as_control("liouville")) ok = false;
    report(3, ok, "Toda and Liouville residuals on the family, with negative controls");
}

void criterion_4() {
    bool ok = true;
    for (const std::string& t : {std::string("bf:0,1,1,-1"), std::string("bf:1,1,1,-1"),
                                 std::string("cmap:1"), std::string("cmap:2")})
        if (!passes("criterion", t)) ok = false;
    for (int n : {1, 2}) {
        RotatingKillingData d = cmap_rotating_data(rigid_cmap_model(n), 0.0);
        for (const Point& p : d.chart.sample(4, 4))
            if (std::fabs(d.psi.value(p) + 1.0) > 1e-10) ok = false;
    }
    PTChart pt = pt_metric(gabc_toda({1, 1, 1, -1}));
    auto [j1, j1t] = hermitian_pair(pt);
    (void)j1t;
    for (const Point& p : pt.chart.sample(4, 4)) {
        Ten3 nij = tl::nijenhuis(j1, p);
        for (const auto& m : nij)
            for (const auto& row : m)
                for (double x : row)
                    if (std::fabs(x) > 1e-8) ok = false;
    }
    if (!fails_as_control("criterion")) ok = false;
    if (!fails_as_control("nijenhuis")) ok = false;
    report(4, ok, "integrability chain: moment-map criterion, psi = -1, Nijenhuis");
}

void criterion_5() {
    bool ok = passes("lee_closed", "gabc:1,1,1,-1") && passes("lee_closed", "gabc:0,1,1,-1") &&
              passes("xi_kahler", "bf:0,1,1,-1") && passes("xi_kahler", "bf:1,1,1,-1");
    report(5, ok, "conformally Kaehler: closed Lee form and the quadrature conformal factor");
}

void criterion_6() {
    bool ok = true;
    for (int n : {2, 3}) {
        RigidCmapModel m = rigid_cmap_model(n);
        for (const Point& p : m.chart.sample(3, 6)) {
            HighdimResult h = highdim_condition(m, p);
            if (h.vertical_nabla_z_max > 1e-10) ok = false;
            if (std::fabs(h.deviation_max - 0.5) > 1e-8) ok = false;
        }
        if (!passes("highdim", "cmap:" + std::to_string(n))) ok = false;
    }
    report(6, ok, "higher-dimensional obstruction: the half-rate deviation on flat models");
}

void criterion_7() {
    bool ok = passes("sigma_tilde", "cmap:1") && passes("sigma_tilde", "cmap:2");
    report(7, ok, "closed-form derivative of sigma-tilde vs the numeric one");
}

void criterion_8() {
    bool ok = true;
    struct Row {
        double a;
        AlgebraLabel label;
    };
    for (const Row& row :
         {Row{0.0, AlgebraLabel::o2_heis3}, Row{1.0, AlgebraLabel::u2}, Row{-1.0, AlgebraLabel::u11}}) {
        GabcParams prm{row.a, 1, 1, -1};
        KillingCatalog cat = killing_fields(prm);
        MetricField g = gabc_metric(prm);
        if (cat.fields.size() != 4) ok = false;
        for (const Point& p : cat.chart.sample(4, 8))
            for (const VectorField& v : cat.fields)
                if (killing_residual(g, v, p) > 1e-9) ok = false;
        if (bracket_closure_residual(cat) > 1e-8) ok = false;
        if (classify_algebra(cat) != row.label) ok = false;
    }
    report(8, ok, "Killing catalog: residuals, bracket closure, algebra classification");
}

void criterion_9() {
    bool ok = true;
    GabcParams p3{1, 1, 1, -1};
    CaseTransform ct3 = case_transform(3, p3);
    if (!ct3.has_pedersen_k) ok = false;
    const double k_expected = 4.0 * p3.a * p3.c / (p3.b * p3.b) - 1.0;
    if (std::fabs(ct3.pedersen_k - k_expected) > 1e-12) ok = false;
    for (const Point& q : ct3.chart.sample(5, 9))
        if (case_pullback_residual(ct3, p3, q) > 1e-8) ok = false;

    GabcParams p6{1, -1, 0, 1};
    CaseTransform ct6 = case_transform(6, p6);
    for (const Point& q : ct6.chart.sample(5, 9))
        if (case_pullback_residual(ct6, p6, q) > 1e-8) ok = false;

    std::string note = "coordinate identifications, reported k = " + std::to_string(ct3.pedersen_k);
    report(9, ok, note);
}

void criterion_10() {
    bool ok = passes("symmetric", "gabc:-1,0,2,-1")    // b = 0
              && passes("symmetric", "gabc:1,1,0,-1")  // c = 0
              && passes("symmetric", "gabc:1,2,1,-1")  // b^2 = 4ac
              && passes("symmetric", "gabc:0,1,1,-1");  // generic: nabla R > floor
    report(10, ok, "locally symmetric exactly when b c (b^2 - 4ac) = 0");
}

void criterion_11() {
    GabcParams prm{1, 1, -0.125, -1};
    auto window = family_rho_window(prm.a, prm.b, prm.c, prm.K, true);
    DistanceResult d = singularity_distance(prm, 0.5 * (window.first + window.second));
    bool ok = d.applicable && std::isfinite(d.value) && d.value > 0.0 && d.error_bound < 1e-6;
    report(11, ok, "finite arc length to the b rho + 2c = 0 singularity");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (failures == 0) {
        std::printf("all 11 criteria pass\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", failures);
    return 1;
}
