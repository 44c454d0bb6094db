#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qkgeo/jet.hpp"

using namespace qkgeo;

namespace {

// reference scalar used throughout: smooth, all mixed partials nonzero
double ref_fn(const Point& p) {
    return std::exp(std::sin(p[0]) * p[1]) + std::log(2.0 + std::cos(p[2])) * p[0] +
           p[1] * p[2] * p[2];
}

Jet ref_jet(const Point& p, int order) {
    JetPoint z = seed_point(p, order);
    return exp(sin(z[0]) * z[1]) + log(2.0 + cos(z[2])) * z[0] + z[1] * z[2] * z[2];
}

// central finite differences of ref as an independent oracle
double fd1(const Point& p, int i, double h = 1e-5) {
    Point a = p, b = p;
    a[size_t(i)] += h;
    b[size_t(i)] -= h;
    return (ref_fn(a) - ref_fn(b)) / (2.0 * h);
}

double fd2(const Point& p, int i, int j, double h = 1e-4) {
    Point a = p, b = p;
    a[size_t(i)] += h;
    b[size_t(i)] -= h;
    return (fd1(a, j, h) - fd1(b, j, h)) / (2.0 * h);
}

double fd3(const Point& p, int i, int j, int k, double h = 1e-3) {
    Point a = p, b = p;
    a[size_t(i)] += h;
    b[size_t(i)] -= h;
    return (fd2(a, j, k, h) - fd2(b, j, k, h)) / (2.0 * h);
}

void check_jet_close(const Jet& a, const Jet& b, double tol) {
    const int d = a.dim();
    CHECK(a.order() == b.order());
    CHECK(a.value() == doctest::Approx(b.value()).epsilon(tol));
    if (a.order() >= 1)
        for (int i = 0; i < d; ++i) CHECK(std::fabs(a.d1(i) - b.d1(i)) < tol);
    if (a.order() >= 2)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) CHECK(std::fabs(a.d2(i, j) - b.d2(i, j)) < tol);
    if (a.order() >= 3)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) CHECK(std::fabs(a.d3(i, j, k) - b.d3(i, j, k)) < tol);
}

}  // namespace

TEST_CASE("seeded coordinate jets carry the identity derivatives") {
    Point p = {0.3, -0.7, 1.1};
    JetPoint z = seed_point(p, 2);
    for (int i = 0; i < 3; ++i) {
        CHECK(z[size_t(i)].value() == p[size_t(i)]);
        for (int j = 0; j < 3; ++j) {
            CHECK(z[size_t(i)].d1(j) == (i == j ? 1.0 : 0.0));
            for (int k = 0; k < 3; ++k) CHECK(z[size_t(i)].d2(j, k) == 0.0);
        }
    }
    Jet c = Jet::constant(4.25, 3, 3);
    CHECK(c.value() == 4.25);
    CHECK(c.d1(1) == 0.0);
    CHECK(c.d3(0, 1, 2) == 0.0);
}

TEST_CASE("order-3 jets of a composite scalar match finite differences") {
    Point p = {0.4, -0.6, 0.9};
    Jet j = ref_jet(p, 3);
    CHECK(j.value() == doctest::Approx(ref_fn(p)).epsilon(1e-14));
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(j.d1(i) - fd1(p, i)) < 1e-8);
    for (int i = 0; i < 3; ++i)
        for (int k = i; k < 3; ++k) CHECK(std::fabs(j.d2(i, k) - fd2(p, i, k)) < 1e-6);
    for (int i = 0; i < 3; ++i)
        for (int k = i; k < 3; ++k)
            for (int m = k; m < 3; ++m) CHECK(std::fabs(j.d3(i, k, m) - fd3(p, i, k, m)) < 2e-4);
}

TEST_CASE("stored second and third derivatives are symmetric") {
    Point p = {0.4, -0.6, 0.9};
    Jet j = ref_jet(p, 3);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            CHECK(j.d2(i, k) == j.d2(k, i));
            for (int m = 0; m < 3; ++m) {
                CHECK(j.d3(i, k, m) == j.d3(k, i, m));
                CHECK(j.d3(i, k, m) == j.d3(i, m, k));
            }
        }
}

TEST_CASE("algebraic inverse identities hold slotwise") {
    Point p = {0.8, 0.3, -0.5};
    JetPoint z = seed_point(p, 3);
    Jet u = 1.5 + z[0] * z[1] + cos(z[2]);
    Jet one = Jet::constant(1.0, 3, 3);

    check_jet_close(recip(u) * u, one, 1e-13);
    check_jet_close(exp(log(u)), u, 1e-13);
    check_jet_close(sqrt(u) * sqrt(u), u, 1e-13);
    check_jet_close(sin(u) * sin(u) + cos(u) * cos(u), one, 1e-13);
    check_jet_close(pow(u, 3.0), u * u * u, 1e-12);
}

TEST_CASE("multiplication is commutative and associative to the last slot") {
    Point p = {0.8, 0.3, -0.5};
    JetPoint z = seed_point(p, 3);
    Jet a = exp(z[0]) + z[1], b = sin(z[1] * z[2]) + 2.0, c = recip(1.0 + z[2] * z[2]);
    check_jet_close(a * b, b * a, 1e-15);
    check_jet_close((a * b) * c, a * (b * c), 1e-14);
}

TEST_CASE("partial() lowers the order and shifts the derivative blocks") {
    Point p = {0.4, -0.6, 0.9};
    Jet j = ref_jet(p, 3);
    for (int i = 0; i < 3; ++i) {
        Jet d = j.partial(i);
        CHECK(d.order() == 2);
        CHECK(d.value() == j.d1(i));
        for (int k = 0; k < 3; ++k) {
            CHECK(d.d1(k) == j.d2(i, k));
            for (int m = 0; m < 3; ++m) CHECK(d.d2(k, m) == j.d3(i, k, m));
        }
    }
    // Leibniz at the partial level
    JetPoint z = seed_point(p, 3);
    Jet a = exp(z[0] * z[1]), b = 2.0 + sin(z[2]) + z[0];
    Jet lhs = (a * b).partial(0);
    Jet rhs = a.partial(0) * b.truncated(2) + a.truncated(2) * b.partial(0);
    check_jet_close(lhs, rhs, 1e-13);
}

TEST_CASE("truncation drops blocks and refuses to invent them") {
    Point p = {0.4, -0.6, 0.9};
    Jet j = ref_jet(p, 2);
    Jet t = j.truncated(1);
    CHECK(t.order() == 1);
    CHECK(t.value() == j.value());
    CHECK(t.d1(2) == j.d1(2));
    CHECK_THROWS_AS((void)t.truncated(2), JetOrderError);
    CHECK_THROWS_AS((void)t.d2(0, 0), JetOrderError);
    CHECK_THROWS_AS((void)Jet::constant(1.0, 3, 0).partial(0), JetOrderError);
}

TEST_CASE("mixed-order arithmetic is rejected rather than silently truncated") {
    Jet a = Jet::constant(1.0, 3, 2), b = Jet::constant(1.0, 3, 1);
    CHECK_THROWS_AS((void)(a + b), JetOrderError);
    CHECK_THROWS_AS((void)(a * b), JetOrderError);
    Jet c = Jet::constant(1.0, 2, 2);
    CHECK_THROWS_AS((void)(a + c), JetOrderError);
}

TEST_CASE("set_d2 and set_d3 write all symmetric copies") {
    Jet j = Jet::constant(0.0, 3, 3);
    j.set_d2(0, 2, 5.0);
    CHECK(j.d2(2, 0) == 5.0);
    j.set_d3(0, 1, 2, 7.0);
    CHECK(j.d3(2, 1, 0) == 7.0);
    CHECK(j.d3(1, 2, 0) == 7.0);
}

TEST_CASE("compose applies the univariate chain rule") {
    Point p = {0.4, -0.6, 0.9};
    JetPoint z = seed_point(p, 3);
    Jet u = z[0] * z[1] + z[2];
    const double x = u.value();
    Jet via_compose = compose(u, std::exp(x), std::exp(x), std::exp(x), std::exp(x));
    check_jet_close(via_compose, exp(u), 1e-13);
}
