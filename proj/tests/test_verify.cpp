#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "qkgeo/verify.hpp"

using namespace qkgeo;
namespace vf = qkgeo::verify;

TEST_CASE("the registry lists the checks in a stable order") {
    std::vector<std::string> names = vf::check_names();
    REQUIRE(names.size() == 18);
    CHECK(names.front() == "toda");
    CHECK(names.back() == "singularity_distance");
    const std::vector<std::string> expected = {
        "toda",      "liouville",   "einstein",    "killing",         "rotating",
        "criterion", "prop_ih",     "sigma_tilde", "xi_kahler",       "highdim",
        "nijenhuis", "lee_closed",  "orientation", "algebra",         "case_transform",
        "curvnorm",  "symmetric",   "singularity_distance"};
    CHECK(names == expected);
    for (const std::string& n : names) {
        CHECK(vf::default_tolerance(n) > 0.0);
        CHECK(vf::default_sample_count(n) > 0);
        CHECK_FALSE(vf::negative_control_target(n).empty());
    }
    CHECK_THROWS_AS((void)vf::default_tolerance("no_such_check"), vf::RegistryError);
    CHECK_FALSE(vf::model_patterns().empty());
}

TEST_CASE("target identifiers parse into model references") {
    vf::ModelRef g = vf::parse_target("gabc:1,2,1,-1");
    CHECK(g.kind == vf::ModelRef::Kind::gabc);
    CHECK(g.params.a == 1.0);
    CHECK(g.params.b == 2.0);
    CHECK(g.params.c == 1.0);
    CHECK(g.params.K == -1.0);
    CHECK_FALSE(g.perturbed);

    vf::ModelRef gd = vf::parse_target("gabc");
    CHECK(gd.params.b == 1.0);  // family defaults

    vf::ModelRef b = vf::parse_target("bf:perturbed");
    CHECK(b.kind == vf::ModelRef::Kind::bf);
    CHECK(b.perturbed);

    vf::ModelRef c = vf::parse_target("cmap:perturbed:2");
    CHECK(c.kind == vf::ModelRef::Kind::cmap);
    CHECK(c.perturbed);
    CHECK(c.n == 2);

    vf::ModelRef nf = vf::parse_target("gabc:noflip");
    CHECK(nf.noflip);

    CHECK_THROWS_AS((void)vf::parse_target("torus:1"), vf::RegistryError);
    CHECK_THROWS_AS((void)vf::parse_target("gabc:1,2"), vf::RegistryError);
}

TEST_CASE("applicability reflects what each model can express") {
    CHECK(vf::check_applies("toda", "bf:0,1,1,-1"));
    CHECK(vf::check_applies("einstein", "gabc:0,1,1,-1"));
    CHECK_FALSE(vf::check_applies("einstein", "bf:0,1,1,-1"));  // Ricci-flat side
    CHECK_FALSE(vf::check_applies("highdim", "cmap:1"));
    CHECK(vf::check_applies("highdim", "cmap:2"));
    CHECK(vf::check_applies("algebra", "gabc:1,1,1,-1"));
    // a rank-deficient catalog: with b = 0 the fourth field is dependent
    CHECK_FALSE(vf::check_applies("algebra", "gabc:-1,0,2,-1"));
    CHECK_FALSE(vf::check_applies("singularity_distance", "gabc:1,-1,0.125,-1"));
    CHECK(vf::check_applies("singularity_distance", "gabc:1,1,-0.125,-1"));

    // default_suite is exactly the applicable subset, in registry order
    for (const std::string& target : {std::string("bf:0,1,1,-1"), std::string("gabc:1,1,1,-1")}) {
        std::vector<vf::CheckSpec> suite = vf::default_suite(target);
        std::vector<std::string> want;
        for (const std::string& n : vf::check_names())
            if (vf::check_applies(n, target)) want.push_back(n);
        REQUIRE(suite.size() == want.size());
        for (size_t i = 0; i < suite.size(); ++i) {
            CHECK(suite[i].name == want[i]);
            CHECK(suite[i].target == target);
        }
    }
    CHECK(vf::default_suite("bf:0,1,1,-1").size() == 6);
}

TEST_CASE("a passing check is deterministic and carries resolved defaults") {
    vf::CheckSpec spec;
    spec.name = "einstein";
    spec.target = "gabc:0,1,1,-1";
    vf::Report r1 = vf::run_check(spec, true);
    vf::Report r2 = vf::run_check(spec, true);
    CHECK(r1.verdict);
    CHECK(r1.check.tolerance == vf::default_tolerance("einstein"));
    CHECK(r1.check.sample_count == vf::default_sample_count("einstein"));
    CHECK(r1.residual.max_abs == r2.residual.max_abs);  // bit-identical reruns
    CHECK(r1.residual.mean_abs == r2.residual.mean_abs);
    CHECK(r1.residual.max_abs < vf::default_tolerance("einstein"));
    CHECK(int(r1.artifacts.size()) == r1.check.sample_count);
    CHECK(r1.residual.argmax_point.size() == 4);

    // a different seed moves the sample plan but not the verdict
    vf::CheckSpec spec2 = spec;
    spec2.seed = 7;
    vf::Report r3 = vf::run_check(spec2, false);
    CHECK(r3.verdict);
    CHECK(r3.artifacts.empty());

    // an explicit (absurdly tight) tolerance overrides the default
    vf::CheckSpec tight = spec;
    tight.tolerance = 1e-300;
    CHECK_FALSE(vf::run_check(tight).verdict);

    CHECK_THROWS_AS((void)vf::run_check({"no_such_check", "gabc", 0.0, 0, 42}),
                    vf::RegistryError);
}

TEST_CASE("every registered negative control fails by a clear margin") {
    std::vector<vf::CheckSpec> controls = vf::negative_controls();
    REQUIRE(controls.size() == vf::check_names().size());
    std::vector<vf::Report> reports = vf::run_suite(controls);
    REQUIRE(reports.size() == controls.size());
    for (const vf::Report& r : reports) {
        INFO("check ", r.check.name, " on ", r.check.target);
        CHECK(r.check.expected == vf::Expected::fail);
        CHECK(r.verdict);  // verdict: the expected failure was observed
        CHECK(r.residual.max_abs > vf::kFailFloor);
    }
}

TEST_CASE("the full default suite passes on a representative of each model") {
    for (const std::string& target :
         {std::string("gabc:0,1,1,-1"), std::string("bf:1,1,1,-1"), std::string("cmap:2")}) {
        for (const vf::Report& r : vf::run_suite(vf::default_suite(target))) {
            INFO("check ", r.check.name, " on ", target);
            CHECK(r.verdict);
        }
    }
}
