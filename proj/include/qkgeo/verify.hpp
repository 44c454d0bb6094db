#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qkgeo/qkside.hpp"

namespace qkgeo {
namespace verify {

struct RegistryError : std::runtime_error {
    explicit RegistryError(const std::string& what) : std::runtime_error(what) {}
};

enum class Expected { pass, fail };

struct CheckSpec {
    std::string name;
    std::string target;
    double tolerance = 0.0;  // <= 0 selects the registry default
    int sample_count = 0;    // <= 0 selects the registry default
    unsigned seed = 42;
    Expected expected = Expected::pass;
};

struct Report {
    CheckSpec check;  // with defaults resolved
    Residual residual;
    bool verdict = false;
    std::vector<std::pair<Point, double>> artifacts;  // per-point values, on request
};

/// Residual floor above which an expected-fail check counts as confirmed.
inline constexpr double kFailFloor = 1e-3;

/// Parsed model identifier ("gabc:a,b,c,K", "bf:perturbed", "cmap:n", ...).
struct ModelRef {
    enum class Kind { gabc, bf, cmap };
    Kind kind = Kind::gabc;
    bool perturbed = false;
    bool noflip = false;
    GabcParams params;
    int n = 1;
};
ModelRef parse_target(const std::string& id);

std::vector<std::string> check_names();    // registry order, stable
std::vector<std::string> model_patterns();  // identifier grammar, for listings
double default_tolerance(const std::string& check);
int default_sample_count(const std::string& check);
/// A registered target on which the (pass-type) check must fail.
std::string negative_control_target(const std::string& check);
/// Whether the check is meaningful for the given target.
bool check_applies(const std::string& check, const std::string& target);

Report run_check(const CheckSpec& spec, bool with_artifacts = false);
std::vector<Report> run_suite(const std::vector<CheckSpec>& specs,
                              bool with_artifacts = false);
/// All applicable registry checks on one target, in registry order.
std::vector<CheckSpec> default_suite(const std::string& target);
/// One expected-fail spec per pass-type check (the registered controls).
std::vector<CheckSpec> negative_controls();

}  // namespace verify
}  // namespace qkgeo
