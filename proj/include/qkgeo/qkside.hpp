#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qkgeo/fields.hpp"
#include "qkgeo/hkside.hpp"
#include "qkgeo/tensorlab.hpp"

namespace qkgeo {

/// Parameters of the explicit self-dual Einstein family.
struct GabcParams {
    double a = 0.0, b = 1.0, c = 1.0, K = -1.0;
};

struct SignatureError : std::runtime_error {
    explicit SignatureError(const std::string& what) : std::runtime_error(what) {}
};

struct BracketClosureError : std::runtime_error {
    explicit BracketClosureError(double r)
        : std::runtime_error("Killing fields do not close under the bracket"), residual(r) {}
    double residual;
};

struct FormulaPoleError : std::runtime_error {
    explicit FormulaPoleError(const std::string& what) : std::runtime_error(what) {}
};

// --- the explicit family -----------------------------------------------------

Chart gabc_chart(const GabcParams& params);
MetricField gabc_metric(const GabcParams& params);
OneForm gabc_theta(const GabcParams& params);
/// The family's separable Toda data hosted on the gabc chart.
TodaSolution gabc_toda(const GabcParams& params);

/// 6 nu^2 (1 + b^2 (b^2-4ac)^2 (rho/(b rho + 2c))^6) with nu = 2/K.
double curvature_norm_formula(const GabcParams& params, double rho);
/// nu = 2/K, the reduced scalar curvature of the family.
double gabc_nu(const GabcParams& params);

// --- general Przanowski-Tod charts -------------------------------------------

struct PTChart {
    TodaSolution sol;
    ScalarField P;
    OneForm Theta;
    MetricField metric;
    Chart chart;
};

/// Builds the ansatz metric from a Toda solution; Theta is line-integrated
/// from the prescribed dTheta along coordinate segments (rho, then x).
/// With validate=true, positivity of P is sampled (SignatureError otherwise).
PTChart pt_metric(const TodaSolution& sol, bool validate = true);

/// Wirtinger-expanded Liouville residual d_z d_zbar G + a e^G at p.
double liouville_residual(const ScalarField& G, double a, const Point& p);

/// Candidate Hermitian pair (J1, J1-tilde) from the natural ansatz coframe;
/// the second flips the sign on the (d rho, dt+Theta) plane.
std::pair<EndoField, EndoField> hermitian_pair(const PTChart& chart);

// --- Killing catalog ---------------------------------------------------------

enum class AlgebraLabel { o2_heis3, u2, u11 };
std::string algebra_label_name(AlgebraLabel label);

struct KillingCatalog {
    std::vector<VectorField> fields;
    AlgebraLabel expected_algebra = AlgebraLabel::o2_heis3;
    Chart chart;
    GabcParams params;
};

KillingCatalog killing_fields(const GabcParams& params);

/// Orthonormal-frame max of the Lie derivative of g along V.
double killing_residual(const MetricField& g, const VectorField& V, const Point& p);

/// Max projection residual of all brackets [V_i, V_j] against span(V_1..V_4),
/// fit by least squares over several sample points.
double bracket_closure_residual(const KillingCatalog& catalog);

/// Classification from structure constants: derived subalgebra + Killing form
/// signature. Throws BracketClosureError when the brackets do not close.
AlgebraLabel classify_algebra(const KillingCatalog& catalog);

// --- coordinate identifications of the ten cases -----------------------------

struct CaseTransform {
    int case_id = 0;
    double lambda = 1.0;       // overall homothety absorbed into the target
    double pedersen_k = 0.0;   // reported for the squashed-sphere cases
    bool has_pedersen_k = false;
    Chart chart;               // new coordinates (vr, xi1, xi2, theta)
    std::function<Point(const Point&)> map;          // new -> old
    std::function<Point(const Point&)> inverse;      // old -> new
    std::function<Vec(const Point&)> jacobian_diag;  // d(old_i)/d(new_i)
    MetricField target;                              // in new coordinates
};

/// The identification for the given case id (1..10); throws invalid_argument
/// when the parameters are outside the case's range.
CaseTransform case_transform(int case_id, const GabcParams& params);

/// Orthonormal-frame max of (pullback of g under ct.map) - ct.target at the
/// new-coordinate point q.
double case_pullback_residual(const CaseTransform& ct, const GabcParams& params, const Point& q);

/// The case id applicable to params on the gabc chart's rho window.
int applicable_case(const GabcParams& params);

// --- incompleteness integral -------------------------------------------------

struct DistanceResult {
    bool applicable = false;
    double value = 0.0;
    double error_bound = 0.0;
    double root = 0.0;  // zero of b rho + 2c, when applicable
};

/// Arc length along the rho-axis from rho0 to the adjacent zero of b rho + 2c,
/// computed after the square-root substitution that removes the endpoint
/// singularity. Not-applicable when no admissible adjacent root exists.
DistanceResult singularity_distance(const GabcParams& params, double rho0);

}  // namespace qkgeo
