#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkgeo/fields.hpp"
#include "qkgeo/tensorlab.hpp"

namespace qkgeo {

struct InvalidTodaSolutionError : std::runtime_error {
    explicit InvalidTodaSolutionError(double r)
        : std::runtime_error("scalar field violates the continuous Toda equation"), residual(r) {}
    double residual;
};

struct MomentMapDegenerateError : std::runtime_error {
    MomentMapDegenerateError() : std::runtime_error("df_Z vanishes at a sample point") {}
};

struct QuadraturePoleError : std::runtime_error {
    explicit QuadraturePoleError(const std::string& factor)
        : std::runtime_error("pole of the conformal-factor integrand inside the interval: " +
                             factor),
          offending_factor(factor) {}
    std::string offending_factor;
};

struct RankDeficientError : std::runtime_error {
    RankDeficientError() : std::runtime_error("quaternionic span of Z is rank-deficient") {}
};

/// A t-independent solution u(ρ,x,y) of (∂x²+∂y²)u = −2∂ρ²(e^u), hosted on
/// the 4d (ρ,x,y,t) chart, together with the scale K. The optional analytic
/// first-derivative fields keep downstream jets within the order-3 budget.
struct TodaSolution {
    ScalarField u;
    std::optional<std::array<ScalarField, 3>> du;  // ∂ρu, ∂xu, ∂yu (analytic)
    double K = -1.0;
    Chart chart;

    /// ∂u/∂axis as a field: analytic when supplied, derived from u otherwise.
    ScalarField du_field(int axis) const;
};

double toda_residual(const TodaSolution& sol, const Point& p);
ScalarField toda_residual_field(const TodaSolution& sol);

/// Validating constructor: samples the residual and rejects non-solutions.
TodaSolution make_toda_solution(Chart chart, ScalarField u,
                                std::optional<std::array<ScalarField, 3>> du, double K);
TodaSolution make_toda_solution_unchecked(Chart chart, ScalarField u,
                                          std::optional<std::array<ScalarField, 3>> du, double K);

/// The separable family u = ln(aρ²+bρ+c) − 2 ln(1 + (a/2)(x²+y²)).
TodaSolution separable_toda(double a, double b, double c, double K);
/// Same family hosted on a caller-supplied (ρ,x,y,t) chart.
TodaSolution separable_toda_on(const Chart& chart, double a, double b, double c, double K);
TodaSolution constant_toda(double c0, double K);
/// Negative control: the separable u plus eps·ρ·x (not a Toda solution).
TodaSolution perturbed_separable_toda(double a, double b, double c, double K, double eps);
/// Gauge change by the linear holomorphic map ζ ↦ sζ: u(ρ,sx,sy) + 2 ln|s|.
TodaSolution gauge_scaled(const TodaSolution& sol, double s);

/// Largest ρ-interval (within a fixed scan range) on which the separable
/// family data are admissible; used to place sample boxes.
std::pair<double, double> family_rho_window(double a, double b, double c, double K,
                                            bool require_sign_rule);

// --- Boyer-Finley ansatz ----------------------------------------------------

MetricField boyer_finley_metric(const TodaSolution& sol);
PForm omega1_bf(const TodaSolution& sol);
VectorField bf_vector_Z(const Chart& chart);
ScalarField bf_f_Z(const TodaSolution& sol);

// --- rotating Killing data ---------------------------------------------------

struct RotatingKillingData {
    Chart chart;
    MetricField g;
    VectorField Z;
    ScalarField f_Z, f_H, psi, gZZ;
    PForm omega1, omegaH;
    EndoField I1, I_H;
    std::vector<EndoField> triple;  // {I1,I2,I3} when available, else empty
    std::vector<PForm> omegas;      // matching fundamental two-forms
    double c_offset = 0.0;
};

RotatingKillingData rotating_data(const MetricField& g, const VectorField& Z,
                                  const ScalarField& f_Z, const PForm& omega1, double c_offset,
                                  std::vector<EndoField> triple = {});

/// Pointwise residual of d(g(Z,Z)) − 2ψ df_Z, in the orthonormal frame.
double criterion_fit_residual(const RotatingKillingData& data, const Point& p);
/// Orthonormal-frame max of df_H ∧ df_Z.
double integrability_criterion(const RotatingKillingData& data, const Point& p);
/// Residual of ∇_Z Z against its projection onto span(Z, I₁Z).
double nabla_zz_span_residual(const RotatingKillingData& data, const Point& p);

struct IHReport {
    double omega_residual = 0.0;           // g(I_H·,·) − ω_H
    double skew_residual = 0.0;            // g(I_H·,·) + g(·,I_H·)
    std::vector<double> commute_residuals;  // [I_H, I_k]
};
IHReport prop_IH_checks(const RotatingKillingData& data, const Point& p);

/// Eq-style elementary deformation: (1/f_Z) g on (ℍZ)^⊥, (f_H/f_Z²) g on ℍZ.
/// In dimension 4 the quaternionic span is everything and this is the single
/// conformal rescaling (f_H/f_Z²) g.
MetricField elementary_deformation(const MetricField& g, const RotatingKillingData& data);

/// Eigenvalue signs of a metric at p: (negative, zero, positive) counts.
std::array<int, 3> signature_counts(const MetricField& g, const Point& p);

// --- the two-form σ̃ and the conformal factor --------------------------------

PForm sigma_tilde(const RotatingKillingData& data);
PForm d_sigma_tilde_formula(const RotatingKillingData& data);  // needs the full triple

double xi_formula(const RotatingKillingData& data, const Point& p);
ScalarField xi_field(const RotatingKillingData& data);
/// φ with φ(ρ₀)=0 from dφ = ξ df_Z, integrated along the ρ coordinate.
ScalarField phi_by_quadrature(const RotatingKillingData& data, double rho0);

// --- flat rigid c-map models -------------------------------------------------

struct RigidCmapModel {
    int n = 1;
    Chart chart;  // real coordinates x_j, y_j (base), u_j, v_j (fiber)
    MetricField g;
    std::vector<EndoField> triple;
    std::vector<PForm> omegas;
    VectorField Z, xi_euler;
    ScalarField f_Z;

    int base_index_x(int j) const { return 2 * j; }
    int base_index_y(int j) const { return 2 * j + 1; }
    int fiber_index_u(int j) const { return 2 * n + 2 * j; }
    int fiber_index_v(int j) const { return 2 * n + 2 * j + 1; }
};

RigidCmapModel rigid_cmap_model(int n);
/// Negative control: same model with Z replaced by Z + 0.1·x₀²·∂y₀.
RigidCmapModel perturbed_cmap_model(int n);

RotatingKillingData cmap_rotating_data(const RigidCmapModel& model, double c_offset);

struct HighdimResult {
    double vertical_nabla_z_max = 0.0;  // ∇_V Z over fiber directions
    double deviation_max = 0.0;         // ∇Z|_(ℍZ)^⊥ + ½I₁, adapted frame
};
HighdimResult highdim_condition(const RigidCmapModel& model, const Point& p);

}  // namespace qkgeo
