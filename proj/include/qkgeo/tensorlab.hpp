#pragma once

#include <string>
#include <vector>

#include "qkgeo/fields.hpp"

namespace qkgeo {

/// Residual statistics over a sample plan. Components are measured in an
/// orthonormal frame of the metric under test unless stated otherwise, so
/// tolerances stay scale-invariant where metric components blow up.
struct Residual {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    Point argmax_point;
    std::string frame = "orthonormal";
};

class ResidualAccum {
  public:
    void add(double per_point_max, const Point& p) {
        sum_ += per_point_max;
        ++n_;
        if (per_point_max >= max_) {
            if (per_point_max > max_ || argp_.empty()) argp_ = p;
            max_ = per_point_max;
        }
    }
    Residual finish(std::string frame = "orthonormal") const {
        Residual r;
        r.max_abs = max_;
        r.mean_abs = n_ ? sum_ / double(n_) : 0.0;
        r.argmax_point = argp_;
        r.frame = std::move(frame);
        return r;
    }

  private:
    double sum_ = 0.0, max_ = 0.0;
    long n_ = 0;
    Point argp_;
};

using JetTen3 = std::vector<JetMat>;

namespace tl {

// --- connection and curvature -------------------------------------------

JetMat metric_jets(const MetricField& g, const Point& p, int order);
JetMat jet_matrix_inverse(const JetMat& m);  // throws DegenerateMetricError

/// Christoffel symbols Γ^k_{ij} as jets of the requested order
/// (needs g evaluable to order+1). christoffel() returns the values.
JetTen3 christoffel_jets(const MetricField& g, const Point& p, int order);
Ten3 christoffel(const MetricField& g, const Point& p);

/// Curvature R^l_{kij} of R(e_i,e_j)e_k, plus contractions.
Ten4 riemann(const MetricField& g, const Point& p);
Ten4 riemann_lowered(const MetricField& g, const Point& p);
Mat ricci(const MetricField& g, const Point& p);
double scalar_curvature(const MetricField& g, const Point& p);

/// Full contraction R_{ijkl}R^{ijkl} times the global convention constant
/// (1/4, calibrated once on a locally symmetric reference and frozen).
double curvature_norm(const MetricField& g, const Point& p);
extern const double kCurvatureNormConvention;

/// ∇_m R^l_{kij}, indexed [m][l][k][i][j]; needs g to jet order 3.
Ten5 nabla_riemann(const MetricField& g, const Point& p);

/// (∇V)^i_j = ∇_j V^i, indexed [i][j].
JetMat covariant_derivative_vector_jets(const MetricField& g, const VectorField& V,
                                        const Point& p, int order);
Mat covariant_derivative_vector(const MetricField& g, const VectorField& V, const Point& p);

// --- Lie operations -------------------------------------------------------

Vec lie_bracket(const VectorField& V, const VectorField& W, const Point& p);
Mat lie_derivative_metric(const MetricField& g, const VectorField& V, const Point& p);
Mat lie_derivative_endo(const EndoField& J, const VectorField& V, const Point& p);

// --- exterior algebra (field level, jet-evaluable) ------------------------

PForm exterior_derivative(const PForm& w);
PForm wedge(const PForm& a, const PForm& b);
PForm interior_product(const VectorField& V, const PForm& w);
PForm oneform_to_pform(const OneForm& a);
PForm scalar_d(const ScalarField& f);  // the one-form df as a PForm(1)
PForm pform_add(const PForm& a, const PForm& b);
PForm pform_sub(const PForm& a, const PForm& b);
PForm pform_scale(double s, const PForm& a);
PForm pform_scale_field(const ScalarField& s, const PForm& a);

// --- Hermitian machinery ---------------------------------------------------

/// N^i_{ab}; requires J^2 = -Id at p within 1e-6 (AlmostComplexError otherwise).
Ten3 nijenhuis(const EndoField& J, const Point& p);

/// σ = g(J·,·) as a 2-form field.
PForm fundamental_form(const MetricField& g, const EndoField& J);

/// The unique θ with dσ = θ∧σ, via the pointwise linear solve in dim 4.
OneForm lee_form(const MetricField& g, const EndoField& J);

// --- frames and residual normalization -------------------------------------

/// Rows are the frame vectors e_a (Gram-Schmidt on the coordinate frame,
/// normalized by sqrt|g(e,e)| to handle indefinite signature).
Mat orthonormal_frame(const MetricField& g, const Point& p);
/// Rows are the dual coframe θ^a (θ^a(e_b) = δ^a_b).
Mat dual_coframe(const Mat& g_values, const Mat& frame);

double frame_max_vector(const Vec& v, const Mat& coframe);
double frame_max_oneform(const Vec& a, const Mat& frame);
double frame_max_sym2(const Mat& s, const Mat& frame);
double frame_max_endo(const Mat& a, const Mat& frame, const Mat& coframe);
double frame_max_ten12(const Ten3& n, const Mat& frame, const Mat& coframe);
double frame_max_form(const Vec& comps, int degree, const Mat& frame, int dim);

}  // namespace tl
}  // namespace qkgeo
