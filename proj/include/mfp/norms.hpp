#pragma once

#include "mfp/field.hpp"
#include "mfp/weight.hpp"

namespace mfp {

/// || F ||_{L^p(m)} = (integral |F|^p m^p dv dx)^{1/p} of the Original-frame
/// function represented by the state (converted internally), computed by
/// tensor Gauss-Hermite x uniform-torus quadrature with the Gaussian part of
/// |F|^p m^p absorbed into the quadrature weight by rescaling the nodes.
///
/// Throws std::domain_error when quad_order cannot integrate the weight
/// exactly in the polynomial p = 2 case, and std::overflow_error when the
/// total Gaussian exponent of |F|^p m^p is not positive (non-decaying tail).
double norm_lp_m(const FieldState& state, const Weight& w, double p);

/// W~^{1,p}(m) norm: ( ||F||^p_{L^p(m<v>)} + ||grad_v F||^p_{L^p(m)}
///                     + ||grad_x F||^p_{L^p(m)} )^{1/p}.
double norm_w1p_m(const FieldState& state, const Weight& w, double p);

/// <a,b> = integral a b dx dmu for Perturbation-frame states (Parseval).
double inner_l2_mu(const FieldState& a, const FieldState& b);

/// || f ||_{L^2(dx dmu)} of a Perturbation-frame state (coefficient l2).
double norm_l2_mu(const FieldState& state);

/// Internal building block, exposed for the operator-form assembly and tests:
/// L^p(m <v>^extra_bracket) norm of the function mu * g where the channels are
/// Original-frame coefficient tensors on `layout` combined pointwise as the
/// Euclidean norm across channels (one channel = plain |F|).
double weighted_lp_channels(const std::shared_ptr<const Layout>& layout,
                            const std::vector<Eigen::VectorXcd>& channels,
                            const Weight& w, double p, int extra_bracket);

}  // namespace mfp
