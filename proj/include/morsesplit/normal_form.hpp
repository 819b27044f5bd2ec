#pragma once

#include <optional>
#include <utility>

#include "morsesplit/reduction.hpp"

namespace morsesplit {

/// The explicit origin-preserving chart that brings the functional to the
/// normal form  L(Phi(z, u+, u-)) = |u+|^2 - |u-|^2 + L0(z)  on a product of
/// balls. Built fiberwise over the kernel ball from the function
/// F(z,u) = L(z + h(z) + u) - L(z + h(z)) on H+ + H-.
///
/// Coordinates: z in basis_H0, u+/x+ in basis_Hplus, u-/y in basis_Hminus.
/// All chart evaluations are pure and independent across points.
class NormalFormChart {
  public:
    /// delta_override > 0 pins the H- ball radius instead of the default
    /// fraction of the certified radius.
    NormalFormChart(const Reduction& red, const ConditionCertificate& cert,
                    const Tolerances& tol = {}, double delta_override = 0.0);

    const Reduction& reduction() const { return *red_; }
    int dim_plus() const { return static_cast<int>(split_->lambda_plus.size()); }
    int dim_minus() const { return split_->mu; }

    double delta() const { return delta_; }
    double eps1() const { return eps1_; }
    double eps() const { return eps_; }
    double z_radius() const { return z_radius_; }
    double a1() const { return a1_; }
    double p(double t) const { return p_coeff_ * t * t; }
    /// Radius of the u+/u- balls of the chart domain, sqrt(p(eps)/2).
    double chart_radius() const;

    /// F(z, u) for u = x+ in H+ plus y in H-.
    double fiber_value(const Vec& z, const Vec& x_plus, const Vec& y_minus) const;
    /// Directional-derivative coordinates of F(z, .): ((I-P0) A, .) split
    /// into the H+ and H- frames.
    Vec fiber_gradient_plus(const Vec& z, const Vec& x_plus, const Vec& y_minus) const;
    Vec fiber_gradient_minus(const Vec& z, const Vec& x_plus, const Vec& y_minus) const;

    /// The unique maximizer phi_z(x+) of y -> F(z, x+ + y) over the closed
    /// delta-ball in H-. Concave maximization by projected gradient ascent
    /// with Armijo backtracking; throws ChartError when positive curvature
    /// along an H- direction is detected or the maximum sits on the boundary.
    Vec maximizer_phi(const Vec& z, const Vec& x_plus,
                      std::optional<Vec> warm_start = std::nullopt) const;

    /// (psi1, psi2) of the square-root construction; the identity
    /// F(z, x+y) = |psi1|^2 - |psi2|^2 holds by construction.
    std::pair<Vec, Vec> psi_forward(const Vec& z, const Vec& x_plus, const Vec& y_minus) const;

    /// Solves psi(z, x'+y') = u+ + u- by the radial/segment construction
    /// (bisection along the H+ ray, then along the segment toward the H-
    /// boundary) with a scalar secant polish. Throws ChartError when the
    /// bracket fails (eps too large).
    std::pair<Vec, Vec> chart_inverse(const Vec& z, const Vec& u_plus, const Vec& u_minus) const;

    /// Phi(z, u+ + u-) = z + h(z) + x' + y', ambient coordinates.
    Vec big_phi(const Vec& z, const Vec& u_plus, const Vec& u_minus) const;

    /// |L(Phi(z,u)) - (|u+|^2 - |u-|^2 + L0(z))|.
    double normal_form_residual(const Vec& z, const Vec& u_plus, const Vec& u_minus) const;

    Vec base_point(const Vec& z) const;  // z + h(z), ambient

  private:
    double fiber_value_ambient(const Vec& base, const Vec& u_amb) const;
    void choose_radii(const ConditionCertificate& cert, double delta_override);

    const Reduction* red_;
    const SpectralSplitting* split_;
    const FunctionalModel* model_;
    Tolerances tol_;
    double a1_ = 0.0;
    double p_coeff_ = 0.0;
    double delta_ = 0.0;
    double eps1_ = 0.0;
    double eps_ = 0.0;
    double z_radius_ = 0.0;
    double minus_radius_ = 0.0;  // chart radius fallback when H+ = {0}
};

/// Two-sided growth estimates for L near the critical point, evaluated with
/// empirical constants. Report-only: margins are recorded, nothing throws.
struct BehaviorReport {
    bool applicable = false;   // H+ and the radii fit inside the certified ball
    std::string note;
    double c1_prime = 0.0, c2_prime = 0.0;  // two-sided bounds on P(x)
    double q0_norm = 0.0;                   // |Q(theta)|
    double a1 = 0.0, a1_prime = 0.0;
    double s = 0.0, r = 0.0, eps = 0.0, hbar = 0.0;
    bool premises_ok = false;  // sampled omega / Q-drift smallness
    // min over samples of (lhs - rhs), sign-normalized so >= 0 means the
    // inequality holds.
    double margin_i = 0.0;    // (grad_u F, P+ u) >= hbar on |P+ u| = s
    double margin_ii = 0.0;   // (grad_u F, P- u) <= -hbar on {F <= -eps}
    double margin_iii = 0.0;  // F <= -eps on |P- u| = r
    int samples_i = 0, samples_ii = 0, samples_iii = 0;
};

BehaviorReport verify_behavior_estimates(const NormalFormChart& chart,
                                         const ConditionCertificate& cert, double s_radius = 0.0,
                                         int samples = 40);

}  // namespace morsesplit
