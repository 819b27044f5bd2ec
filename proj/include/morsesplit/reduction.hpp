#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "morsesplit/spectral.hpp"

namespace morsesplit {

enum class ReductionSolver { fixed_point, newton };

/// The reduction map h on a ball in the kernel H0, obtained as the fixed
/// point of the contraction S(z, .), together with the empirical contraction
/// and Lipschitz certificates.
///
/// Conventions: z lives in kernel coordinates (length nu, the columns of
/// basis_H0), h(z) in complement coordinates (length dim - nu, the columns
/// of basis_pm()). Ambient points are basis_H0 * z + basis_pm() * x.
class Reduction {
  public:
    /// r0_seed > 0 overrides the starting radius of the constructive search
    /// (default: half the domain radius).
    Reduction(const FunctionalModel& model, const SpectralSplitting& split,
              const Tolerances& tol = {}, ReductionSolver solver = ReductionSolver::fixed_point,
              double r0_seed = 0.0);

    const FunctionalModel& model() const { return *model_; }
    const SpectralSplitting& splitting() const { return *split_; }

    int nu() const { return split_->nu; }
    double r0() const { return r0_; }
    double residual_tol() const { return tol_.reduction_residual; }
    int iterations_max() const { return tol_.reduction_max_iterations; }

    /// One application of S(z, x) = -(B|_{X^pm})^{-1} (I - P0) A(z + x) + x,
    /// in complement coordinates.
    Vec contraction_map(const Vec& z, const Vec& x) const;

    /// Fixed-point solve for h(z) from x0 (default theta). Throws
    /// ContractionError if the step ratios exceed 1 for three consecutive
    /// iterations, or the residual fails to reach tolerance.
    Vec solve_h(const Vec& z, std::optional<Vec> x0 = std::nullopt) const;

    /// Residual |(I - P0) A(z + h)|_H of a candidate h.
    double residual(const Vec& z, const Vec& h) const;

    /// The derivative formula at theta; identically the zero matrix because
    /// B(theta) annihilates H0. Kept as a cross-check against finite
    /// differences of solve_h.
    Mat h_derivative_at_theta() const;

    Vec ambient(const Vec& z, const Vec& x) const;
    Vec ambient_h(const Vec& z) const { return ambient(z, solve_h(z)); }

    /// Largest observed step ratio |x_{k+1}-x_k|_X / |x_k-x_{k-1}|_X.
    double contraction_factor() const { return contraction_factor_; }
    /// Largest observed |h(z1)-h(z2)|_X / |z1-z2|_X over measured pairs.
    double lipschitz_h() const { return lipschitz_x_; }
    double lipschitz_h_hnorm() const { return lipschitz_h_; }

    /// Evaluates h on a deterministic grid in B_{H0}(theta, r0), records the
    /// contraction/Lipschitz statistics and returns the grid. Cached rows:
    /// (z, h(z), L(z+h(z))).
    struct GridRow {
        Vec z, h;
        double value;
    };
    const std::vector<GridRow>& grid(int points_per_axis = 9) const;

  private:
    friend class ReducedFunctional;
    void certify_radius(double r0_seed);
    Vec solve_h_impl(const Vec& z, const Vec& x0, double* max_ratio) const;

    const FunctionalModel* model_;
    const SpectralSplitting* split_;
    Tolerances tol_;
    ReductionSolver solver_;
    Mat basis_pm_;
    Vec lambda_pm_;
    double r0_ = 0.0;
    mutable double contraction_factor_ = 0.0;
    mutable double lipschitz_x_ = 0.0;
    mutable double lipschitz_h_ = 0.0;
    mutable std::vector<GridRow> grid_;
    // Write-once-per-key solve cache; keys are the exact z coordinates.
    mutable std::map<std::vector<double>, Vec> cache_;
    mutable std::mutex mutex_;
};

/// The reduced functional L0(z) = L(z + h(z)) with the analytic gradient
/// dL0(z)(w) = (A(z + h(z)), w)_H restricted to H0.
class ReducedFunctional {
  public:
    explicit ReducedFunctional(const Reduction& red) : red_(&red) {}

    int nu() const { return red_->nu(); }
    double radius() const { return red_->r0(); }
    double value(const Vec& z) const;
    Vec gradient(const Vec& z) const;  // coordinates of P0 A(z + h(z))

    /// Finite-difference Hessian at theta; the construction forces
    /// d^2 L0(theta) = 0, so the norm of this matrix measures the error.
    Mat fd_hessian_at_theta(double step) const;

    const Reduction& reduction() const { return *red_; }

  private:
    const Reduction* red_;
};

ReducedFunctional reduced_functional(const Reduction& red);

/// Result of the symmetry transport check between two models related by a
/// linear isometry J with L_hat(J x) = L(x) and A_hat(J x) = J A(x).
struct EquivarianceReport {
    bool admissible = false;        // preconditions on J hold
    std::string rejection;          // why J was rejected, when !admissible
    int samples = 0;
    double max_h_mismatch = 0.0;    // max |h_hat(Jz) - J h(z)|_H
    double max_value_mismatch = 0.0;  // max |L0_hat(Jz) - L0(z)|
    std::vector<bool> sample_pass;
    bool pass = false;
};

/// Verifies h_hat(J z) = J h(z) and L0_hat(J z) = L0(z) on sampled z.
/// Precondition failures mark J inadmissible instead of failing the check.
EquivarianceReport check_equivariance(const FunctionalModel& model_a,
                                      const FunctionalModel& model_b, const Mat& J,
                                      const Tolerances& tol = {}, int samples = 12);

}  // namespace morsesplit
