#pragma once

#include <vector>

#include "morsesplit/functional_model.hpp"
#include "morsesplit/types.hpp"

namespace morsesplit {

/// The orthogonal splitting H = H0 + H- + H+ of the Hessian operator B at
/// the critical point, together with the data the reduction and the chart
/// consume: an h_inner-orthonormal eigenbasis, the nullity nu = dim H0, the
/// Morse index mu = dim H-, the spectral gap a0 (half the distance from 0
/// to the nonzero spectrum) and the three orthogonal projectors.
///
/// Immutable after construction.
struct SpectralSplitting {
    Vec eigenvalues;        // ascending
    Mat eigenvectors;       // h_inner-orthonormal columns, same order
    double null_tol = 0.0;  // absolute threshold actually used
    Mat basis_H0, basis_Hminus, basis_Hplus;
    Vec lambda_minus, lambda_plus;
    int nu = 0;
    int mu = 0;
    double a0 = 0.0;        // +inf when the spectrum is {0}
    Mat P0, Pminus, Pplus;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
    int dim_pm() const { return dim() - nu; }

    /// Columns of [basis_Hminus basis_Hplus]; the coordinate frame used by
    /// the reduction for the complement of the kernel.
    Mat basis_pm() const;
    Vec lambda_pm() const;
};

/// Generalized symmetric eigendecomposition of B(theta) with respect to
/// h_inner. Eigenvalues with |lambda| <= null_tol_rel * max|lambda| span H0.
/// Throws SplitError when an eigenvalue falls inside the ambiguous band
/// (null_tol, 10*null_tol): the kernel cannot be certified at this tolerance.
SpectralSplitting split(const FunctionalModel& model, double null_tol_rel = 1e-8);

/// As above with an absolute kernel threshold.
SpectralSplitting split_absolute(const FunctionalModel& model, double null_tol_abs);

/// Residuals of the splitting invariants; used by verification.
struct SplittingCheck {
    double projector_sum_error = 0.0;      // |P0+P-+P+ - I|
    double projector_idempotent = 0.0;     // max |P^2 - P|
    double projector_selfadjoint = 0.0;    // max |(Pu,v)-(u,Pv)| normalized
    double eigen_residual = 0.0;           // max |B v - lambda v| / |B|
    double block_orthogonality = 0.0;      // max |(B u, v)| across blocks
    double gap_margin_plus = 0.0;          // min (Bu,u)/|u|^2 - 2 a0 on H+
    double gap_margin_minus = 0.0;         // -2 a0 - max (Bu,u)/|u|^2 on H-
    bool pass = false;
};
SplittingCheck check_splitting(const FunctionalModel& model, const SpectralSplitting& s,
                               const Tolerances& tol = {});

/// Sampled certificate for the perturbed-Hessian conditions the proofs
/// consume: positivity of B(x) on H+ (with the empirical constant a1),
/// the modulus omega(x) controlling B(x)-B(theta) on H0+H-, and negativity
/// of B(x) on H-. Failures are recorded, never thrown.
struct ConditionCertificate {
    std::vector<Vec> checked_points;
    std::vector<double> omega_values;
    double a1 = 0.0;              // min over samples of min eig of B(x) on H+
    double minus_margin = 0.0;    // min over samples of (-a0 - max eig on H-)
    double omega_max = 0.0;
    bool pass_d1 = false;         // finite nu, mu (structural)
    bool pass_d2 = false;         // (B(x)v,v) >= a1 |v|^2 on H+, a1 > 0
    bool pass_d3 = false;         // omega(x) < a0 on all samples
    bool pass_d4 = false;         // (B(x)u,u) <= -a0 |u|^2 on H-
    double requested_radius = 0.0;
    double certified_radius = 0.0;  // largest sampled radius with all passes
    int samples = 0;

    bool pass_all() const { return pass_d1 && pass_d2 && pass_d3 && pass_d4; }
};

ConditionCertificate certify_conditions(const FunctionalModel& model,
                                        const SpectralSplitting& s, double radius,
                                        int samples);

}  // namespace morsesplit
