#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace morsesplit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Configuration / input errors. The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures of an analysis stage (ambiguous spectral gap, broken
// contraction, chart bracket failure, unstable homology, ...). Exit code 1.
struct AnalysisError : std::runtime_error {
    explicit AnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SplitError : AnalysisError {
    explicit SplitError(const std::string& msg) : AnalysisError(msg) {}
};

// Carries the offending reduced point so callers can shrink the radius.
struct ContractionError : AnalysisError {
    Vec z;
    ContractionError(const std::string& msg, Vec z_off)
        : AnalysisError(msg), z(std::move(z_off)) {}
};

struct ChartError : AnalysisError {
    explicit ChartError(const std::string& msg) : AnalysisError(msg) {}
};

struct HomologyError : AnalysisError {
    explicit HomologyError(const std::string& msg) : AnalysisError(msg) {}
};

// Module tolerances. Defaults are the library constants; every field can be
// overridden from a run configuration.
struct Tolerances {
    double hessian_symmetry = 1e-10;      // |(Bu,v)-(u,Bv)| / (|u||v|)
    double grad_fd_rel = 1e-6;            // value vs gradient consistency
    double hess_fd_rel = 1e-5;            // gradient vs hessian consistency
    double critical_point = 1e-9;         // |A(theta)|
    double null_tol_rel = 1e-8;           // kernel threshold, relative to max |eig|
    double eigen_residual = 1e-10;        // |B v - lambda v| / |B|
    double projector = 1e-12;             // projector identities
    double reduction_residual = 1e-11;    // |(I-P0)A(z+h(z))|
    int reduction_max_iterations = 500;
    double contraction_bound = 0.5 + 1e-6;
    double lipschitz_bound = 2.0 + 1e-6;
    double maximizer = 1e-10;             // |grad_y F| at the fiber maximizer
    double invert = 1e-10;                // chart inverse residual
    double normal_form = 1e-8;            // |L(Phi) - (|u+|^2-|u-|^2+L0)|
    double equivariance = 1e-10;
    double isometry = 1e-12;              // admissibility of J
    double intertwine = 1e-10;            // A(Jx) = J A(x)
};

}  // namespace morsesplit
