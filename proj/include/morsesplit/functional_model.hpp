#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "morsesplit/types.hpp"

namespace morsesplit {

/// A finite-dimensional variational functional with a dual-norm structure.
///
/// All coordinates are relative to the critical point, which is translated
/// to the origin at construction time. `value`, `gradient` and `hessian`
/// are the plain coordinate derivatives of the functional; the geometry
/// lives in `h_inner`, a symmetric positive-definite mass matrix defining
/// the inner product (u,v)_H = u^T M v. The H-gradient A(x) (the Riesz
/// representative of the differential) is M^{-1} grad(x), and the Hessian
/// operator B(x) = M^{-1} hess(x) is self-adjoint with respect to (.,.)_H.
///
/// `x_norm` is a second, stronger norm ("the X-norm"): a discrete C^1 norm
/// for grid problems and the H-norm itself for polynomial problems. It
/// dominates the H-norm, |v| <= |v|_X for all v.
///
/// Immutable after construction; all evaluations are pure and safe to call
/// concurrently.
struct FunctionalModel {
    int dim = 0;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;   // coordinate gradient
    std::function<Mat(const Vec&)> hessian;    // coordinate Hessian (symmetric)
    Mat h_inner;                               // mass matrix M
    std::function<double(const Vec&)> x_norm;
    double domain_radius = 1.0;
    std::string name;

    // H-geometry helpers.
    double inner(const Vec& u, const Vec& v) const { return u.dot(h_inner * v); }
    double norm_h(const Vec& v) const { return std::sqrt(std::max(0.0, inner(v, v))); }
    Vec a(const Vec& x) const { return mass_solver().solve(gradient(x)); }  // A = grad_H L
    Mat b(const Vec& x) const { return mass_solver().solve(hessian(x)); }   // B = Hessian op

    const Eigen::LLT<Mat>& mass_solver() const;

  private:
    mutable std::shared_ptr<Eigen::LLT<Mat>> mass_llt_;  // built once, read-only after
};

enum class ProblemKind { polynomial, lagrangian_action, elliptic_1d };

struct MonomialTerm {
    double coeff = 0.0;
    std::vector<int> powers;
};

/// A problem description, either assembled in code or parsed from JSON.
/// `critical_point` is the point taken as the origin after translation.
struct ProblemSpec {
    ProblemKind kind = ProblemKind::polynomial;
    std::string name;
    Vec critical_point;
    double domain_radius = 1.0;

    // polynomial
    std::vector<MonomialTerm> terms;

    // lagrangian_action: L(t,q,v) over a periodic grid
    std::string lagrangian;  // catalog name, e.g. "pendulum"
    double period = 0.0;
    int grid_size = 0;
    double gravity = 1.0;

    // elliptic_1d: (1/2) u' u' - F(x,u) on (0,1), Dirichlet
    std::string nonlinearity;  // catalog name, e.g. "cubic", "cubic_resonant"
};

/// Parses a ProblemSpec from a JSON document of the form
///   {"kind": "...", "parameters": {...}, "critical_point": [...]}
/// Unknown keys are rejected. See README for the full schema.
ProblemSpec parse_problem_spec(const std::string& json_text);
std::string problem_spec_to_json(const ProblemSpec& spec);

/// Builds the discretized model and validates the type invariants
/// (Hessian symmetry, derivative consistency at sampled points, norm
/// domination, vanishing gradient at the critical point).
FunctionalModel build_model(const ProblemSpec& spec, const Tolerances& tol = {});

/// Central finite differences of `value`; only used by consistency checks.
Vec finite_difference_gradient(const FunctionalModel& model, const Vec& x, double step);

/// Central finite differences of `gradient`, column j = d(grad)/dx_j.
Mat finite_difference_hessian(const FunctionalModel& model, const Vec& x, double step);

/// Runs the model self-checks; throws ConfigError with a description of the
/// first violated invariant. `samples` points are drawn inside a quarter of
/// the domain radius.
void validate_model(const FunctionalModel& model, const Tolerances& tol, int samples = 20);

/// Names of the built-in problems.
std::vector<std::string> catalog_names();

/// Builds a catalog problem by name.
ProblemSpec catalog_spec(const std::string& name);
FunctionalModel catalog_model(const std::string& name, const Tolerances& tol = {});

}  // namespace morsesplit
