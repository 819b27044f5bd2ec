#pragma once

#include <functional>
#include <string>
#include <vector>

#include "morsesplit/functional_model.hpp"
#include "morsesplit/reduction.hpp"

namespace morsesplit {

/// Scalar field on a regular cubical grid over [-r, r]^d (d <= 3), with the
/// data the relative-homology computation needs: the sublevel complex
/// {all cell vertices <= level} and its puncture at the origin (the cells
/// whose closure contains the center vertex are removed from the subcomplex).
///
/// The relative chain complex C(sublevel)/C(punctured) has the cells of the
/// open star of the center as its basis, so the ranks are computed from
/// the star pattern alone; the grid resolution enters through the vertex
/// values that decide which star cells belong to the sublevel set.
struct SublevelComplex {
    int dim = 0;
    double radius = 0.0;
    int resolution = 0;  // cells per axis, must be even so the origin is a vertex
    double level = 0.0;
    long long cells_in = 0;        // top-dimensional cells in the sublevel complex
    long long cells_punctured = 0; // after removing the star of the origin
    // Star cells present in the sublevel complex, encoded per axis:
    // 0 = degenerate at the origin, -1 = [-dx, 0], +1 = [0, dx].
    std::vector<std::vector<int>> star_cells;

    static SublevelComplex build(int dim, double radius, int resolution,
                                 const std::function<double(const Vec&)>& f,
                                 double level = 0.0, bool count_cells = false);

    /// Ranks of H_q(sublevel, punctured; Q) for q = 0..dim, by exact
    /// integer elimination on the relative boundary matrices.
    std::vector<int> relative_ranks() const;
};

/// Critical groups of a reduced functional at the origin: ranks of
/// C_q(f, theta; Q) for q = 0..dim, with a two-resolution stability gate and
/// a grid-scale isolation check of the critical point.
std::vector<int> critical_groups_grid(int dim, double radius, int resolution,
                                      const std::function<double(const Vec&)>& value,
                                      const std::function<Vec(const Vec&)>& grad);

std::vector<int> critical_groups_reduced(const ReducedFunctional& lf, double radius,
                                         int resolution);

/// Direct full-space critical groups for n <= 3 models, bypassing the
/// reduction; the independent side of the shifting check.
std::vector<int> full_space_groups_oracle(const FunctionalModel& model, double radius,
                                          int resolution);

/// Brouwer degree of a vector field on the ball of the given radius:
/// sign counting (d=1), winding number with a per-step angle guard (d=2),
/// summed solid angles over a refined icosahedral sphere (d=3). Stable
/// under resolution doubling by construction (computed at resolution and
/// 2x resolution, must agree).
int brouwer_degree(int dim, const std::function<Vec(const Vec&)>& grad, double radius,
                   int resolution);

enum class Classification { local_minimum, mountain_pass_type, nondegenerate_index_mu, general };
std::string to_string(Classification c);

struct PoincareHopf {
    long long lhs = 0;      // sum (-1)^q rank C_q(L, theta)
    long long middle = 0;   // (-1)^mu sum (-1)^q rank C_q(L0, theta)
    long long rhs = 0;      // (-1)^mu deg(grad L0)
    bool pass = false;
};

struct CriticalGroupReport {
    std::vector<int> betti_reduced;  // C_q(L0, theta), q = 0..nu
    int mu = 0;
    int nu = 0;
    std::vector<int> betti;          // C_q(L, theta), q = 0..mu+nu
    Classification classification = Classification::general;
    bool hofer_detector = false;     // sublevel set near theta nonempty and disconnected
    int brouwer_degree_reduced = 0;
    PoincareHopf poincare_hopf;
    std::vector<int> resolutions_tested;
};

/// Applies the index shift C_q(L) = C_{q-mu}(L0), classifies the critical
/// point and, when `reduced_values` is provided, runs the grid-scale
/// mountain-pass detector on the model set
/// { |u+|^2 - |u-|^2 + L0(z) < 0 }.
CriticalGroupReport shift(const std::vector<int>& groups_reduced, int mu, int nu,
                          const std::function<double(const Vec&)>* reduced_values = nullptr,
                          double radius = 0.0, int resolution = 64);

/// Three-way ledger for sum (-1)^q rank C_q(L) = (-1)^mu sum (-1)^q rank
/// C_q(L0) = (-1)^mu deg(grad L0). Exact integer equality.
PoincareHopf poincare_hopf_check(const CriticalGroupReport& report, int degree_reduced, int mu);

/// Hofer's grid-scale mountain-pass detector through the normal form:
/// mu >= 2 never; mu == 1 iff {L0 < 0} is empty near theta; mu == 0 iff
/// {L0 < 0} is nonempty and disconnected.
bool mountain_pass_detector(int mu, int nu, const std::function<double(const Vec&)>& reduced_values,
                            double radius, int resolution);

}  // namespace morsesplit
