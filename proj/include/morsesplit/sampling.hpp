#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "morsesplit/types.hpp"

namespace morsesplit {

// Van der Corput radical inverse in the given base.
double radical_inverse(std::uint64_t index, unsigned base);

// d-dimensional Halton point (components in (0,1)), index >= 1.
Vec halton_point(std::uint64_t index, int dim);

// Inverse of the standard normal CDF (Acklam's rational approximation,
// relative error below 1.2e-9; plenty for sample placement).
double norminv(double p);

// Deterministic low-discrepancy points in the ball {|v|_2 <= radius}.
// Uses Halton points pushed through the normal quantile for the direction
// and a radial dimension for the scaling, so certificates are reproducible
// across runs and platforms.
std::vector<Vec> halton_ball(int dim, double radius, int count,
                             std::uint64_t skip = 0);

// Points on the unit circle/sphere (dim 2 or 3) for boundary sampling.
std::vector<Vec> halton_sphere(int dim, int count, std::uint64_t skip = 0);

// Runs fn(i) for i in [0, n). Thread count comes from MORSESPLIT_THREADS
// (default: hardware concurrency, capped at 8). Results must be written to
// preallocated slots so the output does not depend on scheduling.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace morsesplit
