#pragma once
// Seeded generators of non-negative grid functions for the experiments:
// squared Gaussian fields and smooth compact bumps. Everything is a pure
// function of (space, seed/geometry).

#include <vector>

#include "amp/grid.hpp"

namespace amp {

GridFunction squared_gaussian_field(const SpacePtr& space, uint64_t seed);

// (1 - (|x - center|/radius)^2)^2 inside the ball, 0 outside.
GridFunction smooth_bump(const SpacePtr& space, const Vec& center, double radius);

std::vector<GridFunction> random_nonneg_batch(const SpacePtr& space, uint64_t seed, int count);

}  // namespace amp
