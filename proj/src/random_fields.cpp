#include "amp/random_fields.hpp"

#include <random>

namespace amp {

GridFunction squared_gaussian_field(const SpacePtr& space, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Vec v(space->size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double g = gauss(rng);
    v(i) = g * g;
  }
  return GridFunction(v, space);
}

GridFunction smooth_bump(const SpacePtr& space, const Vec& center, double radius) {
  if (center.size() != space->nodes.cols()) throw domain_error("smooth_bump: center dimension");
  if (!(radius > 0.0)) throw domain_error("smooth_bump: radius must be > 0");
  Vec v = Vec::Zero(space->size());
  for (int i = 0; i < space->node_count(); ++i) {
    const double dist = (space->nodes.row(i).transpose() - center).norm();
    if (dist < radius) {
      const double r = dist / radius;
      const double val = (1.0 - r * r) * (1.0 - r * r);
      for (int c = 0; c < space->components; ++c) v(c * space->node_count() + i) = val;
    }
  }
  if (!(v.maxCoeff() > 0.0)) throw domain_error("smooth_bump: bump misses every grid node");
  return GridFunction(v, space);
}

std::vector<GridFunction> random_nonneg_batch(const SpacePtr& space, uint64_t seed, int count) {
  std::vector<GridFunction> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(squared_gaussian_field(space, seed + 0x9e3779b97f4a7c15ULL * (i + 1)));
  return out;
}

}  // namespace amp
