#include "amp/grid.hpp"

#include <cmath>

namespace amp {

Vec GridSpace::dof_weights() const {
  if (components == 1) return weights;
  Vec w(size());
  for (int c = 0; c < components; ++c) w.segment(c * node_count(), node_count()) = weights;
  return w;
}

void GridSpace::validate() const {
  if (dim < 1 || dim > 3) throw domain_error("GridSpace: dim must be 1, 2, or 3");
  if (components < 1) throw domain_error("GridSpace: components must be >= 1");
  if (weights.size() == 0) throw domain_error("GridSpace: empty grid");
  if (nodes.rows() != weights.size()) throw domain_error("GridSpace: nodes/weights size mismatch");
  if ((weights.array() <= 0.0).any()) throw domain_error("GridSpace: weights must be strictly positive");
  const double sum = weights.sum();
  if (std::abs(sum - measure) > 1e-12 * std::max(1.0, std::abs(measure)))
    throw domain_error("GridSpace: weights do not sum to the recorded measure");
  for (int b : boundary_nodes)
    if (b < 0 || b >= node_count()) throw domain_error("GridSpace: boundary index out of range");
}

GridFunction::GridFunction(Vec v, SpacePtr s) : values(std::move(v)), space(std::move(s)) {
  validate();
}

void GridFunction::validate() const {
  if (!space) throw domain_error("GridFunction: null space");
  if (size() != space->size()) throw domain_error("GridFunction: length does not match space");
  if (!values.allFinite()) throw domain_error("GridFunction: non-finite entry");
}

GridFunction constant_function(const SpacePtr& space, double value) {
  return GridFunction(Vec::Constant(space->size(), value), space);
}

SpacePtr cell_grid_1d(int n) {
  if (n < 1) throw domain_error("cell_grid_1d: n must be >= 1");
  auto g = std::make_shared<GridSpace>();
  g->dim = 1;
  g->h = 1.0 / n;
  g->nodes.resize(n, 1);
  for (int i = 0; i < n; ++i) g->nodes(i, 0) = (i + 0.5) * g->h;
  g->weights = Vec::Constant(n, g->h);
  g->measure = 1.0;
  return g;
}

namespace {

Vec trapezoid_weights_1d(int n) {
  Vec w = Vec::Constant(n + 1, 1.0 / n);
  w(0) *= 0.5;
  w(n) *= 0.5;
  return w;
}

}  // namespace

SpacePtr cube_grid(int d, int n) {
  if (d < 1 || d > 3) throw domain_error("cube_grid: d must be 1, 2, or 3");
  if (n < 1) throw domain_error("cube_grid: n must be >= 1");
  auto g = std::make_shared<GridSpace>();
  g->dim = d;
  g->h = 1.0 / n;
  const int n1 = n + 1;
  int count = 1;
  for (int k = 0; k < d; ++k) count *= n1;
  g->nodes.resize(count, d);
  g->weights.resize(count);
  const Vec w1 = trapezoid_weights_1d(n);
  for (int idx = 0; idx < count; ++idx) {
    int rem = idx;
    double w = 1.0;
    bool bdry = false;
    for (int k = 0; k < d; ++k) {
      const int ik = rem % n1;
      rem /= n1;
      g->nodes(idx, k) = ik * g->h;
      w *= w1(ik);
      if (ik == 0 || ik == n) bdry = true;
    }
    g->weights(idx) = w;
    if (bdry) g->boundary_nodes.push_back(idx);
  }
  g->measure = 1.0;
  return g;
}

SpacePtr cube_interior_grid(int d, int n) {
  if (d < 1 || d > 3) throw domain_error("cube_interior_grid: d must be 1, 2, or 3");
  if (n < 2) throw domain_error("cube_interior_grid: n must be >= 2");
  auto g = std::make_shared<GridSpace>();
  g->dim = d;
  g->h = 1.0 / n;
  const int m = n - 1;
  int count = 1;
  for (int k = 0; k < d; ++k) count *= m;
  g->nodes.resize(count, d);
  for (int idx = 0; idx < count; ++idx) {
    int rem = idx;
    for (int k = 0; k < d; ++k) {
      g->nodes(idx, k) = (rem % m + 1) * g->h;
      rem /= m;
    }
  }
  g->weights = Vec::Constant(count, std::pow(g->h, d));
  g->measure = g->weights.sum();
  return g;
}

SpacePtr with_components(const SpacePtr& base, int components) {
  if (components < 1) throw domain_error("with_components: components must be >= 1");
  auto g = std::make_shared<GridSpace>(*base);
  g->components = components;
  return g;
}

}  // namespace amp
