#pragma once
// Weighted grids on the unit interval/square/cube and the grid functions
// living on them. Weights are quadrature weights of the domain measure:
// trapezoid products on full tensor grids, plain cell weights h^d on
// interior (Dirichlet) grids, per-face tangential trapezoid weights on
// boundary grids.

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "amp/errors.hpp"

namespace amp {

using Vec = Eigen::VectorXd;

struct GridSpace {
  int dim = 1;         // spatial dimension of the underlying domain
  int components = 1;  // >1 for coupled systems; dof layout is component-major
  Eigen::MatrixXd nodes;  // node_count x coord_dim coordinates
  Vec weights;            // per node, strictly positive
  std::vector<int> boundary_nodes;
  double h = 0.0;
  double measure = 0.0;  // what the weights sum to

  int node_count() const { return static_cast<int>(weights.size()); }
  int size() const { return node_count() * components; }
  // Weights per degree of freedom (tiled across components).
  Vec dof_weights() const;
  void validate() const;
};

using SpacePtr = std::shared_ptr<const GridSpace>;

struct GridFunction {
  Vec values;
  SpacePtr space;

  GridFunction() = default;
  GridFunction(Vec v, SpacePtr s);

  int size() const { return static_cast<int>(values.size()); }
  void validate() const;
};

GridFunction constant_function(const SpacePtr& space, double value);

// Cell-centered grid on [0,1]: n cells, midpoints, weight 1/n each.
SpacePtr cell_grid_1d(int n);
// Full tensor grid on [0,1]^d with n cells per axis ((n+1)^d nodes).
SpacePtr cube_grid(int d, int n);
// Interior nodes only ((n-1)^d nodes, weight h^d); used by Dirichlet builders.
SpacePtr cube_interior_grid(int d, int n);
// Copy of base carrying a component count (coupled systems).
SpacePtr with_components(const SpacePtr& base, int components);

}  // namespace amp
