#pragma once
// Builders for the operator catalog as sparse matrices on weighted grids:
// the rank-one averaging example, finite-difference Laplacians under
// Dirichlet/Neumann/Robin boundary conditions, coupled Neumann systems with
// a matrix potential, Dirichlet-to-Neumann maps via Schur complement, and
// signed powers -(-A)^k.
//
// All Laplacian-family matrices are assembled as A = -W^{-1} K where K is
// the symmetric stiffness form (edge differences + Robin boundary terms +
// potential mass). That makes every such A self-adjoint in the weighted
// inner product <f,g> = sum w_i f_i g_i, Metzler (non-negative off-diagonal),
// and conservative (exact zero row sums) for Neumann.

#include <Eigen/Sparse>

#include <filesystem>
#include <string>

#include "amp/grid.hpp"
#include "json.hpp"

namespace amp {

using SpMat = Eigen::SparseMatrix<double>;

enum class Family { rank_one, laplacian, coupled, dtn, power, dense };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

enum class BcKind { dirichlet, neumann, robin };

struct BoundaryCondition {
  BcKind kind = BcKind::dirichlet;
  // Robin coefficient, one value per boundary node of the full grid (in the
  // order of GridSpace::boundary_nodes) or a single value applied uniformly.
  Vec beta;

  static BoundaryCondition dirichlet() { return {BcKind::dirichlet, {}}; }
  static BoundaryCondition neumann() { return {BcKind::neumann, {}}; }
  static BoundaryCondition robin(double beta_const);
  void validate() const;
};

struct GridOperator {
  SpMat matrix;
  SpacePtr space;
  Family family = Family::dense;
  nlohmann::json params;
  // W*A symmetric, i.e. A self-adjoint for the weighted inner product.
  bool weighted_self_adjoint = false;

  int size() const { return static_cast<int>(matrix.rows()); }
  void validate() const;
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix); }
};

// A f = (sum_j w_j f_j) * 1 - f on the cell grid of [0,1]. Spectrum {0, -1}.
GridOperator build_rank_one(int n);

// Second-order central differences on [0,1]^d, n cells per axis.
// Dirichlet eliminates boundary rows (operator lives on the interior grid);
// Neumann/Robin act on the full grid via ghost-node elimination, e.g. in 1D
// at x=0: A_00 = (-2 - 2*h*beta_0)/h^2, A_01 = 2/h^2.
GridOperator build_laplacian(int d, int n, const BoundaryCondition& bc);

// Block operator diag(Neumann Laplacian x N) + multiplication by V, on
// [0,1]^d. V holds one N x N matrix per node (or a single constant matrix);
// off-diagonal entries must be >= 0 and the union coupling pattern
// irreducible. Dof layout is component-major: dof = comp*nodes + node.
GridOperator build_coupled(int n, int d, int N, const std::vector<Eigen::MatrixXd>& V);

// Negative Dirichlet-to-Neumann map -D_V on the boundary grid of [0,1]^d:
// Schur complement of the (-Laplace + V) stiffness form with respect to the
// interior/boundary partition, divided by boundary quadrature weights.
// V is a scalar potential per full-grid node (or a single constant).
GridOperator build_dtn(int n, int d, const Vec& V);

// B = -(-A)^k. With shift_check, requires the spectral bound of the base to
// be strictly negative.
GridOperator build_power(const GridOperator& base, int k, bool shift_check);

// Wrap an arbitrary dense matrix (tests and the experiment harness).
GridOperator wrap_dense(const Eigen::MatrixXd& M, SpacePtr space, nlohmann::json params = {});

GridOperator transposed(const GridOperator& op);

bool is_metzler(const GridOperator& op, double tol = 0.0);

// Sparse-triplet text format (header: family, params, dims, space; body:
// "row col value" lines). Round-trips through load_operator.
void save_operator(const GridOperator& op, const std::filesystem::path& path);
GridOperator load_operator(const std::filesystem::path& path);

}  // namespace amp
