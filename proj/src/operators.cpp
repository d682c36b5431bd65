#include "amp/operators.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "amp/spectral.hpp"

namespace amp {

std::string family_name(Family f) {
  switch (f) {
    case Family::rank_one: return "rank_one";
    case Family::laplacian: return "laplacian";
    case Family::coupled: return "coupled";
    case Family::dtn: return "dtn";
    case Family::power: return "power";
    case Family::dense: return "dense";
  }
  return "dense";
}

Family family_from_name(const std::string& name) {
  if (name == "rank_one") return Family::rank_one;
  if (name == "laplacian") return Family::laplacian;
  if (name == "coupled") return Family::coupled;
  if (name == "dtn") return Family::dtn;
  if (name == "power") return Family::power;
  if (name == "dense") return Family::dense;
  throw domain_error("unknown operator family: " + name);
}

BoundaryCondition BoundaryCondition::robin(double beta_const) {
  BoundaryCondition bc;
  bc.kind = BcKind::robin;
  bc.beta = Vec::Constant(1, beta_const);
  return bc;
}

void BoundaryCondition::validate() const {
  if (kind == BcKind::robin && beta.size() == 0)
    throw domain_error("Robin condition requires beta");
  if (kind != BcKind::robin && beta.size() != 0)
    throw domain_error("beta is only meaningful for Robin conditions");
}

void GridOperator::validate() const {
  if (matrix.rows() != matrix.cols()) throw domain_error("GridOperator: matrix not square");
  if (!space) throw domain_error("GridOperator: null space");
  if (matrix.rows() != space->size())
    throw domain_error("GridOperator: matrix side does not match space");
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(matrix, k); it; ++it)
      if (!std::isfinite(it.value())) throw domain_error("GridOperator: non-finite entry");
}

GridOperator build_rank_one(int n) {
  if (n < 2) throw domain_error("build_rank_one: n must be >= 2");
  auto space = cell_grid_1d(n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * n);
  const double w = 1.0 / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) trips.emplace_back(i, j, (i == j) ? w - 1.0 : w);
  GridOperator op;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.space = space;
  op.family = Family::rank_one;
  op.params = {{"n", n}};
  op.weighted_self_adjoint = true;  // W*A = w w^T - W
  op.validate();
  return op;
}

namespace {

struct TensorIndexer {
  int d, n, n1;
  std::array<int, 3> stride{};

  TensorIndexer(int d_, int n_) : d(d_), n(n_), n1(n_ + 1) {
    int s = 1;
    for (int k = 0; k < d; ++k) {
      stride[k] = s;
      s *= n1;
    }
  }
  int count() const {
    int c = 1;
    for (int k = 0; k < d; ++k) c *= n1;
    return c;
  }
  std::array<int, 3> decode(int idx) const {
    std::array<int, 3> mi{};
    for (int k = 0; k < d; ++k) {
      mi[k] = idx % n1;
      idx /= n1;
    }
    return mi;
  }
};

Vec trapezoid_weights_1d(int n) {
  Vec w = Vec::Constant(n + 1, 1.0 / n);
  w(0) *= 0.5;
  w(n) *= 0.5;
  return w;
}

// Symmetric stiffness form of -Laplace on the full tensor grid:
// sum over axis-edges of (u_a - u_b)^2 * (transversal weight)/h.
std::vector<Eigen::Triplet<double>> stiffness_triplets(const TensorIndexer& ti) {
  const Vec w1 = trapezoid_weights_1d(ti.n);
  const double h = 1.0 / ti.n;
  std::vector<Eigen::Triplet<double>> trips;
  for (int idx = 0; idx < ti.count(); ++idx) {
    const auto mi = ti.decode(idx);
    for (int k = 0; k < ti.d; ++k) {
      if (mi[k] >= ti.n) continue;
      double c = 1.0 / h;
      for (int j = 0; j < ti.d; ++j)
        if (j != k) c *= w1(mi[j]);
      const int nb = idx + ti.stride[k];
      trips.emplace_back(idx, idx, c);
      trips.emplace_back(nb, nb, c);
      trips.emplace_back(idx, nb, -c);
      trips.emplace_back(nb, idx, -c);
    }
  }
  return trips;
}

// Surface quadrature weight of a boundary node: sum over the faces it lies
// on of the product of tangential trapezoid weights.
double boundary_weight(const TensorIndexer& ti, const Vec& w1, int idx) {
  const auto mi = ti.decode(idx);
  double s = 0.0;
  for (int k = 0; k < ti.d; ++k) {
    if (mi[k] != 0 && mi[k] != ti.n) continue;
    double f = 1.0;
    for (int j = 0; j < ti.d; ++j)
      if (j != k) f *= w1(mi[j]);
    s += f;
  }
  return s;
}

}  // namespace

GridOperator build_laplacian(int d, int n, const BoundaryCondition& bc) {
  if (d < 1 || d > 3) throw domain_error("build_laplacian: d must be 1, 2, or 3");
  if (n < 3) throw domain_error("build_laplacian: n must be >= 3");
  bc.validate();

  const TensorIndexer ti(d, n);
  auto trips = stiffness_triplets(ti);
  const auto full = cube_grid(d, n);

  GridOperator op;
  op.family = Family::laplacian;
  op.params = {{"d", d}, {"n", n}, {"bc", bc.kind == BcKind::dirichlet ? "dirichlet"
                                            : bc.kind == BcKind::neumann ? "neumann" : "robin"}};
  op.weighted_self_adjoint = true;

  if (bc.kind == BcKind::dirichlet) {
    // Keep interior rows/columns of the stiffness; dropped couplings to the
    // boundary enforce u = 0 there.
    auto space = cube_interior_grid(d, n);
    std::vector<int> to_interior(ti.count(), -1);
    {
      int next = 0;
      for (int idx = 0; idx < ti.count(); ++idx) {
        const auto mi = ti.decode(idx);
        bool interior = true;
        for (int k = 0; k < d; ++k)
          if (mi[k] == 0 || mi[k] == n) interior = false;
        if (interior) to_interior[idx] = next++;
      }
    }
    const double wcell = std::pow(1.0 / n, d);
    std::vector<Eigen::Triplet<double>> atrips;
    for (const auto& t : trips) {
      const int r = to_interior[t.row()], c = to_interior[t.col()];
      if (r >= 0 && c >= 0) atrips.emplace_back(r, c, -t.value() / wcell);
    }
    op.matrix.resize(space->size(), space->size());
    op.matrix.setFromTriplets(atrips.begin(), atrips.end());
    op.space = space;
  } else {
    if (bc.kind == BcKind::robin) {
      const Vec w1 = trapezoid_weights_1d(n);
      const auto& bnodes = full->boundary_nodes;
      Vec beta;
      if (bc.beta.size() == 1)
        beta = Vec::Constant(static_cast<Eigen::Index>(bnodes.size()), bc.beta(0));
      else if (bc.beta.size() == static_cast<Eigen::Index>(bnodes.size()))
        beta = bc.beta;
      else
        throw domain_error("build_laplacian: beta must be scalar or one value per boundary node");
      for (size_t b = 0; b < bnodes.size(); ++b)
        trips.emplace_back(bnodes[b], bnodes[b], beta(b) * boundary_weight(ti, w1, bnodes[b]));
    }
    std::vector<Eigen::Triplet<double>> atrips;
    atrips.reserve(trips.size());
    for (const auto& t : trips)
      atrips.emplace_back(t.row(), t.col(), -t.value() / full->weights(t.row()));
    op.matrix.resize(full->size(), full->size());
    op.matrix.setFromTriplets(atrips.begin(), atrips.end());
    op.space = full;
    if (bc.kind == BcKind::robin) op.params["beta"] = bc.beta.size() == 1 ? bc.beta(0) : 0.0;
  }
  op.matrix.makeCompressed();
  op.validate();
  return op;
}

namespace {

bool strongly_connected(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& adj) {
  const int n = static_cast<int>(adj.rows());
  if (n == 1) return true;
  auto reach = [&](bool transpose) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u = 0; u < n; ++u) {
        const bool edge = transpose ? adj(u, v) : adj(v, u);
        if (edge && !seen[u]) {
          seen[u] = true;
          stack.push_back(u);
        }
      }
    }
    for (bool s : seen)
      if (!s) return false;
    return true;
  };
  return reach(false) && reach(true);
}

}  // namespace

GridOperator build_coupled(int n, int d, int N, const std::vector<Eigen::MatrixXd>& V) {
  if (N < 1) throw domain_error("build_coupled: N must be >= 1");
  GridOperator base = build_laplacian(d, n, BoundaryCondition::neumann());
  const int nodes = base.space->node_count();
  if (!(V.size() == 1 || V.size() == static_cast<size_t>(nodes)))
    throw validation_error("build_coupled: V must hold one matrix or one per node");

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> pattern(N, N);
  pattern.setConstant(false);
  bool symmetric = true;
  for (const auto& Vx : V) {
    if (Vx.rows() != N || Vx.cols() != N)
      throw validation_error("build_coupled: potential matrices must be N x N");
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (i != j) {
          if (Vx(i, j) < 0.0)
            throw validation_error("build_coupled: negative off-diagonal potential entry");
          if (Vx(i, j) > 0.0) pattern(i, j) = true;
        }
        if (Vx(i, j) != Vx(j, i)) symmetric = false;
      }
  }
  if (!strongly_connected(pattern) && N > 1)
    throw validation_error("build_coupled: coupling pattern is reducible");

  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < N; ++c) {
    const int off = c * nodes;
    for (int k = 0; k < base.matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(base.matrix, k); it; ++it)
        trips.emplace_back(off + it.row(), off + it.col(), it.value());
  }
  for (int x = 0; x < nodes; ++x) {
    const Eigen::MatrixXd& Vx = V.size() == 1 ? V[0] : V[x];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (Vx(i, j) != 0.0) trips.emplace_back(i * nodes + x, j * nodes + x, Vx(i, j));
  }

  GridOperator op;
  op.space = with_components(base.space, N);
  op.matrix.resize(op.space->size(), op.space->size());
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  op.family = Family::coupled;
  op.params = {{"d", d}, {"n", n}, {"N", N}, {"layout", "component-major"}};
  op.weighted_self_adjoint = symmetric;
  op.validate();
  return op;
}

GridOperator build_dtn(int n, int d, const Vec& V) {
  if (d < 2 || d > 3) throw domain_error("build_dtn: d must be 2 or 3");
  if (n < 3) throw domain_error("build_dtn: n must be >= 3");
  const auto full = cube_grid(d, n);
  const int count = full->node_count();
  Vec pot;
  if (V.size() == 1)
    pot = Vec::Constant(count, V(0));
  else if (V.size() == count)
    pot = V;
  else
    throw validation_error("build_dtn: V must be scalar or one value per full-grid node");

  // Paper precondition: ||V^-||_inf strictly below the smallest eigenvalue of
  // -Laplace_Dir, which for this discretization is d*(4/h^2)*sin^2(pi*h/2).
  const double h = 1.0 / n;
  const double vminus = std::max(0.0, -pot.minCoeff());
  const double lam_min_dir = d * (4.0 / (h * h)) * std::pow(std::sin(M_PI * h / 2.0), 2);
  if (!(vminus < lam_min_dir)) {
    std::ostringstream msg;
    msg << "build_dtn: ||V^-||_inf = " << vminus
        << " must be strictly below the smallest Dirichlet eigenvalue " << lam_min_dir;
    throw validation_error(msg.str());
  }

  const TensorIndexer ti(d, n);
  auto trips = stiffness_triplets(ti);
  for (int idx = 0; idx < count; ++idx)
    if (pot(idx) != 0.0) trips.emplace_back(idx, idx, pot(idx) * full->weights(idx));
  SpMat K(count, count);
  K.setFromTriplets(trips.begin(), trips.end());

  const auto& bnodes = full->boundary_nodes;
  const int nb = static_cast<int>(bnodes.size());
  if (nb > 4000) throw numerical_error("build_dtn: boundary too large for a dense Schur complement");
  std::vector<int> to_interior(count, -1), to_boundary(count, -1);
  for (int b = 0; b < nb; ++b) to_boundary[bnodes[b]] = b;
  int ni = 0;
  for (int idx = 0; idx < count; ++idx)
    if (to_boundary[idx] < 0) to_interior[idx] = ni++;

  std::vector<Eigen::Triplet<double>> tII, tIB, tBI, tBB;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it) {
      const int ri = to_interior[it.row()], ci = to_interior[it.col()];
      const int rb = to_boundary[it.row()], cb = to_boundary[it.col()];
      if (ri >= 0 && ci >= 0) tII.emplace_back(ri, ci, it.value());
      else if (ri >= 0 && cb >= 0) tIB.emplace_back(ri, cb, it.value());
      else if (rb >= 0 && ci >= 0) tBI.emplace_back(rb, ci, it.value());
      else tBB.emplace_back(rb, cb, it.value());
    }
  SpMat KII(ni, ni), KIB(ni, nb), KBI(nb, ni);
  KII.setFromTriplets(tII.begin(), tII.end());
  KIB.setFromTriplets(tIB.begin(), tIB.end());
  KBI.setFromTriplets(tBI.begin(), tBI.end());
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nb, nb);
  for (const auto& t : tBB) S(t.row(), t.col()) += t.value();

  Eigen::SimplicialLDLT<SpMat> solver(KII);
  if (solver.info() != Eigen::Success)
    throw numerical_error("build_dtn: interior stiffness factorization failed");
  // S = K_BB - K_BI K_II^{-1} K_IB, accumulated column by column.
  for (int b = 0; b < nb; ++b) {
    const Vec col = KIB.col(b);
    const Vec x = solver.solve(col);
    S.col(b) -= KBI * x;
  }

  const Vec w1 = trapezoid_weights_1d(n);
  auto space = std::make_shared<GridSpace>();
  space->dim = d - 1;
  space->h = h;
  space->nodes.resize(nb, d);
  space->weights.resize(nb);
  for (int b = 0; b < nb; ++b) {
    const auto mi = ti.decode(bnodes[b]);
    for (int k = 0; k < d; ++k) space->nodes(b, k) = mi[k] * h;
    space->weights(b) = boundary_weight(ti, w1, bnodes[b]);
  }
  space->measure = space->weights.sum();

  GridOperator op;
  op.space = space;
  op.matrix = (-(space->weights.cwiseInverse().asDiagonal() * S)).sparseView();
  op.matrix.makeCompressed();
  op.family = Family::dtn;
  op.params = {{"d", d}, {"n", n}, {"V_const", V.size() == 1 ? V(0) : 0.0}};
  op.weighted_self_adjoint = true;
  op.validate();
  return op;
}

GridOperator build_power(const GridOperator& base, int k, bool shift_check) {
  if (k < 1) throw domain_error("build_power: k must be >= 1");
  if (shift_check) {
    const auto rep = leading_eigenpair(base);
    if (!(rep.lambda0 < -1e-8 * rep.scale)) {
      std::ostringstream msg;
      msg << "build_power: spectral bound of base is " << rep.lambda0
          << " but must be strictly negative";
      throw validation_error(msg.str());
    }
  }
  SpMat neg = -base.matrix;
  SpMat pow = neg;
  for (int i = 1; i < k; ++i) pow = (pow * neg).pruned();
  GridOperator op;
  op.matrix = -pow;
  op.matrix.makeCompressed();
  op.space = base.space;
  op.family = Family::power;
  op.params = {{"k", k}, {"base_family", family_name(base.family)}, {"base_params", base.params}};
  op.weighted_self_adjoint = base.weighted_self_adjoint;
  op.validate();
  return op;
}

GridOperator wrap_dense(const Eigen::MatrixXd& M, SpacePtr space, nlohmann::json params) {
  GridOperator op;
  op.matrix = M.sparseView();
  op.matrix.makeCompressed();
  op.space = std::move(space);
  op.family = Family::dense;
  op.params = std::move(params);
  op.validate();
  return op;
}

GridOperator transposed(const GridOperator& op) {
  GridOperator t = op;
  t.matrix = SpMat(op.matrix.transpose());
  // (WA)^T = WA implies W A^T = (A W)^T W^{-1} W = A^T W... transpose of a
  // weighted-self-adjoint operator is weighted-self-adjoint again.
  return t;
}

bool is_metzler(const GridOperator& op, double tol) {
  for (int k = 0; k < op.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(op.matrix, k); it; ++it)
      if (it.row() != it.col() && it.value() < -tol) return false;
  return true;
}

void save_operator(const GridOperator& op, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw numerical_error("save_operator: cannot open " + path.string());
  out << std::setprecision(17);
  out << "amplab-operator 1\n";
  out << "family " << family_name(op.family) << "\n";
  out << "wsa " << (op.weighted_self_adjoint ? 1 : 0) << "\n";
  out << "params " << op.params.dump() << "\n";
  const auto& s = *op.space;
  out << "space dim " << s.dim << " components " << s.components << " h " << s.h << " measure "
      << s.measure << " nodes " << s.node_count() << " coord_dim " << s.nodes.cols() << "\n";
  for (int i = 0; i < s.node_count(); ++i) {
    out << "node";
    for (int k = 0; k < s.nodes.cols(); ++k) out << " " << s.nodes(i, k);
    out << " " << s.weights(i) << "\n";
  }
  out << "boundary " << s.boundary_nodes.size();
  for (int b : s.boundary_nodes) out << " " << b;
  out << "\n";
  out << "dims " << op.matrix.rows() << " " << op.matrix.cols() << " " << op.matrix.nonZeros()
      << "\n";
  for (int k = 0; k < op.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(op.matrix, k); it; ++it)
      out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

GridOperator load_operator(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw numerical_error("load_operator: cannot open " + path.string());
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "amplab-operator" || version != 1)
    throw validation_error("load_operator: unrecognized format");
  GridOperator op;
  std::string key, fam;
  in >> key >> fam;
  op.family = family_from_name(fam);
  int wsa = 0;
  in >> key >> wsa;
  op.weighted_self_adjoint = wsa != 0;
  in >> key;
  std::string params_line;
  std::getline(in, params_line);
  op.params = nlohmann::json::parse(params_line);
  auto space = std::make_shared<GridSpace>();
  int nodes = 0, coord_dim = 0;
  in >> key >> key >> space->dim >> key >> space->components >> key >> space->h >> key >>
      space->measure >> key >> nodes >> key >> coord_dim;
  space->nodes.resize(nodes, coord_dim);
  space->weights.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    in >> key;
    for (int k = 0; k < coord_dim; ++k) in >> space->nodes(i, k);
    in >> space->weights(i);
  }
  size_t nbdry = 0;
  in >> key >> nbdry;
  space->boundary_nodes.resize(nbdry);
  for (auto& b : space->boundary_nodes) in >> b;
  long rows = 0, cols = 0, nnz = 0;
  in >> key >> rows >> cols >> nnz;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(nnz);
  for (long i = 0; i < nnz; ++i) {
    long r = 0, c = 0;
    double v = 0.0;
    in >> r >> c >> v;
    trips.emplace_back(r, c, v);
  }
  if (!in) throw validation_error("load_operator: truncated file");
  op.space = space;
  op.matrix.resize(rows, cols);
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  op.validate();
  return op;
}

}  // namespace amp
