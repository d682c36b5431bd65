#include "amp/semigroup.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <sstream>

#include "amp/cone.hpp"
#include "amp/fit.hpp"
#include "amp/kernels.hpp"
#include "amp/solver.hpp"

namespace amp {

namespace {

double gershgorin_upper(const SpMat& A) {
  Vec diag = Vec::Zero(A.rows());
  Vec off = Vec::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      if (it.row() == it.col()) diag(it.row()) += it.value();
      else off(it.row()) += std::abs(it.value());
    }
  return (diag + off).maxCoeff();
}

double norm1(const SpMat& A) {
  Vec colsum = Vec::Zero(A.cols());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) colsum(it.col()) += std::abs(it.value());
  return colsum.size() ? colsum.maxCoeff() : 0.0;
}

// Pade-13 scaling and squaring (Higham 2005).
Eigen::MatrixXd expm_pade(const Eigen::MatrixXd& A) {
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const Eigen::Index n = A.rows();
  const double nrm = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  Eigen::MatrixXd As = A;
  if (nrm > theta13) {
    s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    As /= std::pow(2.0, s);
  }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd A2 = As * As;
  const Eigen::MatrixXd A4 = A2 * A2;
  const Eigen::MatrixXd A6 = A2 * A4;
  const Eigen::MatrixXd U =
      As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 +
            b[1] * I);
  const Eigen::MatrixXd V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  Eigen::MatrixXd E = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < s; ++i) E = E * E;
  return E;
}

}  // namespace

struct SemigroupEvaluator::Impl {
  Path path = Path::dense_pade;
  SemigroupOptions opts;
  int side = 0;
  double upper = 0.0;  // Gershgorin upper bound, for the horizon guard
  Vec w;

  // sym_eig
  Vec sqw, lam;
  Eigen::MatrixXd Q;

  // tensor
  int d = 1, m1 = 0;
  Vec w1, sqw1, lam1;
  Eigen::MatrixXd Q1;

  // dense_pade
  Eigen::MatrixXd Adense;

  // sparse_action
  SpMat Asp;
  double shift = 0.0;
  double shifted_norm1 = 0.0;

  void check_horizon(double t) const {
    if (t * std::max(upper, 0.0) > opts.horizon) {
      std::ostringstream msg;
      msg << "expm: t = " << t << " is beyond the stability horizon for spectral bound <= "
          << upper << "; rescale t or shift the operator";
      throw numerical_error(msg.str());
    }
  }

  Vec apply_tensor(double t, const Vec& f) const {
    // e^{t (A1 (+) ... (+) A1)} = E(t) applied along each axis, with
    // E(t) = W1^{-1/2} Q1 e^{t lam} Q1^T W1^{1/2}.
    Eigen::MatrixXd E = Q1 * (t * lam1.array()).exp().matrix().asDiagonal() * Q1.transpose();
    E = sqw1.cwiseInverse().asDiagonal() * E * sqw1.asDiagonal();
    Vec x = f;
    Vec slab(m1), out(m1);
    int stride = 1;
    for (int axis = 0; axis < d; ++axis) {
      const int outer = static_cast<int>(x.size()) / (m1 * stride);
      for (int hi = 0; hi < outer; ++hi)
        for (int lo = 0; lo < stride; ++lo) {
          const int base = lo + hi * stride * m1;
          for (int i = 0; i < m1; ++i) slab(i) = x(base + i * stride);
          out.noalias() = E * slab;
          for (int i = 0; i < m1; ++i) x(base + i * stride) = out(i);
        }
      stride *= m1;
    }
    return x;
  }

  Vec apply_sparse(double t, Vec v) const {
    check_horizon(t);
    const double work = t * shifted_norm1;
    const int steps = std::max(1, static_cast<int>(std::ceil(work / 3.5)));
    if (steps > 200000)
      throw numerical_error("expm: t is beyond the practical substepping horizon; rescale");
    const double tau = t / steps;
    const double etau = std::exp(shift * tau);
    for (int s = 0; s < steps; ++s) {
      Vec term = v;
      Vec acc = v;
      for (int j = 1; j <= 60; ++j) {
        term = (tau / j) * (Asp * term);
        acc += term;
        if (term.cwiseAbs().maxCoeff() <= opts.action_tol * acc.cwiseAbs().maxCoeff()) break;
      }
      v = etau * acc;
    }
    return v;
  }
};

SemigroupEvaluator::SemigroupEvaluator(const GridOperator& A, SemigroupOptions opts)
    : impl_(std::make_unique<Impl>()) {
  auto& im = *impl_;
  im.opts = opts;
  im.side = A.size();
  im.w = A.space->dof_weights();
  im.upper = gershgorin_upper(A.matrix);

  const bool tensorizable = A.family == Family::laplacian && A.params.contains("d") &&
                            A.params.contains("n") && A.params.contains("bc");
  if (im.side <= opts.dense_cap && A.weighted_self_adjoint) {
    im.path = Path::sym_eig;
    im.sqw = im.w.cwiseSqrt();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(im.side, im.side);
    for (int k = 0; k < A.matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(A.matrix, k); it; ++it)
        S(it.row(), it.col()) += it.value() * im.sqw(it.row()) / im.sqw(it.col());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw numerical_error("expm: eigendecomposition failed");
    im.Q = es.eigenvectors();
    im.lam = es.eigenvalues();
  } else if (im.side <= opts.dense_cap) {
    im.path = Path::dense_pade;
    im.Adense = A.dense();
  } else if (tensorizable) {
    im.path = Path::tensor;
    im.d = A.params["d"].get<int>();
    const int n = A.params["n"].get<int>();
    const std::string bc = A.params["bc"].get<std::string>();
    BoundaryCondition cond = bc == "dirichlet" ? BoundaryCondition::dirichlet()
                             : bc == "neumann" ? BoundaryCondition::neumann()
                                               : BoundaryCondition::robin(A.params["beta"].get<double>());
    const GridOperator axis = build_laplacian(1, n, cond);
    im.m1 = axis.size();
    im.w1 = axis.space->weights;
    im.sqw1 = im.w1.cwiseSqrt();
    Eigen::MatrixXd S1 = Eigen::MatrixXd::Zero(im.m1, im.m1);
    for (int k = 0; k < axis.matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(axis.matrix, k); it; ++it)
        S1(it.row(), it.col()) += it.value() * im.sqw1(it.row()) / im.sqw1(it.col());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S1);
    if (es.info() != Eigen::Success) throw numerical_error("expm: 1d eigendecomposition failed");
    im.Q1 = es.eigenvectors();
    im.lam1 = es.eigenvalues();
  } else {
    im.path = Path::sparse_action;
    im.Asp = A.matrix;
    double trace = 0.0;
    for (int i = 0; i < im.side; ++i) trace += im.Asp.coeff(i, i);
    im.shift = trace / im.side;
    for (int i = 0; i < im.side; ++i) im.Asp.coeffRef(i, i) -= im.shift;
    im.Asp.makeCompressed();
    im.shifted_norm1 = norm1(im.Asp);
  }
}

SemigroupEvaluator::~SemigroupEvaluator() = default;
SemigroupEvaluator::SemigroupEvaluator(SemigroupEvaluator&&) noexcept = default;

SemigroupEvaluator::Path SemigroupEvaluator::path() const { return impl_->path; }

Vec SemigroupEvaluator::apply(double t, const Vec& f) const {
  if (t < 0.0) throw domain_error("expm: t must be >= 0");
  if (static_cast<int>(f.size()) != impl_->side) throw domain_error("expm: size mismatch");
  if (t == 0.0) return f;
  auto& im = *impl_;
  im.check_horizon(t);
  switch (im.path) {
    case Path::sym_eig: {
      const Vec y = im.Q.transpose() * im.sqw.cwiseProduct(f).eval();
      const Vec z = (t * im.lam.array()).exp().matrix().cwiseProduct(y);
      return (im.Q * z).cwiseQuotient(im.sqw);
    }
    case Path::tensor:
      return im.apply_tensor(t, f);
    case Path::dense_pade:
      return expm_pade(t * im.Adense) * f;
    case Path::sparse_action:
      return im.apply_sparse(t, f);
  }
  throw numerical_error("expm: unreachable");
}

bool SemigroupEvaluator::has_exact_norms(double p) const {
  switch (impl_->path) {
    case Path::sym_eig:
    case Path::dense_pade:
      return p >= 1.0 && !std::isinf(p);
    case Path::tensor:
      return p == 2.0;
    case Path::sparse_action:
      return false;
  }
  return false;
}

double SemigroupEvaluator::opnorm_p_to_inf(double t, double p) const {
  if (std::isinf(p)) throw domain_error("opnorm_p_to_inf: p = inf not supported");
  if (!(p >= 1.0)) throw domain_error("opnorm_p_to_inf: p must be >= 1");
  if (t < 0.0) throw domain_error("opnorm_p_to_inf: t must be >= 0");
  auto& im = *impl_;
  im.check_horizon(t);
  switch (im.path) {
    case Path::sym_eig:
      if (p == 2.0)
        return std::sqrt(kernels::kernel_diag_max(im.Q, im.lam, im.w, 2.0 * t, true));
      else {
        Eigen::MatrixXd T =
            im.Q * (t * im.lam.array()).exp().matrix().asDiagonal() * im.Q.transpose();
        T = im.sqw.cwiseInverse().asDiagonal() * T * im.sqw.asDiagonal();
        return kernels::row_dual_norm_max(T, im.w, p, true);
      }
    case Path::tensor: {
      if (p != 2.0) throw numerical_error("opnorm_p_to_inf: tensor path only supports p = 2");
      // The weighted kernel diagonal of a Kronecker sum factorizes, so the
      // d-dimensional 2->inf norm is the 1d factor to the power d.
      const double k1 = kernels::kernel_diag_max(im.Q1, im.lam1, im.w1, 2.0 * t, true);
      return std::pow(k1, 0.5 * im.d);
    }
    case Path::dense_pade: {
      const Eigen::MatrixXd E = expm_pade(t * im.Adense);
      return kernels::row_dual_norm_max(E, im.w, p, true);
    }
    case Path::sparse_action:
      throw numerical_error("opnorm_p_to_inf: no exact norm on the sparse action path; probe");
  }
  throw numerical_error("opnorm_p_to_inf: unreachable");
}

GridFunction expm_apply(const GridOperator& A, double t, const GridFunction& f,
                        const SemigroupOptions& opts) {
  SemigroupEvaluator ev(A, opts);
  return GridFunction(ev.apply(t, f.values), A.space);
}

double opnorm_p_to_inf(const Eigen::MatrixXd& T, const Vec& weights, double p) {
  if (std::isinf(p)) throw domain_error("opnorm_p_to_inf: p = inf not supported");
  if (!(p >= 1.0)) throw domain_error("opnorm_p_to_inf: p must be >= 1");
  return kernels::row_dual_norm_max(T, weights, p, true);
}

ProbeEstimate opnorm_probe_p_to_inf(const std::function<Vec(const Vec&)>& action,
                                    const GridSpace& space, double p,
                                    std::span<const double> widths, const Vec& center) {
  if (center.size() != space.nodes.cols())
    throw domain_error("opnorm_probe_p_to_inf: center dimension mismatch");
  ProbeEstimate est;
  for (double wd : widths) {
    Vec f = Vec::Zero(space.size());
    for (int i = 0; i < space.node_count(); ++i) {
      const double dist = (space.nodes.row(i).transpose() - center).norm();
      if (dist < wd) {
        const double r = dist / wd;
        f(i) = (1.0 - r * r) * (1.0 - r * r);
      }
    }
    const double nf = lp_norm(f, space.dof_weights(), p);
    if (!(nf > 0.0)) continue;  // bump missed the grid
    f /= nf;
    const double value = action(f).cwiseAbs().maxCoeff();
    est.curve.push_back({wd, value});
    est.value = std::max(est.value, value);
  }
  if (est.curve.empty())
    throw domain_error("opnorm_probe_p_to_inf: no probe width hits the grid");
  return est;
}

std::vector<double> TLadder::points() const {
  if (count < 2) throw domain_error("TLadder: count must be >= 2");
  if (!(t_min > 0.0) || !(t_max > t_min)) throw domain_error("TLadder: need 0 < t_min < t_max");
  std::vector<double> out(count);
  const double r = std::pow(t_max / t_min, 1.0 / (count - 1));
  for (int i = 0; i < count; ++i) out[i] = t_min * std::pow(r, i);
  return out;
}

SmoothingFit smoothing_fit(const GridOperator& A, double p, const TLadder& ladder,
                           const SemigroupOptions& opts) {
  if (ladder.count < 6) throw domain_error("smoothing_fit: need >= 6 ladder points");
  const double floor = 4.0 * A.space->h * A.space->h;
  if (ladder.t_min < floor) {
    std::ostringstream msg;
    msg << "smoothing_fit: t_min = " << ladder.t_min << " is below the resolution floor "
        << floor << " (refine the mesh or raise t_min)";
    throw domain_error(msg.str());
  }
  SemigroupEvaluator ev(A, opts);
  if (!ev.has_exact_norms(p))
    throw numerical_error("smoothing_fit: no exact norm path for this operator and p");

  const auto ts = ladder.points();
  std::vector<double> norms(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) norms[i] = ev.opnorm_p_to_inf(ts[i], p);

  const auto fit = loglog_fit(ts, norms);
  SmoothingFit out;
  out.q = -fit.slope;
  out.c = std::exp(fit.intercept);
  out.t_min = ladder.t_min;
  out.t_max = ladder.t_max;
  out.fit_residual = fit.residual;
  out.n_implied = static_cast<int>(std::floor(out.q)) + 1;
  for (size_t i = 0; i < ts.size(); ++i)
    out.table.push_back({ts[i], norms[i], out.c * std::pow(ts[i], -out.q)});
  if (fit.residual > 0.25)
    throw numerical_error("smoothing_fit: no power law (log-log residual above 0.25)");
  return out;
}

std::vector<DominationDiagnostic> domination_index(
    const std::function<GridOperator(int)>& builder, double p, int n_max,
    std::span<const int> mesh_ladder, const DominationOptions& opts) {
  if (n_max < 1) throw domain_error("domination_index: n_max must be >= 1");
  if (mesh_ladder.size() < 2) throw domain_error("domination_index: ladder needs >= 2 rungs");

  std::vector<DominationDiagnostic> out(n_max);
  for (int n = 1; n <= n_max; ++n) {
    out[n - 1].n = n;
    out[n - 1].rungs.resize(mesh_ladder.size());
  }

  for (size_t r = 0; r < mesh_ladder.size(); ++r) {
    const GridOperator A = builder(mesh_ladder[r]);
    const SpectralReport rep = leading_eigenpair(A, opts.eig);
    const double sigma = rep.lambda0 + opts.sigma_offset;
    ResolventSolver solver(A, sigma);
    const int side = A.size();

    if (side <= opts.norm_dense_cap) {
      Eigen::MatrixXd Rn = Eigen::MatrixXd::Identity(side, side);
      Eigen::MatrixXd R(side, side);
      for (int j = 0; j < side; ++j) R.col(j) = solver.apply(Vec::Unit(side, j));
      for (int n = 1; n <= n_max; ++n) {
        Rn = (R * Rn).eval();
        out[n - 1].rungs[r] = {mesh_ladder[r], A.space->h,
                               opnorm_p_to_inf(Rn, A.space->dof_weights(), p), false};
      }
    } else {
      // Bump-probe protocol: geometric widths from w_max down to the single
      // cell w = h, the smallest probing the kernel singularity scale.
      std::vector<double> widths;
      for (double wd = opts.probe_w_max; wd > A.space->h * 1.0000001; wd /= opts.probe_ratio)
        widths.push_back(wd);
      widths.push_back(A.space->h);
      Vec center = Vec::Constant(A.space->nodes.cols(), 0.5);
      for (int n = 1; n <= n_max; ++n) {
        auto action = [&](const Vec& f) {
          Vec x = f;
          for (int k = 0; k < n; ++k) x = solver.apply(x);
          return x;
        };
        const auto est = opnorm_probe_p_to_inf(action, *A.space, p, widths, center);
        out[n - 1].rungs[r] = {mesh_ladder[r], A.space->h, est.value, true};
        out[n - 1].estimate = true;
      }
    }
  }

  for (auto& diag : out) {
    std::vector<double> invh, vals;
    for (const auto& rung : diag.rungs) {
      invh.push_back(1.0 / rung.h);
      vals.push_back(rung.value);
    }
    diag.growth_exponent = loglog_fit(invh, vals).slope;
    diag.robust = diag.growth_exponent <= opts.robust_threshold;
  }
  return out;
}

}  // namespace amp
