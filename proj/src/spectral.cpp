#include "amp/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

#include "amp/fit.hpp"
#include "amp/parallel.hpp"
#include "amp/solver.hpp"

namespace amp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const SpMat& A) {
  Vec rowsum = Vec::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) rowsum(it.row()) += std::abs(it.value());
  return rowsum.size() ? rowsum.maxCoeff() : 0.0;
}

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

struct EigPair {
  double lambda0 = 0.0;
  Vec v;
  Vec l;  // plain left eigenvector, A^T l = lambda0 l
  double gap = kInf;
  int multiplicity = 1;
  bool simple = true;
};

// Inverse iteration with the cached factorization of (shift*I - A); returns
// the normalized eigenvector for the eigenvalue nearest the shift.
Vec shift_invert_iterate(const ResolventSolver& solver, bool transpose, Vec z, const SpMat& M,
                         double scale, double tol, int max_iter, double* lambda_out) {
  double lambda = 0.0;
  double res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    Vec y = transpose ? solver.apply_transpose(z) : solver.apply(z);
    const double nrm = y.cwiseAbs().maxCoeff();
    if (!(nrm > 0.0) || !y.allFinite())
      throw numerical_error("leading_eigenpair: inverse iteration broke down");
    z = y / nrm;
    const Vec Mz = transpose ? Vec(M.transpose() * z) : Vec(M * z);
    lambda = z.dot(Mz) / z.dot(z);
    res = (Mz - lambda * z).cwiseAbs().maxCoeff();
    if (res <= tol * scale) {
      if (lambda_out) *lambda_out = lambda;
      return z;
    }
  }
  std::ostringstream msg;
  msg << "leading_eigenpair: inverse iteration did not converge (residual scale " << res / scale
      << ")";
  throw numerical_error(msg.str());
}

EigPair dense_symmetric_pair(const GridOperator& A, double scale, const EigOptions& opts) {
  const int n = A.size();
  const Vec w = A.space->dof_weights();
  const Vec sq = w.cwiseSqrt();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < A.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(A.matrix, k); it; ++it)
      S(it.row(), it.col()) += it.value() * sq(it.row()) / sq(it.col());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw numerical_error("leading_eigenpair: dense symmetric eigensolver failed");
  const Vec evs = es.eigenvalues();  // ascending
  EigPair p;
  p.lambda0 = evs(n - 1);
  const double ctol = opts.cluster_rel * std::max(scale, 1e-300);
  p.multiplicity = 0;
  double next = -kInf;
  for (int i = 0; i < n; ++i) {
    if (std::abs(evs(i) - p.lambda0) <= ctol) ++p.multiplicity;
    else next = std::max(next, evs(i));
  }
  p.gap = std::isinf(next) ? kInf : p.lambda0 - next;
  p.simple = p.multiplicity == 1;
  p.v = es.eigenvectors().col(n - 1).cwiseQuotient(sq);
  p.l = es.eigenvectors().col(n - 1).cwiseProduct(sq);
  return p;
}

EigPair dense_general_pair(const GridOperator& A, double scale, const EigOptions& opts) {
  const int n = A.size();
  Eigen::EigenSolver<Eigen::MatrixXd> es(A.dense());
  if (es.info() != Eigen::Success)
    throw numerical_error("leading_eigenpair: dense eigensolver failed");
  const Eigen::VectorXcd evs = es.eigenvalues();
  int lead = 0;
  for (int i = 1; i < n; ++i)
    if (evs(i).real() > evs(lead).real()) lead = i;
  const double ctol = opts.cluster_rel * std::max(scale, 1e-300);
  if (std::abs(evs(lead).imag()) > ctol) {
    std::ostringstream msg;
    msg << "no real spectral bound: leading eigenvalue " << evs(lead).real() << " + "
        << evs(lead).imag() << "i is not real";
    throw numerical_error(msg.str());
  }
  EigPair p;
  p.lambda0 = evs(lead).real();
  p.multiplicity = 0;
  double next = -kInf;
  for (int i = 0; i < n; ++i) {
    if (std::abs(evs(i).real() - p.lambda0) <= ctol && std::abs(evs(i).imag()) <= ctol)
      ++p.multiplicity;
    else if (evs(i).real() < p.lambda0 - ctol)
      next = std::max(next, evs(i).real());
  }
  // A complex cluster sharing the leading real part also breaks simplicity.
  int same_real = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(evs(i).real() - p.lambda0) <= ctol) ++same_real;
  p.gap = std::isinf(next) ? kInf : p.lambda0 - next;
  p.simple = p.multiplicity == 1 && same_real == 1;
  const Eigen::VectorXcd vc = es.eigenvectors().col(lead);
  if (vc.imag().cwiseAbs().maxCoeff() > 1e-6 * vc.real().cwiseAbs().maxCoeff() + 1e-300)
    throw numerical_error("leading_eigenpair: eigenvector has a significant imaginary part");
  p.v = vc.real();

  // Dual eigenvector by shifted inverse iteration on A^T.
  const double shift = p.lambda0 + std::max(1e-10 * scale, 1e-12);
  SolveOptions lax;
  lax.check_residual = false;  // the shift sits on purpose next to the spectrum
  const ResolventSolver solver(A, shift, lax);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  Vec z = Vec::Ones(n);
  for (int i = 0; i < n; ++i) z(i) += 0.01 * gauss(rng);
  p.l = shift_invert_iterate(solver, true, z, A.matrix, scale, opts.residual_rel, 50, nullptr);
  return p;
}

EigPair iterative_pair(const GridOperator& A, double scale, const EigOptions& opts) {
  const int n = A.size();
  const double upper = gershgorin_upper(A.matrix);
  const double pad = std::max(1e-4 * scale, 1e-10);
  const double sigma = upper + pad;
  const ResolventSolver solver(A, sigma);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  auto start = [&](bool positive) {
    Vec z(n);
    for (int i = 0; i < n; ++i) z(i) = positive ? 1.0 + 0.1 * std::abs(gauss(rng)) : gauss(rng);
    return z;
  };

  EigPair p;
  p.v = shift_invert_iterate(solver, false, start(true), A.matrix, scale, opts.residual_rel,
                             opts.max_iterations, &p.lambda0);
  if (A.weighted_self_adjoint) {
    // Weighted Rayleigh quotient: quadratically accurate in the eigenvector.
    const Vec w = A.space->dof_weights();
    p.lambda0 = w.cwiseProduct(p.v).dot(A.matrix * p.v) / w.cwiseProduct(p.v).dot(p.v);
  }
  // Geometric simplicity heuristic: a second, independent start must land on
  // the same ray.
  const Vec v2 = shift_invert_iterate(solver, false, start(false), A.matrix, scale,
                                      opts.residual_rel, opts.max_iterations, nullptr);
  const double cosang = std::abs(p.v.dot(v2)) / (p.v.norm() * v2.norm() + 1e-300);
  p.simple = cosang >= 1.0 - 1e-8;
  p.multiplicity = p.simple ? 1 : 2;

  p.l = shift_invert_iterate(solver, true, start(false), A.matrix, scale, opts.residual_rel,
                             opts.max_iterations, nullptr);

  // Gap from a deflated iteration: project the leading component out of the
  // iterate each step and read off the Rayleigh quotient.
  const Vec vn = p.v / p.v.norm();
  const Vec ln = p.l / p.l.dot(vn);
  Vec z = start(false);
  z -= vn * ln.dot(z);
  double lam1 = 0.0;
  bool got = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Vec y = solver.apply(z);
    y -= vn * ln.dot(y);
    const double nrm = y.cwiseAbs().maxCoeff();
    if (!(nrm > 0.0)) break;
    z = y / nrm;
    const Vec Mz = A.matrix * z;
    lam1 = z.dot(Mz) / z.dot(z);
    if ((Mz - lam1 * z - vn * ln.dot(Mz - lam1 * z)).cwiseAbs().maxCoeff() <= 1e-6 * scale) {
      got = true;
      break;
    }
  }
  if (!got) throw numerical_error("leading_eigenpair: deflated gap iteration did not converge");
  p.gap = p.lambda0 - lam1;
  if (p.gap < 0.0) p.gap = 0.0;
  return p;
}

}  // namespace

SpectralReport leading_eigenpair(const GridOperator& A, const EigOptions& opts) {
  const int n = A.size();
  if (n == 0) throw domain_error("leading_eigenpair: empty operator");
  const double scale = std::max(inf_norm(A.matrix), 1e-300);

  EigPair p;
  if (n <= opts.dense_cap)
    p = A.weighted_self_adjoint ? dense_symmetric_pair(A, scale, opts)
                                : dense_general_pair(A, scale, opts);
  else
    p = iterative_pair(A, scale, opts);

  const Vec w = A.space->dof_weights();
  Vec v = p.v / p.v.cwiseAbs().maxCoeff();
  if (w.dot(v) < 0.0) v = -v;
  // phi carries the weighted pairing: <phi, f>_w = sum w phi f = l^T f.
  Vec phi = p.l.cwiseQuotient(w);
  const double pairing = w.cwiseProduct(phi).dot(v);
  if (std::abs(pairing) < 1e-12 * (phi.cwiseAbs().maxCoeff() * v.cwiseAbs().maxCoeff() + 1e-300))
    throw numerical_error("leading_eigenpair: dual pairing degenerate (near-defective eigenvalue)");
  phi /= pairing;

  SpectralReport rep;
  rep.lambda0 = p.lambda0;
  rep.scale = scale;
  rep.residual = (A.matrix * v - p.lambda0 * v).cwiseAbs().maxCoeff();
  if (rep.residual > 10.0 * opts.residual_rel * scale) {
    std::ostringstream msg;
    msg << "leading_eigenpair: eigenpair residual " << rep.residual << " exceeds "
        << 10.0 * opts.residual_rel * scale;
    throw numerical_error(msg.str());
  }
  rep.v = GridFunction(v, A.space);
  rep.phi = GridFunction(phi, A.space);
  rep.gap = p.gap;
  rep.multiplicity = p.multiplicity;
  rep.simple = p.simple && (std::isinf(p.gap) || p.gap > opts.cluster_rel * scale);
  rep.c_dom = v.minCoeff();
  rep.phi_min = phi.minCoeff();
  return rep;
}

AssumptionVerdict check_spectral_assumption(const SpectralReport& rep, const GridFunction& u,
                                            const ConeTolerance& tol) {
  AssumptionVerdict out;
  out.simple = rep.simple;
  auto dom = cone_dominates(rep.v, u, tol);
  out.v_dominates_u = dom.verdict;
  out.c_dom = dom.c;
  const GridFunction ones = constant_function(rep.v.space, 1.0);
  out.phi_strictly_positive = cone_dominates(rep.phi, ones, tol).verdict;
  out.overall = out.simple && out.v_dominates_u.holds && out.phi_strictly_positive.holds;
  return out;
}

AssumptionVerdict check_spectral_assumption(const GridOperator& A, const GridFunction& u,
                                            const ConeTolerance& tol, const EigOptions& opts) {
  return check_spectral_assumption(leading_eigenpair(A, opts), u, tol);
}

Eigen::MatrixXd spectral_projection(const SpectralReport& rep) {
  const Vec w = rep.v.space->dof_weights();
  const double pairing = w.cwiseProduct(rep.phi.values).dot(rep.v.values);
  if (std::abs(pairing - 1.0) > 1e-10)
    throw domain_error("spectral_projection: report pairing <phi,v>_w != 1");
  return rep.v.values * (w.cwiseProduct(rep.phi.values)).transpose();
}

DominationScaling mesh_robust_domination(
    const std::function<GridOperator(int)>& builder, std::span<const int> ladder,
    const std::function<GridFunction(const GridOperator&)>& u_rule, const EigOptions& opts) {
  if (ladder.size() < 3) throw domain_error("mesh_robust_domination: ladder needs >= 3 rungs");
  DominationScaling out;
  out.rungs.resize(ladder.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel::for_index(static_cast<int>(ladder.size()), [&](int i) {
    try {
      const GridOperator op = builder(ladder[i]);
      const SpectralReport rep = leading_eigenpair(op, opts);
      const GridFunction u =
          u_rule ? u_rule(op) : constant_function(op.space, 1.0);
      DominationRung r;
      r.n = ladder[i];
      r.h = op.space->h;
      r.lambda0 = rep.lambda0;
      r.c_dom = cone_dominates(rep.v, u, ConeTolerance{}).c;
      r.phi_min = rep.phi_min;
      out.rungs[i] = r;
    } catch (...) {
      std::scoped_lock lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  std::vector<double> hs, cs, phis;
  for (const auto& r : out.rungs) {
    if (!(r.c_dom > 0.0))
      throw numerical_error("mesh_robust_domination: non-positive c_dom at a rung");
    hs.push_back(r.h);
    cs.push_back(r.c_dom);
    phis.push_back(std::max(r.phi_min, 1e-300));
  }
  const auto fit = loglog_fit(hs, cs);
  out.alpha = fit.slope;
  out.fit_residual = fit.residual;
  out.phi_min_alpha = loglog_fit(hs, phis).slope;
  return out;
}

}  // namespace amp
