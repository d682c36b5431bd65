#include "amp/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <sstream>

namespace amp {

struct ResolventSolver::Impl {
  SpMat M;   // lambda I - A
  SpMat Mt;  // its transpose (kept for refinement of transpose solves)
  double mnorm = 0.0;  // ||M||_1, for the backward-error part of the residual gate
  bool symmetric = false;
  bool use_ldlt = false;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  Eigen::SparseLU<SpMat> lu;
  bool lu_ready = false;
  SolveOptions opts;

  void ensure_lu() {
    if (lu_ready) return;
    lu.compute(M);
    lu_ready = true;
  }

  Vec raw_solve(const Vec& f, bool transpose) {
    if (use_ldlt) return ldlt.solve(f);  // symmetric: transpose solve is the same
    ensure_lu();
    if (lu.info() != Eigen::Success) throw numerical_error("sparse LU factorization failed");
    return transpose ? Vec(lu.adjoint().solve(f)) : Vec(lu.solve(f));
  }

  // Mixed gate: forward-style rel*||f|| far from the spectrum, plus the
  // backward-error term rel*||M||*||x|| which is what remains attainable when
  // the solution legitimately blows up near a pole.
  double gate(const Vec& x, double fn) const {
    return opts.residual_rel * (fn + mnorm * x.cwiseAbs().maxCoeff());
  }

  Vec solve_checked(const Vec& f, bool transpose, double lambda) {
    const SpMat& mat = transpose ? Mt : M;
    const double fn = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    auto residual = [&](const Vec& x) { return (mat * x - f).cwiseAbs().maxCoeff(); };

    Vec x = raw_solve(f, transpose);
    bool bad = !x.allFinite();
    if (!opts.check_residual) {
      if (bad) throw numerical_error("sparse solve overflowed");
      return x;
    }
    double res = bad ? std::numeric_limits<double>::infinity() : residual(x);
    for (int r = 0; r < opts.max_refinements && !bad && res > gate(x, fn); ++r) {
      x += raw_solve(Vec(f - mat * x), transpose);
      bad = !x.allFinite();
      res = bad ? std::numeric_limits<double>::infinity() : residual(x);
    }
    if (use_ldlt && (bad || res > gate(x, fn))) {
      // Indefinite or otherwise LDLT-hostile shift: retry through LU.
      use_ldlt = false;
      return solve_checked(f, transpose, lambda);
    }
    if (bad || (res > gate(x, fn) && fn > 0.0)) {
      std::ostringstream msg;
      msg << "lambda in (numerical) spectrum at " << lambda << ": residual "
          << (fn > 0.0 ? res / fn : res) << " after refinement";
      if (!bad && fn > 0.0)
        msg << "; resolvent norm at least " << x.cwiseAbs().maxCoeff() / fn;
      throw numerical_error(msg.str());
    }
    // A solution this large means lambda sits within roundoff of an
    // eigenvalue: the backward residual is small but x is pure noise.
    if (fn > 0.0 && x.cwiseAbs().maxCoeff() * (1e-13 * mnorm) > fn) {
      std::ostringstream msg;
      msg << "lambda in (numerical) spectrum at " << lambda
          << ": resolvent norm at least " << x.cwiseAbs().maxCoeff() / fn;
      throw numerical_error(msg.str());
    }
    return x;
  }
};

ResolventSolver::ResolventSolver(const GridOperator& A, double lambda, SolveOptions opts)
    : impl_(std::make_unique<Impl>()), lambda_(lambda) {
  impl_->opts = opts;
  impl_->M = -A.matrix;
  for (int i = 0; i < A.size(); ++i) impl_->M.coeffRef(i, i) += lambda;
  impl_->M.makeCompressed();
  impl_->Mt = SpMat(impl_->M.transpose());
  {
    Vec colsum = Vec::Zero(impl_->M.cols());
    for (int k = 0; k < impl_->M.outerSize(); ++k)
      for (SpMat::InnerIterator it(impl_->M, k); it; ++it)
        colsum(it.col()) += std::abs(it.value());
    impl_->mnorm = colsum.size() ? colsum.maxCoeff() : 0.0;
  }

  impl_->symmetric = (impl_->M - impl_->Mt).squaredNorm() == 0.0;
  if (impl_->symmetric) {
    impl_->ldlt.compute(impl_->M);
    impl_->use_ldlt = impl_->ldlt.info() == Eigen::Success;
  }
  if (!impl_->use_ldlt) {
    impl_->ensure_lu();
    if (impl_->lu.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "lambda in (numerical) spectrum: factorization of (" << lambda << " I - A) failed";
      throw numerical_error(msg.str());
    }
  }
}

ResolventSolver::~ResolventSolver() = default;
ResolventSolver::ResolventSolver(ResolventSolver&&) noexcept = default;
ResolventSolver& ResolventSolver::operator=(ResolventSolver&&) noexcept = default;

Vec ResolventSolver::apply(const Vec& f) const {
  return impl_->solve_checked(f, false, lambda_);
}

Vec ResolventSolver::apply_transpose(const Vec& f) const {
  return impl_->solve_checked(f, true, lambda_);
}

}  // namespace amp
