#pragma once
// Cached factorization of (lambda*I - A) for repeated right-hand sides.
// Symmetric matrices get a Cholesky-type factorization first, with a
// fallback to sparse LU when the residual check rejects it (indefinite
// shifts on the left of lambda0).

#include <memory>

#include "amp/operators.hpp"

namespace amp {

struct SolveOptions {
  double residual_rel = 1e-10;  // target ||(lam I - A)x - f||_inf <= this * ||f||_inf
  int max_refinements = 4;
  // Inverse iteration solves on purpose next to an eigenvalue; they disable
  // the residual gate and keep only the finiteness check.
  bool check_residual = true;
};

class ResolventSolver {
 public:
  ResolventSolver(const GridOperator& A, double lambda, SolveOptions opts = {});
  ~ResolventSolver();
  ResolventSolver(ResolventSolver&&) noexcept;
  ResolventSolver& operator=(ResolventSolver&&) noexcept;

  // Solves (lambda*I - A)x = f with iterative refinement; throws
  // numerical_error ("lambda in (numerical) spectrum") when the residual
  // target cannot be met, carrying a resolvent-norm lower bound.
  Vec apply(const Vec& f) const;
  // Solves (lambda*I - A)^T x = f.
  Vec apply_transpose(const Vec& f) const;
  double lambda() const { return lambda_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double lambda_ = 0.0;
};

}  // namespace amp
