#pragma once
// Data-parallel inner kernels behind the operator-norm and semigroup-norm
// paths. Each kernel has an OpenMP row loop and a serial reference with the
// same per-row arithmetic; reductions are max-only, so both produce bitwise
// identical results (tested, and compared by the benchmark target).

#include <Eigen/Dense>

#include "amp/grid.hpp"

namespace amp::kernels {

// max over rows i of (sum_j |T_ij|^{p'} w_j^{1-p'})^{1/p'}, the exact
// L^p(w) -> L^inf operator norm of T. p=1 uses the max_j |T_ij|/w_j branch.
double row_dual_norm_max(const Eigen::MatrixXd& T, const Vec& w, double p, bool parallel);

// max over rows i of (1/w_i) * sum_k Q_ik^2 exp(tau * lam_k): the weighted
// kernel diagonal of exp(tau*S) in the eigenbasis Q of the symmetrized
// operator. The squared 2->inf norm of e^{tA} is this value at tau = 2t.
double kernel_diag_max(const Eigen::MatrixXd& Q, const Vec& lam, const Vec& w, double tau,
                       bool parallel);

}  // namespace amp::kernels
