#include "amp/kernels.hpp"

#include <cmath>

#include "amp/errors.hpp"
#include "amp/parallel.hpp"

namespace amp::kernels {

namespace {

double row_dual_norm(const Eigen::MatrixXd& T, const Vec& w, double p, Eigen::Index i) {
  const Eigen::Index n = T.cols();
  if (p == 1.0) {
    double m = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) m = std::max(m, std::abs(T(i, j)) / w(j));
    return m;
  }
  const double pp = p / (p - 1.0);
  double s = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    s += std::pow(std::abs(T(i, j)), pp) * std::pow(w(j), 1.0 - pp);
  return std::pow(s, 1.0 / pp);
}

double diag_entry(const Eigen::MatrixXd& Q, const Vec& lam, const Vec& w, double tau,
                  Eigen::Index i) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < Q.cols(); ++k) s += Q(i, k) * Q(i, k) * std::exp(tau * lam(k));
  return s / w(i);
}

template <typename PerRow>
double row_max(Eigen::Index rows, bool parallel, PerRow&& per_row) {
  if (!parallel) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) m = std::max(m, per_row(i));
    return m;
  }
  double m = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(max : m) schedule(static)
#endif
  for (Eigen::Index i = 0; i < rows; ++i) m = std::max(m, per_row(i));
  return m;
}

}  // namespace

double row_dual_norm_max(const Eigen::MatrixXd& T, const Vec& w, double p, bool parallel) {
  if (T.cols() != w.size()) throw domain_error("row_dual_norm_max: size mismatch");
  if (!(p >= 1.0) || std::isinf(p)) throw domain_error("row_dual_norm_max: need 1 <= p < inf");
  return row_max(T.rows(), parallel, [&](Eigen::Index i) { return row_dual_norm(T, w, p, i); });
}

double kernel_diag_max(const Eigen::MatrixXd& Q, const Vec& lam, const Vec& w, double tau,
                       bool parallel) {
  if (Q.rows() != w.size() || Q.cols() != lam.size())
    throw domain_error("kernel_diag_max: size mismatch");
  return row_max(Q.rows(), parallel, [&](Eigen::Index i) { return diag_entry(Q, lam, w, tau, i); });
}

}  // namespace amp::kernels
