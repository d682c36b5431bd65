// Timing comparison of the serial reference kernels against the OpenMP
// variants, plus a ladder-level scan comparison. On a single core the two
// should tie; with more threads the row loops and the per-offset solves
// scale.

#include <chrono>
#include <cstdio>
#include <random>

#include "amp/kernels.hpp"
#include "amp/parallel.hpp"
#include "amp/random_fields.hpp"
#include "amp/resolvent.hpp"

using namespace amp;

namespace {

template <typename Fn>
double time_ms(Fn&& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main() {
  const int avail = parallel::max_jobs();
  std::printf("jobs available: %d\n\n", avail);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;

  {
    const int n = 1500;
    Eigen::MatrixXd T(n, n);
    Vec w(n), lam(n);
    for (int i = 0; i < n; ++i) {
      w(i) = 0.1 + std::abs(gauss(rng));
      lam(i) = -std::abs(gauss(rng)) * 100.0;
      for (int j = 0; j < n; ++j) T(i, j) = gauss(rng);
    }
    volatile double sink = 0.0;
    const double ts = time_ms([&] { sink = kernels::row_dual_norm_max(T, w, 1.5, false); });
    const double tp = time_ms([&] { sink = kernels::row_dual_norm_max(T, w, 1.5, true); });
    std::printf("row_dual_norm_max %dx%d  serial %8.2f ms  parallel %8.2f ms  speedup %.2fx\n",
                n, n, ts, tp, ts / tp);
    const double ks = time_ms([&] { sink = kernels::kernel_diag_max(T, lam, w, 1e-3, false); });
    const double kp = time_ms([&] { sink = kernels::kernel_diag_max(T, lam, w, 1e-3, true); });
    std::printf("kernel_diag_max   %dx%d  serial %8.2f ms  parallel %8.2f ms  speedup %.2fx\n",
                n, n, ks, kp, ks / kp);
    (void)sink;
  }

  {
    // Window scans solve one factorization per ladder offset; the offsets
    // are independent and run through the same parallel loop.
    const auto op = build_laplacian(2, 48, BoundaryCondition::dirichlet());
    EigOptions eopts;
    eopts.dense_cap = 100;
    const auto rep = leading_eigenpair(op, eopts);
    const auto f = squared_gaussian_field(op.space, 3);
    const auto u = constant_function(op.space, 1.0);
    const auto ladder = LadderSpec::for_gap(rep.gap);
    const ConeTolerance tol{1e-9, 0.0};

    parallel::set_jobs(1);
    const double ts = time_ms(
        [&] { scan_window(op, rep, f, WindowSide::left, WindowMode::plain, u, ladder, tol); }, 2);
    parallel::set_jobs(avail);
    const double tp = time_ms(
        [&] { scan_window(op, rep, f, WindowSide::left, WindowMode::plain, u, ladder, tol); }, 2);
    std::printf("scan_window 20 offsets (2d dirichlet n=48)  1 job %8.2f ms  %d jobs %8.2f ms  speedup %.2fx\n",
                ts, avail, tp, ts / tp);
  }
  return 0;
}
