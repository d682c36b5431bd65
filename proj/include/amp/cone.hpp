#pragma once
// Tolerance-aware cone arithmetic on grid functions: positivity verdicts,
// gauge norms ||f||_u = max|f_i|/u_i, domination constants (the largest c
// with f >= c*u), and weighted L^p norms.
//
// Verdicts are always relative to a scale: resolvents near a pole have a
// huge dynamic range, so absolute slacks are meaningless on their own.

#include "amp/grid.hpp"

namespace amp {

struct ConeTolerance {
  double rel = 1e-9;
  double abs = 0.0;
  void validate() const;
};

struct ConeVerdict {
  bool holds = false;
  // Worst-case slack normalized by the scale in use; negative when violated.
  double margin = 0.0;
  Eigen::Index witness_index = -1;
};

// u must be strictly positive entrywise.
double gauge_norm(const Vec& f, const Vec& u);
double gauge_norm(const GridFunction& f, const GridFunction& u);

// f >= 0 up to slack rel*scale + abs. scale is the caller's normalization.
ConeVerdict cone_nonneg(const Vec& f, const ConeTolerance& tol, double scale);
// Convenience: scale = ||f||_inf.
ConeVerdict cone_nonneg(const GridFunction& f, const ConeTolerance& tol);

struct DominationResult {
  ConeVerdict verdict;
  double c = 0.0;  // largest constant with f >= c*u (may be negative)
};

// The relation "f dominates u" is strict: holds iff c clears the threshold
// rel*gauge_norm(f,u) + abs from above. Borderline c is reported as a fail
// with its margin so callers can study degeneration.
DominationResult cone_dominates(const Vec& f, const Vec& u, const ConeTolerance& tol);
DominationResult cone_dominates(const GridFunction& f, const GridFunction& u,
                                const ConeTolerance& tol);

// (sum_i w_i |f_i|^p)^(1/p); p = inf is a separate branch returning max|f_i|.
double lp_norm(const Vec& f, const Vec& weights, double p);
double lp_norm(const GridFunction& f, double p);

}  // namespace amp
