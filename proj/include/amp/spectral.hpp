#pragma once
// Leading eigenpair extraction (spectral bound, right eigenvector, dual
// eigenvector), spectral gap, the spectral-assumption verdict, the rank-one
// spectral projection, and mesh-ladder scaling of the domination constant
// c_dom = max{c : v >= c*u}.

#include <functional>
#include <span>

#include "amp/cone.hpp"
#include "amp/operators.hpp"

namespace amp {

struct EigOptions {
  int dense_cap = 4096;       // dense eigensolve up to this side, iterative above
  double cluster_rel = 1e-8;  // eigenvalue cluster / simplicity tolerance (x scale)
  double residual_rel = 1e-8;
  int max_iterations = 2000;
  uint64_t seed = 0x5eed5eedULL;
};

struct SpectralReport {
  double lambda0 = 0.0;
  GridFunction v;    // ||v||_inf = 1, sign fixed by sum(w*v) >= 0
  GridFunction phi;  // dual eigenvector, <phi, v>_w = 1
  double gap = 0.0;  // distance to the next distinct real part (inf if none)
  double c_dom = 0.0;   // largest c with v >= c * 1
  double phi_min = 0.0;
  int multiplicity = 1;  // cluster size (dense path) resp. 1/2 heuristic (iterative)
  bool simple = false;
  double residual = 0.0;  // ||A v - lambda0 v||_inf
  double scale = 0.0;     // ||A||_inf, the tolerance scale
};

SpectralReport leading_eigenpair(const GridOperator& A, const EigOptions& opts = {});

struct AssumptionVerdict {
  bool simple = false;
  ConeVerdict v_dominates_u;
  double c_dom = 0.0;
  ConeVerdict phi_strictly_positive;
  bool overall = false;
};

AssumptionVerdict check_spectral_assumption(const GridOperator& A, const GridFunction& u,
                                            const ConeTolerance& tol,
                                            const EigOptions& opts = {});
AssumptionVerdict check_spectral_assumption(const SpectralReport& rep, const GridFunction& u,
                                            const ConeTolerance& tol);

// P = v (w .* phi)^T, the rank-one pole projection: P^2 = P, PA = AP = lambda0 P.
Eigen::MatrixXd spectral_projection(const SpectralReport& rep);

struct DominationRung {
  int n = 0;
  double h = 0.0;
  double lambda0 = 0.0;
  double c_dom = 0.0;
  double phi_min = 0.0;
};

struct DominationScaling {
  double alpha = 0.0;  // c_dom(h) ~ h^alpha; ~0 robust, >0 degenerate
  double fit_residual = 0.0;
  double phi_min_alpha = 0.0;  // recorded, not judged (see ledger)
  std::vector<DominationRung> rungs;
};

// Builds the family at every rung of the mesh ladder and fits the scaling of
// c_dom against u_rule (default: the constant-one function).
DominationScaling mesh_robust_domination(
    const std::function<GridOperator(int)>& builder, std::span<const int> ladder,
    const std::function<GridFunction(const GridOperator&)>& u_rule = {},
    const EigOptions& opts = {});

}  // namespace amp
