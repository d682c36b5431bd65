#include "amp/cone.hpp"

#include <cmath>
#include <limits>

namespace amp {

void ConeTolerance::validate() const {
  if (rel < 0.0 || abs < 0.0) throw domain_error("ConeTolerance: slacks must be >= 0");
  if (rel == 0.0 && abs == 0.0) throw domain_error("ConeTolerance: rel and abs cannot both be zero");
}

namespace {

void require_strictly_positive(const Vec& u) {
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (!(u(i) > 0.0)) throw domain_error("reference vector u must be strictly positive entrywise");
}

}  // namespace

double gauge_norm(const Vec& f, const Vec& u) {
  if (f.size() != u.size()) throw domain_error("gauge_norm: size mismatch");
  require_strictly_positive(u);
  double m = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f(i)) / u(i));
  return m;
}

double gauge_norm(const GridFunction& f, const GridFunction& u) {
  return gauge_norm(f.values, u.values);
}

ConeVerdict cone_nonneg(const Vec& f, const ConeTolerance& tol, double scale) {
  tol.validate();
  ConeVerdict v;
  if (f.size() == 0) {
    v.holds = true;
    return v;
  }
  Eigen::Index witness = 0;
  const double min = f.minCoeff(&witness);
  v.witness_index = witness;
  v.holds = min >= -(tol.rel * scale + tol.abs);
  v.margin = scale > 0.0 ? min / scale : min;
  return v;
}

ConeVerdict cone_nonneg(const GridFunction& f, const ConeTolerance& tol) {
  const double scale = f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0;
  return cone_nonneg(f.values, tol, scale);
}

DominationResult cone_dominates(const Vec& f, const Vec& u, const ConeTolerance& tol) {
  tol.validate();
  if (f.size() != u.size()) throw domain_error("cone_dominates: size mismatch");
  require_strictly_positive(u);
  DominationResult r;
  if (f.size() == 0) {
    r.verdict.holds = true;
    return r;
  }
  double c = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  Eigen::Index witness = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double q = f(i) / u(i);
    scale = std::max(scale, std::abs(q));
    if (q < c) {
      c = q;
      witness = i;
    }
  }
  r.c = c;
  const double threshold = tol.rel * scale + tol.abs;
  r.verdict.holds = c > threshold;
  r.verdict.margin = scale > 0.0 ? c / scale : c;
  r.verdict.witness_index = witness;
  return r;
}

DominationResult cone_dominates(const GridFunction& f, const GridFunction& u,
                                const ConeTolerance& tol) {
  return cone_dominates(f.values, u.values, tol);
}

double lp_norm(const Vec& f, const Vec& weights, double p) {
  if (f.size() != weights.size()) throw domain_error("lp_norm: size mismatch");
  if (std::isinf(p)) return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  if (p < 1.0) throw domain_error("lp_norm: p must be >= 1");
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) s += weights(i) * std::pow(std::abs(f(i)), p);
  return std::pow(s, 1.0 / p);
}

double lp_norm(const GridFunction& f, double p) {
  return lp_norm(f.values, f.space->dof_weights(), p);
}

}  // namespace amp
