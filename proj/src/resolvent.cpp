#include "amp/resolvent.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

#include "amp/fit.hpp"
#include "amp/parallel.hpp"

namespace amp {

GridFunction apply_resolvent(const GridOperator& A, double lambda, const GridFunction& f,
                             const SolveOptions& opts) {
  if (f.size() != A.size()) throw domain_error("apply_resolvent: size mismatch");
  ResolventSolver s(A, lambda, opts);
  return GridFunction(s.apply(f.values), A.space);
}

std::pair<GridFunction, ExpansionCheck> expansion_eval(const GridOperator& A, double lambda,
                                                       std::span<const double> mus,
                                                       const GridFunction& f,
                                                       const SolveOptions& opts) {
  const int m = static_cast<int>(mus.size());
  ExpansionCheck check;
  check.m = m;
  check.lambda = lambda;
  check.mus.assign(mus.begin(), mus.end());

  auto make_solver = [&](double point) {
    try {
      return ResolventSolver(A, point, opts);
    } catch (const numerical_error& e) {
      std::ostringstream msg;
      msg << "expansion_eval: solve failed at point " << point << ": " << e.what();
      throw numerical_error(msg.str());
    }
  };

  ResolventSolver at_lambda = make_solver(lambda);
  std::vector<ResolventSolver> at_mu;
  at_mu.reserve(m);
  for (double mu : mus) at_mu.push_back(make_solver(mu));

  const Vec lhs = at_lambda.apply(f.values);

  // g_k = Res(mu_1) ... Res(mu_k) f, innermost solve first.
  auto product_apply = [&](int k) {
    Vec v = f.values;
    for (int j = k - 1; j >= 0; --j) v = at_mu[j].apply(v);
    return v;
  };

  Vec rhs = Vec::Zero(f.size());
  double coeff = 1.0;  // prod_{j<k} (mu_j - lambda)
  for (int k = 1; k <= m; ++k) {
    rhs += coeff * product_apply(k);
    coeff *= mus[k - 1] - lambda;
  }
  if (m == 0) {
    rhs = at_lambda.apply(f.values);
  } else {
    rhs += coeff * at_lambda.apply(product_apply(m));
  }

  const double denom = std::max(lhs.cwiseAbs().maxCoeff(), 1e-300);
  check.residual = (lhs - rhs).cwiseAbs().maxCoeff() / denom;
  return {GridFunction(rhs, A.space), check};
}

std::vector<double> LadderSpec::offsets() const {
  validate();
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j) out[j] = top * std::pow(ratio, -(count - 1 - j));
  return out;
}

void LadderSpec::validate() const {
  if (!(top > 0.0)) throw domain_error("LadderSpec: top must be > 0");
  if (!(ratio > 1.0)) throw domain_error("LadderSpec: ratio must be > 1");
  if (count < 1) throw domain_error("LadderSpec: count must be >= 1");
}

LadderSpec LadderSpec::for_gap(double gap, double top_frac, double ratio, int count) {
  LadderSpec l;
  l.top = std::isfinite(gap) ? top_frac * gap : 1.0;
  l.ratio = ratio;
  l.count = count;
  l.validate();
  return l;
}

PoleFit pole_order(const GridOperator& A, const SpectralReport& rep, const GridFunction& f,
                   const LadderSpec& ladder, const SolveOptions& opts) {
  const Vec w = A.space->dof_weights();
  const double pairing = w.cwiseProduct(rep.phi.values).dot(f.values);
  const double pscale =
      rep.phi.values.cwiseAbs().maxCoeff() * f.values.cwiseAbs().maxCoeff() + 1e-300;
  if (std::abs(pairing) <= 1e-12 * pscale)
    throw domain_error("pole_order: <phi, f> vanishes, the leading term is deflated");

  LadderSpec l = ladder;
  if (std::isfinite(rep.gap)) l.top = std::min(l.top, 0.5 * rep.gap);
  PoleFit fit;
  std::vector<double> eps, norms;
  for (double e : l.offsets()) {
    ResolventSolver s(A, rep.lambda0 + e, opts);
    const double nrm = s.apply(f.values).cwiseAbs().maxCoeff();
    eps.push_back(e);
    norms.push_back(nrm);
    fit.table.emplace_back(e, nrm);
  }
  const auto lf = loglog_fit(eps, norms);
  fit.slope = lf.slope;
  fit.fit_residual = lf.residual;
  if (-lf.slope < 0.5)
    throw numerical_error("pole_order: flat fit, no pole seen along the ladder");
  fit.m = static_cast<int>(std::lround(-lf.slope));
  return fit;
}

Window scan_window(const GridOperator& A, const SpectralReport& rep, const GridFunction& f,
                   WindowSide side, WindowMode mode, const GridFunction& u,
                   const LadderSpec& ladder, const ConeTolerance& tol,
                   const SolveOptions& opts) {
  if (f.size() != A.size()) throw domain_error("scan_window: f does not match operator");
  const double fmax = f.values.maxCoeff();
  if (!(fmax > 0.0) || f.values.minCoeff() < -1e-14 * fmax)
    throw domain_error("scan_window: f must be >= 0 and nonzero");
  const auto offs = ladder.offsets();
  if (std::isfinite(rep.gap) && offs.back() >= rep.gap)
    throw domain_error("scan_window: ladder must stay inside the spectral gap");
  tol.validate();
  if (mode == WindowMode::strong) {
    if (u.size() != A.size()) throw domain_error("scan_window: u does not match operator");
    if (!(u.values.minCoeff() > 0.0))
      throw domain_error("scan_window: strong mode needs strictly positive u");
  }

  Window win;
  win.side = side;
  win.mode = mode;
  win.profile.resize(offs.size());

  parallel::for_index(static_cast<int>(offs.size()), [&](int i) {
    WindowPoint pt;
    pt.offset = offs[i];
    pt.lambda = side == WindowSide::right ? rep.lambda0 + offs[i] : rep.lambda0 - offs[i];
    try {
      ResolventSolver solver(A, pt.lambda, opts);
      Vec x = solver.apply(f.values);
      if (side == WindowSide::left) x = -x;
      if (mode == WindowMode::plain) {
        const double scale = x.cwiseAbs().maxCoeff();
        pt.verdict = cone_nonneg(x, tol, scale);
        pt.c_value = 0.0;
      } else {
        const auto dom = cone_dominates(x, u.values, tol);
        pt.verdict = dom.verdict;
        pt.c_value = dom.c;
      }
    } catch (const numerical_error&) {
      pt.solve_failed = true;
      pt.verdict.holds = false;
    }
    win.profile[i] = pt;
  });

  for (const auto& pt : win.profile) {
    if (!pt.verdict.holds || pt.solve_failed) break;
    win.delta = pt.offset;
  }
  return win;
}

TransferReport window_transfer_check(const GridOperator& A, const SpectralReport& rep,
                                     std::span<const GridFunction> fs, const GridFunction& u,
                                     int n_dom, double rel_tol, int left_points,
                                     const SolveOptions& opts) {
  if (n_dom < 1) throw domain_error("window_transfer_check: n_dom must be >= 1");
  const double gap = std::isfinite(rep.gap) ? rep.gap : 1.0;
  const ConeTolerance nonneg_tol{1e-9, 0.0};

  TransferReport report;
  report.n_dom = n_dom;
  report.cases.resize(fs.size());

  std::vector<double> left_offsets(left_points);
  for (int j = 0; j < left_points; ++j)
    left_offsets[j] = 0.5 * gap * std::pow(2.0, -(left_points - 1 - j));

  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel::for_index(static_cast<int>(fs.size()), [&](int fi) {
    try {
      const GridFunction& f = fs[fi];
      TransferCase tc;
      tc.f_index = fi;

      // One passing point mu > lambda0: descend the right ladder until the
      // plain verdict holds.
      std::unique_ptr<ResolventSolver> at_mu;
      Vec g;
      for (int attempt = 0; attempt < 6 && !tc.right_pass; ++attempt) {
        const double mu = rep.lambda0 + gap * std::pow(2.0, -(attempt + 1));
        try {
          auto solver = std::make_unique<ResolventSolver>(A, mu, opts);
          Vec x = solver->apply(f.values);
          if (cone_nonneg(x, nonneg_tol, x.cwiseAbs().maxCoeff()).holds) {
            tc.right_pass = true;
            tc.mu = mu;
            at_mu = std::move(solver);
            g = std::move(x);
          }
        } catch (const numerical_error&) {
        }
      }
      if (!tc.right_pass) {
        report.cases[fi] = tc;
        return;
      }

      // g_k = Res(mu)^k f, all >= 0 once the first one is.
      std::vector<Vec> gk{g};
      for (int k = 1; k < n_dom; ++k) gk.push_back(at_mu->apply(gk.back()));

      tc.passed = true;
      tc.worst_margin = 0.0;
      for (double eps : left_offsets) {
        const double lam = rep.lambda0 - eps;
        ResolventSolver at_lam(A, lam, opts);
        const Vec x = at_lam.apply(f.values);
        const Vec y = at_lam.apply(gk.back());

        // Expansion route: x = sum_k (mu-lam)^{k-1} g_k + (mu-lam)^n y.
        Vec route = Vec::Zero(x.size());
        double coeff = 1.0;
        for (int k = 0; k < n_dom; ++k) {
          route += coeff * gk[k];
          coeff *= tc.mu - lam;
        }
        route += coeff * y;
        const double idres =
            (x - route).cwiseAbs().maxCoeff() / std::max(x.cwiseAbs().maxCoeff(), 1e-300);
        tc.max_identity_residual = std::max(tc.max_identity_residual, idres);
        if (idres > rel_tol) tc.passed = false;

        // Predicted constant: Res(lam)f >= -(mu-lam)^n ||Res(lam) g_n||_u * u.
        const double c_pred = coeff * gauge_norm(y, u.values);
        const Vec slack = x + c_pred * u.values;
        const double scale = x.cwiseAbs().maxCoeff() + c_pred * u.values.maxCoeff();
        const auto verdict = cone_nonneg(slack, ConeTolerance{rel_tol, 0.0}, scale);
        tc.worst_margin = std::min(tc.worst_margin, verdict.margin);
        if (!verdict.holds) tc.passed = false;
      }
      report.cases[fi] = tc;
    } catch (...) {
      std::scoped_lock lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  report.ok = !report.cases.empty();
  for (const auto& tc : report.cases) report.ok = report.ok && tc.passed;
  return report;
}

}  // namespace amp
