#include "amp/harness.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "amp/fit.hpp"
#include "amp/parallel.hpp"

namespace amp {

using nlohmann::json;

namespace {

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json table_to_json(const csv::Table& t) {
  return json{{"columns", t.columns}, {"rows", t.rows}};
}

csv::Table table_from_json(const json& j) {
  csv::Table t;
  t.columns = j.at("columns").get<std::vector<std::string>>();
  t.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
  return t;
}

}  // namespace

std::string ExperimentSpec::kind() const { return doc.at("kind").get<std::string>(); }

uint64_t ExperimentSpec::seed() const { return doc.value("seed", uint64_t{0}); }

std::string ExperimentSpec::canonical() const { return doc.dump(); }

std::string ExperimentSpec::hash() const { return hex64(fnv1a64(canonical())); }

ExperimentSpec ExperimentSpec::from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw validation_error("experiment spec must be an object with a \"kind\" field");
  return ExperimentSpec{j};
}

ExperimentSpec ExperimentSpec::load(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) throw validation_error("cannot open config " + config_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw validation_error(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

json RunRecord::to_json() const {
  return json{{"spec", spec.doc},   {"version", version}, {"results", results},
              {"verdicts", verdicts}, {"wall_ms", wall_ms}, {"passed", passed}};
}

RunRecord RunRecord::from_json(const json& j) {
  RunRecord r;
  r.spec = ExperimentSpec::from_json(j.at("spec"));
  r.version = j.at("version").get<std::string>();
  r.results = j.at("results");
  r.verdicts = j.at("verdicts");
  r.wall_ms = j.at("wall_ms").get<double>();
  r.passed = j.at("passed").get<bool>();
  return r;
}

GridOperator build_from_spec(const json& op_spec) {
  if (!op_spec.is_object() || !op_spec.contains("family"))
    throw validation_error("operator spec needs a \"family\" field");
  const std::string family = op_spec.at("family").get<std::string>();
  try {
    if (family == "rank_one") return build_rank_one(op_spec.at("n").get<int>());
    if (family == "laplacian") {
      const std::string bc = op_spec.value("bc", std::string("dirichlet"));
      BoundaryCondition cond = bc == "dirichlet" ? BoundaryCondition::dirichlet()
                               : bc == "neumann"
                                   ? BoundaryCondition::neumann()
                                   : BoundaryCondition::robin(op_spec.value("beta", 1.0));
      return build_laplacian(op_spec.value("d", 1), op_spec.at("n").get<int>(), cond);
    }
    if (family == "coupled") {
      const int N = op_spec.value("N", 2);
      std::vector<Eigen::MatrixXd> V;
      if (op_spec.contains("V_const")) {
        const auto rows = op_spec.at("V_const").get<std::vector<std::vector<double>>>();
        Eigen::MatrixXd M(N, N);
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j) M(i, j) = rows.at(i).at(j);
        V.push_back(M);
      } else {
        Eigen::MatrixXd M = Eigen::MatrixXd::Ones(N, N);
        M.diagonal().setZero();
        V.push_back(M);
      }
      return build_coupled(op_spec.at("n").get<int>(), op_spec.value("d", 1), N, V);
    }
    if (family == "dtn")
      return build_dtn(op_spec.at("n").get<int>(), op_spec.value("d", 2),
                       Vec::Constant(1, op_spec.value("V", 0.0)));
    if (family == "power")
      return build_power(build_from_spec(op_spec.at("base")), op_spec.at("k").get<int>(),
                         op_spec.value("shift_check", true));
    if (family == "metzler_random")
      return metzler_operator(op_spec.value("seed", uint64_t{1}), op_spec.at("side").get<int>());
  } catch (const json::exception& e) {
    throw validation_error(std::string("operator spec: ") + e.what());
  }
  throw validation_error("unknown operator family in spec: " + family);
}

std::filesystem::path record_path(const RunOptions& opts, const ExperimentSpec& spec) {
  return opts.out_dir / "records" / (spec.hash() + ".json");
}

void save_record(const RunRecord& record, const RunOptions& opts) {
  const auto path = record_path(opts, record.spec);
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw numerical_error("cannot write record " + path.string());
  out << record.to_json().dump(2) << "\n";
}

std::optional<RunRecord> load_record(const RunOptions& opts, const ExperimentSpec& spec) {
  const auto path = record_path(opts, spec);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j;
  in >> j;
  return RunRecord::from_json(j);
}

std::vector<std::filesystem::path> emit_report(const RunRecord& record, const std::string& format,
                                               const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  std::filesystem::create_directories(out_dir);
  if (format == "run-record") {
    const auto path = out_dir / (record.spec.hash() + ".record.json");
    std::ofstream out(path);
    if (!out) throw numerical_error("cannot write " + path.string());
    out << record.to_json().dump(2) << "\n";
    written.push_back(path);
    return written;
  }
  if (format != "csv") throw validation_error("emit_report: format must be csv or run-record");
  if (record.results.contains("tables"))
    for (const auto& [name, tj] : record.results.at("tables").items()) {
      const auto path = out_dir / (record.spec.hash() + "_" + name + ".csv");
      csv::write(table_from_json(tj), path);
      written.push_back(path);
    }
  return written;
}

// ---- random Metzler construction -------------------------------------------

Eigen::MatrixXd random_metzler(uint64_t seed, int side) {
  if (side < 1) throw domain_error("random_metzler: side must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(side, side);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      if (i == j) M(i, j) = gauss(rng) - 1.0;
      else if (uni(rng) < 0.35) M(i, j) = std::abs(gauss(rng));
    }
  // A positive cycle keeps the pattern irreducible.
  for (int i = 0; i < side; ++i) M(i, (i + 1) % side) = std::max(M(i, (i + 1) % side), 0.5 + uni(rng));
  return M;
}

GridOperator metzler_operator(uint64_t seed, int side) {
  return wrap_dense(random_metzler(seed, side), cell_grid_1d(side),
                    json{{"kind", "metzler_random"}, {"seed", seed}, {"side", side}});
}

// ---- equivalence property suite --------------------------------------------

EquivalenceReport run_equivalence_suite(const EquivalenceOptions& opts) {
  if (opts.count < 1) throw domain_error("run_equivalence_suite: count must be >= 1");
  EquivalenceReport report;
  report.cases.resize(opts.count);
  report.violations.resize(opts.violation_count);
  const ConeTolerance tol{opts.tol_rel, 0.0};

  for (int i = 0; i < opts.count; ++i) {
    EquivalenceCase c;
    c.case_seed = opts.seed + 1000003ULL * static_cast<uint64_t>(i);
    std::mt19937_64 rng(c.case_seed ^ 0xabcdULL);
    c.side = opts.min_side +
             static_cast<int>(rng() % static_cast<uint64_t>(opts.max_side - opts.min_side + 1));
    const GridOperator op = metzler_operator(c.case_seed, c.side);
    const SpectralReport rep = leading_eigenpair(op);
    const GridFunction u = constant_function(op.space, 1.0);
    c.assumption_ok = check_spectral_assumption(rep, u, tol).overall;
    const auto ladder = LadderSpec::for_gap(rep.gap);
    c.windows_ok = true;
    const auto fs = random_nonneg_batch(op.space, c.case_seed ^ 0xf00dULL, opts.f_per_matrix);
    for (const auto& f : fs) {
      const auto left = scan_window(op, rep, f, WindowSide::left, WindowMode::plain, u, ladder, tol);
      const auto right =
          scan_window(op, rep, f, WindowSide::right, WindowMode::plain, u, ladder, tol);
      c.windows_ok = c.windows_ok && left.delta > 0.0 && right.delta > 0.0;
    }
    c.passed = c.assumption_ok && c.windows_ok;
    report.cases[i] = c;
  }

  for (int i = 0; i < opts.violation_count; ++i) {
    ViolationCase vc;
    vc.case_seed = opts.seed + 7777777ULL * static_cast<uint64_t>(i + 1);
    std::mt19937_64 rng(vc.case_seed ^ 0xbeefULL);
    const int block = std::max(2, opts.min_side / 2) +
                      static_cast<int>(rng() % static_cast<uint64_t>(opts.max_side / 2));
    vc.side = 2 * block;
    const Eigen::MatrixXd B = random_metzler(vc.case_seed, block);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(vc.side, vc.side);
    A.topLeftCorner(block, block) = B;
    A.bottomRightCorner(block, block) = B;
    const GridOperator op = wrap_dense(A, cell_grid_1d(vc.side));

    // The artifact's own simplicity certificate must refuse this operator
    // (either by reporting simple == false or by failing on the degenerate
    // dual pairing).
    double lambda0 = 0.0, gap = 0.0;
    try {
      const SpectralReport rep = leading_eigenpair(op);
      vc.simplicity_flagged = !rep.simple;
      lambda0 = rep.lambda0;
      gap = rep.gap;
    } catch (const numerical_error&) {
      vc.simplicity_flagged = true;
      lambda0 = 0.0;
      gap = -1.0;
    }
    if (gap <= 0.0 || !std::isfinite(gap)) {
      // Brute-force eigenvalues for the scan parameters (suite-level oracle).
      Eigen::EigenSolver<Eigen::MatrixXd> es(A);
      lambda0 = es.eigenvalues().real().maxCoeff();
      double next = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < vc.side; ++k) {
        const double re = es.eigenvalues()(k).real();
        if (re < lambda0 - 1e-8 * A.cwiseAbs().maxCoeff()) next = std::max(next, re);
      }
      gap = lambda0 - next;
    }
    SpectralReport pseudo;
    pseudo.lambda0 = lambda0;
    pseudo.gap = gap;
    pseudo.v = constant_function(op.space, 1.0);
    pseudo.phi = constant_function(op.space, 1.0);

    // f supported on one block only: the strong conclusion cannot hold on
    // the other block, where the resolvent image vanishes identically.
    GridFunction f = squared_gaussian_field(op.space, vc.case_seed ^ 0x51deULL);
    f.values.tail(block).setZero();
    const GridFunction u = constant_function(op.space, 1.0);
    const auto ladder = LadderSpec::for_gap(gap);
    const auto left = scan_window(op, pseudo, f, WindowSide::left, WindowMode::strong, u, ladder, tol);
    const auto right =
        scan_window(op, pseudo, f, WindowSide::right, WindowMode::strong, u, ladder, tol);
    vc.strong_window_failed = left.delta == 0.0 || right.delta == 0.0;
    vc.detected = vc.simplicity_flagged && vc.strong_window_failed;
    report.violations[i] = vc;
  }

  report.all_passed = true;
  for (const auto& c : report.cases) report.all_passed = report.all_passed && c.passed;
  for (const auto& vc : report.violations) report.all_passed = report.all_passed && vc.detected;
  return report;
}

// ---- threshold study ---------------------------------------------------------

ThresholdTable run_threshold_study(const ThresholdOptions& opts) {
  ThresholdTable table;
  const ConeTolerance tol{1e-9, 0.0};

  auto antimax_nonempty = [&](const GridOperator& op, uint64_t seed, int f_count) {
    const SpectralReport rep = leading_eigenpair(op);
    const auto ladder = LadderSpec::for_gap(rep.gap);
    const GridFunction u = constant_function(op.space, 1.0);
    for (const auto& f : random_nonneg_batch(op.space, seed, f_count)) {
      const auto win = scan_window(op, rep, f, WindowSide::left, WindowMode::plain, u, ladder, tol);
      if (win.delta <= 0.0) return false;
    }
    return true;
  };

  {
    ThresholdCell cell{"robin_1d", 1, 2.0, 1, "", 0.0, true, false};
    auto builder = [](int n) { return build_laplacian(1, n, BoundaryCondition::robin(1.0)); };
    const auto diag = domination_index(builder, 2.0, 1, opts.mesh_1d);
    cell.growth_exponent = diag[0].growth_exponent;
    cell.verdict = diag[0].robust ? "robust" : "degenerate";
    cell.antimax_nonempty = antimax_nonempty(builder(100), opts.seed + 1, opts.antimax_f_count);
    table.cells.push_back(cell);
  }
  {
    ThresholdCell cell{"power_robin_1d", 1, 2.0, 2, "", 0.0, true, false};
    auto builder = [](int n) {
      return build_power(build_laplacian(1, n, BoundaryCondition::robin(1.0)), 2, true);
    };
    const auto diag = domination_index(builder, 2.0, 1, opts.mesh_1d);
    cell.growth_exponent = diag[0].growth_exponent;
    cell.verdict = diag[0].robust ? "robust" : "degenerate";
    cell.antimax_nonempty = antimax_nonempty(builder(100), opts.seed + 2, opts.antimax_f_count);
    table.cells.push_back(cell);
  }
  for (double p : {1.2, 3.0}) {
    ThresholdCell cell{p < 2.0 ? "dirichlet_3d_p1.2" : "dirichlet_3d_p3", 3, p, 1, "", 0.0,
                       false, false};
    auto builder = [](int n) { return build_laplacian(3, n, BoundaryCondition::dirichlet()); };
    DominationOptions dopts;
    // Probe at the operator's own spectral scale: an offset of 1 from
    // lambda0 ~ -3 pi^2 sits numerically on the pole and its rank-one term
    // drowns the Green-kernel scaling the probes are after.
    dopts.sigma_offset = 3.0 * M_PI * M_PI;
    dopts.norm_dense_cap = 0;
    dopts.eig.dense_cap = 1000;
    const auto diag = domination_index(builder, p, 1, opts.mesh_3d, dopts);
    cell.growth_exponent = diag[0].growth_exponent;
    cell.verdict = diag[0].robust ? "robust" : "degenerate";
    table.cells.push_back(cell);
  }
  {
    ThresholdCell cell{"dtn_2d", 2, 2.0, 1, "", std::nan(""), true, false};
    const GridOperator op = build_dtn(opts.dtn_n, 2, Vec::Constant(1, 1.0));
    cell.antimax_nonempty = antimax_nonempty(op, opts.seed + 3, opts.dtn_f_count);
    cell.verdict = cell.antimax_nonempty ? "robust" : "degenerate";
    table.cells.push_back(cell);
  }
  {
    // The 3d-domain DtN failure is logarithmic and explicitly not claimed
    // reproducible at desk scale; the row is recorded, never asserted.
    ThresholdCell cell{"dtn_3d", 3, 2.0, 1, "skipped", std::nan(""), false, false};
    table.cells.push_back(cell);
  }
  return table;
}

// ---- concentration study -----------------------------------------------------

ConcentrationReport run_concentration_study(const ConcentrationOptions& opts) {
  if (opts.levels < 2) throw domain_error("run_concentration_study: need >= 2 levels");
  if (!(opts.radius <= std::pow(2.0, -opts.levels)))
    throw domain_error("run_concentration_study: radius must fit inside the closest distance");

  GridOperator op;
  int center_dim = 1;
  if (opts.op == "dirichlet2d") {
    op = build_laplacian(2, opts.n, BoundaryCondition::dirichlet());
    center_dim = 2;
  } else if (opts.op == "rank_one") {
    op = build_rank_one(opts.n);
  } else if (opts.op == "neumann1d") {
    op = build_laplacian(1, opts.n, BoundaryCondition::neumann());
  } else {
    throw validation_error("run_concentration_study: unknown operator " + opts.op);
  }

  const SpectralReport rep = leading_eigenpair(op, opts.eig);
  const auto ladder =
      LadderSpec::for_gap(rep.gap, opts.ladder_top_frac, opts.ladder_ratio, opts.ladder_count);
  const GridFunction u = constant_function(op.space, 1.0);
  const ConeTolerance tol{1e-9, 0.0};

  ConcentrationReport report;
  for (int j = 1; j <= opts.levels; ++j) {
    const double dist = std::pow(2.0, -j);
    Vec center = Vec::Constant(center_dim, 0.5);
    center(0) = dist;  // approach the x = 0 boundary
    const GridFunction f = smooth_bump(op.space, center, opts.radius);
    const auto win = scan_window(op, rep, f, WindowSide::left, WindowMode::plain, u, ladder, tol);
    report.level.push_back(j);
    report.distance.push_back(dist);
    report.delta.push_back(win.delta);
  }
  report.spearman_level_delta = spearman(report.level, report.delta);
  return report;
}

// ---- covering search ---------------------------------------------------------

CoveringResult covering_search(std::span<const Eigen::MatrixXd> family,
                               const Eigen::MatrixXd& V, const CoveringOptions& opts) {
  if (family.empty()) throw domain_error("covering_search: family must be nonempty");
  const Eigen::Index n = V.rows();
  for (const auto& T : family)
    if (T.rows() != n) throw domain_error("covering_search: dimension mismatch in family");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrv(V);
  qrv.setThreshold(opts.rank_tol);
  const Eigen::Index rank_v = qrv.rank();

  CoveringResult res;
  for (size_t k = 0; k < family.size(); ++k) {
    Eigen::MatrixXd aug(n, V.cols() + family[k].cols());
    aug << V, family[k];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qra(aug);
    qra.setThreshold(opts.rank_tol);
    if (qra.rank() == rank_v) {
      res.found_index = static_cast<int>(k);
      break;
    }
  }

  // Orthonormal basis of span(V) for the sampled pointwise hypothesis.
  Eigen::MatrixXd Qfull = qrv.householderQ();
  const Eigen::MatrixXd Qv = Qfull.leftCols(rank_v);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  res.per_sample_cover.assign(opts.sample_count, -1);
  for (int s = 0; s < opts.sample_count; ++s) {
    Vec f(family[0].cols());
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = gauss(rng);
    for (size_t k = 0; k < family.size(); ++k) {
      const Vec y = family[k] * f;
      const double resid = (y - Qv * (Qv.transpose() * y)).norm();
      if (resid <= opts.rank_tol * std::max(y.norm(), 1.0)) {
        res.per_sample_cover[s] = static_cast<int>(k);
        break;
      }
    }
  }
  res.hypothesis_holds_on_samples = true;
  for (int s = 0; s < opts.sample_count; ++s)
    if (res.per_sample_cover[s] < 0) {
      res.hypothesis_holds_on_samples = false;
      if (res.counterexample_sample < 0) res.counterexample_sample = s;
    }
  return res;
}

// ---- experiment dispatch -----------------------------------------------------

namespace {

LadderSpec ladder_from_spec(const json& doc, double gap) {
  const auto lad = doc.value("lambda_ladder", json::object());
  return LadderSpec::for_gap(gap, lad.value("top_frac", 0.5), lad.value("ratio", 2.0),
                             lad.value("count", 20));
}

ConeTolerance tol_from_spec(const json& doc) {
  const auto t = doc.value("tol", json::object());
  return ConeTolerance{t.value("rel", 1e-9), t.value("abs", 0.0)};
}

std::vector<GridFunction> f_batch_from_spec(const json& doc, const SpacePtr& space,
                                            uint64_t seed) {
  const auto fspec = doc.value("f", json{{"kind", "ones"}});
  const std::string kind = fspec.value("kind", std::string("ones"));
  if (kind == "ones") return {constant_function(space, 1.0)};
  if (kind == "squared_gaussian")
    return random_nonneg_batch(space, fspec.value("seed", seed), fspec.value("count", 1));
  if (kind == "bump") {
    const auto c = fspec.value("center", std::vector<double>{0.5});
    Vec center = Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
    return {smooth_bump(space, center, fspec.value("radius", 0.1))};
  }
  throw validation_error("unknown f generator kind: " + kind);
}

json run_window_scan(const ExperimentSpec& spec, json& results) {
  const GridOperator op = build_from_spec(spec.doc.at("operator"));
  const SpectralReport rep = leading_eigenpair(op);
  const auto ladder = ladder_from_spec(spec.doc, rep.gap);
  const auto tol = tol_from_spec(spec.doc);
  const std::string side_s = spec.doc.value("side", std::string("left"));
  const std::string mode_s = spec.doc.value("mode", std::string("plain"));
  const WindowSide side = side_s == "left" ? WindowSide::left : WindowSide::right;
  const WindowMode mode = mode_s == "strong" ? WindowMode::strong : WindowMode::plain;
  const GridFunction u = constant_function(op.space, 1.0);
  const auto fs = f_batch_from_spec(spec.doc, op.space, spec.seed());

  json deltas = json::array();
  bool all_nonempty = true;
  json tables = json::object();
  for (size_t i = 0; i < fs.size(); ++i) {
    const auto win = scan_window(op, rep, fs[i], side, mode, u, ladder, tol);
    deltas.push_back(win.delta);
    all_nonempty = all_nonempty && win.delta > 0.0;
    csv::Table t;
    t.columns = {"offset", "lambda", "verdict", "margin", "c_value"};
    for (const auto& pt : win.profile)
      t.add_row({csv::format(pt.offset), csv::format(pt.lambda),
                 csv::format(static_cast<int>(pt.verdict.holds && !pt.solve_failed)),
                 csv::format(pt.verdict.margin), csv::format(pt.c_value)});
    tables["window_scan_f" + std::to_string(i)] = table_to_json(t);
  }
  results["tables"] = tables;
  results["lambda0"] = rep.lambda0;
  results["gap"] = rep.gap;
  return json{{"deltas", deltas}, {"all_nonempty", all_nonempty}};
}

json run_expansion_check(const ExperimentSpec& spec, json& results) {
  const GridOperator op = build_from_spec(spec.doc.at("operator"));
  const double lambda = spec.doc.at("lambda").get<double>();
  const auto mus = spec.doc.value("mus", std::vector<double>{});
  const double threshold = spec.doc.value("threshold", 1e-9);
  const auto fs = f_batch_from_spec(spec.doc, op.space, spec.seed());
  csv::Table t;
  t.columns = {"m", "lambda", "residual"};
  double max_residual = 0.0;
  for (const auto& f : fs) {
    const auto [g, check] = expansion_eval(op, lambda, mus, f);
    (void)g;
    max_residual = std::max(max_residual, check.residual);
    t.add_row({csv::format(check.m), csv::format(check.lambda), csv::format(check.residual)});
  }
  results["tables"] = json{{"expansion_check", table_to_json(t)}};
  return json{{"max_residual", max_residual}, {"pass", max_residual <= threshold}};
}

json run_smoothing_study(const ExperimentSpec& spec, json& results) {
  const GridOperator op = build_from_spec(spec.doc.at("operator"));
  const auto tj = spec.doc.value("t_ladder", json::object());
  TLadder ladder{tj.value("min", 1e-3), tj.value("max", 1e-1), tj.value("count", 8)};
  const auto ps = spec.doc.value("p", std::vector<double>{2.0});
  json fits = json::array();
  json tables = json::object();
  bool ok = true;
  for (double p : ps) {
    const auto fit = smoothing_fit(op, p, ladder);
    fits.push_back(json{{"p", p},
                        {"q", fit.q},
                        {"c", fit.c},
                        {"fit_residual", fit.fit_residual},
                        {"n_implied", fit.n_implied}});
    csv::Table t;
    t.columns = {"t", "norm", "fitted"};
    for (const auto& row : fit.table)
      t.add_row({csv::format(row[0]), csv::format(row[1]), csv::format(row[2])});
    tables["smoothing_p" + csv::format(p)] = table_to_json(t);
    if (spec.doc.contains("q_range")) {
      const auto range = spec.doc.at("q_range").get<std::vector<double>>();
      ok = ok && fit.q >= range.at(0) && fit.q <= range.at(1);
    }
  }
  results["tables"] = tables;
  return json{{"fits", fits}, {"pass", ok}};
}

json run_equivalence_kind(const ExperimentSpec& spec, json& results) {
  EquivalenceOptions o;
  o.seed = spec.seed() ? spec.seed() : o.seed;
  o.count = spec.doc.value("count", o.count);
  o.min_side = spec.doc.value("min_side", o.min_side);
  o.max_side = spec.doc.value("max_side", o.max_side);
  o.f_per_matrix = spec.doc.value("f_per_matrix", o.f_per_matrix);
  o.violation_count = spec.doc.value("violations", o.violation_count);
  const auto report = run_equivalence_suite(o);
  csv::Table t;
  t.columns = {"case", "seed", "side", "kind", "passed"};
  int pass_count = 0, detect_count = 0;
  for (size_t i = 0; i < report.cases.size(); ++i) {
    const auto& c = report.cases[i];
    pass_count += c.passed;
    t.add_row({csv::format(static_cast<int>(i)), csv::format(static_cast<long long>(c.case_seed)),
               csv::format(c.side), "metzler", csv::format(static_cast<int>(c.passed))});
  }
  for (size_t i = 0; i < report.violations.size(); ++i) {
    const auto& v = report.violations[i];
    detect_count += v.detected;
    t.add_row({csv::format(static_cast<int>(i)), csv::format(static_cast<long long>(v.case_seed)),
               csv::format(v.side), "violation", csv::format(static_cast<int>(v.detected))});
  }
  results["tables"] = json{{"equivalence_suite", table_to_json(t)}};
  return json{{"pass_count", pass_count},
              {"detect_count", detect_count},
              {"all", report.all_passed}};
}

json run_threshold_kind(const ExperimentSpec& spec, json& results) {
  ThresholdOptions o;
  o.seed = spec.seed() ? spec.seed() : o.seed;
  if (spec.doc.contains("mesh_1d")) o.mesh_1d = spec.doc.at("mesh_1d").get<std::vector<int>>();
  if (spec.doc.contains("mesh_3d")) o.mesh_3d = spec.doc.at("mesh_3d").get<std::vector<int>>();
  o.dtn_n = spec.doc.value("dtn_n", o.dtn_n);
  o.dtn_f_count = spec.doc.value("dtn_f_count", o.dtn_f_count);
  const auto table = run_threshold_study(o);
  csv::Table t;
  t.columns = {"d", "p", "k", "verdict", "growth_exponent"};
  json cells = json::array();
  for (const auto& cell : table.cells) {
    t.add_row({csv::format(cell.d), csv::format(cell.p), csv::format(cell.k), cell.verdict,
               csv::format(cell.growth_exponent)});
    cells.push_back(json{{"label", cell.label},
                         {"d", cell.d},
                         {"p", cell.p},
                         {"k", cell.k},
                         {"verdict", cell.verdict},
                         {"growth_exponent", cell.growth_exponent},
                         {"checked_antimax", cell.checked_antimax},
                         {"antimax_nonempty", cell.antimax_nonempty}});
  }
  results["tables"] = json{{"threshold_study", table_to_json(t)}};
  // Expected pattern from the paper's thresholds.
  bool ok = true;
  for (const auto& cell : table.cells) {
    if (cell.label == "robin_1d" || cell.label == "power_robin_1d")
      ok = ok && cell.verdict == "robust" && cell.antimax_nonempty;
    if (cell.label == "dirichlet_3d_p1.2") ok = ok && cell.verdict == "degenerate";
    if (cell.label == "dirichlet_3d_p3") ok = ok && cell.verdict == "robust";
    if (cell.label == "dtn_2d") ok = ok && cell.antimax_nonempty;
  }
  return json{{"cells", cells}, {"pass", ok}};
}

json run_concentration_kind(const ExperimentSpec& spec, json& results) {
  ConcentrationOptions o;
  o.op = spec.doc.value("operator_kind", o.op);
  o.n = spec.doc.value("n", o.n);
  o.levels = spec.doc.value("levels", o.levels);
  o.radius = spec.doc.value("radius", o.radius);
  const auto report = run_concentration_study(o);
  csv::Table t;
  t.columns = {"j", "distance", "delta"};
  for (size_t i = 0; i < report.level.size(); ++i)
    t.add_row({csv::format(report.level[i]), csv::format(report.distance[i]),
               csv::format(report.delta[i])});
  results["tables"] = json{{"concentration_study", table_to_json(t)}};
  bool ok = true;
  if (o.op == "dirichlet2d") ok = report.spearman_level_delta <= -0.9;
  if (o.op == "rank_one") {
    const double lo = *std::min_element(report.delta.begin(), report.delta.end());
    const double hi = *std::max_element(report.delta.begin(), report.delta.end());
    ok = lo > 0.0 && hi <= lo * o.ladder_ratio * (1.0 + 1e-12);
  }
  if (o.op == "neumann1d")
    ok = *std::min_element(report.delta.begin(), report.delta.end()) > 0.0;
  return json{{"spearman", report.spearman_level_delta}, {"deltas", report.delta}, {"pass", ok}};
}

json run_covering_kind(const ExperimentSpec& spec, json& results) {
  const int trials = spec.doc.value("trials", 100);
  const int family_size = spec.doc.value("family_size", 5);
  const int side = spec.doc.value("side", 10);
  const int v_cols = spec.doc.value("v_cols", 4);
  const uint64_t seed = spec.seed() ? spec.seed() : 11;
  CoveringOptions copts;
  copts.sample_count = spec.doc.value("samples", 50);

  csv::Table t;
  t.columns = {"trial", "planted", "found", "ok"};
  bool all_found = true;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(seed + 31ULL * static_cast<uint64_t>(trial));
    std::normal_distribution<double> gauss;
    auto randm = [&](int r, int c) {
      Eigen::MatrixXd M(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
      return M;
    };
    const Eigen::MatrixXd V = randm(side, v_cols);
    const int planted = static_cast<int>(rng() % static_cast<uint64_t>(family_size));
    std::vector<Eigen::MatrixXd> family;
    for (int k = 0; k < family_size; ++k)
      family.push_back(k == planted ? Eigen::MatrixXd(V * randm(v_cols, side))
                                    : randm(side, side));
    copts.seed = seed ^ (0x9e3779b97f4a7c15ULL + trial);
    const auto res = covering_search(family, V, copts);
    const bool ok = res.found_index == planted;
    all_found = all_found && ok;
    t.add_row({csv::format(trial), csv::format(planted), csv::format(res.found_index),
               csv::format(static_cast<int>(ok))});
  }
  results["tables"] = json{{"covering_search", table_to_json(t)}};
  return json{{"all_found", all_found}, {"trials", trials}};
}

}  // namespace

RunRecord run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
  if (opts.jobs > 0) parallel::set_jobs(opts.jobs);
  RunRecord record;
  record.spec = spec;
  const auto start = std::chrono::steady_clock::now();
  const std::string kind = spec.kind();
  if (kind == "window_scan") record.verdicts = run_window_scan(spec, record.results);
  else if (kind == "expansion_check") record.verdicts = run_expansion_check(spec, record.results);
  else if (kind == "smoothing_study") record.verdicts = run_smoothing_study(spec, record.results);
  else if (kind == "equivalence_suite") record.verdicts = run_equivalence_kind(spec, record.results);
  else if (kind == "threshold_study") record.verdicts = run_threshold_kind(spec, record.results);
  else if (kind == "concentration_study")
    record.verdicts = run_concentration_kind(spec, record.results);
  else if (kind == "covering_search") record.verdicts = run_covering_kind(spec, record.results);
  else throw validation_error("unknown experiment kind: " + kind);
  record.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  bool passed = true;
  for (const auto& key : {"pass", "all", "all_nonempty", "all_found"})
    if (record.verdicts.contains(key)) passed = passed && record.verdicts.at(key).get<bool>();
  record.passed = passed;
  return record;
}

}  // namespace amp
