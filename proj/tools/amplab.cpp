// amplab: command-line front end of the numerical laboratory. Subcommands
// build operators, check the spectral assumption, scan (anti-)maximum
// windows, evaluate the multi-point expansion identity, fit smoothing
// exponents, run domination diagnostics, and execute full experiment
// configs with cached run records.
//
// Exit codes: 0 success, 1 verdict failure (CI gating), 2 usage/config
// error, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "amp/harness.hpp"
#include "amp/parallel.hpp"

using namespace amp;
using nlohmann::json;

namespace {

struct GlobalArgs {
  std::string out_dir;
  int jobs = 0;
  int dense_cap = 4096;
  double tol_rel = 1e-9;
  uint64_t seed = 1;
};

std::filesystem::path resolve_out(const GlobalArgs& g) {
  if (!g.out_dir.empty()) return g.out_dir;
  if (const char* env = std::getenv("AMPLAB_OUT")) return env;
  return "out";
}

json operator_spec_from_flags(const std::string& family, int d, int n, const std::string& bc,
                              double beta, int k, int N, double V) {
  json spec{{"family", family}, {"n", n}};
  if (family == "laplacian") {
    spec["d"] = d;
    spec["bc"] = bc;
    if (bc == "robin") spec["beta"] = beta;
  } else if (family == "coupled") {
    spec["d"] = d;
    spec["N"] = N;
  } else if (family == "dtn") {
    spec["d"] = d;
    spec["V"] = V;
  } else if (family == "power") {
    spec["k"] = k;
    spec["base"] = json{{"family", "laplacian"}, {"d", d}, {"n", n}, {"bc", bc}, {"beta", beta}};
  }
  return spec;
}

int run_and_report(const ExperimentSpec& spec, const GlobalArgs& g, bool force) {
  RunOptions opts;
  opts.out_dir = resolve_out(g);
  opts.jobs = g.jobs;
  std::optional<RunRecord> record;
  if (!force) {
    record = load_record(opts, spec);
    if (record) std::cout << "cache hit: " << record_path(opts, spec) << "\n";
  }
  if (!record) {
    record = run_experiment(spec, opts);
    save_record(*record, opts);
  }
  const auto files = emit_report(*record, "csv", opts.out_dir / "csv");
  std::cout << "record: " << record_path(opts, spec).string() << "\n";
  for (const auto& f : files) std::cout << "csv: " << f.string() << "\n";
  std::cout << "verdicts: " << record->verdicts.dump(2) << "\n";
  std::cout << (record->passed ? "PASS" : "FAIL") << " (" << record->wall_ms << " ms)\n";
  return record->passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for maximum/anti-maximum principle diagnostics"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--out", g.out_dir, "output directory (or AMPLAB_OUT)");
  app.add_option("--jobs", g.jobs, "worker threads for ladders and batches");
  app.add_option("--dense-cap", g.dense_cap, "dense eigensolve cap");
  app.add_option("--tol-rel", g.tol_rel, "relative cone tolerance");
  app.add_option("--seed", g.seed, "random seed");

  // operator flags shared by several subcommands
  std::string family = "laplacian", bc = "dirichlet";
  int d = 1, n = 100, k = 2, N = 2;
  double beta = 1.0, V = 0.0;
  auto add_op_flags = [&](CLI::App* cmd) {
    cmd->add_option("--family", family, "rank_one|laplacian|coupled|dtn|power");
    cmd->add_option("--d", d, "spatial dimension");
    cmd->add_option("--n", n, "cells per axis");
    cmd->add_option("--bc", bc, "dirichlet|neumann|robin");
    cmd->add_option("--beta", beta, "Robin coefficient");
    cmd->add_option("--k", k, "power exponent");
    cmd->add_option("--N", N, "coupled components");
    cmd->add_option("--V", V, "constant potential (dtn)");
  };

  auto* cmd_build = app.add_subcommand("build-op", "build an operator and save its triplet file");
  std::string build_out = "operator.txt";
  add_op_flags(cmd_build);
  cmd_build->add_option("--file", build_out, "triplet file path");

  auto* cmd_spectral = app.add_subcommand("spectral-check", "leading eigenpair and assumption verdict");
  add_op_flags(cmd_spectral);

  auto* cmd_scan = app.add_subcommand("scan-window", "one-sided window scan around lambda0");
  std::string side = "left", mode = "plain", fkind = "squared_gaussian";
  int fcount = 5;
  add_op_flags(cmd_scan);
  cmd_scan->add_option("--side", side, "left|right");
  cmd_scan->add_option("--mode", mode, "plain|strong");
  cmd_scan->add_option("--f-kind", fkind, "ones|squared_gaussian|bump");
  cmd_scan->add_option("--f-count", fcount, "batch size");

  auto* cmd_exp = app.add_subcommand("expansion-check", "multi-point expansion residual");
  double lambda = 0.5;
  std::vector<double> mus;
  add_op_flags(cmd_exp);
  cmd_exp->add_option("--lambda", lambda, "evaluation point");
  cmd_exp->add_option("--mu", mus, "expansion points");

  auto* cmd_smooth = app.add_subcommand("smoothing-fit", "fit ||e^{tA}||_{p->inf} ~ c t^-q");
  std::vector<double> ps{2.0};
  double t_min = 1e-3, t_max = 1e-1;
  int t_count = 8;
  add_op_flags(cmd_smooth);
  cmd_smooth->add_option("--p", ps, "p values")->delimiter(',');
  cmd_smooth->add_option("--t-min", t_min, "ladder start");
  cmd_smooth->add_option("--t-max", t_max, "ladder end");
  cmd_smooth->add_option("--t-count", t_count, "ladder points");

  auto* cmd_dom = app.add_subcommand("domination-index", "mesh-scaling of ||Res(sigma)^n||_{p->inf}");
  std::vector<int> mesh{25, 50, 100, 200};
  double dom_p = 2.0;
  int n_max = 1;
  add_op_flags(cmd_dom);
  cmd_dom->add_option("--mesh", mesh, "mesh ladder (cells per axis)")->delimiter(',');
  cmd_dom->add_option("--p", dom_p, "source norm exponent");
  cmd_dom->add_option("--n-max", n_max, "largest resolvent power");

  auto* cmd_run = app.add_subcommand("run", "run an experiment config (JSON)");
  std::string config_path;
  bool force = false;
  cmd_run->add_option("--config", config_path, "experiment config file")->required();
  cmd_run->add_flag("--force", force, "ignore a cached record");

  auto* cmd_report = app.add_subcommand("report", "re-emit files from a stored record");
  std::string record_file, format = "csv";
  cmd_report->add_option("--record", record_file, "record JSON path")->required();
  cmd_report->add_option("--format", format, "csv|run-record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (g.jobs > 0) parallel::set_jobs(g.jobs);
    const json op_spec = operator_spec_from_flags(family, d, n, bc, beta, k, N, V);

    if (cmd_build->parsed()) {
      const auto op = build_from_spec(op_spec);
      save_operator(op, build_out);
      std::cout << "wrote " << build_out << " (side " << op.size() << ", "
                << op.matrix.nonZeros() << " nonzeros)\n";
      return 0;
    }
    if (cmd_spectral->parsed()) {
      const auto op = build_from_spec(op_spec);
      EigOptions eopts;
      eopts.dense_cap = g.dense_cap;
      const auto rep = leading_eigenpair(op, eopts);
      const auto verdict =
          check_spectral_assumption(rep, constant_function(op.space, 1.0), {g.tol_rel, 0.0});
      std::cout << "lambda0 = " << rep.lambda0 << "\ngap = " << rep.gap
                << "\nsimple = " << rep.simple << "\nc_dom = " << verdict.c_dom
                << "\nphi_min = " << rep.phi_min << "\noverall = " << verdict.overall << "\n";
      return verdict.overall ? 0 : 1;
    }
    if (cmd_scan->parsed()) {
      json spec{{"kind", "window_scan"}, {"operator", op_spec},     {"side", side},
                {"mode", mode},          {"seed", g.seed},          {"tol", {{"rel", g.tol_rel}}},
                {"f", {{"kind", fkind}, {"count", fcount}, {"seed", g.seed}}}};
      return run_and_report(ExperimentSpec::from_json(spec), g, force);
    }
    if (cmd_exp->parsed()) {
      json spec{{"kind", "expansion_check"}, {"operator", op_spec}, {"lambda", lambda},
                {"mus", mus},                {"seed", g.seed},
                {"f", {{"kind", "squared_gaussian"}, {"count", 3}, {"seed", g.seed}}}};
      return run_and_report(ExperimentSpec::from_json(spec), g, force);
    }
    if (cmd_smooth->parsed()) {
      json spec{{"kind", "smoothing_study"},
                {"operator", op_spec},
                {"p", ps},
                {"t_ladder", {{"min", t_min}, {"max", t_max}, {"count", t_count}}},
                {"seed", g.seed}};
      return run_and_report(ExperimentSpec::from_json(spec), g, force);
    }
    if (cmd_dom->parsed()) {
      auto builder = [&](int cells) {
        json s = op_spec;
        s["n"] = cells;
        if (s.contains("base")) s["base"]["n"] = cells;
        return build_from_spec(s);
      };
      DominationOptions dopts;
      dopts.eig.dense_cap = g.dense_cap;
      const auto diags = domination_index(builder, dom_p, n_max, mesh, dopts);
      bool all_robust = true;
      for (const auto& diag : diags) {
        std::cout << "n = " << diag.n << ": growth exponent " << diag.growth_exponent << " -> "
                  << (diag.robust ? "robust" : "degenerate")
                  << (diag.estimate ? " (probe estimate)" : " (exact norms)") << "\n";
        for (const auto& rung : diag.rungs)
          std::cout << "  mesh " << rung.n_mesh << " h " << rung.h << " value " << rung.value
                    << "\n";
        all_robust = all_robust && diag.robust;
      }
      return all_robust ? 0 : 1;
    }
    if (cmd_run->parsed()) {
      return run_and_report(ExperimentSpec::load(config_path), g, force);
    }
    if (cmd_report->parsed()) {
      std::ifstream in(record_file);
      if (!in) throw validation_error("cannot open record " + record_file);
      json j;
      in >> j;
      const auto record = RunRecord::from_json(j);
      const auto files = emit_report(record, format, resolve_out(g) / "csv");
      for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
      return 0;
    }
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
