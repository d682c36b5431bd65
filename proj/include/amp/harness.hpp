#pragma once
// Experiment orchestration: JSON experiment specs, deterministic run records
// persisted under content-addressed paths, CSV emission with fixed per-kind
// schemas, and the experiment implementations (equivalence property suite,
// threshold study, concentration study, covering search, window scans,
// smoothing studies, expansion checks).

#include <filesystem>
#include <optional>
#include <span>

#include "amp/csv.hpp"
#include "amp/random_fields.hpp"
#include "amp/resolvent.hpp"
#include "amp/semigroup.hpp"
#include "json.hpp"

namespace amp {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct ExperimentSpec {
  nlohmann::json doc;

  std::string kind() const;
  uint64_t seed() const;
  std::string canonical() const;  // sorted-key dump; basis of the record hash
  std::string hash() const;       // fnv1a-64 hex of canonical()
  static ExperimentSpec from_json(const nlohmann::json& j);
  static ExperimentSpec load(const std::filesystem::path& config_path);
};

struct RunRecord {
  ExperimentSpec spec;
  std::string version = kArtifactVersion;
  nlohmann::json results;   // free-form per-step payload
  nlohmann::json verdicts;  // the reproducible verdict payload
  double wall_ms = 0.0;
  bool passed = false;

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int jobs = 0;  // 0 keeps the environment default
  bool use_cache = true;
};

// Operator construction from the spec's "operator" object
// ({"family": ..., builder parameters...}).
GridOperator build_from_spec(const nlohmann::json& op_spec);

// Run-record form of a spectral report (vectors included).
nlohmann::json spectral_report_json(const SpectralReport& rep);

RunRecord run_experiment(const ExperimentSpec& spec, const RunOptions& opts);

std::filesystem::path record_path(const RunOptions& opts, const ExperimentSpec& spec);
void save_record(const RunRecord& record, const RunOptions& opts);
std::optional<RunRecord> load_record(const RunOptions& opts, const ExperimentSpec& spec);

// format is "csv" or "run-record"; returns the written paths.
std::vector<std::filesystem::path> emit_report(const RunRecord& record, const std::string& format,
                                               const std::filesystem::path& out_dir);

// ---- equivalence property suite -------------------------------------------

struct EquivalenceOptions {
  uint64_t seed = 1;
  int count = 50;
  int min_side = 5;
  int max_side = 40;
  int f_per_matrix = 5;
  int violation_count = 10;
  double tol_rel = 1e-9;
};

struct EquivalenceCase {
  uint64_t case_seed = 0;
  int side = 0;
  bool assumption_ok = false;
  bool windows_ok = false;
  bool passed = false;
};

struct ViolationCase {
  uint64_t case_seed = 0;
  int side = 0;
  bool simplicity_flagged = false;
  bool strong_window_failed = false;
  bool detected = false;
};

struct EquivalenceReport {
  std::vector<EquivalenceCase> cases;
  std::vector<ViolationCase> violations;
  bool all_passed = false;
};

EquivalenceReport run_equivalence_suite(const EquivalenceOptions& opts);

// Random irreducible Metzler matrix / operator (dense family on a cell grid).
Eigen::MatrixXd random_metzler(uint64_t seed, int side);
GridOperator metzler_operator(uint64_t seed, int side);

// ---- threshold study -------------------------------------------------------

struct ThresholdOptions {
  std::vector<int> mesh_1d{25, 50, 100, 200};
  std::vector<int> mesh_3d{12, 16, 24, 32};
  int dtn_n = 48;
  int dtn_f_count = 10;
  uint64_t seed = 7;
  int antimax_f_count = 3;
};

struct ThresholdCell {
  std::string label;
  int d = 0;
  double p = 0.0;
  int k = 1;
  std::string verdict;  // robust | degenerate | skipped
  double growth_exponent = 0.0;
  bool checked_antimax = false;
  bool antimax_nonempty = false;
};

struct ThresholdTable {
  std::vector<ThresholdCell> cells;
};

ThresholdTable run_threshold_study(const ThresholdOptions& opts);

// ---- concentration study ---------------------------------------------------

struct ConcentrationOptions {
  std::string op = "dirichlet2d";  // dirichlet2d | rank_one | neumann1d
  int n = 64;
  int levels = 4;
  double radius = 1.0 / 32.0;
  double ladder_top_frac = 0.5;
  double ladder_ratio = 1.189207115002721;  // 2^(1/4)
  int ladder_count = 70;
  EigOptions eig{.dense_cap = 1500};  // shift-invert above: the scans only need lambda0 and gap
};

struct ConcentrationReport {
  std::vector<double> level;     // j = 1..levels
  std::vector<double> distance;  // 2^-j
  std::vector<double> delta;
  double spearman_level_delta = 0.0;
};

ConcentrationReport run_concentration_study(const ConcentrationOptions& opts);

// ---- covering search -------------------------------------------------------

struct CoveringOptions {
  double rank_tol = 1e-10;
  int sample_count = 50;
  uint64_t seed = 11;
};

struct CoveringResult {
  int found_index = -1;  // first operator with range inside span(V), 0-based
  bool hypothesis_holds_on_samples = false;
  int counterexample_sample = -1;  // sample index with no covering operator
  std::vector<int> per_sample_cover;
};

// Checks range(T_k) <= span(V) by comparing rank([V T_k]) with rank(V); when
// no operator passes, samples vectors to certify or refute the pointwise
// hypothesis "for every f some T_k maps f into span(V)".
CoveringResult covering_search(std::span<const Eigen::MatrixXd> family,
                               const Eigen::MatrixXd& V, const CoveringOptions& opts = {});

}  // namespace amp
