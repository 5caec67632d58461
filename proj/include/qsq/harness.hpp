#pragma once

// Sweep orchestration: JSON run configs, per-N traces, summaries,
// power-law fits and plot data.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qsq/dynamics.hpp"
#include "qsq/gdtwa.hpp"
#include "qsq/serialization.hpp"

namespace qsq::harness {

inline constexpr const char* kTraceSchema = "schema qsq-trace/1";
inline constexpr const char* kPlotSchema = "schema qsq-plot/1";
inline constexpr const char* kScalingSchema = "schema qsq-scaling/1";
inline constexpr const char* kSummarySchema = "qsq-summary/1";

enum class BackendKind { Dense, Symmetric, Gdtwa };
std::string to_string(BackendKind b);
BackendKind backend_kind_from_string(const std::string& s);

/// Time grid: explicit `times`, or `points` samples on [0, t_max(N)].
struct TimeGrid {
  std::vector<double> times;
  int points = 200;
  double t_max = 0.0;
  /// When > 0, t_max(N) = coefficient / N^exponent.
  double coefficient = 0.0;
  double exponent = 0.0;
  /// When set, t_max(N) = min(cap, coefficient / J_eff) with J_eff = sum_ij w_ij / N.
  bool per_coupling = false;
  double cap = INFINITY;

  std::vector<double> for_size(int n_sites, const HamiltonianSpec& spec) const;
};

struct ReferenceSpec {
  enum class Kind { Basis, Amplitudes, Optimize };
  Kind kind = Kind::Basis;
  int basis_index = 1;
  CVector amplitudes;
  OptimizerConfig optimizer;
};

struct RunConfig {
  int d = 3;
  std::string axes = "xy";
  ReferenceSpec reference;
  HamiltonianSpec hamiltonian;
  BackendKind backend = BackendKind::Symmetric;
  std::vector<int> n_list;
  TimeGrid grid;
  GdtwaConfig gdtwa;  // t_grid and master_seed are filled per N
  KappaScanConfig kappa;
  KrylovOptions krylov;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string prefix = "run";

  /// Backend/Hamiltonian compatibility and grid sanity; throws ConfigError.
  void validate() const;
};

/// Strict parse: unknown keys are rejected with ConfigError.
RunConfig parse_run_config(const Json& j);
RunConfig load_run_config(const std::string& path);
Json to_json(const RunConfig& c);

struct ScalingPoint {
  double n = 0.0;
  double xi2 = 0.0;
};

struct ScalingFit {
  std::vector<ScalingPoint> points;
  double k = 0.0;  // xi2 ~ prefactor * N^-k
  double prefactor = 0.0;
  double r2 = 0.0;
  std::optional<double> gamma;
};

/// Least squares on log xi2 vs log N; needs >= 4 positive points.
ScalingFit fit_scaling(const std::vector<ScalingPoint>& points);

/// N / sqrt(xi2); NaN when xi2 <= 0, zero for the singular sentinel.
double witness_diagnostic(double xi2, int n_sites);

struct Trace {
  int n_sites = 0;
  std::vector<SqueezingRecord> records;
  double xi2_op = INFINITY;  // minimum over non-singular rows
  double xi2_op_err = NAN;
  double t_op = NAN;
  int singular_rows = 0;
  double probe_change = 0.0;  // GDTWA only
  double witness = NAN;
  std::string file;  // trace CSV, relative to out_dir
};

struct SweepResult {
  RunConfig config;
  std::vector<std::string> labels;
  double sql_cost = 0.0;
  std::vector<Trace> traces;  // ordered like config.n_list
  std::optional<ScalingFit> fit;
  Json summary() const;
};

/// One trace without touching the filesystem.
Trace run_point(const RunConfig& config, int n_sites, const ReadoutSet& readout);
/// Resolves the reference state (may run the optimizer; throws Infeasible when it fails).
PureState resolve_reference(const RunConfig& config);

/// All N values (dispatched over OpenMP threads), trace CSVs, summary JSON and scaling CSV in out_dir.
SweepResult run_sweep(const RunConfig& config, bool write_files = true);

/// Per-N plot CSVs (t, xi2 [, xi2_err]) and the scaling CSV (N, xi2_op, t_op [, xi2_op_err]); returns paths.
std::vector<std::string> emit_plotdata(const SweepResult& result, const std::string& dir);

void write_scaling_csv(const std::string& path, const SweepResult& result);
std::vector<ScalingPoint> read_scaling_csv(const std::string& path);

RunConfig fig2_config();
RunConfig fig3_config(double gamma);

class Infeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace qsq::harness
