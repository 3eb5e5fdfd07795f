#pragma once

// Exact benchmark solutions, error norms, convergence orders, effectivity
// indices and the convergence-study driver.

#include "parabest/estimators.hpp"

#include <iosfwd>
#include <string>

namespace parabest {

enum class ProblemKind { slow, fast };

ProblemKind parse_problem(const std::string &name);
std::string to_string(ProblemKind p);

struct BenchmarkProblem {
  ProblemKind kind = ProblemKind::slow;
  SpaceTimeFunction u;
  SpaceTimeFunction f;
  CoefficientMatrix a;
  double final_time = 1.0;

  ProblemData data() const;
};

/// u = s(t) exp(-10 |x|^2) on [-1, 1]^2 x [0, 1] with s(t) = sin(pi t)
/// (slow) or sin(20 pi t) / 10 (fast); f = u_t - Laplace u.
BenchmarkProblem make_benchmark(ProblemKind kind);

// ---------------------------------------------------------------------------
// Errors

struct ErrorValues {
  double LinfL2 = 0.0;     ///< max over sampled times of ||e||
  double L2H1 = 0.0;       ///< (int ||e||_1^2)^{1/2}, full H1 norm
  double LinfH1 = 0.0;     ///< max over sampled times of the energy norm
  double H1L2 = 0.0;       ///< (int ||d/dt e||^2)^{1/2}
  double L2H1_nodal = 0.0; ///< (sum tau_n ||e(t_n)||_1^2)^{1/2}
};

struct ErrorOptions {
  int exactness = 8;
  bool fast_paths = true;
};

/// Accumulates the error norms of the piecewise linear time extension of the
/// discrete states. The L-infinity norms are sampled at the nodes and
/// midpoints, L2(H1) uses 2 Gauss points and H1(L2) 3 Gauss points per step.
class ErrorAccumulator {
public:
  ErrorAccumulator(SpaceTimeFunction u, CoefficientMatrix a, ErrorOptions options = {});
  ~ErrorAccumulator();
  ErrorAccumulator(ErrorAccumulator &&) noexcept;
  ErrorAccumulator &operator=(ErrorAccumulator &&) noexcept;

  void initial(const TimeSlabState &s0);
  void add(const TimeSlabState &prev, const TimeSlabState &cur);
  const ErrorValues &values() const { return values_; }

  /// ||U - u(t)|| for a single discrete function.
  double l2_error(const FeFunction &U, double t) const;

private:
  struct Cache;
  struct Sample {
    double l2sq = 0.0, gradsq = 0.0, energysq = 0.0;
  };
  /// Errors at `times` and squared time-derivative errors at `dt_times`.
  std::vector<Sample> samples(const TimeSlabState &prev, const TimeSlabState &cur, const std::vector<double> &times,
                              const std::vector<double> &dt_times, std::vector<double> &dt_sq);
  std::vector<Sample> samples_generic(const TimeSlabState &prev, const TimeSlabState &cur,
                                      const std::vector<double> &times, const std::vector<double> &dt_times,
                                      std::vector<double> &dt_sq) const;
  Sample single(const FeFunction &U, double t) const;
  const Cache &cache_for(const FeSpace &space);

  SpaceTimeFunction u_;
  CoefficientMatrix a_;
  ErrorOptions options_;
  std::unique_ptr<Cache> cache_;
  ErrorValues values_;
  double l2h1_sq_ = 0.0, h1l2_sq_ = 0.0, nodal_sq_ = 0.0;
};

ErrorValues compute_errors(const std::vector<TimeSlabState> &states, const SpaceTimeFunction &u,
                           const CoefficientMatrix &a, std::size_t m, ErrorOptions options = {});
double error_LinfL2(const std::vector<TimeSlabState> &states, const SpaceTimeFunction &u, std::size_t m);
double error_L2H1(const std::vector<TimeSlabState> &states, const SpaceTimeFunction &u, std::size_t m);
/// (L-infinity(H1) energy error, H1(L2) error).
std::pair<double, double> error_high(const std::vector<TimeSlabState> &states, const SpaceTimeFunction &u,
                                     const CoefficientMatrix &a, std::size_t m);

/// log(E(i+1)/E(i)) / log(h(i+1)/h(i)).
std::vector<double> eoc(const std::vector<double> &values, const std::vector<double> &hs);

enum class NormKind { LinfL2, L2H1 };
/// Error divided by the effectivity denominator of the chosen norm.
double effectivity(const ErrorValues &errors, const BoundTotals &totals, NormKind norm);

// ---------------------------------------------------------------------------
// Presets and runs

struct RunPreset {
  std::string name;
  ProblemKind problem = ProblemKind::slow;
  int degree = 1;
  int k = 2;
  double h1 = 0.5;
  double tau1 = 0.04;
  int runs = 6;
};

RunPreset preset(const std::string &name);
std::vector<std::string> preset_names();

/// One mesh change: from step `step` on, use the base mesh with the elements
/// whose centroid lies in [x0, x1] x [y0, y1] bisected `times` times, or the
/// base mesh itself when `reset` is set.
struct MeshChange {
  int step = 1;
  bool reset = false;
  Point lo, hi;
  int times = 1;
};
using MeshSchedule = std::vector<MeshChange>;
/// Lines `<step> refine <x0> <y0> <x1> <y1> [times]` or `<step> base`;
/// '#' starts a comment.
MeshSchedule parse_schedule(std::istream &is);
Triangulation apply_mesh_change(const Triangulation &base, const MeshChange &c);

struct RunConfig {
  RunPreset preset;
  ConstantsTable constants;
  int exactness = 8;
  int time_points = 5;
  bool verify = true;
  bool fast_paths = true;
  MeshSchedule schedule;
};

struct RunRow {
  int run = 0;
  int n = 0;
  double t = 0.0, h = 0.0, tau = 0.0;
  ErrorValues err;
  BoundTotals est;
  EstimatorRecord rec;
  double eff_LinfL2 = 0.0, eff_L2H1 = 0.0;
};

struct RunResult {
  int run = 0;
  double h = 0.0;
  double tau = 0.0;
  int steps = 0;
  int elements = 0;
  int dofs = 0;
  double seconds = 0.0;
  double max_pointwise_defect = 0.0;
  double max_elliptic_agreement = 0.0;
  double min_eff_LinfL2 = 0.0, max_eff_LinfL2 = 0.0;
  double min_eff_L2H1 = 0.0, max_eff_L2H1 = 0.0;
  double max_changed_space = 0.0;
  /// total_32 / total_33 divided by the matching error, minimum over m >= 1.
  double min_bound_ratio_32 = 0.0, min_bound_ratio_33 = 0.0;
  std::vector<RunRow> rows;
  RunRow final_row() const { return rows.empty() ? RunRow{} : rows.back(); }
};

struct RunReport {
  RunConfig config;
  std::vector<RunResult> runs;
  /// EOC series (length runs - 1) of the final values, keyed by column name.
  std::vector<std::pair<std::string, std::vector<double>>> eocs;
  const std::vector<double> &eoc_of(const std::string &name) const;
};

/// Meshsize h(i) = h1 / 2^{i-1}, tau(i) = c0 h(i)^k with c0 = tau1 / h1^k,
/// rounded to the uniform step T / ceil(T / tau(i)).
double run_meshsize(const RunPreset &p, int i);
double run_timestep(const RunPreset &p, int i, double final_time = 1.0);

RunResult run_single(const RunConfig &config, int i);
RunReport run_preset(const RunConfig &config, int jobs = 1);

/// Column names of the per-step CSV.
const std::vector<std::string> &csv_columns();
void write_rows_csv(std::ostream &os, const RunReport &report);
void write_summary_csv(std::ostream &os, const RunReport &report);
/// Python/matplotlib script reproducing the 4-row figure layout from the
/// CSV files next to it.
std::string plot_script(const RunReport &report, const std::string &rows_csv, const std::string &summary_csv);

} // namespace parabest
