#pragma once

// A posteriori indicators for the L-infinity(L2) / L2(H1) family and the
// L-infinity(H1) / H1(L2) family, their accumulation in time and the bounds.

#include "parabest/evolution.hpp"

#include <map>
#include <optional>

namespace parabest {

/// Interpolation and regularity constants C_{k,j}. Basic (prime k) constants
/// default to 1; a composite index is the product over its prime factors
/// unless it was set explicitly.
class ConstantsTable {
public:
  double get(int k, int j) const;
  void set(int k, int j, double value);
  /// Overrides the ellipticity constant of the diffusion matrix.
  std::optional<double> alpha;

  const std::map<std::pair<int, int>, double> &overrides() const { return values_; }

private:
  std::map<std::pair<int, int>, double> values_;
};

struct EstimatorRecord {
  int n = 0;
  double t = 0.0;
  double tau = 0.0;
  bool mesh_changed = false;

  double lowEtaRecInf = 0.0;
  double lowEtaRec2 = 0.0;
  double lowSpace = 0.0;
  double lowSpaceChanged = 0.0; ///< the part over changed edges
  double lowGamma2 = 0.0;
  double lowEtaF = 0.0;
  double lowTheta = 0.0;

  double highEtaRecInf = 0.0;
  double highEtaRec2 = 0.0;
  double highSpace = 0.0;
  double highGamma1 = 0.0;
  double highGammaInf = 0.0;
  double highEtaF2 = 0.0;
  double highTheta2 = 0.0;
};

struct SpaceEstimate {
  double total = 0.0;
  double common = 0.0;  ///< jump part on edges of both meshes
  double changed = 0.0; ///< jump part on the remaining edges
};

// Individual indicators. These evaluate every cross-mesh quantity on the
// common refinement with quadrature; the EstimatorSuite below uses
// precomputed per-space data where the meshes do not change.

enum class RecKind { inf, two };

double eta_rec_low(const TimeSlabState &s, RecKind kind, const ConstantsTable &c, double alpha);
SpaceEstimate eta_space_low(const TimeSlabState &prev, const TimeSlabState &cur, const ConstantsTable &c,
                            const CoefficientMatrix &a);
/// C_{3,1}/sqrt(alpha) ||h (P^n - I)(f^n + U^{n-1}/tau_n)||.
double gamma_low(const TimeSlabState &prev, const TimeSlabState &cur, const SpaceTimeFunction &f,
                 const ConstantsTable &c, double alpha, int exactness = 8);
/// (1/tau) int ||f^n - f(t)|| dt (power 1) or ((1/tau) int ||f^n - f(t)||^2 dt)^{1/2}
/// (power 2) with Gauss points in time.
double eta_f(const FeSpace &space, const SpaceTimeFunction &f, double t0, double t1, int power, int time_points = 5,
             int exactness = 8);
/// (1/2)||A^n U^n - A^{n-1} U^{n-1}||.
double theta_low(const TimeSlabState &prev, const TimeSlabState &cur);
/// C_{3,1}/sqrt(alpha) ||h_hat dbar((P - I)(f + U_prev/tau))|| for n >= 2.
double gamma_one(const TimeSlabState &prev2, const TimeSlabState &prev, const TimeSlabState &cur,
                 const SpaceTimeFunction &f, const ConstantsTable &c, double alpha, int exactness = 8);

struct EstimatorOptions {
  int time_points = 5;
  int exactness = 8;
  /// Use precomputed per-space data when meshes do not change.
  bool fast_paths = true;
};

class EstimatorSuite {
public:
  EstimatorSuite(const BackwardEuler &stepper, ConstantsTable constants, EstimatorOptions options = {});

  double alpha() const { return alpha_; }
  const ConstantsTable &constants() const { return constants_; }

  /// Record of step 0: only the elliptic reconstruction members are set.
  EstimatorRecord initial(const TimeSlabState &s0) const;
  /// Record of step n >= 1; prev2 is state n-2 (needed for n >= 2).
  EstimatorRecord record(const TimeSlabState *prev2, const TimeSlabState &prev, const TimeSlabState &cur) const;

private:
  const BackwardEuler &stepper_;
  ConstantsTable constants_;
  EstimatorOptions options_;
  double alpha_;
};

/// Right-hand sides of both bound families and the effectivity denominators.
struct BoundTotals {
  double init_low = 0.0;
  double init_high = 0.0;
  double eta_rec_inf_max = 0.0;
  double eta_rec_2_acc = 0.0;  ///< (sum_{n>=1} eta_{2,n}^2 tau_n)^{1/2}
  double eta_space_acc = 0.0;  ///< sum eta_{1,n} tau_n
  double theta1_acc = 0.0;
  double etaf1_acc = 0.0;
  double gamma2_acc = 0.0;     ///< (sum gamma_{2,n}^2 tau_n)^{1/2}
  double E1_low = 0.0, E2_low = 0.0;
  double E1_high = 0.0, E2_high = 0.0;
  double total_32 = 0.0;
  double total_33 = 0.0;
  double high_rec_max = 0.0;
  double high_rec_2 = 0.0;
  double high_total_H1L2 = 0.0;
  double high_total_LinfH1 = 0.0;
  double est_LinfL2 = 0.0;     ///< effectivity denominator, L-infinity(L2)
  double est_L2H1 = 0.0;       ///< effectivity denominator, L2(H1)
};

enum class Family { low32, low33, high };

/// Running accumulation of records 0, 1, ..., m.
class BoundAccumulator {
public:
  /// init_low bounds ||R^0 U^0 - u(0)||, init_high its energy-norm analogue.
  BoundAccumulator(double init_low = 0.0, double init_high = 0.0);

  void add(const EstimatorRecord &r);
  const BoundTotals &totals() const { return totals_; }
  double total(Family f) const;

private:
  void finish();

  BoundTotals totals_;
  bool have_initial_ = false;
  double prev_eta2_ = 0.0;
  double s33_ = 0.0, e1_low_ = 0.0, e2_low_sq_ = 0.0, rec2_sq_ = 0.0, rec2_with0_sq_ = 0.0;
  double gamma_inf_max_ = 0.0, gamma1_acc_ = 0.0, e2_high_sq_ = 0.0, high_rec2_sq_ = 0.0, gamma2_sq_ = 0.0;
};

/// Totals of records[0..m] computed from scratch (no running state).
BoundTotals totals(const std::vector<EstimatorRecord> &records, std::size_t m, double init_low = 0.0,
                   double init_high = 0.0);

} // namespace parabest
