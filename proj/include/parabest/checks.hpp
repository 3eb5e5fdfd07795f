#pragma once

// Property suites shared by the command-line `check` subcommand and the
// acceptance tests.

#include "parabest/benchmark.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace parabest {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   ///< worst observed value
  double threshold = 0.0;
  std::string detail;
};

/// Steps preset `preset_name` (runs 1..runs) and reports the worst relative
/// pointwise-form defect and the worst disagreement of the two A^n U^n.
std::vector<CheckResult> check_pointwise_form(const std::string &preset_name = "1", int runs = 2);

/// a(v, phi) against the element-plus-jump representation for random v and
/// phi on three meshes (uniform, locally refined once and twice).
CheckResult check_representation_identity(int pairs_per_mesh = 100, std::uint64_t seed = 1);

/// Lattice laws of the common refinement/coarsening, meshsize max/min
/// samples, conformity and nesting on random refinement pairs.
CheckResult check_mesh_algebra(int pairs = 200, std::uint64_t seed = 7);

/// Outcome of a short run whose mesh is refined at step 2 and coarsened
/// back at step 3.
struct MeshChangeReport {
  double changed_part = 0.0;     ///< sum over steps of the changed-edge term
  double min_ratio_32 = 0.0;     ///< min over m of total_32 / max error
  double min_ratio_33 = 0.0;     ///< min over m of total_33 / L2(H1) error
  std::vector<int> elements;     ///< element count per step 0..3
};
MeshChangeReport run_mesh_change_scenario(ProblemKind problem = ProblemKind::slow, int degree = 1);
std::vector<CheckResult> check_mesh_change();

/// All suites above with their default sizes.
std::vector<CheckResult> run_all_checks();

} // namespace parabest
