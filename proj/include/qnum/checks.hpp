#pragma once

#include <string>
#include <vector>

namespace qnum {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

// The built-in verification suite: closed-form curvature spot values,
// randomized midpoint-concavity and Hessian-eigenvalue sampling of the
// negativity utility, and analytic-vs-finite-difference gradient sweeps
// over all four topology builders. Deterministic (fixed seeds).
std::vector<CheckResult> run_checks();

bool all_passed(const std::vector<CheckResult>& results);

// One line per result, aligned, PASS/FAIL first.
std::string format_checks(const std::vector<CheckResult>& results);

}  // namespace qnum
