#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qnum/model.hpp"
#include "qnum/solver.hpp"
#include "qnum/utility.hpp"

namespace qnum {

struct SweepSpec {
  TopologyKind topology = TopologyKind::ThreeLink;
  std::vector<double> parameter_values;
  std::vector<UtilityKind> utilities;
  SolverConfig solver;
  std::string output_path;  // empty: compute rows without writing a file
};

// One solved instance. Symmetric quantities are collapsed: one fidelity
// column per symmetry class and the across-route mean for rate and
// end-to-end fidelity.
struct SweepRow {
  std::string topology;
  double parameter = 0.0;
  std::string utility;
  double aggregate_utility = 0.0;
  std::vector<std::pair<std::string, double>> class_fidelity;
  double rate_hz = 0.0;
  double e2e_fidelity = 0.0;
  double max_residual = 0.0;
  bool converged = false;
};

// Solves every (utility, parameter) pair and returns the rows ordered by
// utility kind, then ascending parameter, regardless of input order.
// Writes CSV to output_path (atomically, via temp file + rename) when the
// path is nonempty. Identical specs produce byte-identical files.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

// CSV with a header row, 12 significant digits, '.' decimal separator.
std::string sweep_csv(const std::vector<SweepRow>& rows);

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path);

}  // namespace qnum
