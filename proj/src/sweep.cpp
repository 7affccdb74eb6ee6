#include "qnum/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "qnum/serialize.hpp"

namespace qnum {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

SweepRow make_row(TopologyKind kind, double parameter, UtilityKind utility,
                  const NetworkSpec& spec, const SolveReport& report) {
  SweepRow row;
  row.topology = to_string(kind);
  row.parameter = parameter;
  row.utility = to_string(utility);
  row.aggregate_utility = -report.objective;
  for (const SymmetryClass& cls : symmetry_classes(kind, spec)) {
    double sum = 0.0;
    for (const std::string& lid : cls.links)
      sum += werner_to_fidelity(report.solution.werner.at(lid));
    row.class_fidelity.emplace_back(cls.name, sum / cls.links.size());
  }
  double rate = 0.0, fid = 0.0;
  for (const auto& [rid, value] : report.solution.rates) rate += value;
  for (const auto& [rid, value] : report.e2e_fidelity) fid += value;
  row.rate_hz = rate / report.solution.rates.size();
  row.e2e_fidelity = fid / report.e2e_fidelity.size();
  row.max_residual = report.max_residual;
  row.converged = report.converged;
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  if (spec.parameter_values.empty())
    throw ValidationError("sweep: parameter list is empty");
  if (spec.utilities.empty())
    throw ValidationError("sweep: no utility kinds selected");
  validate_config(spec.solver);

  std::set<double> parameters(spec.parameter_values.begin(),
                              spec.parameter_values.end());
  std::set<UtilityKind> kinds(spec.utilities.begin(), spec.utilities.end());

  std::vector<SweepRow> rows;
  for (UtilityKind kind : kinds) {
    for (double parameter : parameters) {
      const NetworkSpec network = build_topology(spec.topology, parameter);
      const SolveReport report = solve(network, kind, spec.solver);
      rows.push_back(make_row(spec.topology, parameter, kind, network, report));
    }
  }
  if (!spec.output_path.empty()) write_sweep_csv(rows, spec.output_path);
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "topology,parameter,utility,aggregate_utility";
  if (!rows.empty())
    for (const auto& [name, value] : rows.front().class_fidelity)
      out += ",fid_" + name;
  out += ",rate_hz,e2e_fidelity,max_residual,converged\n";
  for (const SweepRow& row : rows) {
    out += row.topology;
    out += ',' + format_number(row.parameter);
    out += ',' + row.utility;
    out += ',' + format_number(row.aggregate_utility);
    for (const auto& [name, value] : row.class_fidelity)
      out += ',' + format_number(value);
    out += ',' + format_number(row.rate_hz);
    out += ',' + format_number(row.e2e_fidelity);
    out += ',' + format_number(row.max_residual);
    out += row.converged ? ",true\n" : ",false\n";
  }
  return out;
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream file(tmp, std::ios::trunc);
    if (!file) throw IoError("cannot open '" + tmp + "' for writing");
    file << sweep_csv(rows);
    if (!file.good()) throw IoError("failed while writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move results into place at '" + path + "'");
  }
}

}  // namespace qnum
