#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qnum/checks.hpp"
#include "qnum/model.hpp"
#include "qnum/serialize.hpp"
#include "qnum/solver.hpp"
#include "qnum/sweep.hpp"
#include "qnum/utility.hpp"

namespace {

// "2:180:2" (inclusive range) or "2,50,100".
std::vector<double> parse_params(const std::string& text) {
  auto to_double = [](const std::string& piece) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != piece.size() || piece.empty())
      throw std::invalid_argument("bad parameter value '" + piece + "'");
    return v;
  };

  std::vector<double> values;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    size_t from = 0;
    for (size_t at; (at = text.find(':', from)) != std::string::npos;
         from = at + 1)
      parts.push_back(text.substr(from, at - from));
    parts.push_back(text.substr(from));
    if (parts.size() != 3)
      throw std::invalid_argument("range must look like start:stop:step");
    const double start = to_double(parts[0]), stop = to_double(parts[1]),
                 step = to_double(parts[2]);
    if (!(step > 0.0)) throw std::invalid_argument("range step must be > 0");
    if (stop < start)
      throw std::invalid_argument("range stop must be >= start");
    for (int i = 0;; ++i) {
      const double v = start + i * step;
      if (v > stop + 1e-9 * step) break;
      values.push_back(v);
    }
  } else {
    size_t from = 0;
    for (size_t at; (at = text.find(',', from)) != std::string::npos;
         from = at + 1)
      values.push_back(to_double(text.substr(from, at - from)));
    values.push_back(to_double(text.substr(from)));
  }
  return values;
}

std::vector<qnum::UtilityKind> parse_utilities(const std::string& text) {
  if (text == "all")
    return {qnum::UtilityKind::DE, qnum::UtilityKind::SKF,
            qnum::UtilityKind::NGTV};
  return {qnum::utility_from_string(text)};
}

const char* default_params(qnum::TopologyKind kind) {
  switch (kind) {
    case qnum::TopologyKind::ThreeLink: return "2:180:2";
    case qnum::TopologyKind::ClientsServer: return "1:12:1";
    case qnum::TopologyKind::Line: return "5:300:5";
    case qnum::TopologyKind::Dumbbell: return "2:48:2";
  }
  return "";
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network utility maximization for entanglement distribution"};
  app.require_subcommand(1);

  std::string topology_name = "three-link", utility_name = "all";
  std::string params_text, out_path, config_path;
  qnum::SolverConfig solver;

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Sweep a topology parameter and write one CSV row per "
               "(utility, value) pair");
  sweep_cmd->add_option("--topology", topology_name, "Topology to build")
      ->check(CLI::IsMember({"three-link", "clients-server", "line",
                             "dumbbell"}))
      ->capture_default_str();
  sweep_cmd->add_option("--utility", utility_name,
                        "Utility kind, or 'all' for the three of them")
      ->check(CLI::IsMember({"de", "skf", "ngtv", "all"}))
      ->capture_default_str();
  sweep_cmd->add_option(
      "--params", params_text,
      "start:stop:step range or comma list; default depends on the topology "
      "(three-link 2:180:2, clients-server 1:12:1, line 5:300:5, dumbbell "
      "2:48:2)");
  sweep_cmd->add_option("--out", out_path,
                        "Output CSV path (default <topology>_sweep.csv)");

  CLI::App* solve_cmd = app.add_subcommand(
      "solve", "Solve one network from a JSON file and print the report");
  solve_cmd->add_option("--config", config_path, "Network JSON path")
      ->required();
  std::string solve_utility = "ngtv";
  solve_cmd->add_option("--utility", solve_utility, "Utility kind")
      ->check(CLI::IsMember({"de", "skf", "ngtv"}))
      ->capture_default_str();

  CLI::App* check_cmd = app.add_subcommand(
      "check", "Run the built-in verification suite and report PASS/FAIL");

  for (CLI::App* cmd : {sweep_cmd, solve_cmd}) {
    cmd->add_option("--initial-penalty", solver.initial_penalty)
        ->capture_default_str();
    cmd->add_option("--penalty-growth", solver.penalty_growth)
        ->capture_default_str();
    cmd->add_option("--max-outer-iters", solver.max_outer_iters)
        ->capture_default_str();
    cmd->add_option("--max-inner-iters", solver.max_inner_iters)
        ->capture_default_str();
    cmd->add_option("--residual-tol", solver.residual_tol)
        ->capture_default_str();
    cmd->add_option("--grad-tol", solver.grad_tol)->capture_default_str();
    cmd->add_option("--armijo-c", solver.armijo_c)->capture_default_str();
    cmd->add_option("--backtrack-factor", solver.backtrack_factor)
        ->capture_default_str();
    cmd->add_option("--initial-step", solver.initial_step)
        ->capture_default_str();
    cmd->add_option("--interior-eps", solver.interior_eps)
        ->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sweep_cmd) {
      qnum::SweepSpec spec;
      spec.topology = qnum::topology_from_string(topology_name);
      spec.parameter_values = parse_params(
          params_text.empty() ? default_params(spec.topology) : params_text);
      spec.utilities = parse_utilities(utility_name);
      spec.solver = solver;
      spec.output_path = out_path.empty()
                             ? topology_name + "_sweep.csv"
                             : out_path;
      const auto rows = qnum::run_sweep(spec);
      int converged = 0;
      for (const auto& row : rows) converged += row.converged;
      std::printf("wrote %zu rows to %s (%d converged)\n", rows.size(),
                  spec.output_path.c_str(), converged);
    } else if (*solve_cmd) {
      const qnum::NetworkSpec network = qnum::load_network(config_path);
      print_warnings(qnum::validate(network));
      const qnum::SolveReport report =
          qnum::solve(network, qnum::utility_from_string(solve_utility),
                      solver);
      print_warnings(qnum::solution_warnings(network, report.solution));
      std::cout << qnum::report_to_json(report).dump(2) << "\n";
    } else if (*check_cmd) {
      const auto results = qnum::run_checks();
      std::cout << qnum::format_checks(results);
      if (!qnum::all_passed(results)) return 3;
    }
  } catch (const qnum::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
