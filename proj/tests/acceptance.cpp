// End-to-end acceptance gate: nine numbered criteria, one PASS/FAIL line
// each, exit status 0 only when every criterion holds. Tolerances and
// runtime budgets are stated inline next to each criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qnum/checks.hpp"
#include "qnum/model.hpp"
#include "qnum/solver.hpp"
#include "qnum/sweep.hpp"
#include "qnum/utility.hpp"

using namespace qnum;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const char* label, bool ok, const std::string& detail,
            double secs) {
  if (!ok) ++failures;
  std::printf("%s  %d  %-46s %s [%.2fs]\n", ok ? "PASS" : "FAIL", id, label,
              detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* pattern, double a, double b = 0.0,
                double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

const CheckResult& named(const std::vector<CheckResult>& results,
                         const std::string& name) {
  for (const CheckResult& r : results)
    if (r.name == name) return r;
  std::fprintf(stderr, "missing check result '%s'\n", name.c_str());
  std::exit(2);
}

// One solved sweep point with the per-class mean fidelities pulled out.
// Class A is the first symmetry class (feeder/metro links), class B the
// second (the long or shared link).
struct Instance {
  double param = 0.0;
  SolveReport report;
  double fid_class_a = 0.0;
  double fid_class_b = 0.0;
  double mean_rate = 0.0;
  double mean_fid = 0.0;
};

// family[kind] holds instances ordered by ascending parameter.
using Family = std::vector<std::vector<Instance>>;

const UtilityKind kKinds[] = {UtilityKind::DE, UtilityKind::SKF,
                              UtilityKind::NGTV};

Family solve_family(TopologyKind topology, const std::vector<double>& params) {
  Family family(3);
  for (int k = 0; k < 3; ++k) {
    for (double param : params) {
      const NetworkSpec spec = build_topology(topology, param);
      Instance inst;
      inst.param = param;
      inst.report = solve(spec, kKinds[k]);
      const auto classes = symmetry_classes(topology, spec);
      double fids[2] = {0.0, 0.0};
      for (int c = 0; c < 2; ++c) {
        for (const std::string& lid : classes[c].links)
          fids[c] += werner_to_fidelity(inst.report.solution.werner.at(lid));
        fids[c] /= classes[c].links.size();
      }
      inst.fid_class_a = fids[0];
      inst.fid_class_b = fids[1];
      for (const auto& [rid, v] : inst.report.solution.rates)
        inst.mean_rate += v;
      inst.mean_rate /= inst.report.solution.rates.size();
      for (const auto& [rid, v] : inst.report.e2e_fidelity)
        inst.mean_fid += v;
      inst.mean_fid /= inst.report.e2e_fidelity.size();
      family[k].push_back(std::move(inst));
    }
  }
  return family;
}

double utility_of(const Instance& inst) { return -inst.report.objective; }

// Index of the utility peak if the curve rises to it and falls after it,
// with the peak strictly inside the range; -1 otherwise.
int interior_peak(const std::vector<Instance>& curve) {
  int peak = 0;
  for (int i = 1; i < static_cast<int>(curve.size()); ++i)
    if (utility_of(curve[i]) > utility_of(curve[peak])) peak = i;
  if (peak == 0 || peak + 1 == static_cast<int>(curve.size())) return -1;
  for (int i = 0; i < peak; ++i)
    if (utility_of(curve[i + 1]) <= utility_of(curve[i])) return -1;
  for (int i = peak; i + 1 < static_cast<int>(curve.size()); ++i)
    if (utility_of(curve[i + 1]) >= utility_of(curve[i])) return -1;
  return peak;
}

// Crossover and single-peak checks shared by the clients-server and
// dumbbell sweeps. Appends diagnostics to `detail`.
bool crossover_and_peak(const Family& family, const char* unit,
                        std::string& detail) {
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    const std::vector<Instance>& curve = family[k];
    for (const Instance& inst : curve)
      if (!inst.report.converged) {
        detail += std::string(" [") + to_string(kKinds[k]) +
                  " failed to converge]";
        return false;
      }
    const Instance& first = curve.front();
    const Instance& last = curve.back();
    // shared-link fidelity starts above the feeder links' and ends below
    if (!(first.fid_class_b > first.fid_class_a &&
          last.fid_class_b < last.fid_class_a)) {
      ok = false;
      detail += std::string(" [no ") + to_string(kKinds[k]) + " crossover]";
    }
    const int peak = interior_peak(curve);
    if (peak < 0) {
      ok = false;
      const bool climbing =
          utility_of(last) >= utility_of(curve[curve.size() - 2]);
      detail += std::string(" [") + to_string(kKinds[k]);
      if (climbing)
        detail += fmt(" utility still climbing at %g ", last.param) + unit +
                  "; peak beyond the swept range]";
      else
        detail += " utility has no single interior peak]";
    } else {
      detail += std::string(" ") + to_string(kKinds[k]) +
                fmt(" peak at %g ", curve[peak].param) + unit + ";";
    }
  }
  return ok;
}

std::string csv_for(TopologyKind topology, const std::vector<double>& params) {
  SweepSpec spec;
  spec.topology = topology;
  spec.parameter_values = params;
  spec.utilities = {UtilityKind::NGTV};
  return sweep_csv(run_sweep(spec));
}

}  // namespace

int main() {
  std::printf("acceptance: utility-maximization library gate\n");

  // Criteria 1-3 share the deterministic built-in check suite.
  auto t0 = Clock::now();
  const std::vector<CheckResult> checks = run_checks();
  const double checks_secs = seconds_since(t0);

  {  // 1: closed-form curvature values at w = 0.97, within 0.01, under 1 s
    const CheckResult& de = named(checks, "de_curvature_anchor");
    const CheckResult& skf = named(checks, "skf_curvature_anchor");
    const bool ok = de.pass && skf.pass && checks_secs < 1.0;
    report(1, "curvature spot checks at w = 0.97", ok,
           fmt("de %.4f (want -3.19+-0.01), skf %.4f (want -2.34+-0.01)",
               de.measured, skf.measured),
           checks_secs);
  }

  {  // 2: analytic gradient vs central differences, rel err <= 1e-6, < 10 s
    double worst = 0.0;
    bool ok = checks_secs < 10.0;
    for (const char* name :
         {"gradient_fd_three_link", "gradient_fd_clients_server",
          "gradient_fd_line", "gradient_fd_dumbbell"}) {
      const CheckResult& r = named(checks, name);
      ok = ok && r.pass;
      worst = std::max(worst, r.measured);
    }
    report(2, "analytic gradients vs central differences", ok,
           fmt("400 interior points, worst relative error %.2e (tol 1e-6)",
               worst),
           checks_secs);
  }

  {  // 3: concavity: 1000 midpoint samples (slack 1e-9) and 100 sampled
     //    Hessians with min eigenvalue >= -1e-6, under 30 s
    const CheckResult& mid = named(checks, "ngtv_midpoint_concavity");
    const CheckResult& hess = named(checks, "ngtv_hessian_psd");
    const bool ok = mid.pass && hess.pass && checks_secs < 30.0;
    report(3, "concavity of the negativity utility", ok,
           fmt("worst midpoint gap %.2e, min Hessian eigenvalue %.2e",
               mid.measured, hess.measured),
           checks_secs);
  }

  // 4: solver vs brute-force grid oracle at resolution 2000 on six
  //    negativity instances; |obj - oracle| <= 1e-3 |oracle|, normalized
  //    residual <= 1e-6, all within 2 minutes.
  std::vector<std::pair<TopologyKind, double>> oracle_instances = {
      {TopologyKind::ThreeLink, 2.0},     {TopologyKind::ThreeLink, 50.0},
      {TopologyKind::ThreeLink, 120.0},   {TopologyKind::ClientsServer, 1.0},
      {TopologyKind::ClientsServer, 4.0}, {TopologyKind::ClientsServer, 8.0}};
  std::vector<SolveReport> oracle_solves;
  {
    t0 = Clock::now();
    double worst_gap = 0.0, worst_res = 0.0;
    bool ok = true;
    for (const auto& [topology, param] : oracle_instances) {
      const NetworkSpec spec = build_topology(topology, param);
      const SolveReport got = solve(spec, UtilityKind::NGTV);
      const SolveReport want = grid_search_oracle(
          spec, UtilityKind::NGTV, symmetry_classes(topology, spec), 2000);
      const double gap =
          std::fabs(got.objective - want.objective) / std::fabs(want.objective);
      worst_gap = std::max(worst_gap, gap);
      worst_res = std::max(worst_res, got.max_residual);
      ok = ok && got.converged && gap <= 1e-3 && got.max_residual <= 1e-6;
      oracle_solves.push_back(got);
    }
    const double secs = seconds_since(t0);
    report(4, "solver agrees with the grid-search oracle", ok && secs < 120.0,
           fmt("6 instances, worst relative gap %.2e (tol 1e-3), worst "
               "residual %.2e (tol 1e-6)",
               worst_gap, worst_res),
           secs);
  }

  // Shared sweep data for criteria 5-8.
  t0 = Clock::now();
  std::vector<double> lengths, clients, dumbbell_users;
  for (double v = 2.0; v <= 180.0; v += 2.0) lengths.push_back(v);
  for (double v = 1.0; v <= 12.0; v += 1.0) clients.push_back(v);
  for (double v = 2.0; v <= 48.0; v += 2.0) dumbbell_users.push_back(v);
  const Family three_link = solve_family(TopologyKind::ThreeLink, lengths);
  const Family clients_server =
      solve_family(TopologyKind::ClientsServer, clients);
  const Family dumbbell = solve_family(TopologyKind::Dumbbell, dumbbell_users);
  std::printf("      (solved %zu sweep instances in %.2fs)\n",
              3 * (lengths.size() + clients.size() + dumbbell_users.size()),
              seconds_since(t0));

  {  // 5: every converged solution keeps each route's end-to-end fidelity
     //    inside its utility's domain: de >= 0.81, skf >= 0.835, ngtv > 0.5.
    t0 = Clock::now();
    double min_fid[3] = {1.0, 1.0, 1.0};
    int counted = 0;
    for (const Family* family : {&three_link, &clients_server, &dumbbell})
      for (int k = 0; k < 3; ++k)
        for (const Instance& inst : (*family)[k]) {
          if (!inst.report.converged) continue;
          ++counted;
          for (const auto& [rid, f] : inst.report.e2e_fidelity)
            min_fid[k] = std::min(min_fid[k], f);
        }
    const bool ok =
        min_fid[0] >= 0.81 && min_fid[1] >= 0.835 && min_fid[2] > 0.5;
    report(5, "fidelity floors hold on converged solutions", ok,
           fmt("mins over routes: de %.4f (>=0.81), skf %.4f (>=0.835), "
               "ngtv %.4f (>0.5)",
               min_fid[0], min_fid[1], min_fid[2]) +
               fmt(" across %g solves", counted),
           seconds_since(t0));
  }

  {  // 6: growing the long link: its fidelity never exceeds the short
     //    links', utility falls monotonically, and the negativity policy
     //    trades fidelity for rate against de/skf at every length.
    t0 = Clock::now();
    bool ordered = true, monotone = true, tradeoff = true, converged = true;
    for (int k = 0; k < 3; ++k) {
      const auto& curve = three_link[k];
      for (size_t i = 0; i < curve.size(); ++i) {
        converged = converged && curve[i].report.converged;
        ordered =
            ordered && curve[i].fid_class_b <= curve[i].fid_class_a + 1e-9;
        if (i > 0)
          monotone =
              monotone && utility_of(curve[i]) < utility_of(curve[i - 1]);
      }
    }
    for (size_t i = 0; i < lengths.size(); ++i) {
      const Instance& de = three_link[0][i];
      const Instance& skf = three_link[1][i];
      const Instance& ngtv = three_link[2][i];
      tradeoff = tradeoff && ngtv.mean_rate > de.mean_rate &&
                 ngtv.mean_rate > skf.mean_rate &&
                 ngtv.mean_fid < de.mean_fid && ngtv.mean_fid < skf.mean_fid;
    }
    std::string detail =
        fmt("%g lengths x 3 utilities:", static_cast<double>(lengths.size()));
    detail += ordered ? " long link never the most faithful;"
                      : " [long-link fidelity ordering violated]";
    detail += monotone ? " utility strictly decreasing;"
                       : " [utility not monotone]";
    detail += tradeoff ? " ngtv trades fidelity for rate"
                       : " [ngtv rate/fidelity trade-off violated]";
    report(6, "three-link sweep: shape vs bottleneck length",
           ordered && monotone && tradeoff && converged, detail,
           seconds_since(t0));
  }

  {  // 7: clients-server sweep: the shared backbone starts as the most
     //    faithful link and ends least faithful, and the aggregate utility
     //    peaks strictly inside n = 1..12.
    t0 = Clock::now();
    std::string detail;
    const bool ok = crossover_and_peak(clients_server, "clients", detail);
    report(7, "clients-server sweep: crossover and utility peak", ok, detail,
           seconds_since(t0));
  }

  {  // 8: dumbbell sweep: same crossover and interior-peak behavior over
     //    2..48 users (1..24 pairs).
    t0 = Clock::now();
    std::string detail;
    const bool ok = crossover_and_peak(dumbbell, "users", detail);
    report(8, "dumbbell sweep: crossover and utility peak", ok, detail,
           seconds_since(t0));
  }

  {  // 9: repeated runs emit byte-identical CSV and every reported solution
     //    stays strictly inside the box.
    t0 = Clock::now();
    const std::vector<double> tl_params = {2.0, 50.0, 120.0};
    const std::vector<double> cs_params = {1.0, 4.0, 8.0};
    const bool identical =
        csv_for(TopologyKind::ThreeLink, tl_params) ==
            csv_for(TopologyKind::ThreeLink, tl_params) &&
        csv_for(TopologyKind::ClientsServer, cs_params) ==
            csv_for(TopologyKind::ClientsServer, cs_params);
    bool interior = true;
    int n_solutions = 0;
    auto check_interior = [&](const SolveReport& r) {
      ++n_solutions;
      for (const auto& [lid, w] : r.solution.werner)
        interior = interior && w > 0.0 && w < 1.0;
      for (const auto& [rid, v] : r.solution.rates)
        interior = interior && v > 0.0;
    };
    for (const SolveReport& r : oracle_solves) check_interior(r);
    for (const Family* family : {&three_link, &clients_server, &dumbbell})
      for (int k = 0; k < 3; ++k)
        for (const Instance& inst : (*family)[k]) check_interior(inst.report);
    std::string detail = identical ? "reruns byte-identical"
                                   : "[rerun CSV differs]";
    detail += interior ? fmt("; %g solutions strictly inside the box",
                             n_solutions)
                       : "; [solution touches the box boundary]";
    report(9, "byte-identical reruns and strict feasibility",
           identical && interior, detail, seconds_since(t0));
  }

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
