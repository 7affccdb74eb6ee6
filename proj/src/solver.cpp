#include "qnum/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <cstdio>
#include <cstdlib>

namespace qnum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Index-based view of a NetworkSpec; map lookups stay out of the hot loops.
struct Compiled {
  std::vector<std::string> route_ids, link_ids;
  std::vector<double> d;                      // per link
  std::vector<std::vector<int>> route_links;  // route -> link indices
  std::vector<std::vector<int>> link_routes;  // link -> route indices
  std::vector<double> rate_scale;             // s_r = min_{l in r} d_l
  std::vector<double> log_scale;              // log s_r
  std::vector<double> thr_log;                // log((4F*-1)/3), NaN if unset
  std::vector<int> thresholded;               // route indices with thresholds

  int n_routes() const { return static_cast<int>(route_ids.size()); }
  int n_links() const { return static_cast<int>(link_ids.size()); }
};

Compiled compile(const NetworkSpec& spec) {
  Compiled net;
  std::map<std::string, int> link_index;
  for (const Link& l : spec.links) {
    link_index[l.id] = net.n_links();
    net.link_ids.push_back(l.id);
    net.d.push_back(rate_coefficient(l));
  }
  net.link_routes.resize(net.n_links());
  for (const Route& r : spec.routes) {
    const int ri = net.n_routes();
    net.route_ids.push_back(r.id);
    std::vector<int> lids;
    double s = kInf;
    for (const std::string& lid : r.links) {
      const int li = link_index.at(lid);
      lids.push_back(li);
      net.link_routes[li].push_back(ri);
      s = std::min(s, net.d[li]);
    }
    net.route_links.push_back(std::move(lids));
    net.rate_scale.push_back(s);
    net.log_scale.push_back(std::log(s));
    auto it = spec.fidelity_thresholds.find(r.id);
    if (it != spec.fidelity_thresholds.end()) {
      net.thr_log.push_back(std::log(fidelity_to_werner(it->second)));
      net.thresholded.push_back(ri);
    } else {
      net.thr_log.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return net;
}

// Figure-of-merit helpers without the map/exception overhead of the public
// entry points. Negative margins are reported, not thrown; the merit turns
// them into +inf. Templated so the merit can evaluate in extended precision.
template <typename T>
T margin_fast(UtilityKind kind, T W) {
  switch (kind) {
    case UtilityKind::DE: {
      const T F = (T(3) * W + T(1)) / T(4);
      return T(1) + F * std::log2(F) + (T(1) - F) * std::log2((T(1) - F) / T(3));
    }
    case UtilityKind::SKF: {
      const T p = (T(1) - W) / T(2);
      return T(1) + T(2) * (p * std::log2(p) + (T(1) - p) * std::log2(T(1) - p));
    }
    case UtilityKind::NGTV:
      return T(3) * W - T(1);
  }
  return T(0);
}

double margin_dlog_fast(UtilityKind kind, double W, double margin) {
  switch (kind) {
    case UtilityKind::DE:
      return 0.75 * std::log2((3.0 * W + 1.0) / (1.0 - W)) / margin;
    case UtilityKind::SKF:
      return std::log2((1.0 + W) / (1.0 - W)) / margin;
    case UtilityKind::NGTV:
      return 3.0 / margin;
  }
  return 0.0;
}

// Augmented Lagrangian of the scaled problem. Variables are packed as
// [y_0..y_{R-1}, w_0..w_{L-1}] with R_r = s_r * exp(y_r): rates live in the
// log domain, which makes the -log R objective term linear and keeps the
// curvature of the subproblem within a few orders of magnitude across
// blocks. The rate-balance residuals are normalized by d_l, so multipliers
// and penalty act on c_l = sum R / d_l - (1 - w_l).
struct MeritAL {
  const Compiled& net;
  UtilityKind kind;
  std::vector<double> lambda;  // per link
  std::vector<double> nu;      // per route (used where thresholded)
  double mu = 0.0;

  // scratch, sized once
  std::vector<long double> sum_rate;
  std::vector<double> chat, q, rate, W, dlog, act;

  explicit MeritAL(const Compiled& n, UtilityKind k)
      : net(n),
        kind(k),
        lambda(n.n_links(), 0.0),
        nu(n.n_routes(), 0.0),
        sum_rate(n.n_links()),
        chat(n.n_links()),
        q(n.n_links()),
        rate(n.n_routes()),
        W(n.n_routes()),
        dlog(n.n_routes()),
        act(n.n_routes()) {}

  // Normalized equality residuals at x; returns max |c_l|.
  double residuals(const std::vector<double>& x, std::vector<double>* out) {
    const int nr = net.n_routes(), nl = net.n_links();
    std::fill(sum_rate.begin(), sum_rate.end(), 0.0L);
    for (int r = 0; r < nr; ++r) {
      const double R = net.rate_scale[r] * std::exp(x[r]);
      for (int l : net.route_links[r]) sum_rate[l] += R;
    }
    double worst = 0.0;
    for (int l = 0; l < nl; ++l) {
      const double c =
          static_cast<double>(sum_rate[l] / net.d[l] - (1.0L - x[nr + l]));
      if (out) (*out)[l] = c;
      worst = std::max(worst, std::abs(c));
    }
    return worst;
  }

  // Positive part of the log-form threshold constraints; returns the largest.
  double threshold_violation(const std::vector<double>& x) const {
    const int nr = net.n_routes();
    double worst = 0.0;
    for (int r : net.thresholded) {
      double logw = 0.0;
      for (int l : net.route_links[r]) logw += std::log(x[nr + l]);
      worst = std::max(worst, net.thr_log[r] - logw);
    }
    return worst;
  }

  // True objective -sum U at x, +inf outside the utility domain.
  double objective(const std::vector<double>& x) {
    const int nr = net.n_routes();
    double obj = 0.0;
    for (int r = 0; r < nr; ++r) {
      double prod = 1.0;
      for (int l : net.route_links[r]) prod *= x[nr + l];
      const double m = margin_fast(kind, prod);
      if (!(m > 0.0)) return kInf;
      obj -= net.log_scale[r] + x[r] + std::log(m);
    }
    return obj;
  }

  // The merit evaluates in extended precision: near a minimizer the line
  // search must resolve decreases well below one double ulp of the total,
  // and the resolution is set by the rounding texture of the individual
  // terms, not just of the final sum.
  long double operator()(const std::vector<double>& x,
                         std::vector<double>* g) {
    const int nr = net.n_routes(), nl = net.n_links();
    std::fill(sum_rate.begin(), sum_rate.end(), 0.0L);
    long double obj = 0.0L;
    for (int r = 0; r < nr; ++r) {
      const long double R =
          net.rate_scale[r] * std::exp(static_cast<long double>(x[r]));
      if (!std::isfinite(R)) return kInf;
      rate[r] = static_cast<double>(R);
      long double prod = 1.0L;
      for (int l : net.route_links[r]) {
        sum_rate[l] += R;
        prod *= x[nr + l];
      }
      W[r] = static_cast<double>(prod);
      const long double m = margin_fast(kind, prod);
      if (!(m > 0.0L)) return kInf;
      obj -= static_cast<long double>(net.log_scale[r]) + x[r] + std::log(m);
      if (g) dlog[r] = margin_dlog_fast(kind, W[r], static_cast<double>(m));
    }
    for (int l = 0; l < nl; ++l) {
      const long double c = sum_rate[l] / net.d[l] - (1.0L - x[nr + l]);
      chat[l] = static_cast<double>(c);
      obj += lambda[l] * c + 0.5L * mu * c * c;
    }
    for (int r : net.thresholded) {
      long double logw = 0.0L;
      for (int l : net.route_links[r])
        logw += std::log(static_cast<long double>(x[nr + l]));
      const long double a = nu[r] + mu * (net.thr_log[r] - logw);
      act[r] = static_cast<double>(a);
      if (a > 0.0L)
        obj += (a * a - static_cast<long double>(nu[r]) * nu[r]) / (2.0L * mu);
    }
    if (g) {
      for (int l = 0; l < nl; ++l) {
        q[l] = lambda[l] + mu * chat[l];
        (*g)[nr + l] = q[l];
      }
      for (int r = 0; r < nr; ++r) {
        double gr = -1.0;
        for (int l : net.route_links[r]) {
          gr += q[l] * (rate[r] / net.d[l]);
          (*g)[nr + l] -= dlog[r] * W[r] / x[nr + l];
        }
        (*g)[r] = gr;
      }
      for (int r : net.thresholded) {
        if (act[r] > 0.0)
          for (int l : net.route_links[r]) (*g)[nr + l] -= act[r] / x[nr + l];
      }
    }
    return obj;
  }
};

// Closes every rate-balance equality exactly by moving each w_l onto the
// balance surface implied by the final rates (a shift of at most the
// converged violation). Skipped when any snapped value would leave the box.
void snap_feasible(const Compiled& net, std::vector<double>& x, double eps) {
  const int nr = net.n_routes();
  std::vector<double> sum_rate(net.n_links(), 0.0);
  for (int r = 0; r < nr; ++r) {
    const double rate = net.rate_scale[r] * std::exp(x[r]);
    for (int l : net.route_links[r]) sum_rate[l] += rate;
  }
  std::vector<double> snapped(net.n_links());
  for (int l = 0; l < net.n_links(); ++l) {
    snapped[l] = 1.0 - sum_rate[l] / net.d[l];
    if (!(snapped[l] >= eps && snapped[l] <= 1.0 - eps)) return;
  }
  for (int l = 0; l < net.n_links(); ++l) x[nr + l] = snapped[l];
}

SolutionVector unpack(const Compiled& net, const std::vector<double>& x) {
  SolutionVector sol;
  for (int r = 0; r < net.n_routes(); ++r)
    sol.rates[net.route_ids[r]] = net.rate_scale[r] * std::exp(x[r]);
  for (int l = 0; l < net.n_links(); ++l)
    sol.werner[net.link_ids[l]] = x[net.n_routes() + l];
  return sol;
}

SolveReport make_report(const NetworkSpec& spec, UtilityKind kind,
                        SolutionVector sol, int outer_iters, bool converged) {
  SolveReport report;
  report.objective = aggregate_objective(spec, kind, sol);
  for (const Route& r : spec.routes) {
    const double W = e2e_werner(r, sol);
    report.per_route_utility[r.id] =
        route_utility(kind, sol.rates.at(r.id), W);
    report.e2e_fidelity[r.id] = werner_to_fidelity(W);
  }
  double worst = 0.0;
  for (const auto& [lid, res] : constraint_residuals(spec, sol))
    worst = std::max(worst, std::abs(res) / rate_coefficient(spec.link(lid)));
  report.max_residual = worst;
  report.outer_iters = outer_iters;
  report.converged = converged;
  report.solution = std::move(sol);
  return report;
}

}  // namespace

void validate_config(const SolverConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("solver config: ") + what);
  };
  require(c.initial_penalty > 0.0, "initial_penalty must be > 0");
  require(c.penalty_growth > 1.0, "penalty_growth must be > 1");
  require(c.max_outer_iters >= 1, "max_outer_iters must be >= 1");
  require(c.max_inner_iters >= 1, "max_inner_iters must be >= 1");
  require(c.residual_tol > 0.0, "residual_tol must be > 0");
  require(c.grad_tol > 0.0, "grad_tol must be > 0");
  require(c.armijo_c > 0.0 && c.armijo_c < 1.0, "armijo_c must be in (0, 1)");
  require(c.backtrack_factor > 0.0 && c.backtrack_factor < 1.0,
          "backtrack_factor must be in (0, 1)");
  require(c.initial_step > 0.0, "initial_step must be > 0");
  require(c.interior_eps > 0.0 && c.interior_eps < 0.1,
          "interior_eps must be in (0, 0.1)");
}

std::map<std::string, double> constraint_residuals(const NetworkSpec& spec,
                                                   const SolutionVector& x) {
  std::map<std::string, double> res;
  for (const Link& l : spec.links) {
    auto it = x.werner.find(l.id);
    if (it == x.werner.end())
      throw ValidationError("solution has no Werner entry for link '" + l.id + "'");
    res[l.id] = -rate_coefficient(l) * (1.0 - it->second);
  }
  for (const Route& r : spec.routes) {
    auto it = x.rates.find(r.id);
    if (it == x.rates.end())
      throw ValidationError("solution has no rate entry for route '" + r.id + "'");
    for (const std::string& lid : r.links) res.at(lid) += it->second;
  }
  return res;
}

SolutionVector project_box(SolutionVector x, const NetworkSpec& spec,
                           double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("project_box: eps must be in (0, 0.5)");
  for (const Link& l : spec.links) {
    auto it = x.werner.find(l.id);
    if (it == x.werner.end())
      throw ValidationError("solution has no Werner entry for link '" + l.id + "'");
    it->second = std::clamp(it->second, eps, 1.0 - eps);
  }
  for (const Route& r : spec.routes) {
    auto it = x.rates.find(r.id);
    if (it == x.rates.end())
      throw ValidationError("solution has no rate entry for route '" + r.id + "'");
    it->second = std::max(it->second, eps);
  }
  return x;
}

SolutionVector initialize(const NetworkSpec& spec, UtilityKind kind,
                          const SolverConfig& config) {
  validate_config(config);
  validate(spec);
  const double eps = config.interior_eps;

  int h_max = 1;
  for (const Route& r : spec.routes)
    h_max = std::max(h_max, static_cast<int>(r.links.size()));

  double t = fidelity_to_werner(kind == UtilityKind::NGTV ? 0.75 : 0.9);
  if (!spec.fidelity_thresholds.empty()) {
    double needed = 0.0;
    for (const auto& [rid, f] : spec.fidelity_thresholds)
      needed = std::max(needed, fidelity_to_werner(f));
    if (needed >= 1.0 - 16.0 * eps)
      throw InfeasibleStartError(
          "no strictly interior start: a fidelity threshold requires an "
          "end-to-end Werner parameter of " +
          std::to_string(needed));
    // Sit halfway between the tightest requirement and the box edge.
    t = std::max(t, 0.5 * (1.0 + needed));
  }

  const double w = std::clamp(std::pow(t, 1.0 / h_max), eps, 1.0 - eps);
  SolutionVector x;
  std::map<std::string, int> routes_per_link;
  for (const Link& l : spec.links) {
    x.werner[l.id] = w;
    routes_per_link[l.id] = 0;
  }
  for (const Route& r : spec.routes)
    for (const std::string& lid : r.links) ++routes_per_link[lid];

  for (const Route& r : spec.routes) {
    double share = kInf;
    for (const std::string& lid : r.links)
      share = std::min(share, link_generation_rate(spec.link(lid), w) /
                                  routes_per_link[lid]);
    x.rates[r.id] = std::max(share, eps);
  }

  // The point must start strictly inside every route's utility domain and
  // strictly satisfy any fidelity floor.
  for (const Route& r : spec.routes) {
    const double W = e2e_werner(r, x);
    const DomainMargin dm = domain_margin(kind, x.rates.at(r.id), W);
    auto it = spec.fidelity_thresholds.find(r.id);
    const bool meets_floor =
        it == spec.fidelity_thresholds.end() || W > fidelity_to_werner(it->second);
    if (!dm.feasible || !meets_floor)
      throw InfeasibleStartError("route '" + r.id +
                                 "' has no strictly feasible starting point");
  }
  return x;
}

std::vector<std::string> solution_warnings(const NetworkSpec& spec,
                                           const SolutionVector& x) {
  std::vector<std::string> warnings;
  for (const Link& l : spec.links) {
    auto it = x.werner.find(l.id);
    if (it == x.werner.end()) continue;
    const double p = success_probability(l, it->second);
    if (p > 1.0)
      warnings.push_back("link '" + l.id + "': success probability " +
                         std::to_string(p) + " exceeds 1 at w = " +
                         std::to_string(it->second));
  }
  return warnings;
}

namespace detail {

BoxMinimizeResult minimize_box(
    const std::function<long double(const std::vector<double>&,
                                    std::vector<double>*)>& eval,
    std::vector<double>& x, const std::vector<double>& lower,
    const std::vector<double>& upper, const SolverConfig& config,
    const std::function<void(double)>& on_value) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);

  std::vector<double> g(n), xnew(n), xprev, gprev;
  long double fx = eval(x, &g);
  if (!std::isfinite(fx))
    throw std::invalid_argument("minimize_box: start outside the merit domain");
  if (on_value) on_value(static_cast<double>(fx));

  // Sup-norm of the projected gradient: the termination measure stays
  // comparable across problem sizes.
  auto pg_norm = [&] {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double moved = x[i] - std::clamp(x[i] - g[i], lower[i], upper[i]);
      worst = std::max(worst, std::abs(moved));
    }
    return worst;
  };

  BoxMinimizeResult out;
  out.pg_norm = pg_norm();
  double step = config.initial_step;
  // On a line-search stall with the gradient still large, the quadratic
  // model is retried from a different step scale; each retry lands the
  // iterate somewhere new, which is often enough to hop the floating-point
  // noise floor of the merit.
  static constexpr double kRetryScales[] = {1e-3, 3e-2, 10.0, 1e-5, 3.0,
                                            1e-7, 0.3, 1e-9};
  int retries_left = 8;
  while (out.iters < config.max_inner_iters && out.pg_norm > config.grad_tol) {
    if (!xprev.empty()) {
      // Barzilai-Borwein trial step; falls back to growing the last step
      // when the curvature estimate is unusable.
      double ss = 0.0, sy = 0.0;
      for (int i = 0; i < n; ++i) {
        const double s = x[i] - xprev[i];
        const double y = g[i] - gprev[i];
        ss += s * s;
        sy += s * y;
      }
      step = (sy > 0.0 && ss > 0.0) ? std::clamp(ss / sy, 1e-14, 1e14)
                                    : std::min(step * 2.0, 1e14);
    }

    double t = step;
    bool accepted = false;
    // Near a minimizer the Armijo decrease can demand less than the merit
    // can resolve even in extended precision; a step that does not increase
    // the merit is then accepted so the iterates keep contracting.
    const long double flat = 1e-17L * std::max(1.0L, std::fabs(fx));
    for (int bt = 0; bt < 80; ++bt) {
      double gtd = 0.0;
      bool moved = false;
      for (int i = 0; i < n; ++i) {
        xnew[i] = std::clamp(x[i] - t * g[i], lower[i], upper[i]);
        gtd += g[i] * (xnew[i] - x[i]);
        moved |= xnew[i] != x[i];
      }
      if (!moved) break;  // pinned to the box at every scale of this step
      const long double fnew = eval(xnew, nullptr);
      if (std::isfinite(fnew) &&
          (fnew <= fx + config.armijo_c * static_cast<long double>(gtd) ||
           (fnew <= fx && -config.armijo_c * gtd <= flat))) {
        accepted = true;
        break;
      }
      t *= config.backtrack_factor;
    }
    if (!accepted) {
      if (retries_left == 0) break;
      --retries_left;
      xprev.clear();
      gprev.clear();
      step = config.initial_step * kRetryScales[retries_left];
      continue;
    }

    xprev = x;
    gprev = g;
    x.swap(xnew);
    fx = eval(x, &g);
    if (on_value) on_value(static_cast<double>(fx));
    ++out.iters;
    out.pg_norm = pg_norm();
  }
  return out;
}

}  // namespace detail

SolveReport solve(const NetworkSpec& spec, UtilityKind kind,
                  const SolverConfig& config,
                  const std::optional<SolutionVector>& start) {
  validate_config(config);
  validate(spec);
  const Compiled net = compile(spec);
  const double eps = config.interior_eps;
  const int nr = net.n_routes(), nl = net.n_links();

  SolutionVector x0 =
      start ? project_box(*start, spec, eps) : initialize(spec, kind, config);
  if (start) {
    for (const Route& r : spec.routes) {
      const DomainMargin dm =
          domain_margin(kind, x0.rates.at(r.id), e2e_werner(r, x0));
      if (!dm.feasible)
        throw InfeasibleStartError("provided start is outside the utility "
                                   "domain on route '" + r.id + "'");
    }
  }

  std::vector<double> x(nr + nl);
  for (int r = 0; r < nr; ++r)
    x[r] = std::log(x0.rates.at(net.route_ids[r])) - net.log_scale[r];
  for (int l = 0; l < nl; ++l) x[nr + l] = x0.werner.at(net.link_ids[l]);

  std::vector<double> lower(nr + nl), upper(nr + nl);
  for (int r = 0; r < nr; ++r) {
    lower[r] = std::log(eps) - net.log_scale[r];
    upper[r] = kInf;
  }
  for (int l = 0; l < nl; ++l) {
    lower[nr + l] = eps;
    upper[nr + l] = 1.0 - eps;
  }

  MeritAL merit(net, kind);
  merit.mu = config.initial_penalty;
  auto eval = [&merit](const std::vector<double>& p, std::vector<double>* g) {
    return merit(p, g);
  };

  // Track the best feasible-leaning iterate so budget exhaustion still
  // reports something sensible, and the best converged iterate for the
  // final answer once the tolerances are met.
  std::vector<double> best_x, best_conv_x;
  double best_viol = kInf, best_obj = kInf, best_conv_viol = kInf;

  std::vector<double> chat(nl);
  const double polish = config.residual_tol * 1e-4;
  double prev_viol = kInf;
  int outer = 0;
  while (outer < config.max_outer_iters) {
    ++outer;
    const auto inner = detail::minimize_box(eval, x, lower, upper, config);
    const double eq_viol = merit.residuals(x, &chat);
    const double viol = std::max(eq_viol, merit.threshold_violation(x));
    const double obj = merit.objective(x);
    if (std::getenv("QNUM_TRACE"))
      std::fprintf(stderr, "outer %2d: inner=%5d pg=%.3e viol=%.3e mu=%.1e obj=%.12f\n",
                   outer, inner.iters, inner.pg_norm, viol, merit.mu, obj);

    if (viol < best_viol || (viol == best_viol && obj < best_obj)) {
      best_viol = viol;
      best_obj = obj;
      best_x = x;
    }
    const bool conv_now =
        eq_viol <= config.residual_tol && viol <= config.residual_tol &&
        inner.pg_norm <= config.grad_tol;
    // Once converged, keep polishing only while each converged iterate still
    // cuts the violation 4x, so re-solving from the answer barely moves it.
    const bool improving = viol <= best_conv_viol / 4.0;
    if (conv_now && viol <= best_conv_viol) {
      best_conv_viol = viol;
      best_conv_x = x;
    }
    if (conv_now && (viol <= polish || !improving)) break;

    for (int l = 0; l < nl; ++l) merit.lambda[l] += merit.mu * chat[l];
    for (int r : net.thresholded) {
      double logw = 0.0;
      for (int l : net.route_links[r]) logw += std::log(x[nr + l]);
      merit.nu[r] =
          std::max(0.0, merit.nu[r] + merit.mu * (net.thr_log[r] - logw));
    }
    // The penalty exists to force feasibility; once the violation sits at
    // tolerance, multiplier updates alone hold it there, so the penalty is
    // walked back down to restore conditioning while the gradient finishes
    // converging. If feasibility regresses, the growth branch re-fires.
    if (viol > config.residual_tol && viol > prev_viol / 4.0)
      merit.mu = std::min(merit.mu * config.penalty_growth, 1e12);
    else if (viol <= config.residual_tol && inner.pg_norm > config.grad_tol)
      merit.mu = std::max(merit.mu / config.penalty_growth,
                          config.initial_penalty);
    prev_viol = viol;
  }

  const bool converged = !best_conv_x.empty();
  std::vector<double>& final_x = converged ? best_conv_x : best_x;
  if (converged) snap_feasible(net, final_x, eps);
  return make_report(spec, kind, unpack(net, final_x), outer, converged);
}

SolveReport grid_search_oracle(const NetworkSpec& spec, UtilityKind kind,
                               const std::vector<SymmetryClass>& classes,
                               int resolution, double eps) {
  if (resolution < 2)
    throw std::invalid_argument("grid_search_oracle: resolution must be >= 2");
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("grid_search_oracle: eps must be in (0, 0.5)");
  validate(spec);
  const int k = static_cast<int>(classes.size());
  if (k == 0) throw ValidationError("grid_search_oracle: no symmetry classes");

  // The partition must cover every link exactly once, with identical links
  // and identical route counts inside each class.
  std::map<std::string, int> class_of;
  std::vector<double> d_class(k), m_class(k);
  std::map<std::string, int> routes_per_link;
  for (const Route& r : spec.routes)
    for (const std::string& lid : r.links) ++routes_per_link[lid];
  for (int c = 0; c < k; ++c) {
    if (classes[c].links.empty())
      throw ValidationError("symmetry class '" + classes[c].name + "' is empty");
    const Link& first = spec.link(classes[c].links.front());
    d_class[c] = rate_coefficient(first);
    m_class[c] = routes_per_link.count(first.id) ? routes_per_link[first.id] : 0;
    for (const std::string& lid : classes[c].links) {
      const Link& l = spec.link(lid);
      if (l.length_km != first.length_km ||
          l.repetition_time_s != first.repetition_time_s ||
          l.inefficiency_c != first.inefficiency_c)
        throw ValidationError("links in symmetry class '" + classes[c].name +
                              "' have different parameters");
      const int uses = routes_per_link.count(lid) ? routes_per_link[lid] : 0;
      if (uses != static_cast<int>(m_class[c]))
        throw ValidationError("links in symmetry class '" + classes[c].name +
                              "' serve different route counts");
      if (!class_of.emplace(lid, c).second)
        throw ValidationError("link '" + lid + "' appears in two symmetry classes");
    }
    if (m_class[c] <= 0)
      throw ValidationError("symmetry class '" + classes[c].name +
                            "' has no routes through it");
  }
  for (const Link& l : spec.links)
    if (!class_of.count(l.id))
      throw ValidationError("link '" + l.id + "' is not covered by the "
                            "symmetry classes");

  // All routes must look the same through the class lens.
  std::vector<int> profile;
  for (size_t ri = 0; ri < spec.routes.size(); ++ri) {
    std::vector<int> p;
    for (const std::string& lid : spec.routes[ri].links)
      p.push_back(class_of.at(lid));
    std::sort(p.begin(), p.end());
    if (ri == 0)
      profile = p;
    else if (p != profile)
      throw ValidationError("routes are not symmetric under the given classes");
  }
  // Left-closed uniform grid per class: point i sits at eps + i*span/res,
  // so doubling the resolution keeps every existing point.
  const double span = 1.0 - 2.0 * eps;
  std::vector<double> grid(resolution);
  for (int i = 0; i < resolution; ++i)
    grid[i] = eps + span * static_cast<double>(i) / resolution;

  std::vector<int> idx(k, 0);
  std::vector<double> wc(k, grid[0]), wsnap(k), best_w;
  double best_score = -kInf, best_rate = 0.0;
  while (true) {
    // Equal-split share per class; the route rate is the binding minimum.
    double rate = kInf;
    for (int c : profile)
      rate = std::min(rate, d_class[c] * (1.0 - wc[c]) / m_class[c]);
    if (rate > eps) {
      // Raise the Werner value of every non-binding class until its link
      // balance closes exactly; fidelity only improves.
      bool ok = true;
      for (int c = 0; c < k; ++c) {
        wsnap[c] = 1.0 - m_class[c] * rate / d_class[c];
        if (wsnap[c] > 1.0 - eps) { ok = false; break; }
      }
      if (ok) {
        double W = 1.0;
        for (int c : profile) W *= wsnap[c];
        const double m = margin_fast(kind, W);
        // log is monotone, so compare rate*margin instead of the utility
        if (m > 0.0 && rate * m > best_score) {
          best_score = rate * m;
          best_rate = rate;
          best_w = wsnap;
        }
      }
    }
    int c = k - 1;
    for (; c >= 0; --c) {
      if (++idx[c] < resolution) {
        wc[c] = grid[idx[c]];
        break;
      }
      idx[c] = 0;
      wc[c] = grid[0];
    }
    if (c < 0) break;
  }

  if (best_w.empty())
    throw InfeasibleStartError(
        "grid_search_oracle: no feasible grid point in the utility domain");

  SolutionVector sol;
  for (const auto& [lid, c] : class_of) sol.werner[lid] = best_w[c];
  for (const Route& r : spec.routes) sol.rates[r.id] = best_rate;
  return make_report(spec, kind, std::move(sol), 0, true);
}

SolutionVector finite_diff_gradient(
    const std::function<double(const SolutionVector&)>& f,
    const SolutionVector& x, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("finite_diff_gradient: h must be > 0");
  SolutionVector g = x;
  for (const auto& [key, value] : x.rates) {
    SolutionVector xp = x, xm = x;
    xp.rates[key] = value + h;
    xm.rates[key] = value - h;
    g.rates[key] = (f(xp) - f(xm)) / (2.0 * h);
  }
  for (const auto& [key, value] : x.werner) {
    SolutionVector xp = x, xm = x;
    xp.werner[key] = value + h;
    xm.werner[key] = value - h;
    g.werner[key] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace qnum
