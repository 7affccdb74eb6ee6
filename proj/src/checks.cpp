#include "qnum/checks.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <vector>

#include "qnum/model.hpp"
#include "qnum/solver.hpp"
#include "qnum/utility.hpp"

namespace qnum {

namespace {

// mt19937_64 is seeded, and the [0,1) mapping is spelled out, so identical
// runs draw identical points regardless of library internals.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : gen_(seed) {}
  double in(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

 private:
  std::mt19937_64 gen_;
};

using Matrix = std::vector<std::vector<double>>;

// Cyclic Jacobi sweeps; plenty for the small symmetric matrices here.
double min_eigenvalue(Matrix a) {
  const int n = static_cast<int>(a.size());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p][q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  double lo = a[0][0];
  for (int i = 1; i < n; ++i) lo = std::min(lo, a[i][i]);
  return lo;
}

template <typename F>
Matrix numeric_hessian(const F& f, std::vector<double> x, double h) {
  const int n = static_cast<int>(x.size());
  Matrix hess(n, std::vector<double>(n, 0.0));
  const double f0 = f(x);
  for (int i = 0; i < n; ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    hess[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double xi = x[i], xj = x[j];
      auto at = [&](double di, double dj) {
        x[i] = xi + di;
        x[j] = xj + dj;
        const double v = f(x);
        x[i] = xi;
        x[j] = xj;
        return v;
      };
      hess[i][j] = hess[j][i] =
          (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
    }
  }
  return hess;
}

CheckResult curvature_anchor(const char* name, UtilityKind kind,
                             double expected) {
  CheckResult r;
  r.name = name;
  r.measured = second_partial_w(kind, 0.97);
  r.expected = expected;
  r.tolerance = 0.01;
  r.pass = std::abs(r.measured - r.expected) <= r.tolerance;
  r.detail = "closed-form second partial at w = 0.97";
  return r;
}

CheckResult midpoint_concavity() {
  Uniform rng(7);
  const int samples = 1000;
  int violations = 0;
  double worst = -1.0;
  for (int s = 0; s < samples; ++s) {
    double ra = rng.in(0.1, 10.0), rb = rng.in(0.1, 10.0);
    double wa = 1.0, wb = 1.0, wm = 1.0;
    for (int l = 0; l < 3; ++l) {
      const double a = rng.in(0.75, 0.999), b = rng.in(0.75, 0.999);
      wa *= a;
      wb *= b;
      wm *= 0.5 * (a + b);
    }
    const double ua = route_utility(UtilityKind::NGTV, ra, wa);
    const double ub = route_utility(UtilityKind::NGTV, rb, wb);
    const double um = route_utility(UtilityKind::NGTV, 0.5 * (ra + rb), wm);
    const double gap = 0.5 * (ua + ub) - um;
    worst = std::max(worst, gap);
    if (gap > 1e-9) ++violations;
  }
  CheckResult r;
  r.name = "ngtv_midpoint_concavity";
  r.measured = worst;
  r.expected = 0.0;
  r.tolerance = 1e-9;
  r.pass = violations == 0;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d/%d random midpoints within slack",
                samples - violations, samples);
  r.detail = buf;
  return r;
}

CheckResult hessian_psd() {
  Uniform rng(11);
  // minus the negativity utility of one three-hop route, as a function of
  // (rate, w1, w2, w3); concavity of the utility makes this convex.
  auto f = [](const std::vector<double>& z) {
    return -(std::log(z[0]) + std::log(3.0 * z[1] * z[2] * z[3] - 1.0));
  };
  double lo = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 100; ++s) {
    const std::vector<double> z = {rng.in(0.1, 10.0), rng.in(0.75, 0.995),
                                   rng.in(0.75, 0.995), rng.in(0.75, 0.995)};
    lo = std::min(lo, min_eigenvalue(numeric_hessian(f, z, 1e-4)));
  }
  CheckResult r;
  r.name = "ngtv_hessian_psd";
  r.measured = lo;
  r.expected = 0.0;
  r.tolerance = 1e-6;
  r.pass = lo >= -1e-6;
  r.detail = "smallest eigenvalue over 100 sampled 4x4 Hessians";
  return r;
}

CheckResult gradient_check(const char* name, TopologyKind kind,
                           double parameter, std::uint64_t seed) {
  const NetworkSpec spec = build_topology(kind, parameter);
  Uniform rng(seed);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    SolutionVector x;
    for (const Link& l : spec.links) x.werner[l.id] = rng.in(0.93, 0.995);
    for (const Route& r : spec.routes) x.rates[r.id] = rng.in(0.5, 5.0);
    for (UtilityKind u :
         {UtilityKind::DE, UtilityKind::SKF, UtilityKind::NGTV}) {
      const SolutionVector g = objective_gradient(spec, u, x);
      const SolutionVector fd = finite_diff_gradient(
          [&](const SolutionVector& p) { return aggregate_objective(spec, u, p); },
          x, 1e-6);
      for (const auto& [rid, ga] : g.rates)
        worst = std::max(worst,
                         std::abs(ga - fd.rates.at(rid)) / std::max(1.0, std::abs(ga)));
      for (const auto& [lid, ga] : g.werner)
        worst = std::max(worst, std::abs(ga - fd.werner.at(lid)) /
                                    std::max(1.0, std::abs(ga)));
    }
  }
  CheckResult r;
  r.name = name;
  r.measured = worst;
  r.expected = 0.0;
  r.tolerance = 1e-6;
  r.pass = worst <= 1e-6;
  r.detail = "100 interior points, all three utilities, central differences";
  return r;
}

}  // namespace

std::vector<CheckResult> run_checks() {
  std::vector<CheckResult> results;
  results.push_back(curvature_anchor("de_curvature_anchor", UtilityKind::DE,
                                     -3.19));
  results.push_back(curvature_anchor("skf_curvature_anchor", UtilityKind::SKF,
                                     -2.34));
  results.push_back(midpoint_concavity());
  results.push_back(hessian_psd());
  results.push_back(gradient_check("gradient_fd_three_link",
                                   TopologyKind::ThreeLink, 50.0, 21));
  results.push_back(gradient_check("gradient_fd_clients_server",
                                   TopologyKind::ClientsServer, 4.0, 22));
  results.push_back(gradient_check("gradient_fd_line", TopologyKind::Line,
                                   50.0, 23));
  results.push_back(gradient_check("gradient_fd_dumbbell",
                                   TopologyKind::Dumbbell, 4.0, 24));
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results)
    if (!r.pass) return false;
  return true;
}

std::string format_checks(const std::vector<CheckResult>& results) {
  std::string out;
  for (const CheckResult& r : results) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%s %-28s measured=%-15.8g expected=%-8g tol=%-8g %s\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured,
                  r.expected, r.tolerance, r.detail.c_str());
    out += buf;
  }
  return out;
}

}  // namespace qnum
