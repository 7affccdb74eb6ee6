#include "qnum/utility.hpp"

#include <cmath>

namespace qnum {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

const char* to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::DE: return "de";
    case UtilityKind::SKF: return "skf";
    case UtilityKind::NGTV: return "ngtv";
  }
  throw std::invalid_argument("unknown utility kind");
}

UtilityKind utility_from_string(const std::string& name) {
  if (name == "de") return UtilityKind::DE;
  if (name == "skf") return UtilityKind::SKF;
  if (name == "ngtv") return UtilityKind::NGTV;
  throw std::invalid_argument("unknown utility '" + name + "'");
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binary_entropy: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

double hashing_yield(double fidelity) {
  if (!(fidelity >= 0.0 && fidelity <= 1.0))
    throw std::invalid_argument("hashing_yield: fidelity must lie in [0, 1]");
  if (fidelity == 1.0) return 1.0;
  if (fidelity == 0.0) return std::log2(1.0 / 3.0);  // 1 + log2(1/3)
  return 1.0 + fidelity * std::log2(fidelity) +
         (1.0 - fidelity) * std::log2((1.0 - fidelity) / 3.0);
}

double skf_bb84(double w) {
  if (!(w >= -1.0 && w <= 1.0))
    throw std::invalid_argument("skf_bb84: w must lie in [-1, 1]");
  return 1.0 - 2.0 * binary_entropy((1.0 - w) / 2.0);
}

double negativity_werner(double fidelity) {
  if (!(fidelity >= 0.5 && fidelity <= 1.0))
    throw std::invalid_argument("negativity_werner: fidelity must lie in [1/2, 1]");
  return fidelity - 0.5;
}

double margin_value(UtilityKind kind, double w_e2e) {
  switch (kind) {
    case UtilityKind::DE:
      return hashing_yield(werner_to_fidelity(w_e2e));
    case UtilityKind::SKF:
      return skf_bb84(w_e2e);
    case UtilityKind::NGTV:
      return 3.0 * w_e2e - 1.0;
  }
  throw std::invalid_argument("unknown utility kind");
}

double margin_dlog(UtilityKind kind, double w_e2e) {
  const double m = margin_value(kind, w_e2e);
  if (!(m > 0.0))
    throw std::invalid_argument("margin_dlog: point is outside the domain");
  switch (kind) {
    case UtilityKind::DE: {
      if (w_e2e >= 1.0)
        throw std::invalid_argument("margin_dlog: need w < 1 for DE");
      // d log D_H(F(W)) / dW with F = (3W+1)/4; 3F/(1-F) = (3W+1)/(1-W).
      return 0.75 * std::log2((3.0 * w_e2e + 1.0) / (1.0 - w_e2e)) / m;
    }
    case UtilityKind::SKF: {
      if (w_e2e >= 1.0)
        throw std::invalid_argument("margin_dlog: need w < 1 for SKF");
      return std::log2((1.0 + w_e2e) / (1.0 - w_e2e)) / m;
    }
    case UtilityKind::NGTV:
      return 3.0 / m;
  }
  throw std::invalid_argument("unknown utility kind");
}

DomainMargin domain_margin(UtilityKind kind, double rate, double w_e2e) {
  DomainMargin dm;
  dm.margin = margin_value(kind, w_e2e);
  dm.rate_positive = rate > 0.0 && std::isfinite(rate);
  dm.feasible = dm.rate_positive && dm.margin > 0.0;
  return dm;
}

double route_utility(UtilityKind kind, double rate, double w_e2e) {
  const DomainMargin dm = domain_margin(kind, rate, w_e2e);
  if (!dm.feasible) {
    std::string what = std::string("route utility (") + to_string(kind) +
                       ") undefined: ";
    what += dm.rate_positive
                ? "figure of merit " + std::to_string(dm.margin) + " <= 0"
                : "rate " + std::to_string(rate) + " is not positive";
    throw DomainError("", dm, what);
  }
  return std::log(rate) + std::log(dm.margin);
}

double aggregate_objective(const NetworkSpec& spec, UtilityKind kind,
                           const SolutionVector& x) {
  double total = 0.0;
  for (const Route& r : spec.routes) {
    auto it = x.rates.find(r.id);
    if (it == x.rates.end())
      throw ValidationError("solution has no rate entry for route '" + r.id + "'");
    try {
      total -= route_utility(kind, it->second, e2e_werner(r, x));
    } catch (const DomainError& e) {
      throw DomainError(r.id, e.margin,
                        "route '" + r.id + "': " + e.what());
    }
  }
  return total;
}

SolutionVector objective_gradient(const NetworkSpec& spec, UtilityKind kind,
                                  const SolutionVector& x) {
  SolutionVector grad;
  for (const Link& l : spec.links) {
    if (!x.werner.count(l.id))
      throw ValidationError("solution has no Werner entry for link '" + l.id + "'");
    grad.werner[l.id] = 0.0;
  }
  for (const Route& r : spec.routes) {
    auto it = x.rates.find(r.id);
    if (it == x.rates.end())
      throw ValidationError("solution has no rate entry for route '" + r.id + "'");
    const double rate = it->second;
    const double W = e2e_werner(r, x);
    const DomainMargin dm = domain_margin(kind, rate, W);
    if (!dm.feasible)
      throw DomainError(r.id, dm,
                        "objective_gradient: route '" + r.id +
                            "' is outside the utility domain");
    const double dlog = margin_dlog(kind, W);
    grad.rates[r.id] = -1.0 / rate;
    for (const std::string& lid : r.links)
      grad.werner[lid] -= dlog * W / x.werner.at(lid);
  }
  return grad;
}

double second_partial_w(UtilityKind kind, double w) {
  if (!(w > 0.0 && w < 1.0))
    throw std::invalid_argument("second_partial_w: need w in (0, 1)");
  switch (kind) {
    case UtilityKind::DE: {
      const double dh = hashing_yield(werner_to_fidelity(w));
      if (!(dh > 0.0))
        throw std::invalid_argument("second_partial_w: w below the DE domain");
      const double ratio_log = std::log2((3.0 * w + 1.0) / (1.0 - w));
      const double a = 3.0 / (4.0 * dh) * ratio_log;
      return a * a - 3.0 / (dh * kLn2 * (3.0 * w + 1.0) * (1.0 - w));
    }
    case UtilityKind::SKF: {
      const double s = skf_bb84(w);
      if (!(s > 0.0))
        throw std::invalid_argument("second_partial_w: w below the SKF domain");
      const double a = std::log2((1.0 + w) / (1.0 - w)) / s;
      return a * a - 2.0 / (s * kLn2 * (1.0 + w) * (1.0 - w));
    }
    case UtilityKind::NGTV:
      throw std::invalid_argument(
          "second_partial_w: closed form is provided for DE and SKF only");
  }
  throw std::invalid_argument("unknown utility kind");
}

}  // namespace qnum
