#include "qnum/model.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace qnum {

double transmissivity(double span_km) {
  if (span_km < 0.0 || !std::isfinite(span_km))
    throw std::invalid_argument("transmissivity: span must be finite and >= 0");
  return std::pow(10.0, -0.1 * kFiberAttenuationDbPerKm * span_km);
}

double werner_to_fidelity(double w) { return (3.0 * w + 1.0) / 4.0; }

double fidelity_to_werner(double fidelity) { return (4.0 * fidelity - 1.0) / 3.0; }

double bright_state_population(double w) { return 3.0 * (1.0 - w) / 4.0; }

void validate_link(const Link& link) {
  std::ostringstream err;
  if (link.id.empty())
    err << "link with empty id";
  else if (!(link.length_km >= 0.0) || !std::isfinite(link.length_km))
    err << "link '" << link.id << "': length_km must be finite and >= 0";
  else if (!(link.repetition_time_s > 0.0) || !std::isfinite(link.repetition_time_s))
    err << "link '" << link.id << "': T_s must be finite and > 0";
  else if (!(link.inefficiency_c > 0.0) || link.inefficiency_c > 1.0)
    err << "link '" << link.id << "': c must lie in (0, 1]";
  else
    return;
  throw ValidationError(err.str());
}

double rate_coefficient(const Link& link) {
  validate_link(link);
  // Photons travel from a link end to the heralding station at the midpoint,
  // so the attenuated span is half the link length.
  const double eta = transmissivity(0.5 * link.length_km);
  return 3.0 * link.inefficiency_c * eta / (2.0 * link.repetition_time_s);
}

double link_generation_rate(const Link& link, double w) {
  return rate_coefficient(link) * (1.0 - w);
}

double success_probability(const Link& link, double w) {
  validate_link(link);
  const double eta = transmissivity(0.5 * link.length_km);
  return 2.0 * link.inefficiency_c * eta * bright_state_population(w);
}

const Link& NetworkSpec::link(const std::string& id) const {
  for (const Link& l : links)
    if (l.id == id) return l;
  throw ValidationError("unknown link id '" + id + "'");
}

const Route& NetworkSpec::route(const std::string& id) const {
  for (const Route& r : routes)
    if (r.id == id) return r;
  throw ValidationError("unknown route id '" + id + "'");
}

std::vector<std::string> validate(const NetworkSpec& spec) {
  std::set<std::string> link_ids;
  for (const Link& l : spec.links) {
    validate_link(l);
    if (!link_ids.insert(l.id).second)
      throw ValidationError("duplicate link id '" + l.id + "'");
  }
  if (spec.routes.empty()) throw ValidationError("spec has no routes");

  std::set<std::string> route_ids;
  std::set<std::string> used;
  for (const Route& r : spec.routes) {
    if (r.id.empty()) throw ValidationError("route with empty id");
    if (!route_ids.insert(r.id).second)
      throw ValidationError("duplicate route id '" + r.id + "'");
    if (r.links.empty())
      throw ValidationError("route '" + r.id + "' has no links");
    std::set<std::string> seen;
    for (const std::string& lid : r.links) {
      if (!link_ids.count(lid))
        throw ValidationError("route '" + r.id + "' references missing link '" +
                              lid + "'");
      if (!seen.insert(lid).second)
        throw ValidationError("route '" + r.id + "' repeats link '" + lid + "'");
      used.insert(lid);
    }
  }
  for (const auto& [rid, f] : spec.fidelity_thresholds) {
    if (!route_ids.count(rid))
      throw ValidationError("fidelity threshold for unknown route '" + rid + "'");
    if (!(f >= 0.5 && f <= 1.0))
      throw ValidationError("fidelity threshold for route '" + rid +
                            "' must lie in [1/2, 1]");
  }

  std::vector<std::string> warnings;
  for (const Link& l : spec.links) {
    if (!used.count(l.id))
      warnings.push_back("link '" + l.id + "' is not used by any route");
    // Worst case is w = 0 (alpha = 3/4); flags parameter sets where the
    // linear-rate model stops being a probability.
    if (success_probability(l, 0.0) > 1.0)
      warnings.push_back("link '" + l.id +
                         "': success probability exceeds 1 at low Werner "
                         "parameter (2*c*eta*alpha > 1)");
  }
  return warnings;
}

double e2e_werner(const Route& route, const SolutionVector& x) {
  double prod = 1.0;
  for (const std::string& lid : route.links) {
    auto it = x.werner.find(lid);
    if (it == x.werner.end())
      throw ValidationError("solution has no Werner entry for link '" + lid +
                            "'");
    prod *= it->second;
  }
  return prod;
}

const char* to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::ThreeLink: return "three-link";
    case TopologyKind::ClientsServer: return "clients-server";
    case TopologyKind::Line: return "line";
    case TopologyKind::Dumbbell: return "dumbbell";
  }
  throw std::invalid_argument("unknown topology kind");
}

TopologyKind topology_from_string(const std::string& name) {
  if (name == "three-link") return TopologyKind::ThreeLink;
  if (name == "clients-server") return TopologyKind::ClientsServer;
  if (name == "line") return TopologyKind::Line;
  if (name == "dumbbell") return TopologyKind::Dumbbell;
  throw std::invalid_argument("unknown topology '" + name + "'");
}

namespace {

int integral_parameter(TopologyKind kind, double parameter) {
  const double rounded = std::round(parameter);
  if (!std::isfinite(parameter) || std::abs(parameter - rounded) > 1e-9)
    throw ValidationError(std::string(to_string(kind)) +
                          ": parameter must be an integer user count");
  return static_cast<int>(rounded);
}

}  // namespace

NetworkSpec build_topology(TopologyKind kind, double parameter) {
  NetworkSpec spec;
  switch (kind) {
    case TopologyKind::ThreeLink: {
      if (!(parameter > 0.0))
        throw ValidationError("three-link: link-3 length must be positive");
      spec.links = {{"1", 2.0, 1e-3, 1.0},
                    {"2", 2.0, 1e-3, 1.0},
                    {"3", parameter, 1e-3, 1.0}};
      spec.routes = {{"r1", {"1", "3"}}, {"r2", {"2", "3"}}};
      break;
    }
    case TopologyKind::ClientsServer: {
      const int n = integral_parameter(kind, parameter);
      if (n < 1) throw ValidationError("clients-server: need n >= 1 users");
      for (int i = 1; i <= n; ++i)
        spec.links.push_back({"u" + std::to_string(i), 15.0, 1e-3, 0.1});
      spec.links.push_back({"bb", 100.0, 1e-4, 0.1});
      for (int i = 1; i <= n; ++i)
        spec.routes.push_back(
            {"r" + std::to_string(i), {"u" + std::to_string(i), "bb"}});
      break;
    }
    case TopologyKind::Line: {
      if (!(parameter > 0.0))
        throw ValidationError("line: middle link length must be positive");
      spec.links = {{"1", 15.0, 1e-3, 0.1},
                    {"2", parameter, 1e-4, 0.1},
                    {"3", 15.0, 1e-3, 0.1}};
      spec.routes = {{"r1", {"1", "2", "3"}}};
      break;
    }
    case TopologyKind::Dumbbell: {
      const int n = integral_parameter(kind, parameter);
      if (n < 2 || n % 2 != 0)
        throw ValidationError("dumbbell: need an even user count n >= 2");
      const int pairs = n / 2;
      for (int i = 1; i <= pairs; ++i)
        spec.links.push_back({"ml" + std::to_string(i), 15.0, 1e-3, 0.1});
      for (int i = 1; i <= pairs; ++i)
        spec.links.push_back({"mr" + std::to_string(i), 15.0, 1e-3, 0.1});
      spec.links.push_back({"bb", 100.0, 1e-4, 0.1});
      // User i on the left talks to user i on the right.
      for (int i = 1; i <= pairs; ++i)
        spec.routes.push_back({"p" + std::to_string(i),
                               {"ml" + std::to_string(i), "bb",
                                "mr" + std::to_string(i)}});
      break;
    }
  }
  validate(spec);
  return spec;
}

std::vector<SymmetryClass> symmetry_classes(TopologyKind kind,
                                            const NetworkSpec& spec) {
  std::vector<SymmetryClass> classes;
  switch (kind) {
    case TopologyKind::ThreeLink:
      classes = {{"link12", {"1", "2"}}, {"link3", {"3"}}};
      break;
    case TopologyKind::Line:
      classes = {{"outer", {"1", "3"}}, {"middle", {"2"}}};
      break;
    case TopologyKind::ClientsServer:
    case TopologyKind::Dumbbell: {
      SymmetryClass metro{"m_link", {}};
      for (const Link& l : spec.links)
        if (l.id != "bb") metro.links.push_back(l.id);
      classes = {metro, {"bb_link", {"bb"}}};
      break;
    }
  }
  return classes;
}

}  // namespace qnum
