#pragma once

// Network model for entanglement distribution over chains of elementary links.
//
// Each link runs a midpoint-heralded single-photon protocol: one attempt per
// repetition period T, success probability p = 2*c*eta*alpha, where eta is the
// fiber transmissivity between a link end and the heralding station at the
// link midpoint, alpha is the bright-state population of the sources and c
// lumps the remaining inefficiencies. Heralded pairs are Werner states whose
// Werner parameter w trades off against the generation rate: lowering alpha
// raises fidelity F = (3w+1)/4 but slows the link down. Entanglement swaps at
// the intermediate nodes multiply Werner parameters along a route.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnum {

// Fiber attenuation, dB/km. Gives eta = 10^(-0.1 * beta * span_km).
inline constexpr double kFiberAttenuationDbPerKm = 0.2;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transmissivity of a fiber span of the given length: 10^(-0.02 * span_km).
double transmissivity(double span_km);

// Fidelity of a Werner state with parameter w (to the nearest Bell state).
double werner_to_fidelity(double w);

// Inverse of werner_to_fidelity: w = (4F - 1) / 3.
double fidelity_to_werner(double fidelity);

// Source bright-state population needed for Werner parameter w:
// alpha = 1 - F = 3(1 - w)/4.
double bright_state_population(double w);

struct Link {
  std::string id;
  double length_km = 0.0;          // >= 0
  double repetition_time_s = 0.0;  // T, > 0
  double inefficiency_c = 1.0;     // c, in (0, 1]
};

// Throws ValidationError if a field is out of range.
void validate_link(const Link& link);

// Maximum entanglement generation rate coefficient d = 3*c*eta/(2T) in Hz,
// with eta taken over half the link length (source to midpoint station).
// The link generates at rate d*(1-w); d is the w -> 0 limit.
double rate_coefficient(const Link& link);

// Generation rate d*(1-w) of heralded pairs with Werner parameter w, in Hz.
double link_generation_rate(const Link& link, double w);

// Per-attempt success probability p = 2*c*eta*alpha(w). Not capped at 1;
// see solution_warnings() in solver.hpp for the plausibility check.
double success_probability(const Link& link, double w);

struct Route {
  std::string id;
  std::vector<std::string> links;  // ordered, distinct, nonempty
};

struct NetworkSpec {
  std::vector<Link> links;
  std::vector<Route> routes;
  // Optional minimum end-to-end fidelity per route id, each in [1/2, 1].
  std::map<std::string, double> fidelity_thresholds;

  const Link& link(const std::string& id) const;  // throws ValidationError
  const Route& route(const std::string& id) const;
};

// Hard errors (duplicate ids, dangling link references, out-of-range fields,
// empty or repeating routes, bad thresholds) throw ValidationError. Soft
// issues come back as warnings: links not used by any route, and links whose
// success probability would exceed 1 at w = 0.
std::vector<std::string> validate(const NetworkSpec& spec);

// One candidate operating point: entanglement rate per route (Hz) and Werner
// parameter per link. Key sets must match the network's route and link ids.
struct SolutionVector {
  std::map<std::string, double> rates;
  std::map<std::string, double> werner;
};

// Post-swap Werner parameter of the route: product of its links' parameters.
// Throws ValidationError if the solution lacks an entry for some link.
double e2e_werner(const Route& route, const SolutionVector& x);

enum class TopologyKind { ThreeLink, ClientsServer, Line, Dumbbell };

const char* to_string(TopologyKind kind);
TopologyKind topology_from_string(const std::string& name);  // CLI spelling

// Reference topologies. The parameter means:
//   ThreeLink     length of link "3" in km (links "1","2" are 2 km, T=1e-3, c=1)
//   ClientsServer user count n >= 1 (15 km user links, 100 km bottleneck)
//   Line          middle link length in km (outer links 15 km)
//   Dumbbell      total user count n, even, >= 2 (n/2 per side, shared backbone)
NetworkSpec build_topology(TopologyKind kind, double parameter);

// Links that are interchangeable by symmetry (identical parameters and role).
struct SymmetryClass {
  std::string name;
  std::vector<std::string> links;
};

std::vector<SymmetryClass> symmetry_classes(TopologyKind kind,
                                            const NetworkSpec& spec);

}  // namespace qnum
