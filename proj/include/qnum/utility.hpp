#pragma once

// Route utilities for entanglement distribution.
//
// Every utility has the form U(R, w) = log(R * m(w_e2e)) with the natural
// log; m is a per-kind figure of merit for the post-swap Werner parameter:
//   DE    distillable-entanglement proxy  m = D_H(F), the hashing yield
//   SKF   secret-key fraction             m = 1 - 2 h((1 - w)/2), BB84
//   NGTV  log negativity proxy            m = 3 w - 1
// The clamps to zero that appear in operational definitions are dropped so
// the sign of m is observable; negative or zero m is outside the domain.

#include <stdexcept>
#include <string>

#include "qnum/model.hpp"

namespace qnum {

enum class UtilityKind { DE, SKF, NGTV };

const char* to_string(UtilityKind kind);
UtilityKind utility_from_string(const std::string& name);  // "de"/"skf"/"ngtv"

// How close a candidate point is to the edge of a utility's domain.
struct DomainMargin {
  bool feasible = false;  // margin > 0 and rate > 0
  double margin = 0.0;    // m(w_e2e); utility exists iff this is positive
  bool rate_positive = false;
};

class DomainError : public std::runtime_error {
 public:
  DomainError(std::string route_id, DomainMargin margin, const std::string& what)
      : std::runtime_error(what), route_id(std::move(route_id)), margin(margin) {}
  std::string route_id;  // empty when not evaluated in a route context
  DomainMargin margin;
};

// Binary entropy in bits, with the 0*log2(0) = 0 convention at p in {0, 1}.
double binary_entropy(double p);

// Hashing yield D_H(F) = 1 + F log2 F + (1-F) log2((1-F)/3) for a Werner
// state of fidelity F. Negative below F ~ 0.8107; D_H(1) = 1.
double hashing_yield(double fidelity);

// BB84 secret-key fraction 1 - 2 h((1-w)/2) of a Werner-w pair, without the
// outer clamp to zero, so the sign marks the domain edge (w ~ 0.7799).
double skf_bb84(double w);

// Negativity of a Werner state with fidelity F in [1/2, 1]: F - 1/2.
double negativity_werner(double fidelity);

// Figure of merit m(W) for end-to-end Werner parameter W, and the derivative
// of log m. These back both route_utility and the solver's inner objective.
double margin_value(UtilityKind kind, double w_e2e);
double margin_dlog(UtilityKind kind, double w_e2e);  // d log m / dW, needs m > 0

DomainMargin domain_margin(UtilityKind kind, double rate, double w_e2e);

// U = log(rate) + log(m(w_e2e)). Throws DomainError when infeasible.
double route_utility(UtilityKind kind, double rate, double w_e2e);

// Objective of the network problem: -sum over routes of route_utility.
// DomainError is rethrown with the offending route's id filled in.
double aggregate_objective(const NetworkSpec& spec, UtilityKind kind,
                           const SolutionVector& x);

// Gradient of aggregate_objective in the same shape as x:
//   d/dR_r = -1/R_r
//   d/dw_l = -sum over routes through l of (d log m / dW) * W_r / w_l.
// Requires x strictly inside the domain for the given kind.
SolutionVector objective_gradient(const NetworkSpec& spec, UtilityKind kind,
                                  const SolutionVector& x);

// Closed-form second derivative in w of the negated single-link utility,
// for DE and SKF (rate-independent):
//   DE:  (3/(4 D_H(F)) log2((3w+1)/(1-w)))^2 - 3/(D_H(F) ln2 (3w+1)(1-w))
//   SKF: (log2((1+w)/(1-w))/S(w))^2         - 2/(S(w) ln2 (1+w)(1-w))
// with F = (3w+1)/4 and S = skf_bb84. Throws for NGTV or w outside the
// kind's domain.
double second_partial_w(UtilityKind kind, double w);

}  // namespace qnum
