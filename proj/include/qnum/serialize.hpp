#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "qnum/model.hpp"
#include "qnum/solver.hpp"

namespace qnum {

// A file could not be read or written. Distinct from ValidationError so
// callers can tell bad content apart from a bad filesystem.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON schema: {"links": [{"id", "length_km", "T_s", "c"}],
//               "routes": [{"id", "links": [link-id]}],
//               "fidelity_thresholds": {route-id: F}}  (last one optional)
nlohmann::json network_to_json(const NetworkSpec& spec);

// Parses and validates. Unknown or missing fields raise ValidationError
// naming the offending entry.
NetworkSpec network_from_json(const nlohmann::json& doc);

NetworkSpec load_network(const std::string& path);
void save_network(const NetworkSpec& spec, const std::string& path);

nlohmann::json report_to_json(const SolveReport& report);

}  // namespace qnum
