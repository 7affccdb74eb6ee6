#include "qnum/serialize.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace qnum {

namespace {

using nlohmann::json;

const json& require_field(const json& obj, const char* field,
                          const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end())
    throw ValidationError(where + ": missing field '" + field + "'");
  return *it;
}

double number_field(const json& obj, const char* field,
                    const std::string& where) {
  const json& v = require_field(obj, field, where);
  if (!v.is_number())
    throw ValidationError(where + ": field '" + field + "' must be a number");
  return v.get<double>();
}

std::string string_field(const json& obj, const char* field,
                         const std::string& where) {
  const json& v = require_field(obj, field, where);
  if (!v.is_string())
    throw ValidationError(where + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

void reject_unknown(const json& obj,
                    std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known |= key == a;
    if (!known)
      throw ValidationError(where + ": unknown field '" + key + "'");
  }
}

}  // namespace

json network_to_json(const NetworkSpec& spec) {
  json doc;
  doc["links"] = json::array();
  for (const Link& l : spec.links)
    doc["links"].push_back({{"id", l.id},
                            {"length_km", l.length_km},
                            {"T_s", l.repetition_time_s},
                            {"c", l.inefficiency_c}});
  doc["routes"] = json::array();
  for (const Route& r : spec.routes)
    doc["routes"].push_back({{"id", r.id}, {"links", r.links}});
  if (!spec.fidelity_thresholds.empty())
    doc["fidelity_thresholds"] = spec.fidelity_thresholds;
  return doc;
}

NetworkSpec network_from_json(const json& doc) {
  if (!doc.is_object())
    throw ValidationError("network document must be a JSON object");
  reject_unknown(doc, {"links", "routes", "fidelity_thresholds"}, "network");

  NetworkSpec spec;
  const json& links = require_field(doc, "links", "network");
  if (!links.is_array())
    throw ValidationError("network: 'links' must be an array");
  for (size_t i = 0; i < links.size(); ++i) {
    const std::string where = "links[" + std::to_string(i) + "]";
    const json& entry = links[i];
    if (!entry.is_object()) throw ValidationError(where + ": must be an object");
    reject_unknown(entry, {"id", "length_km", "T_s", "c"}, where);
    spec.links.push_back({string_field(entry, "id", where),
                          number_field(entry, "length_km", where),
                          number_field(entry, "T_s", where),
                          number_field(entry, "c", where)});
  }

  const json& routes = require_field(doc, "routes", "network");
  if (!routes.is_array())
    throw ValidationError("network: 'routes' must be an array");
  for (size_t i = 0; i < routes.size(); ++i) {
    const std::string where = "routes[" + std::to_string(i) + "]";
    const json& entry = routes[i];
    if (!entry.is_object()) throw ValidationError(where + ": must be an object");
    reject_unknown(entry, {"id", "links"}, where);
    Route route;
    route.id = string_field(entry, "id", where);
    const json& members = require_field(entry, "links", where);
    if (!members.is_array())
      throw ValidationError(where + ": 'links' must be an array of link ids");
    for (const json& m : members) {
      if (!m.is_string())
        throw ValidationError(where + ": 'links' must contain only strings");
      route.links.push_back(m.get<std::string>());
    }
    spec.routes.push_back(std::move(route));
  }

  if (auto it = doc.find("fidelity_thresholds"); it != doc.end()) {
    if (!it->is_object())
      throw ValidationError("network: 'fidelity_thresholds' must map route "
                            "ids to fidelities");
    for (const auto& [rid, value] : it->items()) {
      if (!value.is_number())
        throw ValidationError("fidelity_thresholds['" + rid +
                              "']: must be a number");
      spec.fidelity_thresholds[rid] = value.get<double>();
    }
  }

  validate(spec);
  return spec;
}

NetworkSpec load_network(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open '" + path + "' for reading");
  json doc;
  try {
    doc = json::parse(file);
  } catch (const json::parse_error& e) {
    throw ValidationError("'" + path + "': " + e.what());
  }
  return network_from_json(doc);
}

void save_network(const NetworkSpec& spec, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << network_to_json(spec).dump(2) << '\n';
  if (!file.good()) throw IoError("failed while writing '" + path + "'");
}

json report_to_json(const SolveReport& report) {
  json doc;
  doc["converged"] = report.converged;
  doc["objective"] = report.objective;
  doc["aggregate_utility"] = -report.objective;
  doc["max_residual"] = report.max_residual;
  doc["outer_iters"] = report.outer_iters;
  doc["solution"] = {{"rates", report.solution.rates},
                     {"werner", report.solution.werner}};
  doc["per_route_utility"] = report.per_route_utility;
  doc["e2e_fidelity"] = report.e2e_fidelity;
  return doc;
}

}  // namespace qnum
