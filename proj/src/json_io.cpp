#include "json_io.hpp"

#include <fstream>

#include "gpcsense/error.hpp"

namespace gpcsense::detail {

using nlohmann::json;

json parameter_to_json(const RandomParameter& param) {
  return {{"name", param.name}, {"p", param.p}, {"q", param.q}, {"lower", param.lower}, {"upper", param.upper}};
}

RandomParameter parameter_from_json(const json& j) {
  RandomParameter param;
  param.name = j.at("name").get<std::string>();
  param.p = j.value("p", 1.0);
  param.q = j.value("q", 1.0);
  param.lower = j.at("lower").get<double>();
  param.upper = j.at("upper").get<double>();
  return param;
}

json space_to_json(const ParameterSpace& space) {
  json params = json::array();
  for (const auto& param : space.parameters()) params.push_back(parameter_to_json(param));
  return {{"parameters", params}, {"seed", space.seed()}};
}

ParameterSpace space_from_json(const json& j) {
  std::vector<RandomParameter> params;
  for (const auto& p : j.at("parameters")) params.push_back(parameter_from_json(p));
  return ParameterSpace(std::move(params), j.at("seed").get<std::uint64_t>());
}

json truncation_to_json(const Truncation& truncation) {
  return {{"max_total_order", truncation.max_total_order ? json(*truncation.max_total_order) : json(nullptr)},
          {"max_order_per_dim", truncation.max_order_per_dim ? json(*truncation.max_order_per_dim) : json(nullptr)}};
}

Truncation truncation_from_json(const json& j) {
  Truncation truncation;
  if (j.contains("max_total_order") && !j.at("max_total_order").is_null()) {
    truncation.max_total_order = j.at("max_total_order").get<unsigned>();
  }
  if (j.contains("max_order_per_dim") && !j.at("max_order_per_dim").is_null()) {
    truncation.max_order_per_dim = j.at("max_order_per_dim").get<std::vector<unsigned>>();
  }
  return truncation;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace gpcsense::detail
