#pragma once

// JSON encodings shared by the surrogate file and the run configuration.

#include <json.hpp>

#include "gpcsense/basis.hpp"
#include "gpcsense/randomspace.hpp"

namespace gpcsense::detail {

nlohmann::json parameter_to_json(const RandomParameter& param);
RandomParameter parameter_from_json(const nlohmann::json& j);

nlohmann::json space_to_json(const ParameterSpace& space);
ParameterSpace space_from_json(const nlohmann::json& j);

nlohmann::json truncation_to_json(const Truncation& truncation);
Truncation truncation_from_json(const nlohmann::json& j);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace gpcsense::detail
