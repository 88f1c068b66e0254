#pragma once

#include "rfda/forest.hpp"
#include "rfda/optim.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace rfda::detail {

nlohmann::json to_json(const SvmConfig& c);
SvmConfig svm_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ForestConfig& c);
ForestConfig forest_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Hyperplane& h);
Hyperplane hyperplane_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Tree& t);
Tree tree_from_json(const nlohmann::json& j, std::size_t dim);

std::string fnv1a_hex(std::string_view bytes);

} // namespace rfda::detail
