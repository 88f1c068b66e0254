#pragma once

#include "rfda/forest.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace rfda {

inline constexpr int forest_format_version = 1;

// {format_version, provenance, dim, parameters, config, trees:[{origin, max_depth, nodes:[...]}]}
// Doubles are written with shortest round-trip precision, so a save/load
// cycle reproduces every value bit for bit.
std::string forest_to_json(const Forest& forest);
Forest forest_from_json(std::string_view text);

void save_forest(const std::filesystem::path& path, const Forest& forest);
Forest load_forest(const std::filesystem::path& path);

// Hash of the dimension and every tree (topology, selectors, weights,
// thresholds, leaves). Used to pair a PathModel with its source forest.
std::string forest_fingerprint(const Forest& forest);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace rfda
