#pragma once

#include "rfda/data.hpp"
#include "rfda/forest.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rfda {

// round(ratio * n_trees), rounding halves up.
std::size_t replaced_tree_count(double ratio, std::size_t n_trees);

// `count` distinct slots in [0, n_trees), uniform without replacement,
// returned in increasing order.
std::vector<std::size_t> select_replaced_slots(std::size_t n_trees, std::size_t count, std::uint64_t seed);

// Reforestation: a ratio of the source trees, chosen at random, is replaced by
// trees grown from scratch on the target data. The tree in slot i is grown
// with seed cfg.seed + i, so ratio 1 reproduces train_forest(target, cfg) when
// cfg.n_trees matches. Averaging over all T trees is unchanged.
Forest tree_adapt(const Forest& source, const Dataset& target, double ratio, const ForestConfig& cfg);

} // namespace rfda
