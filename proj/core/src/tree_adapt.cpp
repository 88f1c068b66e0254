#include "rfda/tree_adapt.hpp"

#include "detail.hpp"
#include "rfda/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rfda {

std::size_t replaced_tree_count(double ratio, std::size_t n_trees) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw invalid_argument("tree replacement ratio must lie in (0, 1]");
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n_trees) + 0.5));
}

std::vector<std::size_t> select_replaced_slots(std::size_t n_trees, std::size_t count, std::uint64_t seed) {
    if (count > n_trees) throw invalid_argument("cannot replace more trees than the forest holds");
    std::vector<std::size_t> slots(n_trees);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first `count` entries are a uniform sample.
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n_trees - 1);
        std::swap(slots[i], slots[pick(rng)]);
    }
    slots.resize(count);
    std::sort(slots.begin(), slots.end());
    return slots;
}

Forest tree_adapt(const Forest& source, const Dataset& target, double ratio, const ForestConfig& cfg) {
    source.validate();
    cfg.validate();
    detail::check_target(source, target);
    const std::size_t n_trees = source.size();
    const std::size_t count = replaced_tree_count(ratio, n_trees);
    if (count == 0) throw invalid_argument("tree replacement ratio selects no tree for this forest size");

    Forest out = source;
    out.config = cfg;
    out.provenance = Provenance::tree_adapt;
    out.parameters = {{"C", ratio}};

    const auto rows = detail::all_rows(target);
    for (auto slot : select_replaced_slots(n_trees, count, mix_seed(cfg.seed, 0x7265666f72657374ULL))) {
        out.trees[slot] = grow_tree(target, rows, cfg, cfg.seed + slot);
        out.origins[slot] = TreeOrigin::target;
    }
    return out;
}

} // namespace rfda
