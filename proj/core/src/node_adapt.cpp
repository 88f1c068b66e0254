#include "rfda/node_adapt.hpp"

#include "detail.hpp"
#include "rfda/error.hpp"

namespace rfda {

namespace detail {

void check_target(const Forest& source, const Dataset& target) {
    if (target.empty()) throw invalid_argument("target dataset is empty");
    if (!target.has_both_classes()) throw invalid_argument("target dataset must contain both classes");
    if (target.dim() != source.dim)
        throw dimension_mismatch("target data has " + std::to_string(target.dim()) + " features, model expects " +
                                 std::to_string(source.dim));
}

} // namespace detail

ReshapedTree node_adapt_tree(const Tree& source, const Dataset& target, const NodeAdaptParams& params,
                             const ForestConfig& cfg) {
    auto fit = [&](const SplitNode& node, const Dataset& data,
                   std::span<const std::size_t> rows) -> std::optional<SplitParams> {
        const auto projected = detail::project(data, rows, node.params.selector);
        try {
            auto svm = train_adaptive_svm(projected, Hyperplane{node.params.weights, 0.0}, params.c1, params.c2,
                                          cfg.svm);
            return detail::with_best_threshold(node.params.selector, std::move(svm.plane.weights), projected);
        } catch (const degenerate_data&) {
            return std::nullopt;
        }
    };
    return reshape_clone(source, target, cfg, fit);
}

Forest node_adapt(const Forest& source, const Dataset& target, const NodeAdaptParams& params,
                  const ForestConfig& cfg) {
    source.validate();
    cfg.validate();
    detail::check_target(source, target);
    if (!(params.c1 >= 0.0)) throw invalid_argument("C1 must be nonnegative");
    if (!(params.c2 > 0.0)) throw invalid_argument("C2 must be positive");

    Forest out;
    out.dim = source.dim;
    out.config = cfg;
    out.provenance = Provenance::node_adapt;
    out.parameters = {{"C1", params.c1}, {"C2", params.c2}};
    for (std::size_t i = 0; i < source.size(); ++i) {
        out.trees.push_back(node_adapt_tree(source.trees[i], target, params, cfg).tree);
        out.origins.push_back(source.origins[i]);
    }
    return out;
}

} // namespace rfda
