#include "rfda/forest.hpp"

#include "detail.hpp"
#include "rfda/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rfda {

namespace {

constexpr double gain_tie_eps = 1e-12;

} // namespace

Tree::Tree(std::vector<TreeNode> nodes, std::size_t max_depth) : nodes_(std::move(nodes)), max_depth_(max_depth) {
    if (nodes_.empty()) throw invalid_argument("tree needs at least one node");
    if (max_depth_ == 0) throw invalid_argument("tree depth bound must be positive");

    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::pair<NodeId, std::size_t>> stack{{0, 1}};
    std::size_t visited = 0;
    while (!stack.empty()) {
        const auto [id, level] = stack.back();
        stack.pop_back();
        if (id >= nodes_.size()) throw invalid_argument("tree child id out of range");
        if (seen[id]) throw invalid_argument("tree node reachable twice (cycle or shared child)");
        seen[id] = true;
        ++visited;
        if (level > max_depth_) throw invalid_argument("tree path exceeds its depth bound");
        if (const auto* s = std::get_if<SplitNode>(&nodes_[id])) {
            if (s->left == s->right) throw invalid_argument("split children must differ");
            if (s->params.weights.size() != s->params.selector.size())
                throw dimension_mismatch("split weights do not match selector size");
            if (!std::isfinite(s->params.threshold) ||
                !std::all_of(s->params.weights.begin(), s->params.weights.end(),
                             [](double w) { return std::isfinite(w); }))
                throw invalid_argument("split parameters must be finite");
            stack.emplace_back(s->right, level + 1);
            stack.emplace_back(s->left, level + 1);
        } else {
            const auto& leaf = std::get<LeafNode>(nodes_[id]);
            if (!(leaf.posterior_pos >= 0.0 && leaf.posterior_pos <= 1.0))
                throw invalid_argument("leaf posterior outside [0, 1]");
        }
    }
    if (visited != nodes_.size()) throw invalid_argument("tree has unreachable nodes");
}

Tree Tree::single_leaf(LeafNode leaf, std::size_t max_depth) { return Tree({leaf}, max_depth); }

std::size_t Tree::depth() const {
    std::size_t best = 0;
    for (const auto& p : paths()) best = std::max(best, p.splits.size() + 1);
    return best;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return std::holds_alternative<LeafNode>(n); }));
}

std::vector<TreePath> Tree::paths() const {
    std::vector<TreePath> out;
    std::vector<NodeId> prefix;
    auto walk = [&](auto&& self, NodeId id) -> void {
        if (is_leaf(id)) {
            out.push_back({prefix, id});
            return;
        }
        const auto& s = split(id);
        prefix.push_back(id);
        self(self, s.left);
        self(self, s.right);
        prefix.pop_back();
    };
    walk(walk, 0);
    return out;
}

NodeId Tree::route(std::span<const double> v) const {
    NodeId id = 0;
    while (const auto* s = std::get_if<SplitNode>(&nodes_[id])) id = s->params.goes_left(v) ? s->left : s->right;
    return id;
}

double Tree::posterior(std::span<const double> v) const { return leaf(route(v)).posterior_pos; }

Tree Tree::with_thresholds(std::span<const NodeId> split_ids, std::span<const double> thresholds) const {
    if (split_ids.size() != thresholds.size()) throw dimension_mismatch("one threshold per split id is required");
    Tree out = *this;
    for (std::size_t k = 0; k < split_ids.size(); ++k) {
        auto* s = std::get_if<SplitNode>(&out.nodes_.at(split_ids[k]));
        if (s == nullptr) throw invalid_argument("threshold update targets a leaf");
        if (!std::isfinite(thresholds[k])) throw invalid_argument("thresholds must be finite");
        s->params.threshold = thresholds[k];
    }
    return out;
}

void ForestConfig::validate() const {
    if (n_trees < 1) throw invalid_argument("n_trees must be positive");
    if (max_depth < 1) throw invalid_argument("max_depth must be positive");
    if (min_samples < 1) throw invalid_argument("min_samples must be positive");
    if (!(purity_stop > 0.5 && purity_stop <= 1.0)) throw invalid_argument("purity_stop must lie in (0.5, 1]");
    if (candidates < 1) throw invalid_argument("candidates must be positive");
    if (!(block_fraction > 0.0 && block_fraction <= 1.0)) throw invalid_argument("block_fraction must lie in (0, 1]");
    if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0))
        throw invalid_argument("decision_threshold must lie in [0, 1]");
    svm.validate();
}

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
    case Provenance::source: return "source";
    case Provenance::node_adapt: return "node-adapt";
    case Provenance::path_adapt: return "path-adapt";
    case Provenance::tree_adapt: return "tree-adapt";
    case Provenance::target: return "target";
    }
    return "source";
}

std::string_view to_string(TreeOrigin o) noexcept { return o == TreeOrigin::source ? "source" : "target"; }

Provenance parse_provenance(std::string_view s) {
    for (auto p : {Provenance::source, Provenance::node_adapt, Provenance::path_adapt, Provenance::tree_adapt,
                   Provenance::target})
        if (to_string(p) == s) return p;
    throw invalid_argument("unknown provenance '" + std::string(s) + "'");
}

TreeOrigin parse_tree_origin(std::string_view s) {
    if (s == "source") return TreeOrigin::source;
    if (s == "target") return TreeOrigin::target;
    throw invalid_argument("unknown tree origin '" + std::string(s) + "'");
}

void Forest::validate() const {
    if (trees.empty()) throw invalid_argument("forest needs at least one tree");
    if (origins.size() != trees.size()) throw invalid_argument("forest needs one origin tag per tree");
    if (dim == 0) throw invalid_argument("forest dimension must be positive");
    for (const auto& t : trees)
        for (const auto& n : t.nodes())
            if (const auto* s = std::get_if<SplitNode>(&n); s && s->params.selector.max_index() >= dim)
                throw dimension_mismatch("split selector exceeds forest dimension");
}

double class_entropy(std::size_t pos, std::size_t neg) {
    const double n = static_cast<double>(pos + neg);
    if (pos == 0 || neg == 0) return 0.0;
    const double p = static_cast<double>(pos) / n;
    const double q = static_cast<double>(neg) / n;
    return -(p * std::log2(p) + q * std::log2(q));
}

double class_entropy(ClassCounts c) { return class_entropy(c.pos, c.neg); }

double information_gain(ClassCounts parent, ClassCounts left, ClassCounts right) {
    if (left.pos + right.pos != parent.pos || left.neg + right.neg != parent.neg)
        throw invalid_argument("child counts do not sum to the parent counts");
    const double n = static_cast<double>(parent.total());
    if (n == 0.0) return 0.0;
    const double wl = static_cast<double>(left.total()) / n;
    const double wr = static_cast<double>(right.total()) / n;
    // Same value as H(S) - (wl H(l) + wr H(r)) since wl + wr = 1; this form is
    // exactly zero when both children keep the parent's proportions.
    const double hp = class_entropy(parent);
    const double gain = wl * (hp - class_entropy(left)) + wr * (hp - class_entropy(right));
    return std::max(0.0, gain);
}

ThresholdChoice best_threshold(std::span<const double> scores, std::span<const Label> labels) {
    if (scores.size() != labels.size()) throw dimension_mismatch("scores and labels differ in length");
    if (scores.empty()) throw invalid_argument("best_threshold needs at least one score");

    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

    ClassCounts total;
    for (auto y : labels) total.add(y);

    // Below-min candidate: every sample goes left.
    ThresholdChoice best;
    best.threshold = 1.0 - scores[order.front()];
    best.gain = 0.0;
    best.left = total;
    auto imbalance = [](const ThresholdChoice& c) {
        const auto l = c.left.total(), r = c.right.total();
        return l > r ? l - r : r - l;
    };

    ClassCounts right;  // samples strictly below the cut
    for (std::size_t i = 0; i + 1 < n; ++i) {
        right.add(labels[order[i]]);
        const double lo = scores[order[i]];
        const double hi = scores[order[i + 1]];
        if (!(lo < hi)) continue;
        double mid = 0.5 * (lo + hi);
        if (!(mid > lo)) mid = hi;

        ThresholdChoice cand;
        cand.threshold = -mid + 0.0;
        cand.right = right;
        cand.left = {total.pos - right.pos, total.neg - right.neg};
        cand.gain = information_gain(total, cand.left, cand.right);

        bool take = false;
        if (cand.gain > best.gain + gain_tie_eps) {
            take = true;
        } else if (cand.gain >= best.gain - gain_tie_eps) {
            const auto ci = imbalance(cand), bi = imbalance(best);
            take = ci < bi || (ci == bi && cand.threshold < best.threshold);
        }
        if (take) best = cand;
    }
    return best;
}

double leaf_posterior(ClassCounts c) {
    return (static_cast<double>(c.pos) + 1.0) / (static_cast<double>(c.total()) + 2.0);
}

bool is_leaf_condition(ClassCounts c, std::size_t level, const ForestConfig& cfg) {
    if (level >= cfg.max_depth) return true;
    if (c.total() < cfg.min_samples) return true;
    const double majority = static_cast<double>(std::max(c.pos, c.neg)) / static_cast<double>(c.total());
    return majority >= cfg.purity_stop;
}

std::optional<SplitParams> train_node(const Dataset& data, std::span<const std::size_t> rows,
                                      const ForestConfig& cfg, std::uint64_t seed) {
    const auto counts = detail::counts_of(data, rows);
    if (counts.pos == 0 || counts.neg == 0 || counts.total() < cfg.min_samples) return std::nullopt;

    const auto selectors = sample_selectors(data.dim(), cfg.candidates, cfg.block_fraction, seed);

    std::optional<SplitParams> best;
    double best_gain = -1.0;
    for (const auto& selector : selectors) {
        const auto projected = detail::project(data, rows, selector);
        SvmResult svm;
        try {
            svm = train_linear_svm(projected, cfg.svm, BiasMode::fit);
        } catch (const degenerate_data&) {
            continue;
        }
        // The bias is dropped: the threshold search takes its role.
        double gain = 0.0;
        auto params = detail::with_best_threshold(selector, std::move(svm.plane.weights), projected, &gain);
        if (gain > best_gain) {
            best_gain = gain;
            best = std::move(params);
        }
    }
    return best;
}

std::optional<SplitParams> train_node(const Dataset& data, const ForestConfig& cfg, std::uint64_t seed) {
    const auto rows = detail::all_rows(data);
    return train_node(data, rows, cfg, seed);
}

namespace {

struct TreeBuilder {
    const Dataset& data;
    const ForestConfig& cfg;
    std::vector<TreeNode> nodes;
    std::vector<NodeId> source_ids;

    NodeId make_leaf(std::span<const std::size_t> rows, NodeId source_id) {
        const auto c = detail::counts_of(data, rows);
        nodes.emplace_back(LeafNode{leaf_posterior(c), c.total()});
        source_ids.push_back(source_id);
        return nodes.size() - 1;
    }

    // Partitions rows by the split; false when one side would be empty.
    bool partition(const SplitParams& params, std::span<const std::size_t> rows, std::vector<std::size_t>& left,
                   std::vector<std::size_t>& right) const {
        left.clear();
        right.clear();
        for (auto r : rows) (params.goes_left(data[r].features) ? left : right).push_back(r);
        return !left.empty() && !right.empty();
    }

    template <typename Propose>
    NodeId build(std::span<const std::size_t> rows, std::size_t level, NodeId source_id, Propose&& propose) {
        const auto c = detail::counts_of(data, rows);
        if (c.total() == 0 || is_leaf_condition(c, level, cfg)) return make_leaf(rows, source_id);
        auto params = propose(rows, source_id);
        if (!params) return make_leaf(rows, source_id);

        std::vector<std::size_t> left_rows, right_rows;
        if (!partition(params->params, rows, left_rows, right_rows)) return make_leaf(rows, source_id);

        const NodeId self = nodes.size();
        nodes.emplace_back(LeafNode{});
        source_ids.push_back(source_id);
        const NodeId left = build(left_rows, level + 1, params->left, propose);
        const NodeId right = build(right_rows, level + 1, params->right, propose);
        nodes[self] = SplitNode{std::move(params->params), left, right};
        return self;
    }
};

} // namespace

Tree grow_tree(const Dataset& data, std::span<const std::size_t> rows, const ForestConfig& cfg, std::uint64_t seed) {
    if (rows.empty()) throw invalid_argument("cannot grow a tree on an empty dataset");
    cfg.validate();
    TreeBuilder builder{data, cfg, {}, {}};
    // Node seeds follow the preorder creation index, so they depend only on
    // the tree seed and the shape grown so far.
    std::uint64_t next_node = 0;
    auto propose = [&](std::span<const std::size_t> node_rows, NodeId) -> std::optional<SplitNode> {
        auto params = train_node(data, node_rows, cfg, mix_seed(seed, next_node++));
        if (!params) return std::nullopt;
        return SplitNode{std::move(*params), 0, 0};
    };
    builder.build(rows, 1, 0, propose);
    return Tree(std::move(builder.nodes), cfg.max_depth);
}

Tree grow_tree(const Dataset& data, const ForestConfig& cfg, std::uint64_t seed) {
    const auto rows = detail::all_rows(data);
    return grow_tree(data, rows, cfg, seed);
}

Forest train_forest(const Dataset& data, const ForestConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw invalid_argument("cannot train a forest on an empty dataset");
    if (!data.has_both_classes()) throw invalid_argument("forest training needs samples of both classes");
    Forest forest;
    forest.config = cfg;
    forest.dim = data.dim();
    forest.provenance = Provenance::source;
    const auto rows = detail::all_rows(data);
    forest.trees.reserve(cfg.n_trees);
    for (std::size_t i = 0; i < cfg.n_trees; ++i) {
        forest.trees.push_back(grow_tree(data, rows, cfg, cfg.seed + i));
        forest.origins.push_back(TreeOrigin::source);
    }
    return forest;
}

double tree_posterior(const Tree& tree, std::span<const double> v) { return tree.posterior(v); }

double forest_posterior(const Forest& forest, std::span<const double> v) {
    if (v.size() != forest.dim)
        throw dimension_mismatch("sample has " + std::to_string(v.size()) + " features, forest expects " +
                                 std::to_string(forest.dim));
    if (forest.trees.empty()) throw invalid_argument("forest has no trees");
    double sum = 0.0;
    for (const auto& t : forest.trees) sum += t.posterior(v);
    return sum / static_cast<double>(forest.trees.size());
}

Label classify(const Forest& forest, std::span<const double> v, double decision_threshold) {
    return forest_posterior(forest, v) >= decision_threshold ? Label::positive : Label::negative;
}

ReshapedTree reshape_clone(const Tree& source, const Dataset& data, const ForestConfig& cfg, const ExpertFit& fit) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (rows.empty()) throw invalid_argument("reshaping needs at least one sample");

    // Leaf conditions use the source depth bound as the hard limit.
    ForestConfig limits = cfg;
    limits.max_depth = std::min(cfg.max_depth, source.max_depth());

    TreeBuilder builder{data, limits, {}, {}};
    auto propose = [&](std::span<const std::size_t> node_rows, NodeId source_id) -> std::optional<SplitNode> {
        if (source.is_leaf(source_id)) return std::nullopt;
        const auto& s = source.split(source_id);
        auto params = fit(s, data, node_rows);
        if (!params) return std::nullopt;
        return SplitNode{std::move(*params), s.left, s.right};
    };
    builder.build(rows, 1, 0, propose);
    return {Tree(std::move(builder.nodes), source.max_depth()), std::move(builder.source_ids)};
}

} // namespace rfda

namespace rfda::detail {

ClassCounts counts_of(const Dataset& data, std::span<const std::size_t> rows) {
    ClassCounts c;
    for (auto r : rows) c.add(data[r].label);
    return c;
}

std::vector<std::size_t> all_rows(const Dataset& data) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

std::vector<ProjectedSample> project(const Dataset& data, std::span<const std::size_t> rows,
                                     const FeatureSelector& selector) {
    std::vector<ProjectedSample> out(rows.size());
    const auto idx = selector.indices();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& s = data[rows[k]];
        out[k].x.resize(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) out[k].x[j] = s.features[idx[j]];
        out[k].y = s.label;
    }
    return out;
}

SplitParams with_best_threshold(const FeatureSelector& selector, std::vector<double> weights,
                                std::span<const ProjectedSample> projected, double* gain) {
    std::vector<double> scores(projected.size());
    std::vector<Label> labels(projected.size());
    for (std::size_t k = 0; k < projected.size(); ++k) {
        scores[k] = std::inner_product(weights.begin(), weights.end(), projected[k].x.begin(), 0.0);
        labels[k] = projected[k].y;
    }
    const auto choice = best_threshold(scores, labels);
    if (gain != nullptr) *gain = choice.gain;
    return SplitParams{selector, std::move(weights), choice.threshold};
}

} // namespace rfda::detail
