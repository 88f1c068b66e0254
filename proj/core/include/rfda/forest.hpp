#pragma once

#include "rfda/data.hpp"
#include "rfda/optim.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rfda {

using NodeId = std::size_t;

// theta = (phi, psi, tau): the node routes v left iff psi . phi(v) + tau >= 0.
struct SplitParams {
    FeatureSelector selector;
    std::vector<double> weights;
    double threshold = 0.0;

    // psi . phi(v), the expert score before the threshold is added.
    double expert_score(std::span<const double> v) const { return selected_dot(selector, weights, v); }
    double decision(std::span<const double> v) const { return expert_score(v) + threshold; }
    bool goes_left(std::span<const double> v) const { return decision(v) >= 0.0; }

    friend bool operator==(const SplitParams&, const SplitParams&) = default;
};

struct SplitNode {
    SplitParams params;
    NodeId left = 0;
    NodeId right = 0;

    friend bool operator==(const SplitNode&, const SplitNode&) = default;
};

struct LeafNode {
    double posterior_pos = 0.5;
    std::size_t sample_count = 0;

    friend bool operator==(const LeafNode&, const LeafNode&) = default;
};

using TreeNode = std::variant<SplitNode, LeafNode>;

// Split node ids from the root down to (excluding) the final leaf.
struct TreePath {
    std::vector<NodeId> splits;
    NodeId leaf = 0;
};

// Arena-allocated binary tree; node 0 is the root. The constructor checks
// that every node is reachable exactly once and that no root-to-leaf path
// holds more than max_depth nodes.
class Tree {
public:
    Tree(std::vector<TreeNode> nodes, std::size_t max_depth);

    static Tree single_leaf(LeafNode leaf, std::size_t max_depth);

    std::span<const TreeNode> nodes() const noexcept { return nodes_; }
    const TreeNode& node(NodeId id) const { return nodes_.at(id); }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t max_depth() const noexcept { return max_depth_; }

    bool is_leaf(NodeId id) const { return std::holds_alternative<LeafNode>(nodes_.at(id)); }
    const SplitNode& split(NodeId id) const { return std::get<SplitNode>(nodes_.at(id)); }
    const LeafNode& leaf(NodeId id) const { return std::get<LeafNode>(nodes_.at(id)); }

    // Longest root-to-leaf path, counted in nodes (a lone leaf has depth 1).
    std::size_t depth() const;
    std::size_t leaf_count() const;
    std::size_t split_count() const { return size() - leaf_count(); }

    // Root-to-leaf paths in left-first depth-first order.
    std::vector<TreePath> paths() const;

    NodeId route(std::span<const double> v) const;
    double posterior(std::span<const double> v) const;

    // Copy with the thresholds of the given split nodes replaced.
    Tree with_thresholds(std::span<const NodeId> split_ids, std::span<const double> thresholds) const;

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    std::vector<TreeNode> nodes_;
    std::size_t max_depth_;
};

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 7;
    std::size_t min_samples = 8;
    double purity_stop = 0.99;
    // Candidate selectors drawn per split node.
    std::size_t candidates = 50;
    double block_fraction = 0.3;
    SvmConfig svm;
    double decision_threshold = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
    friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

enum class Provenance { source, node_adapt, path_adapt, tree_adapt, target };
enum class TreeOrigin { source, target };

std::string_view to_string(Provenance p) noexcept;
std::string_view to_string(TreeOrigin o) noexcept;
Provenance parse_provenance(std::string_view s);
TreeOrigin parse_tree_origin(std::string_view s);

struct Forest {
    std::vector<Tree> trees;
    std::vector<TreeOrigin> origins;
    ForestConfig config;
    Provenance provenance = Provenance::source;
    // Adaptation hyper-parameters (C1, C2, C, ...) recorded with the model.
    std::map<std::string, double> parameters;
    // Feature dimension the forest was trained on.
    std::size_t dim = 0;

    std::size_t size() const noexcept { return trees.size(); }
    void validate() const;
};

// Shannon entropy (bits) of a two-class count; 0 for empty or pure sets.
double class_entropy(std::size_t pos, std::size_t neg);
double class_entropy(ClassCounts c);

double information_gain(ClassCounts parent, ClassCounts left, ClassCounts right);

struct ThresholdChoice {
    double threshold = 0.0;
    double gain = 0.0;
    ClassCounts left;
    ClassCounts right;
};

// Exhaustive search over midpoints between consecutive distinct scores plus
// one candidate below the minimum. Samples with score + threshold >= 0 go left.
// Ties: larger gain, then more balanced split, then smaller threshold.
ThresholdChoice best_threshold(std::span<const double> scores, std::span<const Label> labels);

// Laplace-smoothed positive fraction (pos + 1) / (n + 2).
double leaf_posterior(ClassCounts c);

// True when a node holding `c` at `level` (root = 1) must become a leaf.
bool is_leaf_condition(ClassCounts c, std::size_t level, const ForestConfig& cfg);

// Returns nullopt when no candidate expert can be trained (single-class or
// too-small input, or every SVM fails); the caller then makes a leaf.
std::optional<SplitParams> train_node(const Dataset& data, std::span<const std::size_t> rows,
                                      const ForestConfig& cfg, std::uint64_t seed);
std::optional<SplitParams> train_node(const Dataset& data, const ForestConfig& cfg, std::uint64_t seed);

Tree grow_tree(const Dataset& data, const ForestConfig& cfg, std::uint64_t seed);
Tree grow_tree(const Dataset& data, std::span<const std::size_t> rows, const ForestConfig& cfg,
               std::uint64_t seed);

// Tree i is grown with seed cfg.seed + i; every tree sees every sample.
Forest train_forest(const Dataset& data, const ForestConfig& cfg);

double tree_posterior(const Tree& tree, std::span<const double> v);
double forest_posterior(const Forest& forest, std::span<const double> v);
Label classify(const Forest& forest, std::span<const double> v, double decision_threshold);

// Rebuilds `source` top-down on `data`, keeping its topology and selectors.
// At every source split the fit callback proposes new parameters for the
// samples reaching it; the node collapses to a leaf when a leaf condition
// holds, the callback returns nullopt, or the proposed split leaves one side
// empty. Source leaves stay leaves. Leaf posteriors come from `data`.
struct ReshapedTree {
    Tree tree;
    // source_ids[k] is the source node that node k of `tree` was cloned from.
    std::vector<NodeId> source_ids;
};

using ExpertFit = std::function<std::optional<SplitParams>(const SplitNode& source, const Dataset& data,
                                                           std::span<const std::size_t> rows)>;

ReshapedTree reshape_clone(const Tree& source, const Dataset& data, const ForestConfig& cfg, const ExpertFit& fit);

} // namespace rfda
