#pragma once

#include "rfda/data.hpp"
#include "rfda/forest.hpp"
#include "rfda/optim.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfda {

// Source hyperplanes for one root-to-leaf path. prefixes[d-1] was trained on
// the first d components of the path projection, so it has d weights.
struct PathPrefixes {
    std::vector<NodeId> nodes;
    std::vector<Hyperplane> prefixes;
};

struct TreePathModel {
    std::vector<PathPrefixes> paths;
};

// Compact stand-in for the source data: the source topology plus the
// per-prefix path SVMs. Paired with its forest through the fingerprint.
struct PathModel {
    std::string fingerprint;
    std::vector<TreePathModel> trees;
};

// Projection of v onto a path: component j is psi_j . phi_j(v) + tau_j of the
// j-th split on the path.
std::vector<double> path_projection(const Tree& tree, std::span<const NodeId> path, std::span<const double> v);

// Source-side export: one standard SVM (with bias) per path prefix, trained on
// the prefix projections of every source sample.
PathModel export_path_svms(const Forest& source, const Dataset& source_data, const SvmConfig& cfg);

// Clone of the source topology and selectors with each expert retrained by a
// standard SVM on the target samples reaching it and reshaped by the leaf
// rules. Involves no randomness.
ReshapedTree retrain_structure_tree(const Tree& source, const Dataset& target, const ForestConfig& cfg);
Forest retrain_structure(const Forest& source, const Dataset& target, const ForestConfig& cfg);

// Everything computed while adapting one tree; exposed for inspection.
struct PathAdaptTrace {
    ReshapedTree retrained;
    // Split node ids of retrained.tree, in QP variable order.
    std::vector<NodeId> variables;
    ThresholdQpProblem problem;
    QpResult solution;
    // retrained.tree with the QP thresholds written in, before reshaping.
    Tree thresholds_adapted;
    Tree adapted;
};

PathAdaptTrace path_adapt_tree(const Tree& source, const TreePathModel& paths, const Dataset& target,
                               double penalty, const ForestConfig& cfg);

// Throws incompatible_model when the path model was exported from another
// forest, solver_not_converged when a threshold QP hits its iteration cap.
// When `traces` is given it receives one trace per tree.
Forest path_adapt(const Forest& source, const PathModel& paths, const Dataset& target, double penalty,
                  const ForestConfig& cfg, std::vector<PathAdaptTrace>* traces = nullptr);

// JSON keyed tree index -> path index -> {nodes, prefixes: prefix length -> {weights, bias}}.
std::string path_model_to_json(const PathModel& model);
PathModel path_model_from_json(std::string_view text);
void save_path_model(const std::filesystem::path& path, const PathModel& model);
PathModel load_path_model(const std::filesystem::path& path);

} // namespace rfda
