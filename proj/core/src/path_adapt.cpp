#include "rfda/path_adapt.hpp"

#include "detail.hpp"
#include "json_io.hpp"
#include "rfda/error.hpp"
#include "rfda/serialize.hpp"

#include <map>

namespace rfda {

using nlohmann::json;

std::vector<double> path_projection(const Tree& tree, std::span<const NodeId> path, std::span<const double> v) {
    std::vector<double> out;
    out.reserve(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto id = path[k];
        if (id >= tree.size() || tree.is_leaf(id)) throw invalid_argument("path must consist of split nodes");
        if (k > 0) {
            const auto& parent = tree.split(path[k - 1]);
            if (parent.left != id && parent.right != id) throw invalid_argument("path is not root-descending");
        } else if (id != 0) {
            throw invalid_argument("path must start at the root");
        }
        out.push_back(tree.split(id).params.decision(v));
    }
    return out;
}

namespace {

// decision[id][k]: psi . phi(v_k) + tau of split `id` on sample k (empty for leaves).
std::vector<std::vector<double>> decision_table(const Tree& tree, const Dataset& data, bool with_threshold) {
    std::vector<std::vector<double>> table(tree.size());
    for (NodeId id = 0; id < tree.size(); ++id) {
        if (tree.is_leaf(id)) continue;
        const auto& p = tree.split(id).params;
        auto& col = table[id];
        col.resize(data.size());
        for (std::size_t k = 0; k < data.size(); ++k)
            col[k] = with_threshold ? p.decision(data[k].features) : p.expert_score(data[k].features);
    }
    return table;
}

} // namespace

PathModel export_path_svms(const Forest& source, const Dataset& source_data, const SvmConfig& cfg) {
    source.validate();
    cfg.validate();
    if (source_data.dim() != source.dim)
        throw dimension_mismatch("source data has " + std::to_string(source_data.dim()) +
                                 " features, model expects " + std::to_string(source.dim));
    if (!source_data.has_both_classes()) throw degenerate_data("path SVM export needs source samples of both classes");

    PathModel model;
    model.fingerprint = forest_fingerprint(source);
    for (const auto& tree : source.trees) {
        const auto table = decision_table(tree, source_data, true);
        // A prefix is identified by its last node, so shared prefixes train once.
        std::map<NodeId, Hyperplane> cache;
        TreePathModel tm;
        for (const auto& path : tree.paths()) {
            PathPrefixes pp;
            pp.nodes = path.splits;
            for (std::size_t d = 1; d <= path.splits.size(); ++d) {
                const NodeId last = path.splits[d - 1];
                auto it = cache.find(last);
                if (it == cache.end()) {
                    std::vector<ProjectedSample> projected(source_data.size());
                    for (std::size_t k = 0; k < source_data.size(); ++k) {
                        projected[k].y = source_data[k].label;
                        projected[k].x.resize(d);
                        for (std::size_t j = 0; j < d; ++j) projected[k].x[j] = table[path.splits[j]][k];
                    }
                    Hyperplane plane;
                    try {
                        plane = train_linear_svm(projected, cfg, BiasMode::fit).plane;
                    } catch (const degenerate_data&) {
                        // Constant projections: a zero plane leaves the thresholds free.
                        plane = Hyperplane{std::vector<double>(d, 0.0), 0.0};
                    }
                    it = cache.emplace(last, std::move(plane)).first;
                }
                pp.prefixes.push_back(it->second);
            }
            tm.paths.push_back(std::move(pp));
        }
        model.trees.push_back(std::move(tm));
    }
    return model;
}

ReshapedTree retrain_structure_tree(const Tree& source, const Dataset& target, const ForestConfig& cfg) {
    auto fit = [&](const SplitNode& node, const Dataset& data,
                   std::span<const std::size_t> rows) -> std::optional<SplitParams> {
        const auto projected = detail::project(data, rows, node.params.selector);
        try {
            auto svm = train_linear_svm(projected, cfg.svm, BiasMode::fit);
            return detail::with_best_threshold(node.params.selector, std::move(svm.plane.weights), projected);
        } catch (const degenerate_data&) {
            return std::nullopt;
        }
    };
    return reshape_clone(source, target, cfg, fit);
}

Forest retrain_structure(const Forest& source, const Dataset& target, const ForestConfig& cfg) {
    source.validate();
    cfg.validate();
    detail::check_target(source, target);
    Forest out;
    out.dim = source.dim;
    out.config = cfg;
    out.provenance = Provenance::target;
    for (std::size_t i = 0; i < source.size(); ++i) {
        out.trees.push_back(retrain_structure_tree(source.trees[i], target, cfg).tree);
        out.origins.push_back(source.origins[i]);
    }
    return out;
}

PathAdaptTrace path_adapt_tree(const Tree& source, const TreePathModel& paths, const Dataset& target, double penalty,
                               const ForestConfig& cfg) {
    auto retrained = retrain_structure_tree(source, target, cfg);
    const Tree& tilde = retrained.tree;

    // Source prefix SVMs indexed by the last node of the prefix.
    std::map<NodeId, std::pair<const PathPrefixes*, std::size_t>> prefix_of;
    for (const auto& p : paths.paths)
        for (std::size_t d = 1; d <= p.nodes.size(); ++d) {
            if (p.prefixes.size() != p.nodes.size()) throw incompatible_model("path model prefix count mismatch");
            prefix_of.emplace(p.nodes[d - 1], std::make_pair(&p, d));
        }

    std::vector<NodeId> variables;
    std::vector<std::size_t> var_of(tilde.size(), 0);
    for (NodeId id = 0; id < tilde.size(); ++id)
        if (!tilde.is_leaf(id)) {
            var_of[id] = variables.size();
            variables.push_back(id);
        }

    if (variables.empty()) {
        auto adapted = reshape_clone(tilde, target, cfg, [](const SplitNode& s, const Dataset&, auto) {
                           return std::optional<SplitParams>(s.params);
                       }).tree;
        // Copy before `retrained` is moved from; tilde refers into it.
        Tree unchanged = tilde;
        return {std::move(retrained), {}, {}, {}, std::move(unchanged), std::move(adapted)};
    }

    ThresholdQpProblem problem;
    problem.n_thresholds = variables.size();
    problem.penalty = penalty;
    for (auto id : variables) problem.prior_thresholds.push_back(tilde.split(id).params.threshold);

    const auto scores = decision_table(tilde, target, false);
    for (const auto& path : tilde.paths()) {
        const auto d = path.splits.size();
        if (d == 0) continue;
        std::vector<NodeId> source_path(d);
        for (std::size_t j = 0; j < d; ++j) source_path[j] = retrained.source_ids[path.splits[j]];

        const auto it = prefix_of.find(source_path.back());
        if (it == prefix_of.end()) throw incompatible_model("path model has no prefix for a retrained path");
        const auto& [entry, length] = it->second;
        if (length != d || !std::equal(source_path.begin(), source_path.end(), entry->nodes.begin()))
            throw incompatible_model("path model prefix does not follow the source topology");
        const Hyperplane& plane = entry->prefixes[d - 1];
        if (plane.weights.size() != d) throw incompatible_model("prefix SVM dimension differs from its length");

        QpPath qp_path;
        for (auto id : path.splits) qp_path.node_ids.push_back(var_of[id]);
        qp_path.plane = plane;
        const std::size_t path_index = problem.paths.size();
        problem.paths.push_back(std::move(qp_path));

        for (std::size_t k = 0; k < target.size(); ++k) {
            QpRow row;
            row.path = path_index;
            row.label = target[k].label;
            row.fixed_scores.resize(d);
            for (std::size_t j = 0; j < d; ++j) row.fixed_scores[j] = scores[path.splits[j]][k];
            problem.rows.push_back(std::move(row));
        }
    }

    auto solution = solve_threshold_qp(problem, cfg.svm.tol, cfg.svm.max_iter);
    Tree thresholds_adapted = tilde.with_thresholds(variables, solution.thresholds);
    auto adapted = reshape_clone(thresholds_adapted, target, cfg, [](const SplitNode& s, const Dataset&, auto) {
                       return std::optional<SplitParams>(s.params);
                   }).tree;
    return {std::move(retrained),       std::move(variables),       std::move(problem),
            std::move(solution),        std::move(thresholds_adapted), std::move(adapted)};
}

Forest path_adapt(const Forest& source, const PathModel& paths, const Dataset& target, double penalty,
                  const ForestConfig& cfg, std::vector<PathAdaptTrace>* traces) {
    source.validate();
    cfg.validate();
    detail::check_target(source, target);
    if (!(penalty >= 0.0)) throw invalid_argument("path penalty C must be nonnegative");
    if (paths.fingerprint != forest_fingerprint(source))
        throw incompatible_model("path model fingerprint " + paths.fingerprint + " does not match the source forest");
    if (paths.trees.size() != source.size()) throw incompatible_model("path model tree count mismatch");

    Forest out;
    out.dim = source.dim;
    out.config = cfg;
    out.provenance = Provenance::path_adapt;
    out.parameters = {{"C", penalty}};
    for (std::size_t i = 0; i < source.size(); ++i) {
        auto trace = path_adapt_tree(source.trees[i], paths.trees[i], target, penalty, cfg);
        if (!trace.variables.empty() && !trace.solution.report.converged)
            throw solver_not_converged("threshold QP of tree " + std::to_string(i) + " stopped after " +
                                       std::to_string(trace.solution.report.iterations) + " epochs");
        out.trees.push_back(trace.adapted);
        out.origins.push_back(source.origins[i]);
        if (traces) traces->push_back(std::move(trace));
    }
    return out;
}

std::string path_model_to_json(const PathModel& model) {
    json trees = json::object();
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        json paths = json::object();
        for (std::size_t p = 0; p < model.trees[t].paths.size(); ++p) {
            const auto& pp = model.trees[t].paths[p];
            json prefixes = json::object();
            for (std::size_t d = 1; d <= pp.prefixes.size(); ++d)
                prefixes[std::to_string(d)] = detail::to_json(pp.prefixes[d - 1]);
            paths[std::to_string(p)] = {{"nodes", pp.nodes}, {"prefixes", std::move(prefixes)}};
        }
        trees[std::to_string(t)] = std::move(paths);
    }
    json j;
    j["format_version"] = 1;
    j["fingerprint"] = model.fingerprint;
    j["n_trees"] = model.trees.size();
    j["trees"] = std::move(trees);
    return j.dump(1) + "\n";
}

PathModel path_model_from_json(std::string_view text) {
    try {
        const auto j = json::parse(text);
        if (j.at("format_version").get<int>() != 1) throw parse_error("unsupported path model format_version", 0);
        PathModel model;
        model.fingerprint = j.at("fingerprint").get<std::string>();
        const auto n_trees = j.at("n_trees").get<std::size_t>();
        const auto& trees = j.at("trees");
        for (std::size_t t = 0; t < n_trees; ++t) {
            const auto& paths = trees.at(std::to_string(t));
            TreePathModel tm;
            for (std::size_t p = 0; p < paths.size(); ++p) {
                const auto& jp = paths.at(std::to_string(p));
                PathPrefixes pp;
                pp.nodes = jp.at("nodes").get<std::vector<NodeId>>();
                const auto& prefixes = jp.at("prefixes");
                for (std::size_t d = 1; d <= pp.nodes.size(); ++d) {
                    auto plane = detail::hyperplane_from_json(prefixes.at(std::to_string(d)));
                    if (plane.weights.size() != d) throw parse_error("prefix SVM dimension differs from its length", 0);
                    pp.prefixes.push_back(std::move(plane));
                }
                tm.paths.push_back(std::move(pp));
            }
            model.trees.push_back(std::move(tm));
        }
        return model;
    } catch (const json::exception& e) {
        throw parse_error(std::string("invalid path model JSON: ") + e.what(), 0);
    }
}

void save_path_model(const std::filesystem::path& path, const PathModel& model) {
    write_text_file(path, path_model_to_json(model));
}

PathModel load_path_model(const std::filesystem::path& path) { return path_model_from_json(read_text_file(path)); }

} // namespace rfda
