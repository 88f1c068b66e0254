#include "rfda/serialize.hpp"

#include "json_io.hpp"
#include "rfda/error.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rfda {

using nlohmann::json;

namespace detail {

json to_json(const SvmConfig& c) { return {{"reg_cost", c.reg_cost}, {"tol", c.tol}, {"max_iter", c.max_iter}}; }

SvmConfig svm_config_from_json(const json& j) {
    SvmConfig c;
    c.reg_cost = j.at("reg_cost").get<double>();
    c.tol = j.at("tol").get<double>();
    c.max_iter = j.at("max_iter").get<std::size_t>();
    return c;
}

json to_json(const ForestConfig& c) {
    return {{"n_trees", c.n_trees},
            {"max_depth", c.max_depth},
            {"min_samples", c.min_samples},
            {"purity_stop", c.purity_stop},
            {"candidates", c.candidates},
            {"block_fraction", c.block_fraction},
            {"svm", to_json(c.svm)},
            {"decision_threshold", c.decision_threshold},
            {"seed", c.seed}};
}

ForestConfig forest_config_from_json(const json& j) {
    ForestConfig c;
    c.n_trees = j.at("n_trees").get<std::size_t>();
    c.max_depth = j.at("max_depth").get<std::size_t>();
    c.min_samples = j.at("min_samples").get<std::size_t>();
    c.purity_stop = j.at("purity_stop").get<double>();
    c.candidates = j.at("candidates").get<std::size_t>();
    c.block_fraction = j.at("block_fraction").get<double>();
    c.svm = svm_config_from_json(j.at("svm"));
    c.decision_threshold = j.at("decision_threshold").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

json to_json(const Hyperplane& h) { return {{"weights", h.weights}, {"bias", h.bias}}; }

Hyperplane hyperplane_from_json(const json& j) {
    return Hyperplane{j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()};
}

json to_json(const Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
        if (const auto* s = std::get_if<SplitNode>(&n)) {
            const auto idx = s->params.selector.indices();
            nodes.push_back({{"split",
                              {{"selector", std::vector<std::size_t>(idx.begin(), idx.end())},
                               {"weights", s->params.weights},
                               {"threshold", s->params.threshold},
                               {"left", s->left},
                               {"right", s->right}}}});
        } else {
            const auto& l = std::get<LeafNode>(n);
            nodes.push_back({{"leaf", {{"posterior", l.posterior_pos}, {"samples", l.sample_count}}}});
        }
    }
    return {{"max_depth", t.max_depth()}, {"nodes", std::move(nodes)}};
}

Tree tree_from_json(const json& j, std::size_t dim) {
    std::vector<TreeNode> nodes;
    for (const auto& n : j.at("nodes")) {
        if (n.contains("split")) {
            const auto& s = n.at("split");
            SplitParams p{FeatureSelector(s.at("selector").get<std::vector<std::size_t>>(), dim),
                          s.at("weights").get<std::vector<double>>(), s.at("threshold").get<double>()};
            nodes.emplace_back(SplitNode{std::move(p), s.at("left").get<NodeId>(), s.at("right").get<NodeId>()});
        } else {
            const auto& l = n.at("leaf");
            nodes.emplace_back(LeafNode{l.at("posterior").get<double>(), l.at("samples").get<std::size_t>()});
        }
    }
    return Tree(std::move(nodes), j.at("max_depth").get<std::size_t>());
}

json trees_to_json(const Forest& f) {
    json trees = json::array();
    for (std::size_t i = 0; i < f.trees.size(); ++i) {
        auto t = to_json(f.trees[i]);
        t["origin"] = std::string(to_string(f.origins[i]));
        trees.push_back(std::move(t));
    }
    return trees;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace detail

std::string forest_to_json(const Forest& forest) {
    forest.validate();
    json j;
    j["format_version"] = forest_format_version;
    j["provenance"] = std::string(to_string(forest.provenance));
    j["dim"] = forest.dim;
    j["parameters"] = forest.parameters;
    j["config"] = detail::to_json(forest.config);
    j["trees"] = detail::trees_to_json(forest);
    return j.dump(1) + "\n";
}

Forest forest_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("malformed model JSON: ") + e.what(), 0);
    }
    try {
        if (j.at("format_version").get<int>() != forest_format_version)
            throw parse_error("unsupported model format_version", 0);
        Forest f;
        f.provenance = parse_provenance(j.at("provenance").get<std::string>());
        f.dim = j.at("dim").get<std::size_t>();
        f.parameters = j.at("parameters").get<std::map<std::string, double>>();
        f.config = detail::forest_config_from_json(j.at("config"));
        for (const auto& t : j.at("trees")) {
            f.trees.push_back(detail::tree_from_json(t, f.dim));
            f.origins.push_back(parse_tree_origin(t.at("origin").get<std::string>()));
        }
        f.validate();
        return f;
    } catch (const json::exception& e) {
        throw parse_error(std::string("invalid model JSON: ") + e.what(), 0);
    }
}

void save_forest(const std::filesystem::path& path, const Forest& forest) {
    write_text_file(path, forest_to_json(forest));
}

Forest load_forest(const std::filesystem::path& path) { return forest_from_json(read_text_file(path)); }

std::string forest_fingerprint(const Forest& forest) {
    json j;
    j["dim"] = forest.dim;
    json trees = json::array();
    for (const auto& t : forest.trees) trees.push_back(detail::to_json(t));
    j["trees"] = std::move(trees);
    return detail::fnv1a_hex(j.dump());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_argument("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_argument("cannot write " + path.string());
    out << text;
    if (!out) throw invalid_argument("failed writing " + path.string());
}

} // namespace rfda
