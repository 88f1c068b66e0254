#include "rfda/bench.hpp"
#include "rfda/error.hpp"
#include "rfda/node_adapt.hpp"
#include "rfda/path_adapt.hpp"
#include "rfda/tree_adapt.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace rfda {

std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::node_adapt: return "node";
    case Method::path_adapt: return "path";
    case Method::tree_adapt: return "tree";
    }
    return "node";
}

Method parse_method(std::string_view s) {
    for (auto m : {Method::node_adapt, Method::path_adapt, Method::tree_adapt})
        if (to_string(m) == s) return m;
    throw invalid_argument("unknown adaptation method '" + std::string(s) + "'");
}

namespace {

std::string_view column_name(Method m) {
    switch (m) {
    case Method::node_adapt: return "Node-Adapt";
    case Method::path_adapt: return "Path-Adapt";
    case Method::tree_adapt: return "Tree-Adapt";
    }
    return "";
}

constexpr std::size_t max_subsample_attempts = 10;

} // namespace

void ExperimentConfig::validate() const {
    domain.validate();
    forest.validate();
    if (!(target_percent > 0.0 && target_percent <= 100.0)) throw invalid_argument("target_percent must lie in (0, 100]");
    if (n_repeats < 1) throw invalid_argument("n_repeats must be at least 1");
    for (std::size_t i = 0; i < methods.size(); ++i)
        if (std::find(methods.begin(), methods.begin() + static_cast<std::ptrdiff_t>(i), methods[i]) !=
            methods.begin() + static_cast<std::ptrdiff_t>(i))
            throw invalid_argument("method listed twice");
    if (!(adaptation.c1 >= 0.0)) throw invalid_argument("c1 must be nonnegative");
    if (!(adaptation.c2 > 0.0)) throw invalid_argument("c2 must be positive");
    if (!(adaptation.path_penalty >= 0.0)) throw invalid_argument("path_c must be nonnegative");
    if (!(adaptation.tree_ratio > 0.0 && adaptation.tree_ratio <= 1.0)) throw invalid_argument("tree_c must lie in (0, 1]");
}

ExperimentConfig read_experiment_config(KeyValueConfig& kv) {
    ExperimentConfig cfg;
    cfg.name = kv.take_string("name", cfg.name);
    auto& d = cfg.domain;
    if (auto family = kv.take("family")) d.family = parse_domain_family(*family);
    d.dim = kv.take_size("dim", d.dim);
    d.pos_prior = kv.take_double("pos_prior", d.pos_prior);
    d.noise = kv.take_double("noise", d.noise);
    d.clusters = kv.take_size("clusters", d.clusters);
    d.n_source = kv.take_size("n_source", d.n_source);
    d.n_target_train = kv.take_size("n_target_train", d.n_target_train);
    d.n_target_test = kv.take_size("n_target_test", d.n_target_test);
    d.shift.rotation_deg = kv.take_double("rotation_deg", d.shift.rotation_deg);
    d.shift.translation = kv.take_doubles("translation", d.shift.translation);
    d.shift.scale = kv.take_double("scale", d.shift.scale);
    d.seed = kv.take_u64("domain_seed", d.seed);

    cfg.target_percent = kv.take_double("target_percent", cfg.target_percent);
    cfg.n_repeats = kv.take_size("n_repeats", cfg.n_repeats);
    if (auto methods = kv.take("methods")) {
        cfg.methods.clear();
        std::string item;
        std::istringstream in(*methods);
        while (std::getline(in, item, ',')) {
            const auto b = item.find_first_not_of(" \t");
            if (b == std::string::npos) continue;
            item = item.substr(b, item.find_last_not_of(" \t") - b + 1);
            if (item != "none") cfg.methods.push_back(parse_method(item));
        }
    }
    cfg.adaptation.c1 = kv.take_double("c1", cfg.adaptation.c1);
    cfg.adaptation.c2 = kv.take_double("c2", cfg.adaptation.c2);
    cfg.adaptation.path_penalty = kv.take_double("path_c", cfg.adaptation.path_penalty);
    cfg.adaptation.tree_ratio = kv.take_double("tree_c", cfg.adaptation.tree_ratio);

    read_forest_config(kv, cfg.forest);
    kv.expect_all_consumed();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    auto kv = KeyValueConfig::load(path);
    try {
        return read_experiment_config(kv);
    } catch (const parse_error& e) {
        throw parse_error(path.string() + ": " + e.what(), e.line());
    }
}

const ColumnResult& ExperimentReport::column(std::string_view name) const {
    for (const auto& c : columns)
        if (c.name == name) return c;
    throw invalid_argument("report has no column '" + std::string(name) + "'");
}

std::vector<std::size_t> stratified_subsample(const Dataset& data, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw invalid_argument("subsample fraction must lie in (0, 1]");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label == Label::positive].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> out;
    for (auto& rows : by_class) {
        if (rows.empty()) continue;
        const auto want = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size()))), 1, rows.size());
        for (std::size_t k = 0; k < want; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, rows.size() - 1);
            std::swap(rows[k], rows[pick(rng)]);
        }
        out.insert(out.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(want));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_reshaped_version_of(const Tree& adapted, const Tree& source, std::string* why) {
    auto fail = [&](std::string msg) {
        if (why) *why = std::move(msg);
        return false;
    };
    if (adapted.max_depth() > source.max_depth()) return fail("adapted depth bound exceeds the source's");
    std::vector<std::pair<NodeId, NodeId>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [a, s] = stack.back();
        stack.pop_back();
        if (adapted.is_leaf(a)) continue;
        if (source.is_leaf(s))
            return fail("adapted node " + std::to_string(a) + " splits where the source has leaf " + std::to_string(s));
        const auto& as = adapted.split(a);
        const auto& ss = source.split(s);
        if (!(as.params.selector == ss.params.selector))
            return fail("adapted node " + std::to_string(a) + " changed the selector of source node " +
                        std::to_string(s));
        stack.emplace_back(as.right, ss.right);
        stack.emplace_back(as.left, ss.left);
    }
    return true;
}

bool differs_only_in_thresholds(const Tree& a, const Tree& b) {
    if (a.size() != b.size() || a.max_depth() != b.max_depth()) return false;
    for (NodeId id = 0; id < a.size(); ++id) {
        if (a.is_leaf(id) != b.is_leaf(id)) return false;
        if (a.is_leaf(id)) {
            if (a.leaf(id).posterior_pos != b.leaf(id).posterior_pos ||
                a.leaf(id).sample_count != b.leaf(id).sample_count)
                return false;
            continue;
        }
        const auto& x = a.split(id);
        const auto& y = b.split(id);
        if (x.left != y.left || x.right != y.right || !(x.params.selector == y.params.selector) ||
            x.params.weights != y.params.weights)
            return false;
    }
    return true;
}

namespace {

void check_reshaped(const Forest& adapted, const Forest& source, std::string_view label, std::size_t repeat,
                    ExperimentReport& report) {
    for (std::size_t t = 0; t < adapted.size(); ++t) {
        std::string why;
        if (!is_reshaped_version_of(adapted.trees[t], source.trees[t], &why)) {
            report.structure_ok = false;
            report.structure_violations.push_back(std::string(label) + " repeat " + std::to_string(repeat) +
                                                  " tree " + std::to_string(t) + ": " + why);
        }
    }
}

void summarise(ColumnResult& c) {
    const double n = static_cast<double>(c.repeats.size());
    double sum = 0.0;
    for (const auto& r : c.repeats) sum += r.avg_miss_rate;
    c.mean_amr = sum / n;
    double ss = 0.0;
    for (const auto& r : c.repeats) ss += (r.avg_miss_rate - c.mean_amr) * (r.avg_miss_rate - c.mean_amr);
    c.std_amr = c.repeats.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport report;
    report.name = cfg.name;
    report.target_percent = cfg.target_percent;
    for (std::string_view name : {"Src", "Tar100%", "TarX%"}) report.columns.push_back({std::string(name), {}, 0, 0});
    for (auto m : cfg.methods) report.columns.push_back({std::string(column_name(m)), {}, 0, 0});

    for (std::size_t r = 0; r < cfg.n_repeats; ++r) {
        auto spec = cfg.domain;
        spec.seed = cfg.domain.seed + r;
        const auto pair = generate_domain_pair(spec);

        std::vector<std::size_t> rows;
        for (std::size_t attempt = 0;; ++attempt) {
            if (attempt == max_subsample_attempts)
                throw degenerate_data("target subsample lost a class in every attempt");
            rows = stratified_subsample(pair.target_train, cfg.target_percent / 100.0, mix_seed(spec.seed, 0x7375'6273'6d70ULL + attempt));
            if (pair.target_train.subset(rows).has_both_classes()) break;
        }
        const auto small_target = pair.target_train.subset(rows);

        auto fcfg = cfg.forest;
        fcfg.seed = cfg.forest.seed + r * 1000;
        const auto src = train_forest(pair.source, fcfg);
        std::size_t col = 0;
        report.columns[col++].repeats.push_back(evaluate(src, pair.target_test));
        report.columns[col++].repeats.push_back(evaluate(train_forest(pair.target_train, fcfg), pair.target_test));
        report.columns[col++].repeats.push_back(evaluate(train_forest(small_target, fcfg), pair.target_test));

        for (auto m : cfg.methods) {
            Forest adapted;
            switch (m) {
            case Method::node_adapt:
                adapted = node_adapt(src, small_target, {cfg.adaptation.c1, cfg.adaptation.c2}, fcfg);
                check_reshaped(adapted, src, "Node-Adapt", r, report);
                break;
            case Method::path_adapt: {
                const auto paths = export_path_svms(src, pair.source, fcfg.svm);
                std::vector<PathAdaptTrace> traces;
                adapted = path_adapt(src, paths, small_target, cfg.adaptation.path_penalty, fcfg, &traces);
                check_reshaped(adapted, src, "Path-Adapt", r, report);
                for (std::size_t t = 0; t < traces.size(); ++t)
                    if (!differs_only_in_thresholds(traces[t].thresholds_adapted, traces[t].retrained.tree)) {
                        report.structure_ok = false;
                        report.structure_violations.push_back("Path-Adapt repeat " + std::to_string(r) + " tree " +
                                                              std::to_string(t) +
                                                              ": threshold QP changed more than thresholds");
                    }
                break;
            }
            case Method::tree_adapt:
                adapted = tree_adapt(src, small_target, cfg.adaptation.tree_ratio, fcfg);
                break;
            }
            report.columns[col++].repeats.push_back(evaluate(adapted, pair.target_test));
        }
    }
    for (auto& c : report.columns) summarise(c);
    return report;
}

namespace {

std::string percent_cell(const ColumnResult& c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f±%.2f", 100.0 * c.mean_amr, 100.0 * c.std_amr);
    return buf;
}

} // namespace

std::string report_csv(std::span<const ExperimentReport> reports) {
    std::vector<std::string> header{"Src", "Tar100%", "TarX%"};
    for (auto m : {Method::node_adapt, Method::path_adapt, Method::tree_adapt}) {
        const auto name = std::string(column_name(m));
        for (const auto& rep : reports)
            if (std::any_of(rep.columns.begin(), rep.columns.end(), [&](const auto& c) { return c.name == name; })) {
                header.push_back(name);
                break;
            }
    }
    std::ostringstream out;
    out << "experiment";
    for (const auto& h : header) out << ',' << h;
    out << '\n';
    for (const auto& rep : reports) {
        out << rep.name;
        for (const auto& h : header) {
            out << ',';
            for (const auto& c : rep.columns)
                if (c.name == h) out << percent_cell(c);
        }
        out << '\n';
    }
    return out.str();
}

std::string report_json(std::span<const ExperimentReport> reports) {
    using nlohmann::json;
    json experiments = json::array();
    for (const auto& rep : reports) {
        json columns = json::array();
        for (const auto& c : rep.columns) {
            json repeats = json::array();
            for (const auto& m : c.repeats)
                repeats.push_back({{"avg_miss_rate", m.avg_miss_rate},
                                   {"miss_rates", m.miss_rates},
                                   {"auc", m.auc},
                                   {"error_rate", m.error_rate}});
            columns.push_back(
                {{"name", c.name}, {"mean_amr", c.mean_amr}, {"std_amr", c.std_amr}, {"repeats", std::move(repeats)}});
        }
        experiments.push_back({{"name", rep.name},
                               {"target_percent", rep.target_percent},
                               {"structure_ok", rep.structure_ok},
                               {"structure_violations", rep.structure_violations},
                               {"columns", std::move(columns)}});
    }
    json j;
    j["fpr_points"] = fpr_operating_points();
    j["experiments"] = std::move(experiments);
    return j.dump(1) + "\n";
}

} // namespace rfda
