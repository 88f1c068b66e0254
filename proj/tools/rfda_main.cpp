// rfda: train, adapt, evaluate and benchmark domain-adaptive oblique forests.
//
// Exit codes: 0 success, 1 unexpected failure, 2 input or usage error,
// 3 model compatibility error, 4 solver did not converge.

#include "rfda/bench.hpp"
#include "rfda/config.hpp"
#include "rfda/error.hpp"
#include "rfda/node_adapt.hpp"
#include "rfda/path_adapt.hpp"
#include "rfda/serialize.hpp"
#include "rfda/tree_adapt.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace rfda;

enum exit_code : int { ok = 0, unexpected = 1, input_error = 2, incompatible = 3, not_converged = 4 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void print_summary(const Forest& forest, const Dataset* train) {
    std::size_t min_depth = forest.size() ? forest.trees[0].depth() : 0, max_depth = 0, leaves = 0, from_source = 0;
    double depth_sum = 0.0;
    for (std::size_t i = 0; i < forest.size(); ++i) {
        const auto d = forest.trees[i].depth();
        min_depth = std::min(min_depth, d);
        max_depth = std::max(max_depth, d);
        depth_sum += static_cast<double>(d);
        leaves += forest.trees[i].leaf_count();
        from_source += forest.origins[i] == TreeOrigin::source;
    }
    std::printf("provenance %s, %zu trees (%zu source-tagged), depth min/mean/max %zu/%.2f/%zu, %zu leaves\n",
                std::string(to_string(forest.provenance)).c_str(), forest.size(), from_source, min_depth,
                forest.size() ? depth_sum / static_cast<double>(forest.size()) : 0.0, max_depth, leaves);
    for (const auto& [k, v] : forest.parameters) std::printf("parameter %s = %g\n", k.c_str(), v);
    if (train) {
        std::size_t wrong = 0;
        for (const auto& s : train->samples())
            wrong += classify(forest, s.features, forest.config.decision_threshold) != s.label;
        std::printf("training error %.4f on %zu samples\n",
                    static_cast<double>(wrong) / static_cast<double>(train->size()), train->size());
    }
}

void apply_config_file(const std::string& path, ForestConfig& cfg) {
    auto kv = KeyValueConfig::load(path);
    try {
        read_forest_config(kv, cfg);
        kv.expect_all_consumed();
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what(), e.line());
    }
}

std::string metrics_json(const MetricsReport& m) {
    nlohmann::json j;
    j["avg_miss_rate"] = m.avg_miss_rate;
    j["miss_rates"] = m.miss_rates;
    j["fpr_points"] = fpr_operating_points();
    j["auc"] = m.auc;
    j["error_rate"] = m.error_rate;
    return j.dump(1) + "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Domain-adaptive oblique random forests"};
    app.require_subcommand(1);

    std::string data_path, config_path, out_path, model_path, paths_path, target_path, test_path, json_path, method;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> params, exp_configs;
    std::size_t repeat = 0;

    auto* train = app.add_subcommand("train", "Train a forest on a labelled CSV");
    train->add_option("--data", data_path, "Training CSV")->required();
    train->add_option("--config", config_path, "Forest config (key = value)")->required();
    train->add_option("--out", out_path, "Output model JSON")->required();
    train->add_option("--seed", seed, "Override the config seed");

    auto* exp = app.add_subcommand("export-paths", "Train the per-path SVMs of a source model");
    exp->add_option("--model", model_path, "Source model JSON")->required();
    exp->add_option("--data", data_path, "Source training CSV")->required();
    exp->add_option("--out", out_path, "Output path model JSON")->required();
    exp->add_option("--config", config_path, "Override svm_* settings of the model config");

    auto* adapt = app.add_subcommand("adapt", "Adapt a source model to target samples");
    adapt->add_option("--method", method, "node, path or tree")->required()->check(CLI::IsMember({"node", "path", "tree"}));
    adapt->add_option("--model", model_path, "Source model JSON")->required();
    adapt->add_option("--paths", paths_path, "Path model JSON (path method only)");
    adapt->add_option("--target-data", target_path, "Labelled target CSV")->required();
    adapt->add_option("--params", params, "Hyper-parameters: C1=, C2= (node); C= (path, tree)");
    adapt->add_option("--out", out_path, "Output model JSON")->required();
    adapt->add_option("--config", config_path, "Override forest settings of the source model");
    adapt->add_option("--seed", seed, "Override the seed (tree method)");

    auto* eval = app.add_subcommand("eval", "Evaluate a model on a labelled CSV");
    eval->add_option("--model", model_path, "Model JSON")->required();
    eval->add_option("--test", test_path, "Labelled test CSV")->required();
    eval->add_option("--out", out_path, "Write metrics JSON here");

    auto* bench = app.add_subcommand("bench", "Run benchmark experiments");
    bench->add_option("--exp-config", exp_configs, "Experiment config (repeatable)")->required();
    bench->add_option("--out", out_path, "Report CSV")->required();
    bench->add_option("--json", json_path, "Report JSON (default: CSV path with .json)");

    auto* gen = app.add_subcommand("generate", "Write the synthetic domain CSVs of an experiment");
    gen->add_option("--exp-config", exp_configs, "Experiment config")->required()->expected(1);
    gen->add_option("--repeat", repeat, "Repeat index (domain seed offset)");
    gen->add_option("--out", out_path, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : input_error;
    }

    try {
        if (*train) {
            const auto data = load_csv(data_path);
            ForestConfig cfg;
            apply_config_file(config_path, cfg);
            if (seed) cfg.seed = *seed;
            const auto forest = train_forest(data, cfg);
            save_forest(out_path, forest);
            print_summary(forest, &data);
        } else if (*exp) {
            const auto source = load_forest(model_path);
            auto cfg = source.config;
            if (!config_path.empty()) apply_config_file(config_path, cfg);
            const auto data = load_csv(data_path);
            const auto model = export_path_svms(source, data, cfg.svm);
            save_path_model(out_path, model);
            std::size_t n_paths = 0;
            for (const auto& t : model.trees) n_paths += t.paths.size();
            std::printf("exported %zu paths over %zu trees, fingerprint %s\n", n_paths, model.trees.size(),
                        model.fingerprint.c_str());
        } else if (*adapt) {
            const bool wants_paths = method == "path";
            if (wants_paths && paths_path.empty()) throw usage_error("--method path requires --paths");
            if (!wants_paths && !paths_path.empty()) throw usage_error("--paths is only accepted by --method path");

            const auto source = load_forest(model_path);
            auto cfg = source.config;
            if (!config_path.empty()) apply_config_file(config_path, cfg);
            if (seed) cfg.seed = *seed;
            auto kv = KeyValueConfig::from_assignments(params);
            const auto target = load_csv(target_path);

            Forest adapted;
            if (method == "node") {
                NodeAdaptParams p;
                p.c1 = kv.take_double("C1", p.c1);
                p.c2 = kv.take_double("C2", p.c2);
                kv.expect_all_consumed();
                adapted = node_adapt(source, target, p, cfg);
            } else if (method == "path") {
                const double c = kv.take_double("C", 1.0);
                kv.expect_all_consumed();
                adapted = path_adapt(source, load_path_model(paths_path), target, c, cfg);
            } else {
                const double c = kv.take_double("C", 0.5);
                kv.expect_all_consumed();
                adapted = tree_adapt(source, target, c, cfg);
            }
            save_forest(out_path, adapted);
            print_summary(adapted, nullptr);
        } else if (*eval) {
            const auto forest = load_forest(model_path);
            const auto m = evaluate(forest, load_csv(test_path));
            std::printf("avg_miss_rate %.6f\nauc %.6f\nerror_rate %.6f\n", m.avg_miss_rate, m.auc, m.error_rate);
            if (!out_path.empty()) write_text_file(out_path, metrics_json(m));
        } else if (*bench) {
            std::vector<ExperimentReport> reports;
            bool structure_ok = true;
            for (const auto& path : exp_configs) {
                reports.push_back(run_experiment(load_experiment_config(path)));
                for (const auto& v : reports.back().structure_violations) std::cerr << "structure violation: " << v << '\n';
                structure_ok = structure_ok && reports.back().structure_ok;
            }
            const auto csv = report_csv(reports);
            write_text_file(out_path, csv);
            write_text_file(json_path.empty() ? std::filesystem::path(out_path).replace_extension(".json")
                                              : std::filesystem::path(json_path),
                            report_json(reports));
            std::cout << csv;
            if (!structure_ok) return unexpected;
        } else if (*gen) {
            auto cfg = load_experiment_config(exp_configs.front());
            auto spec = cfg.domain;
            spec.seed += repeat;
            const auto pair = generate_domain_pair(spec);
            const std::filesystem::path dir(out_path);
            std::filesystem::create_directories(dir);
            save_csv(dir / "source.csv", pair.source);
            save_csv(dir / "target_train.csv", pair.target_train);
            save_csv(dir / "target_test.csv", pair.target_test);
            std::printf("wrote %zu/%zu/%zu samples to %s\n", pair.source.size(), pair.target_train.size(),
                        pair.target_test.size(), dir.string().c_str());
        }
        return ok;
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return input_error;
    } catch (const incompatible_model& e) {
        std::cerr << "incompatible model: " << e.what() << '\n';
        return incompatible;
    } catch (const solver_not_converged& e) {
        std::cerr << "solver did not converge: " << e.what() << '\n';
        return not_converged;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return input_error;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << '\n';
        return unexpected;
    }
}
