#pragma once

#include "rfda/config.hpp"
#include "rfda/data.hpp"
#include "rfda/forest.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfda {

// ---------------------------------------------------------------------------
// Synthetic covariate-shift domains

enum class DomainFamily { gaussian_blobs, two_moons, ring };

std::string_view to_string(DomainFamily f) noexcept;
DomainFamily parse_domain_family(std::string_view s);

// Target features are  scale * R(angle) x + translation  where x is drawn from
// the source distribution and R rotates every coordinate pair (0,1), (2,3), ...
struct DomainShift {
    double rotation_deg = 0.0;
    // Empty means zero; a single value is broadcast to every coordinate.
    std::vector<double> translation;
    double scale = 1.0;
};

struct DomainSpec {
    DomainFamily family = DomainFamily::gaussian_blobs;
    std::size_t dim = 10;
    double pos_prior = 0.5;
    double noise = 1.0;
    // gaussian-blobs only: mixture components per class.
    std::size_t clusters = 2;
    std::size_t n_source = 4000;
    std::size_t n_target_train = 4000;
    std::size_t n_target_test = 2000;
    DomainShift shift;
    std::uint64_t seed = 1;

    void validate() const;
};

struct DomainPair {
    Dataset source;
    Dataset target_train;
    Dataset target_test;
};

DomainPair generate_domain_pair(const DomainSpec& spec);

// Applies the target transform of `shift` to a source-space vector.
std::vector<double> apply_shift(const DomainShift& shift, std::span<const double> x);

// ---------------------------------------------------------------------------
// Detection-style metrics

inline constexpr std::size_t n_operating_points = 11;

// 11 log-spaced false-positive-rate targets covering [0.01, 1].
std::array<double, n_operating_points> fpr_operating_points();

struct MetricsReport {
    double avg_miss_rate = 0.0;
    std::array<double, n_operating_points> miss_rates{};
    double auc = 0.0;
    double error_rate = 0.0;
};

// Positive iff score >= threshold. At each FPR target the operating point is
// the threshold with the smallest achievable FPR that is >= the target (the
// lowest miss rate among equal-FPR thresholds). A target that falls strictly
// inside a group of tied scores gets the expected miss rate under a random
// order of that group, i.e. the straight ROC segment across it; a constant
// scorer therefore has miss rate 1 - FPR.
MetricsReport evaluate_scores(std::span<const double> scores, std::span<const Label> labels,
                              double decision_threshold = 0.5);
MetricsReport evaluate(const Forest& forest, const Dataset& test);

// ---------------------------------------------------------------------------
// Experiment protocol

enum class Method { node_adapt, path_adapt, tree_adapt };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view s);

struct AdaptationParams {
    double c1 = 1.0;
    double c2 = 1.0;
    double path_penalty = 1.0;
    double tree_ratio = 0.5;
};

struct ExperimentConfig {
    std::string name = "experiment";
    DomainSpec domain;
    // X of TarX%: percentage of the target training pool used for adaptation.
    double target_percent = 5.0;
    std::vector<Method> methods{Method::node_adapt, Method::path_adapt, Method::tree_adapt};
    ForestConfig forest;
    AdaptationParams adaptation;
    std::size_t n_repeats = 5;

    void validate() const;
};

// Reads the domain, protocol, forest and adaptation keys; see README.
ExperimentConfig read_experiment_config(KeyValueConfig& kv);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ColumnResult {
    std::string name;
    std::vector<MetricsReport> repeats;
    double mean_amr = 0.0;
    double std_amr = 0.0;
};

struct ExperimentReport {
    std::string name;
    double target_percent = 0.0;
    std::vector<ColumnResult> columns;
    // Node/Path-Adapt forests checked against their source on every repeat.
    bool structure_ok = true;
    std::vector<std::string> structure_violations;

    const ColumnResult& column(std::string_view name) const;
};

// Class-stratified sample of round(fraction * n_class) rows per class (at
// least one per present class), returned in increasing row order.
std::vector<std::size_t> stratified_subsample(const Dataset& data, double fraction, std::uint64_t seed);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Rows = experiments; columns Src, Tar100%, TarX%, then the methods run.
// Cells are "mean±std" of the average miss rate in percent.
std::string report_csv(std::span<const ExperimentReport> reports);
// Full per-repeat detail including the 11-point miss-rate curves.
std::string report_json(std::span<const ExperimentReport> reports);

// Structure checks used on every benchmark run.
// Every adapted node sits at a source position; adapted splits keep the
// source selector; adapted paths are never longer than the source's.
bool is_reshaped_version_of(const Tree& adapted, const Tree& source, std::string* why = nullptr);
// Same topology, selectors and weights; only thresholds may differ.
bool differs_only_in_thresholds(const Tree& a, const Tree& b);

} // namespace rfda
