#pragma once

#include "rfda/data.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rfda {

struct Hyperplane {
    std::vector<double> weights;
    double bias = 0.0;

    double score(std::span<const double> x) const;
    friend bool operator==(const Hyperplane&, const Hyperplane&) = default;
};

struct SvmConfig {
    double reg_cost = 1.0;
    double tol = 1e-6;
    std::size_t max_iter = 100000;

    void validate() const;
    friend bool operator==(const SvmConfig&, const SvmConfig&) = default;
};

struct SolverReport {
    // Interior-point iterations.
    std::size_t iterations = 0;
    // Largest of the relative primal residual, dual residual and duality gap
    // at the final iterate.
    double residual = 0.0;
    bool converged = false;
};

struct SvmResult {
    Hyperplane plane;
    SolverReport report;
};

// A sample already mapped through a feature selector (or a path projection).
struct ProjectedSample {
    std::vector<double> x;
    Label y = Label::negative;
};

enum class BiasMode { fit, none };

// Row-compressed matrix. Dense rows store every column; the threshold QP
// stores only the nodes on a path.
class RowMatrix {
public:
    explicit RowMatrix(std::size_t cols) : cols_(cols) { offsets_.push_back(0); }

    void add_dense_row(std::span<const double> row, double scale = 1.0);
    // Duplicate column ids are summed.
    void add_sparse_row(std::span<const std::size_t> ids, std::span<const double> values);

    std::size_t rows() const noexcept { return offsets_.size() - 1; }
    std::size_t cols() const noexcept { return cols_; }

    double dot(std::size_t row, std::span<const double> w) const noexcept;
    void axpy(std::size_t row, double a, std::span<double> w) const noexcept;
    double squared_norm(std::size_t row) const noexcept;
    std::span<const std::size_t> row_ids(std::size_t row) const noexcept;
    std::span<const double> row_values(std::size_t row) const noexcept;

private:
    std::size_t cols_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> ids_;
    std::vector<double> values_;
};

// Solves  min_w  1/2 |w|^2 + cost * sum_i max(0, targets[i] - rows[i] . w)
// with a primal-dual interior-point method. Every solver in this module
// reduces to it. The iteration stops once the relative residuals and the
// relative duality gap drop below tol^2 (floored near machine precision),
// which puts the weights within about tol of the optimum.
SvmResult solve_hinge_targets(const RowMatrix& rows, std::span<const double> targets, double cost,
                              const SvmConfig& cfg);

// min 1/2 |w|^2 + reg_cost * sum hinge(y (w.x + b)). With BiasMode::none the
// bias is pinned to zero.
SvmResult train_linear_svm(std::span<const ProjectedSample> samples, const SvmConfig& cfg,
                           BiasMode bias = BiasMode::fit);

// Adaptive SVM:  min 1/2 |psi - c1 * source|^2 + c2 * sum eps_k
//                s.t. y_k psi . x_k >= 1 - eps_k, eps_k >= 0   (no bias).
// cfg.reg_cost is ignored; c2 plays its role.
SvmResult train_adaptive_svm(std::span<const ProjectedSample> samples, const Hyperplane& source,
                             double c1, double c2, const SvmConfig& cfg);

struct QpPath {
    // Indices into the threshold vector, root first.
    std::vector<std::size_t> node_ids;
    // Source prefix hyperplane, one weight per node on the path.
    Hyperplane plane;
};

struct QpRow {
    std::size_t path = 0;
    // psi_j . phi_j(v_k) for each node on the path (thresholds excluded).
    std::vector<double> fixed_scores;
    Label label = Label::negative;
};

// min 1/2 |B - prior|^2 + penalty * sum eps
// s.t. y (W_p . (fixed + B[path]) + b_p) >= -eps, eps >= 0
struct ThresholdQpProblem {
    std::size_t n_thresholds = 0;
    std::vector<double> prior_thresholds;
    std::vector<QpPath> paths;
    std::vector<QpRow> rows;
    double penalty = 1.0;

    void validate() const;
};

struct QpResult {
    std::vector<double> thresholds;
    SolverReport report;
};

QpResult solve_threshold_qp(const ThresholdQpProblem& problem, double tol = 1e-6,
                            std::size_t max_iter = 100000);

// Value of one constraint, y (W_p . (fixed + B[path]) + b_p), at thresholds B.
double constraint_value(const ThresholdQpProblem& problem, const QpRow& row,
                        std::span<const double> thresholds);

// Debug dump for cross-checking with external solvers.
std::string threshold_qp_to_json(const ThresholdQpProblem& problem);

} // namespace rfda
