#include "rfda/optim.hpp"

#include "rfda/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <random>

namespace rfda {

double Hyperplane::score(std::span<const double> x) const {
    if (x.size() != weights.size()) throw dimension_mismatch("hyperplane dimension mismatch");
    return std::inner_product(weights.begin(), weights.end(), x.begin(), bias);
}

void SvmConfig::validate() const {
    if (!(reg_cost > 0.0) || !std::isfinite(reg_cost)) throw invalid_argument("reg_cost must be positive");
    if (!(tol > 0.0)) throw invalid_argument("tol must be positive");
    if (max_iter < 1) throw invalid_argument("max_iter must be at least 1");
}

void RowMatrix::add_dense_row(std::span<const double> row, double scale) {
    if (row.size() != cols_) throw dimension_mismatch("row length does not match matrix width");
    for (std::size_t j = 0; j < row.size(); ++j) {
        ids_.push_back(j);
        values_.push_back(scale * row[j]);
    }
    offsets_.push_back(ids_.size());
}

void RowMatrix::add_sparse_row(std::span<const std::size_t> ids, std::span<const double> values) {
    if (ids.size() != values.size()) throw dimension_mismatch("sparse row ids/values differ in length");
    const auto begin = ids_.size();
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k] >= cols_) throw dimension_mismatch("sparse row column out of range");
        auto it = std::find(ids_.begin() + static_cast<std::ptrdiff_t>(begin), ids_.end(), ids[k]);
        if (it != ids_.end()) {
            values_[static_cast<std::size_t>(it - ids_.begin())] += values[k];
        } else {
            ids_.push_back(ids[k]);
            values_.push_back(values[k]);
        }
    }
    offsets_.push_back(ids_.size());
}

double RowMatrix::dot(std::size_t row, std::span<const double> w) const noexcept {
    double acc = 0.0;
    for (auto k = offsets_[row]; k < offsets_[row + 1]; ++k) acc += values_[k] * w[ids_[k]];
    return acc;
}

void RowMatrix::axpy(std::size_t row, double a, std::span<double> w) const noexcept {
    for (auto k = offsets_[row]; k < offsets_[row + 1]; ++k) w[ids_[k]] += a * values_[k];
}

double RowMatrix::squared_norm(std::size_t row) const noexcept {
    double acc = 0.0;
    for (auto k = offsets_[row]; k < offsets_[row + 1]; ++k) acc += values_[k] * values_[k];
    return acc;
}

std::span<const std::size_t> RowMatrix::row_ids(std::size_t row) const noexcept {
    return {ids_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
}

std::span<const double> RowMatrix::row_values(std::size_t row) const noexcept {
    return {values_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
}

namespace {

// In-place Cholesky of a dense symmetric positive definite matrix (row-major,
// lower triangle used), followed by a solve. Tiny pivots are lifted so that
// nearly singular systems still produce a usable direction.
void cholesky_solve(std::vector<double>& m, std::size_t p, std::vector<double>& rhs) {
    for (std::size_t j = 0; j < p; ++j) {
        double d = m[j * p + j];
        for (std::size_t k = 0; k < j; ++k) d -= m[j * p + k] * m[j * p + k];
        d = std::sqrt(std::max(d, 1e-300));
        m[j * p + j] = d;
        for (std::size_t i = j + 1; i < p; ++i) {
            double v = m[i * p + j];
            for (std::size_t k = 0; k < j; ++k) v -= m[i * p + k] * m[j * p + k];
            m[i * p + j] = v / d;
        }
    }
    for (std::size_t i = 0; i < p; ++i) {
        double v = rhs[i];
        for (std::size_t k = 0; k < i; ++k) v -= m[i * p + k] * rhs[k];
        rhs[i] = v / m[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
        double v = rhs[i];
        for (std::size_t k = i + 1; k < p; ++k) v -= m[k * p + i] * rhs[k];
        rhs[i] = v / m[i * p + i];
    }
}

double inf_norm(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

// Mehrotra predictor-corrector on
//   min 1/2 sum_{j < n_regularized} v_j^2 + cost * sum xi
//   s.t. A v + xi - s = r,  xi, s >= 0,
// with multipliers alpha for the first constraint and beta = cost - alpha for
// xi >= 0. Columns from n_regularized on (the bias) carry no penalty. Each
// iteration solves one p x p system, p = A.cols(), so large sample counts in
// few dimensions stay cheap.
SolverReport interior_point(const RowMatrix& A, std::span<const double> r, double cost, std::size_t n_regularized,
                            double tol, std::size_t max_iter, std::vector<double>& v) {
    const std::size_t n = A.rows();
    const std::size_t p = A.cols();
    v.assign(p, 0.0);
    SolverReport report;
    if (cost == 0.0 || n == 0) {
        report.converged = true;
        return report;
    }

    std::vector<double> s(n, 1.0), xi(n, 1.0), alpha(n, 0.5 * cost), beta(n, 0.5 * cost);
    std::vector<double> av(n), rp(n), rd(p), rd_mag(p), dinv(n), g(n);
    std::vector<double> dv(p), da(n), ds(n), dxi(n);
    std::vector<double> aff_ds(n), aff_da(n), aff_dxi(n);
    std::vector<double> m(p * p);

    // Iterate toward tol^2 (or rounding level); once rounding stalls progress,
    // anything below accept_target still counts as converged.
    const double target = std::max(tol * tol, 1e-14);
    const double accept_target = std::max(tol * tol, 1e-10);
    // Early iterates may raise the residual; only give up on a plateau near
    // the end.
    const double stall_zone = std::max(accept_target, 1e-6);
    std::vector<double> best_v(p, 0.0);
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    const double r_scale = 1.0 + inf_norm(r);
    const double nn = static_cast<double>(2 * n);

    auto residuals = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            av[i] = A.dot(i, v);
            rp[i] = av[i] + xi[i] - s[i] - r[i];
        }
        for (std::size_t j = 0; j < p; ++j) {
            rd[j] = j < n_regularized ? v[j] : 0.0;
            rd_mag[j] = std::abs(rd[j]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto ids = A.row_ids(i);
            const auto vals = A.row_values(i);
            for (std::size_t k = 0; k < ids.size(); ++k) {
                rd[ids[k]] -= alpha[i] * vals[k];
                rd_mag[ids[k]] += std::abs(alpha[i] * vals[k]);
            }
        }
    };

    // Direction for complementarity right-hand sides c1 (s*alpha), c2 (xi*beta).
    auto direction = [&](std::span<const double> c1, std::span<const double> c2) {
        std::vector<double> rhs(p);
        for (std::size_t j = 0; j < p; ++j) rhs[j] = -rd[j];
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = -rp[i] - c2[i] / beta[i] + c1[i] / alpha[i];
            const double gi = g[i] * dinv[i];
            const auto ids = A.row_ids(i);
            const auto vals = A.row_values(i);
            for (std::size_t k = 0; k < ids.size(); ++k) rhs[ids[k]] += vals[k] * gi;
        }
        auto chol = m;
        cholesky_solve(chol, p, rhs);
        dv = rhs;
        for (std::size_t i = 0; i < n; ++i) {
            da[i] = (g[i] - A.dot(i, dv)) * dinv[i];
            ds[i] = (c1[i] - s[i] * da[i]) / alpha[i];
            dxi[i] = (c2[i] + xi[i] * da[i]) / beta[i];
        }
    };

    auto max_step = [&] {
        double t = 1.0;
        auto limit = [&](double x, double dx) {
            if (dx < 0.0) t = std::min(t, -x / dx);
        };
        for (std::size_t i = 0; i < n; ++i) {
            limit(s[i], ds[i]);
            limit(xi[i], dxi[i]);
            limit(alpha[i], da[i]);
            limit(beta[i], -da[i]);
        }
        return t;
    };

    std::vector<double> c1(n), c2(n);
    while (true) {
        residuals();
        double comp = 0.0, primal = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            comp += s[i] * alpha[i] + xi[i] * beta[i];
            primal += cost * xi[i];
        }
        for (std::size_t j = 0; j < n_regularized; ++j) primal += 0.5 * v[j] * v[j];
        const double mu = comp / nn;
        // Residuals relative to the magnitude of the terms they sum.
        report.residual = std::max({inf_norm(rp) / r_scale, inf_norm(rd) / (1.0 + inf_norm(rd_mag)),
                                    comp / (1.0 + std::abs(primal))});
        if (!std::isfinite(report.residual)) break;
        if (report.residual < best) {
            best = report.residual;
            best_v = v;
            since_best = 0;
        } else if (++since_best >= 3 && best <= stall_zone) {
            break;
        }
        if (report.residual <= target || report.iterations >= max_iter) break;
        ++report.iterations;

        for (std::size_t i = 0; i < n; ++i) dinv[i] = 1.0 / (xi[i] / beta[i] + s[i] / alpha[i]);
        std::fill(m.begin(), m.end(), 0.0);
        for (std::size_t j = 0; j < n_regularized; ++j) m[j * p + j] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto ids = A.row_ids(i);
            const auto vals = A.row_values(i);
            for (std::size_t a = 0; a < ids.size(); ++a)
                for (std::size_t b = 0; b <= a; ++b) {
                    const auto hi = std::max(ids[a], ids[b]), lo = std::min(ids[a], ids[b]);
                    m[hi * p + lo] += vals[a] * vals[b] * dinv[i];
                }
        }

        // Predictor.
        for (std::size_t i = 0; i < n; ++i) {
            c1[i] = -s[i] * alpha[i];
            c2[i] = -xi[i] * beta[i];
        }
        direction(c1, c2);
        const double t_aff = max_step();
        double comp_aff = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            comp_aff += (s[i] + t_aff * ds[i]) * (alpha[i] + t_aff * da[i]) +
                        (xi[i] + t_aff * dxi[i]) * (beta[i] - t_aff * da[i]);
        const double sigma = std::pow(std::clamp(comp_aff / comp, 0.0, 1.0), 3.0);
        aff_ds = ds;
        aff_da = da;
        aff_dxi = dxi;

        // Corrector.
        for (std::size_t i = 0; i < n; ++i) {
            c1[i] = sigma * mu - s[i] * alpha[i] - aff_ds[i] * aff_da[i];
            c2[i] = sigma * mu - xi[i] * beta[i] + aff_dxi[i] * aff_da[i];
        }
        direction(c1, c2);
        const double t = std::min(1.0, 0.995 * max_step());
        if (!(t >= 1e-14) || !std::all_of(dv.begin(), dv.end(), [](double x) { return std::isfinite(x); })) break;
        for (std::size_t j = 0; j < p; ++j) v[j] += t * dv[j];
        for (std::size_t i = 0; i < n; ++i) {
            s[i] += t * ds[i];
            xi[i] += t * dxi[i];
            alpha[i] += t * da[i];
            beta[i] -= t * da[i];
        }
    }
    v = best_v;
    report.residual = best;
    report.converged = best <= accept_target;
    return report;
}

// Weights whose largest score contribution is at rounding level: the exact
// optimum is the zero vector.
bool negligible(std::span<const double> w, std::span<const ProjectedSample> samples) {
    double x_max = 0.0;
    for (const auto& s : samples)
        for (double v : s.x) x_max = std::max(x_max, std::abs(v));
    double w_max = 0.0;
    for (double v : w) w_max = std::max(w_max, std::abs(v));
    return w_max * std::max(x_max, 1.0) <= 1e-9;
}

std::size_t check_samples(std::span<const ProjectedSample> samples) {
    if (samples.empty()) throw degenerate_data("no training samples");
    const std::size_t dim = samples.front().x.size();
    if (dim == 0) throw dimension_mismatch("projected samples must have at least one feature");
    bool pos = false;
    bool neg = false;
    for (const auto& s : samples) {
        if (s.x.size() != dim) throw dimension_mismatch("projected samples differ in dimension");
        for (double v : s.x)
            if (!std::isfinite(v)) throw invalid_argument("projected sample is not finite");
        (s.y == Label::positive ? pos : neg) = true;
    }
    if (!pos || !neg) throw degenerate_data("SVM training needs samples of both classes");
    return dim;
}

RowMatrix signed_rows(std::span<const ProjectedSample> samples, std::size_t dim) {
    RowMatrix rows(dim);
    for (const auto& s : samples) rows.add_dense_row(s.x, sign_of(s.y));
    return rows;
}

} // namespace

SvmResult solve_hinge_targets(const RowMatrix& rows, std::span<const double> targets, double cost,
                              const SvmConfig& cfg) {
    if (targets.size() != rows.rows()) throw dimension_mismatch("one margin target per row is required");
    if (!(cost >= 0.0) || !std::isfinite(cost)) throw invalid_argument("cost must be finite and nonnegative");
    SvmResult out;
    out.report = interior_point(rows, targets, cost, rows.cols(), cfg.tol, cfg.max_iter, out.plane.weights);
    return out;
}

SvmResult train_linear_svm(std::span<const ProjectedSample> samples, const SvmConfig& cfg, BiasMode bias) {
    cfg.validate();
    const std::size_t dim = check_samples(samples);

    if (bias == BiasMode::none) {
        const std::vector<double> ones(samples.size(), 1.0);
        auto out = solve_hinge_targets(signed_rows(samples, dim), ones, cfg.reg_cost, cfg);
        if (negligible(out.plane.weights, samples)) throw degenerate_data("SVM produced an all-zero hyperplane");
        return out;
    }

    // The bias is an extra, unpenalised column holding y.
    RowMatrix rows(dim + 1);
    std::vector<double> row(dim + 1);
    for (const auto& s : samples) {
        const double y = sign_of(s.y);
        for (std::size_t j = 0; j < dim; ++j) row[j] = y * s.x[j];
        row[dim] = y;
        rows.add_dense_row(row);
    }
    const std::vector<double> ones(samples.size(), 1.0);
    std::vector<double> v;
    SvmResult out;
    out.report = interior_point(rows, ones, cfg.reg_cost, dim, cfg.tol, cfg.max_iter, v);
    out.plane.bias = v[dim];
    v.pop_back();
    out.plane.weights = std::move(v);
    if (negligible(out.plane.weights, samples)) throw degenerate_data("SVM produced an all-zero hyperplane");
    return out;
}

SvmResult train_adaptive_svm(std::span<const ProjectedSample> samples, const Hyperplane& source, double c1,
                             double c2, const SvmConfig& cfg) {
    cfg.validate();
    const std::size_t dim = check_samples(samples);
    if (source.weights.size() != dim)
        throw dimension_mismatch("source hyperplane has " + std::to_string(source.weights.size()) +
                                 " weights, samples have " + std::to_string(dim) + " features");
    if (!(c1 >= 0.0) || !std::isfinite(c1)) throw invalid_argument("C1 must be finite and nonnegative");
    if (!(c2 > 0.0) || !std::isfinite(c2)) throw invalid_argument("C2 must be positive");

    // Substituting psi' = psi - c1 * source turns the program into a standard
    // bias-free SVM whose margin targets absorb the source scores.
    const RowMatrix rows = signed_rows(samples, dim);
    std::vector<double> targets(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double source_score =
            std::inner_product(source.weights.begin(), source.weights.end(), samples[i].x.begin(), 0.0);
        targets[i] = 1.0 - c1 * sign_of(samples[i].y) * source_score;
    }
    auto out = solve_hinge_targets(rows, targets, c2, cfg);
    for (std::size_t j = 0; j < dim; ++j) out.plane.weights[j] += c1 * source.weights[j];
    out.plane.bias = 0.0;
    if (negligible(out.plane.weights, samples)) throw degenerate_data("adaptive SVM produced an all-zero hyperplane");
    return out;
}

void ThresholdQpProblem::validate() const {
    if (n_thresholds == 0) throw invalid_argument("threshold QP needs at least one variable");
    if (prior_thresholds.size() != n_thresholds)
        throw dimension_mismatch("prior thresholds must have one entry per variable");
    if (!(penalty >= 0.0) || !std::isfinite(penalty)) throw invalid_argument("QP penalty must be finite and >= 0");
    for (double t : prior_thresholds)
        if (!std::isfinite(t)) throw invalid_argument("prior thresholds must be finite");
    for (const auto& p : paths) {
        if (p.node_ids.size() != p.plane.weights.size())
            throw dimension_mismatch("path hyperplane dimension differs from path length");
        for (auto id : p.node_ids)
            if (id >= n_thresholds) throw dimension_mismatch("path node id out of range");
        for (double w : p.plane.weights)
            if (!std::isfinite(w)) throw invalid_argument("path hyperplane is not finite");
        if (!std::isfinite(p.plane.bias)) throw invalid_argument("path hyperplane is not finite");
    }
    for (const auto& r : rows) {
        if (r.path >= paths.size()) throw dimension_mismatch("QP row references a missing path");
        if (r.fixed_scores.size() != paths[r.path].node_ids.size())
            throw dimension_mismatch("fixed scores differ in length from their path");
        for (double s : r.fixed_scores)
            if (!std::isfinite(s)) throw invalid_argument("fixed scores must be finite");
    }
}

double constraint_value(const ThresholdQpProblem& problem, const QpRow& row, std::span<const double> thresholds) {
    const auto& path = problem.paths.at(row.path);
    double acc = path.plane.bias;
    for (std::size_t j = 0; j < path.node_ids.size(); ++j)
        acc += path.plane.weights[j] * (row.fixed_scores[j] + thresholds[path.node_ids[j]]);
    return sign_of(row.label) * acc;
}

QpResult solve_threshold_qp(const ThresholdQpProblem& problem, double tol, std::size_t max_iter) {
    problem.validate();
    const std::size_t n = problem.n_thresholds;

    // Each constraint is affine in B:  a_i . B + c_i >= -eps_i.  With
    // u = B - prior it becomes the hinge term max(0, r_i - a_i . u),
    // r_i = -(c_i + a_i . prior).
    RowMatrix rows(n);
    std::vector<double> targets;
    targets.reserve(problem.rows.size());
    std::vector<double> coeffs;
    for (const auto& r : problem.rows) {
        const auto& path = problem.paths[r.path];
        const double y = sign_of(r.label);
        coeffs.resize(path.node_ids.size());
        double c = path.plane.bias;
        for (std::size_t j = 0; j < path.node_ids.size(); ++j) {
            coeffs[j] = y * path.plane.weights[j];
            c += path.plane.weights[j] * r.fixed_scores[j];
        }
        c *= y;
        rows.add_sparse_row(path.node_ids, coeffs);
        targets.push_back(-(c + rows.dot(rows.rows() - 1, problem.prior_thresholds)));
    }

    SvmConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    auto solved = solve_hinge_targets(rows, targets, problem.penalty, cfg);

    QpResult out;
    out.thresholds = problem.prior_thresholds;
    for (std::size_t j = 0; j < n; ++j) out.thresholds[j] += solved.plane.weights[j];
    out.report = solved.report;
    return out;
}

std::string threshold_qp_to_json(const ThresholdQpProblem& problem) {
    nlohmann::json j;
    j["n_thresholds"] = problem.n_thresholds;
    j["prior_thresholds"] = problem.prior_thresholds;
    j["penalty"] = problem.penalty;
    auto& paths = j["paths"] = nlohmann::json::array();
    for (const auto& p : problem.paths)
        paths.push_back({{"node_ids", p.node_ids}, {"weights", p.plane.weights}, {"bias", p.plane.bias}});
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const auto& r : problem.rows)
        rows.push_back({{"path", r.path}, {"fixed_scores", r.fixed_scores}, {"label", static_cast<int>(r.label)}});
    return j.dump(2);
}

} // namespace rfda
