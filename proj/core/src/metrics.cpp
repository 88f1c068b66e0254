#include "rfda/bench.hpp"
#include "rfda/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rfda {

std::array<double, n_operating_points> fpr_operating_points() {
    std::array<double, n_operating_points> out{};
    for (std::size_t i = 0; i < n_operating_points; ++i)
        out[i] = std::pow(10.0, -2.0 + 0.2 * static_cast<double>(i));
    return out;
}

MetricsReport evaluate_scores(std::span<const double> scores, std::span<const Label> labels, double decision_threshold) {
    if (scores.size() != labels.size()) throw invalid_argument("scores and labels differ in length");
    std::size_t n_pos = 0;
    for (auto y : labels) n_pos += y == Label::positive;
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw invalid_argument("evaluation needs test samples of both classes");
    for (double s : scores)
        if (!std::isfinite(s)) throw invalid_argument("scores must be finite");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

    // Operating points as the threshold drops through each distinct score,
    // starting from "nothing positive".
    struct Point {
        double fpr, miss;
    };
    std::vector<Point> curve{{0.0, 1.0}};
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == Label::positive ? tp : fp)++;
        curve.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                         1.0 - static_cast<double>(tp) / static_cast<double>(n_pos)});
    }

    MetricsReport r;
    const auto targets = fpr_operating_points();
    for (std::size_t k = 0; k < n_operating_points; ++k) {
        const double target = targets[k];
        const double slack = 1e-12 * target;
        // FPR is nondecreasing and miss rate nonincreasing along the curve.
        std::size_t j = 0;
        while (curve[j].fpr < target - slack) ++j;
        // A step that adds only negatives keeps the miss rate, so ordering
        // inside it cannot matter; only mixed tie groups are interpolated.
        if (curve[j].fpr <= target + slack || curve[j].miss == curve[j - 1].miss) {
            while (j + 1 < curve.size() && curve[j + 1].fpr == curve[j].fpr) ++j;
            r.miss_rates[k] = curve[j].miss;
        } else {
            // The target falls inside a tie group: its samples are in random
            // order, so the expected miss rate lies on the straight segment.
            const auto& a = curve[j - 1];
            const auto& b = curve[j];
            r.miss_rates[k] = a.miss + (target - a.fpr) / (b.fpr - a.fpr) * (b.miss - a.miss);
        }
    }
    r.avg_miss_rate = std::accumulate(r.miss_rates.begin(), r.miss_rates.end(), 0.0) /
                      static_cast<double>(n_operating_points);

    // Mann-Whitney statistic with ties counted one half.
    double wins = 0.0;
    std::size_t neg_below = 0;
    std::vector<std::size_t> asc(order.rbegin(), order.rend());
    for (std::size_t i = 0; i < asc.size();) {
        const double s = scores[asc[i]];
        std::size_t pos_here = 0, neg_here = 0;
        for (; i < asc.size() && scores[asc[i]] == s; ++i) (labels[asc[i]] == Label::positive ? pos_here : neg_here)++;
        wins += static_cast<double>(pos_here) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(neg_here));
        neg_below += neg_here;
    }
    r.auc = wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));

    std::size_t wrong = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        wrong += (scores[i] >= decision_threshold) != (labels[i] == Label::positive);
    r.error_rate = static_cast<double>(wrong) / static_cast<double>(scores.size());
    return r;
}

MetricsReport evaluate(const Forest& forest, const Dataset& test) {
    if (test.dim() != forest.dim)
        throw dimension_mismatch("test data has " + std::to_string(test.dim()) + " features, model expects " +
                                 std::to_string(forest.dim));
    std::vector<double> scores;
    std::vector<Label> labels;
    scores.reserve(test.size());
    labels.reserve(test.size());
    for (const auto& s : test.samples()) {
        scores.push_back(forest_posterior(forest, s.features));
        labels.push_back(s.label);
    }
    return evaluate_scores(scores, labels, forest.config.decision_threshold);
}

} // namespace rfda
