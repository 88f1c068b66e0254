#include "rfda/bench.hpp"
#include "rfda/error.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace rfda;

namespace {

// Brute force over every threshold: smallest FPR at or above the target, then
// the lowest miss rate at that FPR.
double brute_miss_rate(const std::vector<double>& scores, const std::vector<Label>& labels, double target) {
    std::vector<double> thresholds = scores;
    thresholds.push_back(std::numeric_limits<double>::infinity());
    double n_pos = 0, n_neg = 0;
    for (auto y : labels) (y == Label::positive ? n_pos : n_neg) += 1;
    double best_fpr = 2.0, best_miss = 2.0;
    for (double t : thresholds) {
        double fp = 0, missed = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (labels[i] == Label::negative && scores[i] >= t) fp += 1;
            if (labels[i] == Label::positive && scores[i] < t) missed += 1;
        }
        const double fpr = fp / n_neg, miss = missed / n_pos;
        if (fpr < target * (1 - 1e-12)) continue;
        if (fpr < best_fpr || (fpr == best_fpr && miss < best_miss)) {
            best_fpr = fpr;
            best_miss = miss;
        }
    }
    return best_miss;
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[i] != Label::positive || labels[j] != Label::negative) continue;
            pairs += 1;
            wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
        }
    return wins / pairs;
}

constexpr auto P = Label::positive;
constexpr auto N = Label::negative;

} // namespace

TEST(FprOperatingPoints, LogSpacedOverUnitRange) {
    const auto pts = fpr_operating_points();
    EXPECT_DOUBLE_EQ(pts.front(), 0.01);
    EXPECT_DOUBLE_EQ(pts.back(), 1.0);
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_NEAR(pts[i] / pts[i - 1], std::pow(10.0, 0.2), 1e-12);
}

TEST(EvaluateScores, HandComputedExample) {
    const std::vector<double> s{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05};
    const std::vector<Label> y{P, P, N, P, N, N, P, N, P, N};
    const auto r = evaluate_scores(s, y);
    for (std::size_t k = 0; k <= 8; ++k) EXPECT_DOUBLE_EQ(r.miss_rates[k], 0.4) << k;
    EXPECT_DOUBLE_EQ(r.miss_rates[9], 0.0);
    EXPECT_DOUBLE_EQ(r.miss_rates[10], 0.0);
    EXPECT_DOUBLE_EQ(r.avg_miss_rate, 3.6 / 11.0);
    EXPECT_DOUBLE_EQ(r.auc, 17.0 / 25.0);
    EXPECT_DOUBLE_EQ(r.error_rate, 0.4);
}

TEST(EvaluateScores, PerfectScorer) {
    const std::vector<double> s{0.9, 0.8, 0.7, 0.3, 0.2};
    const std::vector<Label> y{P, P, P, N, N};
    const auto r = evaluate_scores(s, y);
    EXPECT_EQ(r.avg_miss_rate, 0.0);
    EXPECT_EQ(r.auc, 1.0);
    EXPECT_EQ(r.error_rate, 0.0);
}

TEST(EvaluateScores, ConstantScorerFollowsTheDiagonal) {
    const std::vector<double> s(40, 0.5);
    std::vector<Label> y(40, N);
    for (std::size_t i = 0; i < 10; ++i) y[i] = P;
    const auto r = evaluate_scores(s, y);
    const auto pts = fpr_operating_points();
    double expected = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        EXPECT_NEAR(r.miss_rates[k], 1.0 - pts[k], 1e-12);
        expected += (1.0 - pts[k]) / 11.0;
    }
    EXPECT_NEAR(r.avg_miss_rate, expected, 1e-12);
    EXPECT_DOUBLE_EQ(r.auc, 0.5);
}

TEST(EvaluateScores, DistinctScoresMatchBruteForce) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> n_dist(4, 300);
    const auto pts = fpr_operating_points();
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = n_dist(rng);
        std::vector<double> s(n);
        std::vector<Label> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = i == 0 ? P : i == 1 ? N : u(rng) < 0.4 ? P : N;
            s[i] = u(rng) + (y[i] == P ? 0.3 : 0.0);
        }
        const auto r = evaluate_scores(s, y);
        for (std::size_t k = 0; k < pts.size(); ++k)
            ASSERT_NEAR(r.miss_rates[k], brute_miss_rate(s, y, pts[k]), 1e-12) << trial << " " << k;
        ASSERT_NEAR(r.auc, pairwise_auc(s, y), 1e-12);
    }
}

TEST(EvaluateScores, TiedScoresStayOrderedAndBounded) {
    std::mt19937_64 rng(78);
    std::uniform_int_distribution<int> level(0, 5);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> s(60);
        std::vector<Label> y(60);
        for (std::size_t i = 0; i < s.size(); ++i) {
            y[i] = i == 0 ? P : i == 1 ? N : coin(rng) ? P : N;
            s[i] = level(rng) / 5.0;
        }
        const auto r = evaluate_scores(s, y);
        for (std::size_t k = 0; k < r.miss_rates.size(); ++k) {
            ASSERT_GE(r.miss_rates[k], 0.0);
            ASSERT_LE(r.miss_rates[k], 1.0);
            if (k > 0) ASSERT_LE(r.miss_rates[k], r.miss_rates[k - 1] + 1e-15);
        }
        ASSERT_NEAR(r.auc, pairwise_auc(s, y), 1e-12);
    }
}

TEST(EvaluateScores, RejectsBadInput) {
    EXPECT_THROW(evaluate_scores(std::vector<double>{0.1, 0.2}, std::vector<Label>{P}), invalid_argument);
    EXPECT_THROW(evaluate_scores(std::vector<double>{0.1, 0.2}, std::vector<Label>{P, P}), invalid_argument);
    EXPECT_THROW(evaluate_scores(std::vector<double>{0.1, std::nan("")}, std::vector<Label>{P, N}), invalid_argument);
}

TEST(Evaluate, UsesForestPosteriors) {
    const auto train = fixtures::gaussian_classes(200, 4, 0.8, 5);
    const auto test = fixtures::gaussian_classes(100, 4, 0.8, 6);
    const auto f = train_forest(train, fixtures::small_forest_config(3, 3));
    std::vector<double> s;
    std::vector<Label> y;
    for (const auto& x : test.samples()) {
        s.push_back(forest_posterior(f, x.features));
        y.push_back(x.label);
    }
    const auto a = evaluate(f, test);
    const auto b = evaluate_scores(s, y, f.config.decision_threshold);
    EXPECT_EQ(a.miss_rates, b.miss_rates);
    EXPECT_EQ(a.auc, b.auc);
    EXPECT_THROW(evaluate(f, fixtures::gaussian_classes(10, 3, 0.8, 6)), dimension_mismatch);
}
