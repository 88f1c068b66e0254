#include "oracles/oracles.hpp"
#include "rfda/error.hpp"
#include "rfda/forest.hpp"
#include "rfda/serialize.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace rfda;

namespace {

// Four clusters in an XOR layout with unequal weights, so a linear expert has
// a usable direction at the root.
Dataset unbalanced_xor(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.2);
    std::discrete_distribution<int> which({0.4, 0.1, 0.25, 0.25});
    const double cx[] = {1, -1, 1, -1};
    const double cy[] = {1, -1, -1, 1};
    Dataset d(2);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = which(rng);
        d.add({{cx[c] + g(rng), cy[c] + g(rng)}, c < 2 ? Label::positive : Label::negative});
    }
    return d;
}

// Walks the node arena directly instead of calling Tree::route.
double manual_posterior(const Tree& t, std::span<const double> v) {
    NodeId id = 0;
    while (true) {
        const auto& node = t.node(id);
        if (const auto* leaf = std::get_if<LeafNode>(&node)) return leaf->posterior_pos;
        const auto& s = std::get<SplitNode>(node);
        double score = s.params.threshold;
        for (std::size_t j = 0; j < s.params.weights.size(); ++j)
            score += s.params.weights[j] * v[s.params.selector.indices()[j]];
        id = score >= 0.0 ? s.left : s.right;
    }
}

double training_accuracy(const Forest& f, const Dataset& d) {
    std::size_t ok = 0;
    for (const auto& s : d.samples()) ok += classify(f, s.features, 0.5) == s.label;
    return static_cast<double>(ok) / static_cast<double>(d.size());
}

} // namespace

TEST(ClassEntropy, KnownValues) {
    EXPECT_DOUBLE_EQ(class_entropy(4, 4), 1.0);
    EXPECT_DOUBLE_EQ(class_entropy(8, 0), 0.0);
    EXPECT_DOUBLE_EQ(class_entropy(0, 0), 0.0);
    EXPECT_NEAR(class_entropy(3, 1), 0.811278, 1e-6);
}

TEST(InformationGain, KnownValues) {
    EXPECT_DOUBLE_EQ(information_gain({4, 4}, {4, 0}, {0, 4}), 1.0);
    EXPECT_NEAR(information_gain({4, 4}, {2, 2}, {2, 2}), 0.0, 1e-15);
    EXPECT_NEAR(information_gain({5, 3}, {4, 0}, {1, 3}), 0.548795, 1e-6);
    EXPECT_NEAR(information_gain({5, 3}, {5, 3}, {0, 0}), 0.0, 1e-15);
}

TEST(InformationGain, CountMismatchThrows) {
    EXPECT_THROW(information_gain({4, 4}, {4, 0}, {0, 3}), invalid_argument);
}

TEST(InformationGain, NonNegativeAndMatchesDirectFormula) {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<std::size_t> c(0, 60);
    for (int trial = 0; trial < 5000; ++trial) {
        const ClassCounts parent{c(rng), c(rng)};
        const ClassCounts left{std::uniform_int_distribution<std::size_t>(0, parent.pos)(rng),
                               std::uniform_int_distribution<std::size_t>(0, parent.neg)(rng)};
        const ClassCounts right{parent.pos - left.pos, parent.neg - left.neg};
        const double g = information_gain(parent, left, right);
        ASSERT_GE(g, 0.0);
        const double ref = oracle::gain(static_cast<double>(parent.pos), static_cast<double>(parent.neg),
                                        static_cast<double>(left.pos), static_cast<double>(left.neg));
        ASSERT_NEAR(g, std::max(0.0, ref), 1e-12);
    }
}

TEST(BestThreshold, PerfectSeparation) {
    const std::vector<double> scores{-1.0, 1.0};
    const std::vector<Label> labels{Label::negative, Label::positive};
    const auto c = best_threshold(scores, labels);
    EXPECT_EQ(c.threshold, 0.0);
    EXPECT_DOUBLE_EQ(c.gain, 1.0);
    EXPECT_EQ(c.left, (ClassCounts{1, 0}));
}

TEST(BestThreshold, EqualScoresSendEverythingOneWay) {
    const std::vector<double> scores(6, 0.25);
    const std::vector<Label> labels{Label::negative, Label::positive, Label::negative,
                                    Label::positive, Label::positive, Label::negative};
    const auto c = best_threshold(scores, labels);
    EXPECT_EQ(c.gain, 0.0);
    EXPECT_EQ(c.left.total() == 0 || c.right.total() == 0, true);
    for (double s : scores) EXPECT_GE(s + c.threshold, 0.0);
}

TEST(BestThreshold, MatchesExhaustiveSearch) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::size_t> n_dist(1, 40);
    std::uniform_int_distribution<int> grid(-6, 6);
    std::normal_distribution<double> g(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = n_dist(rng);
        std::vector<double> scores(n);
        std::vector<Label> labels(n);
        // Half the instances use a coarse grid to force tied scores.
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = trial % 2 == 0 ? 0.5 * grid(rng) : g(rng);
            labels[i] = coin(rng) ? Label::positive : Label::negative;
        }
        const auto mine = best_threshold(scores, labels);
        const auto ref = oracle::exhaustive_threshold(scores, labels);
        ASSERT_NEAR(mine.gain, ref.gain, 1e-12) << "trial " << trial;
        ASSERT_EQ(mine.threshold, ref.threshold) << "trial " << trial;
    }
}

TEST(BestThreshold, InputChecks) {
    const std::vector<double> scores{1.0};
    const std::vector<Label> labels{};
    EXPECT_THROW(best_threshold(scores, labels), dimension_mismatch);
    EXPECT_THROW(best_threshold({}, {}), invalid_argument);
}

TEST(LeafRules, PosteriorAndConditions) {
    EXPECT_DOUBLE_EQ(leaf_posterior({3, 1}), 4.0 / 6.0);
    EXPECT_DOUBLE_EQ(leaf_posterior({0, 0}), 0.5);
    ForestConfig cfg;
    cfg.max_depth = 3;
    cfg.min_samples = 4;
    cfg.purity_stop = 0.9;
    EXPECT_TRUE(is_leaf_condition({5, 5}, 3, cfg));
    EXPECT_FALSE(is_leaf_condition({5, 5}, 2, cfg));
    EXPECT_TRUE(is_leaf_condition({2, 1}, 1, cfg));
    EXPECT_TRUE(is_leaf_condition({9, 1}, 1, cfg));
    EXPECT_FALSE(is_leaf_condition({8, 2}, 1, cfg));
}

TEST(TrainNode, SeparableFullSelectorPurifies) {
    const auto d = fixtures::gaussian_classes(60, 3, 3.0, 5);
    ForestConfig cfg = fixtures::small_forest_config();
    cfg.candidates = 1;
    cfg.block_fraction = 1.0;
    const auto p = train_node(d, cfg, 9);
    ASSERT_TRUE(p.has_value());
    std::vector<double> scores;
    std::vector<Label> labels;
    for (const auto& s : d.samples()) {
        scores.push_back(p->expert_score(s.features));
        labels.push_back(s.label);
    }
    EXPECT_NEAR(best_threshold(scores, labels).gain, class_entropy(d.counts()), 1e-12);
    ClassCounts left, right;
    for (const auto& s : d.samples()) (p->goes_left(s.features) ? left : right).add(s.label);
    EXPECT_NEAR(information_gain(d.counts(), left, right), class_entropy(d.counts()), 1e-12);
}

TEST(TrainNode, DeterministicAndDegenerateSignals) {
    const auto d = fixtures::gaussian_classes(80, 6, 0.7, 6);
    const auto cfg = fixtures::small_forest_config();
    EXPECT_EQ(train_node(d, cfg, 3), train_node(d, cfg, 3));

    Dataset pure(2);
    for (int i = 0; i < 10; ++i) pure.add({{double(i), 1.0}, Label::positive});
    EXPECT_FALSE(train_node(pure, cfg, 1).has_value());

    Dataset tiny(2);
    tiny.add({{0.0, 0.0}, Label::positive});
    tiny.add({{1.0, 1.0}, Label::negative});
    EXPECT_FALSE(train_node(tiny, cfg, 1).has_value());
}

TEST(GrowTree, DepthOneIsSingleLeaf) {
    const auto d = fixtures::gaussian_classes(30, 2, 1.0, 7);
    auto cfg = fixtures::small_forest_config();
    cfg.max_depth = 1;
    const auto t = grow_tree(d, cfg, 1);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_DOUBLE_EQ(t.leaf(0).posterior_pos, (15.0 + 1.0) / (30.0 + 2.0));
}

TEST(GrowTree, PureInputIsSingleLeaf) {
    Dataset d(2);
    for (int i = 0; i < 9; ++i) d.add({{double(i), -double(i)}, Label::positive});
    const auto t = grow_tree(d, fixtures::small_forest_config(), 1);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_DOUBLE_EQ(t.leaf(0).posterior_pos, 10.0 / 11.0);
}

TEST(GrowTree, ObliqueSplitsSolveXorInTwoLevels) {
    const auto d = unbalanced_xor(400, 8);
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.max_depth = 3;
    cfg.min_samples = 2;
    cfg.candidates = 1;
    cfg.block_fraction = 1.0;
    const auto f = train_forest(d, cfg);
    EXPECT_LE(f.trees[0].depth(), 3u);
    EXPECT_GT(training_accuracy(f, d), 0.95);
}

TEST(GrowTree, EmptyInputThrows) {
    Dataset d(2);
    EXPECT_THROW(grow_tree(d, fixtures::small_forest_config(), 1), invalid_argument);
}

TEST(GrowTree, RespectsDepthBound) {
    const auto d = fixtures::gaussian_classes(300, 6, 0.3, 9);
    for (std::size_t depth : {1u, 2u, 3u, 5u}) {
        const auto t = grow_tree(d, fixtures::small_forest_config(3, depth), 4);
        EXPECT_LE(t.depth(), depth);
        EXPECT_EQ(t.max_depth(), depth);
        for (const auto& p : t.paths()) EXPECT_LE(p.splits.size() + 1, depth);
    }
}

TEST(TrainForest, SingleTreeForestEqualsTree) {
    const auto d = fixtures::gaussian_classes(120, 4, 0.6, 10);
    const auto f = train_forest(d, fixtures::small_forest_config(1, 4));
    for (const auto& s : d.samples())
        EXPECT_EQ(forest_posterior(f, s.features), tree_posterior(f.trees[0], s.features));
}

TEST(TrainForest, SameConfigGivesIdenticalBytes) {
    const auto d = fixtures::gaussian_classes(150, 5, 0.5, 11);
    const auto cfg = fixtures::small_forest_config(4, 4);
    EXPECT_EQ(forest_to_json(train_forest(d, cfg)), forest_to_json(train_forest(d, cfg)));
}

TEST(TrainForest, SeparableBlobsHaveLowTestError) {
    const auto train = fixtures::gaussian_classes(400, 6, 1.0, 12);
    const auto test = fixtures::gaussian_classes(1000, 6, 1.0, 13);
    auto cfg = fixtures::small_forest_config(10, 5);
    cfg.block_fraction = 0.5;
    const auto f = train_forest(train, cfg);
    std::size_t wrong = 0;
    for (const auto& s : test.samples()) wrong += classify(f, s.features, 0.5) != s.label;
    EXPECT_LT(static_cast<double>(wrong) / static_cast<double>(test.size()), 0.05);
}

TEST(TrainForest, AveragingIdentity) {
    const auto d = fixtures::gaussian_classes(200, 6, 0.4, 14);
    const auto f = train_forest(d, fixtures::small_forest_config(7, 5));
    const auto probe = fixtures::gaussian_classes(300, 6, 0.8, 15);
    for (const auto& s : probe.samples()) {
        double sum = 0.0;
        for (const auto& t : f.trees) sum += manual_posterior(t, s.features);
        EXPECT_NEAR(forest_posterior(f, s.features), sum / static_cast<double>(f.size()), 1e-12);
    }
}

TEST(TrainForest, ArgumentChecks) {
    Dataset one_class(2);
    one_class.add({{1.0, 2.0}, Label::positive});
    EXPECT_THROW(train_forest(one_class, fixtures::small_forest_config()), invalid_argument);
    EXPECT_THROW(train_forest(Dataset(2), fixtures::small_forest_config()), invalid_argument);
    auto bad = fixtures::small_forest_config();
    bad.purity_stop = 0.4;
    EXPECT_THROW(train_forest(fixtures::gaussian_classes(10, 2, 1.0, 1), bad), invalid_argument);
    bad = fixtures::small_forest_config();
    bad.n_trees = 0;
    EXPECT_THROW(bad.validate(), invalid_argument);
    bad = fixtures::small_forest_config();
    bad.decision_threshold = 1.5;
    EXPECT_THROW(bad.validate(), invalid_argument);
}

TEST(ForestPosterior, DimensionMismatch) {
    const auto d = fixtures::gaussian_classes(40, 3, 1.0, 16);
    const auto f = train_forest(d, fixtures::small_forest_config(2, 3));
    const std::vector<double> v{1.0, 2.0};
    EXPECT_THROW(forest_posterior(f, v), dimension_mismatch);
}

TEST(Tree, ConstructorRejectsMalformedArenas) {
    const SplitParams p{FeatureSelector({0}, 1), {1.0}, 0.0};
    EXPECT_THROW(Tree({}, 3), invalid_argument);
    EXPECT_THROW(Tree({SplitNode{p, 1, 5}, LeafNode{}}, 3), invalid_argument);
    EXPECT_THROW(Tree({SplitNode{p, 1, 1}, LeafNode{}}, 3), invalid_argument);
    EXPECT_THROW(Tree({SplitNode{p, 1, 2}, LeafNode{}, LeafNode{}, LeafNode{}}, 3), invalid_argument);
    EXPECT_THROW(Tree({SplitNode{p, 1, 2}, LeafNode{}, LeafNode{}}, 1), invalid_argument);
    EXPECT_THROW(Tree({LeafNode{1.5, 0}}, 1), invalid_argument);
    EXPECT_NO_THROW(Tree({SplitNode{p, 1, 2}, LeafNode{}, LeafNode{}}, 2));
}

TEST(Tree, RoutingAndPaths) {
    const SplitParams root{FeatureSelector({0}, 2), {1.0}, -0.5};
    const SplitParams inner{FeatureSelector({1}, 2), {-1.0}, 0.0};
    const Tree t({SplitNode{root, 1, 2}, SplitNode{inner, 3, 4}, LeafNode{0.1, 3}, LeafNode{0.9, 2},
                  LeafNode{0.4, 1}},
                 3);
    EXPECT_EQ(t.leaf_count(), 3u);
    EXPECT_EQ(t.split_count(), 2u);
    EXPECT_EQ(t.depth(), 3u);
    const std::vector<double> a{1.0, -1.0}, b{1.0, 1.0}, c{0.0, 0.0};
    EXPECT_EQ(t.route(a), 3u);
    EXPECT_EQ(t.route(b), 4u);
    EXPECT_EQ(t.route(c), 2u);
    EXPECT_DOUBLE_EQ(t.posterior(a), 0.9);

    const auto paths = t.paths();
    ASSERT_EQ(paths.size(), 3u);
    EXPECT_EQ(paths[0].splits, (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(paths[0].leaf, 3u);
    EXPECT_EQ(paths[2].splits, (std::vector<NodeId>{0}));

    const std::vector<NodeId> ids{1};
    const std::vector<double> thr{2.0};
    const auto moved = t.with_thresholds(ids, thr);
    EXPECT_EQ(moved.split(1).params.threshold, 2.0);
    EXPECT_EQ(moved.split(0).params, t.split(0).params);
}
