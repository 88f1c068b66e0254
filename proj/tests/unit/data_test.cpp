#include "rfda/data.hpp"
#include "rfda/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace rfda;

namespace {

Dataset parse(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

} // namespace

TEST(ApplySelector, PicksIndicesInOrder) {
    const std::vector<double> v{3, 1, 4};
    EXPECT_EQ(apply_selector(FeatureSelector({0, 1, 2}, 3), v), (std::vector<double>{3, 1, 4}));
    EXPECT_EQ(apply_selector(FeatureSelector({1}, 3), v), (std::vector<double>{1}));
    EXPECT_EQ(apply_selector(FeatureSelector({0, 2}, 3), v), (std::vector<double>{3, 4}));
}

TEST(ApplySelector, ShortVectorIsDimensionMismatch) {
    const std::vector<double> v{3, 1};
    EXPECT_THROW(apply_selector(FeatureSelector({0, 2}, 3), v), dimension_mismatch);
}

TEST(FeatureSelector, RejectsInvalidIndexSets) {
    EXPECT_THROW(FeatureSelector({}, 3), invalid_argument);
    EXPECT_THROW(FeatureSelector({1, 1}, 3), invalid_argument);
    EXPECT_THROW(FeatureSelector({2, 1}, 3), invalid_argument);
    EXPECT_THROW(FeatureSelector({3}, 3), dimension_mismatch);
}

TEST(SelectedDot, MatchesExplicitSubvector) {
    const FeatureSelector s({1, 2, 4}, 6);
    const std::vector<double> w{0.5, -2.0, 3.0};
    const std::vector<double> v{9, 1, 2, 9, 3, 9};
    EXPECT_DOUBLE_EQ(selected_dot(s, w, v), 0.5 * 1 - 2.0 * 2 + 3.0 * 3);
}

TEST(SampleSelectors, FullFractionGivesWholeRange) {
    const auto sel = sample_selectors(10, 3, 1.0, 5);
    ASSERT_EQ(sel.size(), 3u);
    for (const auto& s : sel) {
        ASSERT_EQ(s.size(), 10u);
        for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(s.indices()[i], i);
    }
}

TEST(SampleSelectors, DeterministicForSeed) {
    EXPECT_EQ(sample_selectors(10, 5, 0.3, 7), sample_selectors(10, 5, 0.3, 7));
    EXPECT_NE(sample_selectors(100, 20, 0.1, 7), sample_selectors(100, 20, 0.1, 8));
}

TEST(SampleSelectors, BlocksOfTwentyStartWithinRange) {
    const auto sel = sample_selectors(100, 50, 0.2, 3);
    ASSERT_EQ(sel.size(), 50u);
    for (const auto& s : sel) {
        ASSERT_EQ(s.size(), 20u);
        const auto start = s.indices().front();
        EXPECT_LE(start, 80u);
        for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(s.indices()[i], start + i);
    }
}

TEST(SampleSelectors, InvalidArguments) {
    EXPECT_THROW(sample_selectors(0, 3, 0.5, 1), invalid_argument);
    EXPECT_THROW(sample_selectors(10, 0, 0.5, 1), invalid_argument);
    EXPECT_THROW(sample_selectors(10, 3, 0.0, 1), invalid_argument);
    EXPECT_THROW(sample_selectors(10, 3, 1.5, 1), invalid_argument);
}

TEST(SampleSelectors, InvariantsOverRandomTriples) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> dim_dist(1, 300), k_dist(1, 60);
    std::uniform_real_distribution<double> frac_dist(1e-3, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto dim = dim_dist(rng);
        const auto k = k_dist(rng);
        const double frac = frac_dist(rng);
        const auto seed = rng();
        const auto sel = sample_selectors(dim, k, frac, seed);
        ASSERT_EQ(sel.size(), k);
        const auto len = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(dim) - 1e-9));
        for (const auto& s : sel) {
            ASSERT_EQ(s.size(), std::max<std::size_t>(len, 1));
            for (std::size_t i = 1; i < s.size(); ++i) ASSERT_LT(s.indices()[i - 1], s.indices()[i]);
            ASSERT_LT(s.max_index(), dim);
            std::vector<double> v(dim, 1.0);
            ASSERT_EQ(apply_selector(s, v).size(), s.size());
        }
        ASSERT_EQ(sel, sample_selectors(dim, k, frac, seed));
    }
}

TEST(Dataset, RejectsBadSamples) {
    Dataset d(2);
    EXPECT_THROW(d.add({{1.0}, Label::positive}), dimension_mismatch);
    EXPECT_THROW(d.add({{1.0, std::numeric_limits<double>::quiet_NaN()}, Label::positive}), invalid_argument);
    EXPECT_THROW(d.add({{1.0, std::numeric_limits<double>::infinity()}, Label::negative}), invalid_argument);
    EXPECT_THROW(Dataset(0), invalid_argument);
    EXPECT_TRUE(d.empty());
}

TEST(Dataset, CountsAndSubset) {
    Dataset d(1);
    d.add({{1.0}, Label::positive});
    d.add({{2.0}, Label::negative});
    d.add({{3.0}, Label::positive});
    EXPECT_EQ(d.counts(), (ClassCounts{2, 1}));
    EXPECT_TRUE(d.has_both_classes());
    const std::vector<std::size_t> rows{2, 0};
    const auto s = d.subset(rows);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].features[0], 3.0);
    EXPECT_EQ(s[1].features[0], 1.0);
    EXPECT_FALSE(s.has_both_classes());
}

TEST(Csv, ParsesLabelsAndOptionalHeader) {
    const auto a = parse("label,x0,x1\n1,0.5,2\n-1,1e-3,-4\n0,7,8\n");
    ASSERT_EQ(a.size(), 3u);
    EXPECT_EQ(a.dim(), 2u);
    EXPECT_EQ(a[0].label, Label::positive);
    EXPECT_EQ(a[1].label, Label::negative);
    EXPECT_EQ(a[2].label, Label::negative);
    EXPECT_DOUBLE_EQ(a[1].features[0], 1e-3);

    const auto b = parse("+1,1,2\n-1,3,4\n");
    EXPECT_EQ(b.size(), 2u);
    EXPECT_EQ(b[0].label, Label::positive);
}

TEST(Csv, ErrorsCarryLineNumbers) {
    try {
        parse("label,a,b\n1,1,2\n-1,3\n");
        FAIL() << "ragged row accepted";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    try {
        parse("1,1,2\n2,3,4\n");
        FAIL() << "label 2 accepted";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    try {
        parse("1,1,abc\n");
        FAIL() << "non-numeric feature accepted";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.line(), 1u);
    }
    EXPECT_THROW(parse("1,nan,2\n"), parse_error);
    EXPECT_THROW(parse("1\n"), parse_error);
}

TEST(Csv, WriteReadRoundTripIsExact) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1e3);
    Dataset d(4);
    for (int i = 0; i < 100; ++i)
        d.add({{g(rng), g(rng) * 1e-9, g(rng), 1.0 / 3.0}, i % 3 == 0 ? Label::positive : Label::negative});
    std::stringstream s;
    write_csv(s, d);
    const auto back = read_csv(s);
    ASSERT_EQ(back.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(back[i].features, d[i].features);
        EXPECT_EQ(back[i].label, d[i].label);
    }
}

TEST(MixSeed, DistinctStreams) {
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
    EXPECT_EQ(mix_seed(9, 4), mix_seed(9, 4));
}
