#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace rfda {

enum class Label : std::int8_t { negative = -1, positive = 1 };

constexpr double sign_of(Label y) noexcept { return y == Label::positive ? 1.0 : -1.0; }

struct LabeledSample {
    std::vector<double> features;
    Label label = Label::negative;
};

struct ClassCounts {
    std::size_t pos = 0;
    std::size_t neg = 0;

    std::size_t total() const noexcept { return pos + neg; }
    void add(Label y) noexcept { (y == Label::positive ? pos : neg) += 1; }
    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

// A set of samples sharing one feature dimension. Empty datasets are valid.
class Dataset {
public:
    explicit Dataset(std::size_t dim);

    // Validates finiteness, non-emptiness and dimension of the sample.
    void add(LabeledSample sample);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
    std::span<const LabeledSample> samples() const noexcept { return samples_; }

    ClassCounts counts() const noexcept;
    bool has_both_classes() const noexcept;

    // New dataset holding the given rows, in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;

private:
    std::size_t dim_;
    std::vector<LabeledSample> samples_;
};

// Ordered, strictly increasing set of feature indices (an image patch in the
// original detector; a contiguous index block here).
class FeatureSelector {
public:
    FeatureSelector(std::vector<std::size_t> indices, std::size_t dim);

    std::span<const std::size_t> indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    std::size_t max_index() const noexcept { return indices_.back(); }

    friend bool operator==(const FeatureSelector&, const FeatureSelector&) = default;

private:
    std::vector<std::size_t> indices_;
};

std::vector<double> apply_selector(const FeatureSelector& selector, std::span<const double> v);

// weights . v[selector] without materialising the sub-vector.
double selected_dot(const FeatureSelector& selector, std::span<const double> weights,
                    std::span<const double> v);

// Length of the blocks produced by sample_selectors.
std::size_t block_length(std::size_t dim, double block_fraction);

std::vector<FeatureSelector> sample_selectors(std::size_t dim, std::size_t count,
                                              double block_fraction, std::uint64_t seed);

// Deterministic 64-bit mixing (splitmix64 finaliser) used to derive
// independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// CSV: first column label (+1/-1, or 1/0 with 0 -> -1), remaining columns
// features. A header row is detected by a non-numeric first cell.
Dataset read_csv(std::istream& in);
Dataset load_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const Dataset& data);
void save_csv(const std::filesystem::path& path, const Dataset& data);

} // namespace rfda
