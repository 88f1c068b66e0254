#include "rfda/data.hpp"

#include "rfda/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace rfda {

Dataset::Dataset(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw invalid_argument("dataset dimension must be positive");
}

void Dataset::add(LabeledSample sample) {
    if (sample.features.size() != dim_)
        throw dimension_mismatch("sample has " + std::to_string(sample.features.size()) +
                                 " features, dataset expects " + std::to_string(dim_));
    if (!std::all_of(sample.features.begin(), sample.features.end(),
                     [](double x) { return std::isfinite(x); }))
        throw invalid_argument("sample features must be finite");
    if (sample.label != Label::positive && sample.label != Label::negative)
        throw invalid_argument("label must be +1 or -1");
    samples_.push_back(std::move(sample));
}

ClassCounts Dataset::counts() const noexcept {
    ClassCounts c;
    for (const auto& s : samples_) c.add(s.label);
    return c;
}

bool Dataset::has_both_classes() const noexcept {
    const auto c = counts();
    return c.pos > 0 && c.neg > 0;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out(dim_);
    out.samples_.reserve(rows.size());
    for (auto r : rows) out.samples_.push_back(samples_.at(r));
    return out;
}

FeatureSelector::FeatureSelector(std::vector<std::size_t> indices, std::size_t dim)
    : indices_(std::move(indices)) {
    if (indices_.empty()) throw invalid_argument("feature selector must be nonempty");
    for (std::size_t i = 1; i < indices_.size(); ++i)
        if (indices_[i] <= indices_[i - 1])
            throw invalid_argument("feature selector indices must be strictly increasing");
    if (indices_.back() >= dim)
        throw dimension_mismatch("feature selector index " + std::to_string(indices_.back()) +
                                 " out of range for dimension " + std::to_string(dim));
}

std::vector<double> apply_selector(const FeatureSelector& selector, std::span<const double> v) {
    if (selector.max_index() >= v.size())
        throw dimension_mismatch("selector index " + std::to_string(selector.max_index()) +
                                 " out of range for vector of length " + std::to_string(v.size()));
    std::vector<double> out;
    out.reserve(selector.size());
    for (auto i : selector.indices()) out.push_back(v[i]);
    return out;
}

double selected_dot(const FeatureSelector& selector, std::span<const double> weights,
                    std::span<const double> v) {
    const auto idx = selector.indices();
    if (weights.size() != idx.size()) throw dimension_mismatch("weights do not match selector");
    if (selector.max_index() >= v.size())
        throw dimension_mismatch("selector index out of range for vector of length " +
                                 std::to_string(v.size()));
    double acc = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) acc += weights[k] * v[idx[k]];
    return acc;
}

std::size_t block_length(std::size_t dim, double block_fraction) {
    if (!(block_fraction > 0.0 && block_fraction <= 1.0))
        throw invalid_argument("block_fraction must lie in (0, 1]");
    // The epsilon keeps products like 0.3 * 10 from rounding up to 4.
    const auto len = static_cast<std::size_t>(std::ceil(block_fraction * static_cast<double>(dim) - 1e-9));
    return std::clamp<std::size_t>(len, 1, dim);
}

std::vector<FeatureSelector> sample_selectors(std::size_t dim, std::size_t count,
                                              double block_fraction, std::uint64_t seed) {
    if (dim == 0 || count == 0) throw invalid_argument("sample_selectors needs dim > 0 and count > 0");
    const std::size_t len = block_length(dim, block_fraction);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> start_dist(0, dim - len);

    std::vector<FeatureSelector> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<std::size_t> idx(len);
        const auto start = start_dist(rng);
        for (std::size_t i = 0; i < len; ++i) idx[i] = start + i;
        out.emplace_back(std::move(idx), dim);
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        cells.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return cells;
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

} // namespace

Dataset read_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    std::vector<LabeledSample> rows;
    bool first = true;

    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty()) continue;
        const auto cells = split_commas(view);
        double label_value = 0.0;
        const bool numeric_label = parse_double(cells[0], label_value);
        if (first) {
            first = false;
            if (!numeric_label) {
                width = cells.size();
                continue;
            }
        }
        if (!numeric_label) throw parse_error("non-numeric label '" + std::string(cells[0]) + "'", line_no);
        if (cells.size() < 2) throw parse_error("row has no feature columns", line_no);
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw parse_error("ragged row: expected " + std::to_string(width) + " columns, found " +
                                  std::to_string(cells.size()),
                              line_no);

        LabeledSample sample;
        if (label_value == 1.0) {
            sample.label = Label::positive;
        } else if (label_value == -1.0 || label_value == 0.0) {
            sample.label = Label::negative;
        } else {
            throw parse_error("label must be one of +1, -1, 1, 0", line_no);
        }
        sample.features.reserve(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double x = 0.0;
            if (!parse_double(cells[c], x) || !std::isfinite(x))
                throw parse_error("bad feature value '" + std::string(cells[c]) + "' in column " +
                                      std::to_string(c + 1),
                                  line_no);
            sample.features.push_back(x);
        }
        rows.push_back(std::move(sample));
    }
    if (rows.empty()) throw parse_error("CSV contains no data rows", 0);

    Dataset data(rows.front().features.size());
    for (auto& r : rows) data.add(std::move(r));
    return data;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw invalid_argument("cannot open " + path.string());
    return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
    const auto old_precision = out.precision(17);
    for (const auto& s : data.samples()) {
        out << (s.label == Label::positive ? "1" : "-1");
        for (double x : s.features) out << ',' << x;
        out << '\n';
    }
    out.precision(old_precision);
}

void save_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw invalid_argument("cannot write " + path.string());
    write_csv(out, data);
}

} // namespace rfda
