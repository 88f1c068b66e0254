#pragma once

#include "rfda/forest.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfda {

// Flat `key = value` settings. Lines starting with '#' are comments. Every
// key must be consumed by a typed reader; leftovers are reported as errors
// so that typos never pass silently.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig load(const std::filesystem::path& path);
    // From command-line style "key=value" tokens.
    static KeyValueConfig from_assignments(std::span<const std::string> assignments);

    bool contains(std::string_view key) const;
    void set(const std::string& key, const std::string& value);

    std::optional<std::string> take(std::string_view key);
    std::string take_string(std::string_view key, std::string fallback);
    double take_double(std::string_view key, double fallback);
    std::size_t take_size(std::string_view key, std::size_t fallback);
    std::uint64_t take_u64(std::string_view key, std::uint64_t fallback);
    std::vector<double> take_doubles(std::string_view key, std::vector<double> fallback);
    std::vector<std::string> take_strings(std::string_view key, std::vector<std::string> fallback);

    // Throws parse_error naming the first key nobody consumed.
    void expect_all_consumed() const;

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        bool consumed = false;
    };
    std::map<std::string, Entry, std::less<>> entries_;
};

// Keys: n_trees, max_depth, min_samples, purity_stop, candidates,
// block_fraction, svm_cost, svm_tol, svm_max_iter, decision_threshold, seed.
// Absent keys keep the value already in `cfg`.
void read_forest_config(KeyValueConfig& kv, ForestConfig& cfg);

void write_forest_config(std::ostream& out, const ForestConfig& cfg);

} // namespace rfda
