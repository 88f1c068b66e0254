#include "rfda/config.hpp"

#include "rfda/error.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace rfda {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        auto item = trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
        if (!item.empty()) out.push_back(std::move(item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text, std::size_t line) {
    T value{};
    auto s = text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw parse_error("bad value '" + std::string(text) + "' for key '" + std::string(key) + "'", line);
    return value;
}

} // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw parse_error("expected 'key = value'", line_no);
        const auto key = trim(std::string_view(line).substr(0, eq));
        const auto value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw parse_error("empty key", line_no);
        if (cfg.entries_.contains(key)) throw parse_error("duplicate key '" + key + "'", line_no);
        cfg.entries_[key] = Entry{value, line_no, false};
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw invalid_argument("cannot open " + path.string());
    try {
        return parse(in);
    } catch (const parse_error& e) {
        throw parse_error(path.string() + ": " + e.what(), e.line());
    }
}

KeyValueConfig KeyValueConfig::from_assignments(std::span<const std::string> assignments) {
    std::ostringstream joined;
    for (const auto& a : assignments) joined << a << '\n';
    std::istringstream in(joined.str());
    return parse(in);
}

bool KeyValueConfig::contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

void KeyValueConfig::set(const std::string& key, const std::string& value) { entries_[key] = Entry{value, 0, false}; }

std::optional<std::string> KeyValueConfig::take(std::string_view key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.consumed = true;
    return it->second.value;
}

std::string KeyValueConfig::take_string(std::string_view key, std::string fallback) {
    auto v = take(key);
    return v ? *v : std::move(fallback);
}

double KeyValueConfig::take_double(std::string_view key, double fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    return parse_number<double>(key, it->second.value, it->second.line);
}

std::size_t KeyValueConfig::take_size(std::string_view key, std::size_t fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    return parse_number<std::size_t>(key, it->second.value, it->second.line);
}

std::uint64_t KeyValueConfig::take_u64(std::string_view key, std::uint64_t fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    return parse_number<std::uint64_t>(key, it->second.value, it->second.line);
}

std::vector<double> KeyValueConfig::take_doubles(std::string_view key, std::vector<double> fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    std::vector<double> out;
    for (const auto& item : split_list(it->second.value)) out.push_back(parse_number<double>(key, item, it->second.line));
    return out;
}

std::vector<std::string> KeyValueConfig::take_strings(std::string_view key, std::vector<std::string> fallback) {
    auto v = take(key);
    return v ? split_list(*v) : std::move(fallback);
}

void KeyValueConfig::expect_all_consumed() const {
    for (const auto& [key, entry] : entries_)
        if (!entry.consumed) throw parse_error("unknown key '" + key + "'", entry.line);
}

void read_forest_config(KeyValueConfig& kv, ForestConfig& cfg) {
    cfg.n_trees = kv.take_size("n_trees", cfg.n_trees);
    cfg.max_depth = kv.take_size("max_depth", cfg.max_depth);
    cfg.min_samples = kv.take_size("min_samples", cfg.min_samples);
    cfg.purity_stop = kv.take_double("purity_stop", cfg.purity_stop);
    cfg.candidates = kv.take_size("candidates", cfg.candidates);
    cfg.block_fraction = kv.take_double("block_fraction", cfg.block_fraction);
    cfg.svm.reg_cost = kv.take_double("svm_cost", cfg.svm.reg_cost);
    cfg.svm.tol = kv.take_double("svm_tol", cfg.svm.tol);
    cfg.svm.max_iter = kv.take_size("svm_max_iter", cfg.svm.max_iter);
    cfg.decision_threshold = kv.take_double("decision_threshold", cfg.decision_threshold);
    cfg.seed = kv.take_u64("seed", cfg.seed);
    cfg.validate();
}

void write_forest_config(std::ostream& out, const ForestConfig& cfg) {
    const auto precision = out.precision(17);
    out << "n_trees = " << cfg.n_trees << '\n'
        << "max_depth = " << cfg.max_depth << '\n'
        << "min_samples = " << cfg.min_samples << '\n'
        << "purity_stop = " << cfg.purity_stop << '\n'
        << "candidates = " << cfg.candidates << '\n'
        << "block_fraction = " << cfg.block_fraction << '\n'
        << "svm_cost = " << cfg.svm.reg_cost << '\n'
        << "svm_tol = " << cfg.svm.tol << '\n'
        << "svm_max_iter = " << cfg.svm.max_iter << '\n'
        << "decision_threshold = " << cfg.decision_threshold << '\n'
        << "seed = " << cfg.seed << '\n';
    out.precision(precision);
}

} // namespace rfda
