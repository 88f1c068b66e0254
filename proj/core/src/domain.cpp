#include "rfda/bench.hpp"
#include "rfda/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace rfda {

std::string_view to_string(DomainFamily f) noexcept {
    switch (f) {
    case DomainFamily::gaussian_blobs: return "gaussian-blobs";
    case DomainFamily::two_moons: return "two-moons";
    case DomainFamily::ring: return "ring";
    }
    return "gaussian-blobs";
}

DomainFamily parse_domain_family(std::string_view s) {
    for (auto f : {DomainFamily::gaussian_blobs, DomainFamily::two_moons, DomainFamily::ring})
        if (to_string(f) == s) return f;
    throw invalid_argument("unknown domain family '" + std::string(s) + "'");
}

void DomainSpec::validate() const {
    if (dim < 2) throw invalid_argument("domain dimension must be at least 2");
    if (!(pos_prior > 0.0 && pos_prior < 1.0)) throw invalid_argument("pos_prior must lie in (0, 1)");
    if (!(noise > 0.0)) throw invalid_argument("noise scale must be positive");
    if (clusters < 1) throw invalid_argument("clusters must be at least 1");
    if (n_source < 1 || n_target_train < 1 || n_target_test < 1)
        throw invalid_argument("every domain split needs at least one sample");
    if (!(shift.scale > 0.0) || !std::isfinite(shift.scale)) throw invalid_argument("shift scale must be positive");
    if (!std::isfinite(shift.rotation_deg)) throw invalid_argument("rotation must be finite");
    if (shift.translation.size() > 1 && shift.translation.size() != dim)
        throw dimension_mismatch("translation must be empty, a scalar, or have one entry per dimension");
}

std::vector<double> apply_shift(const DomainShift& shift, std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    const double angle = shift.rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(angle), s = std::sin(angle);
    for (std::size_t i = 0; i + 1 < out.size(); i += 2) {
        const double a = out[i], b = out[i + 1];
        out[i] = c * a - s * b;
        out[i + 1] = s * a + c * b;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = shift.translation.empty()       ? 0.0
                         : shift.translation.size() == 1 ? shift.translation[0]
                                                         : shift.translation[i];
        out[i] = shift.scale * out[i] + t;
    }
    return out;
}

namespace {

// Fixed per-family geometry: it does not depend on the spec seed, so repeats
// resample the same problem.
struct Geometry {
    // gaussian-blobs: mixture centres per class.
    std::vector<std::vector<double>> pos_centres, neg_centres;
    // two-moons / ring: orthonormal plane the 2-D pattern lives in.
    std::vector<double> u, v;
};

Geometry make_geometry(std::size_t dim, std::size_t clusters) {
    std::mt19937_64 rng(0x6765'6f6d'6574'7279ULL + dim);
    std::normal_distribution<double> normal(0.0, 1.0);
    Geometry g;
    auto centre = [&] {
        std::vector<double> c(dim);
        for (auto& x : c) x = normal(rng);
        return c;
    };
    for (std::size_t k = 0; k < clusters; ++k) {
        g.pos_centres.push_back(centre());
        g.neg_centres.push_back(centre());
    }

    g.u = centre();
    g.v = centre();
    auto normalise = [](std::vector<double>& w) {
        double n = 0.0;
        for (double x : w) n += x * x;
        n = std::sqrt(n);
        for (double& x : w) x /= n;
    };
    normalise(g.u);
    double proj = 0.0;
    for (std::size_t i = 0; i < dim; ++i) proj += g.u[i] * g.v[i];
    for (std::size_t i = 0; i < dim; ++i) g.v[i] -= proj * g.u[i];
    normalise(g.v);
    return g;
}

LabeledSample draw(const DomainSpec& spec, const Geometry& g, std::mt19937_64& rng) {
    std::bernoulli_distribution is_pos(spec.pos_prior);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, spec.noise);

    LabeledSample s;
    s.label = is_pos(rng) ? Label::positive : Label::negative;
    const bool pos = s.label == Label::positive;
    s.features.assign(spec.dim, 0.0);

    switch (spec.family) {
    case DomainFamily::gaussian_blobs: {
        const auto& centres = pos ? g.pos_centres : g.neg_centres;
        std::uniform_int_distribution<std::size_t> pick(0, centres.size() - 1);
        const auto& c = centres[pick(rng)];
        for (std::size_t i = 0; i < spec.dim; ++i) s.features[i] = c[i] + noise(rng);
        return s;
    }
    case DomainFamily::two_moons: {
        const double t = std::numbers::pi * unit(rng);
        const double a = pos ? std::cos(t) - 0.5 : 0.5 - std::cos(t);
        const double b = pos ? std::sin(t) - 0.25 : 0.25 - std::sin(t);
        for (std::size_t i = 0; i < spec.dim; ++i) s.features[i] = 2.0 * (a * g.u[i] + b * g.v[i]) + noise(rng);
        return s;
    }
    case DomainFamily::ring: {
        const double angle = 2.0 * std::numbers::pi * unit(rng);
        const double r = pos ? unit(rng) : 1.5 + unit(rng);
        const double a = 1.5 * r * std::cos(angle), b = 1.5 * r * std::sin(angle);
        for (std::size_t i = 0; i < spec.dim; ++i) s.features[i] = a * g.u[i] + b * g.v[i] + noise(rng);
        return s;
    }
    }
    return s;
}

Dataset draw_split(const DomainSpec& spec, const Geometry& g, std::size_t n, std::uint64_t stream, bool shifted) {
    std::mt19937_64 rng(mix_seed(spec.seed, stream));
    Dataset out(spec.dim);
    for (std::size_t k = 0; k < n; ++k) {
        auto s = draw(spec, g, rng);
        if (shifted) s.features = apply_shift(spec.shift, s.features);
        out.add(std::move(s));
    }
    return out;
}

} // namespace

DomainPair generate_domain_pair(const DomainSpec& spec) {
    spec.validate();
    const auto g = make_geometry(spec.dim, spec.clusters);
    return {draw_split(spec, g, spec.n_source, 1, false), draw_split(spec, g, spec.n_target_train, 2, true),
            draw_split(spec, g, spec.n_target_test, 3, true)};
}

} // namespace rfda
