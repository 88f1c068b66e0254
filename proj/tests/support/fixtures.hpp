#pragma once

#include "rfda/data.hpp"
#include "rfda/forest.hpp"
#include "rfda/optim.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace fixtures {

// Two Gaussian classes in `dim` dimensions, centres +-offset on every axis.
inline rfda::Dataset gaussian_classes(std::size_t n, std::size_t dim, double offset, std::uint64_t seed,
                                      double rotate_deg = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double a = rotate_deg * 3.14159265358979323846 / 180.0;
    rfda::Dataset d(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = i % 2 == 0;
        std::vector<double> x(dim);
        for (auto& v : x) v = (pos ? offset : -offset) + noise(rng);
        for (std::size_t j = 0; j + 1 < dim; j += 2) {
            const double u = x[j], w = x[j + 1];
            x[j] = std::cos(a) * u - std::sin(a) * w;
            x[j + 1] = std::sin(a) * u + std::cos(a) * w;
        }
        d.add({std::move(x), pos ? rfda::Label::positive : rfda::Label::negative});
    }
    return d;
}

inline std::vector<rfda::ProjectedSample> random_projected(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                                                           double separation) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<rfda::ProjectedSample> out(n);
    std::vector<double> dir(dim);
    for (auto& v : dir) v = noise(rng);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].y = i % 2 == 0 ? rfda::Label::positive : rfda::Label::negative;
        out[i].x.resize(dim);
        for (std::size_t j = 0; j < dim; ++j)
            out[i].x[j] = noise(rng) + rfda::sign_of(out[i].y) * separation * dir[j] + 0.3;
    }
    return out;
}

inline rfda::ForestConfig small_forest_config(std::size_t trees = 5, std::size_t depth = 4) {
    rfda::ForestConfig cfg;
    cfg.n_trees = trees;
    cfg.max_depth = depth;
    cfg.min_samples = 4;
    cfg.candidates = 6;
    cfg.seed = 11;
    return cfg;
}

} // namespace fixtures
