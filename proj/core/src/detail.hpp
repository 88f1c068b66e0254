#pragma once

#include "rfda/data.hpp"
#include "rfda/forest.hpp"
#include "rfda/optim.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rfda::detail {

ClassCounts counts_of(const Dataset& data, std::span<const std::size_t> rows);

std::vector<std::size_t> all_rows(const Dataset& data);

std::vector<ProjectedSample> project(const Dataset& data, std::span<const std::size_t> rows,
                                     const FeatureSelector& selector);

// Completes an expert with the information-gain threshold for its scores on
// `rows`. `projected` must be project(data, rows, selector).
SplitParams with_best_threshold(const FeatureSelector& selector, std::vector<double> weights,
                                std::span<const ProjectedSample> projected, double* gain = nullptr);

} // namespace rfda::detail

namespace rfda::detail {

// Shared precondition of the adapters: nonempty, two-class target data of
// the source model's dimension.
void check_target(const Forest& source, const Dataset& target);

} // namespace rfda::detail
