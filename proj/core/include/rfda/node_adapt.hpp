#pragma once

#include "rfda/data.hpp"
#include "rfda/forest.hpp"

namespace rfda {

struct NodeAdaptParams {
    double c1 = 1.0;
    double c2 = 1.0;
};

// Adapts one source tree top-down on the target samples: every surviving
// split keeps its selector, re-learns its expert with the adaptive SVM
// (regularised toward c1 * source weights) and re-selects its threshold by
// information gain. Nodes collapse to leaves under the usual leaf rules.
ReshapedTree node_adapt_tree(const Tree& source, const Dataset& target, const NodeAdaptParams& params,
                             const ForestConfig& cfg);

// Output provenance "node-adapt"; parameters record C1 and C2. `cfg` supplies
// the leaf rules and solver settings.
Forest node_adapt(const Forest& source, const Dataset& target, const NodeAdaptParams& params,
                  const ForestConfig& cfg);

} // namespace rfda
