#pragma once

#include <string>

#include "attackgraph/property_graph.hpp"

namespace ag {

// Graphviz digraph of the nodes carrying any label in selection (all nodes
// when selection is empty) and the edges between them, in archive order.
std::string export_dot(const PropertyGraph& g, const LabelSet& selection = {});

} // namespace ag
