#pragma once

// Path metrics over attack graphs. Paths are simple directed paths along
// EXPLOITS and LEADS edges between the privilege conditions of two
// devices, restricted to nodes carrying at least one of the given labels.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attackgraph/property_graph.hpp"

namespace ag {

struct AttackPath {
    std::vector<NodeId> nodes;
    std::vector<std::string> names;

    std::size_t length() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

using PathHistogram = std::map<std::size_t, std::size_t>;

// Lexicographic by node-name sequence.
std::vector<AttackPath> enumerate_attack_paths(const PropertyGraph& g, const std::string& start_device,
                                               const std::string& end_device, const LabelSet& labels);

// Minimum edge count; ties go to the lexicographically smallest name sequence.
std::optional<AttackPath> shortest_attack_path(const PropertyGraph& g, const std::string& start_device,
                                               const std::string& end_device, const LabelSet& labels);

std::size_t count_attack_paths(const PropertyGraph& g, const std::string& start_device,
                               const std::string& end_device, const LabelSet& labels);

PathHistogram path_length_histogram(const PropertyGraph& g, const std::string& start_device,
                                    const std::string& end_device, const LabelSet& labels);

} // namespace ag
