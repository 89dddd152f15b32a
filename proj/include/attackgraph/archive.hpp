#pragma once

// Canonical text archive of a property graph.
//
//   attackgraph-archive 1
//   node <index> {"attrs":{...},"labels":[...]}
//   edge <src index> <dst index> {"attrs":{...},"type":"..."}
//
// Nodes are ordered by name, labels, attributes, then a signature of their
// neighbourhood; edges by endpoint indices, type and attributes. Graphs
// that are equal up to id renaming serialize to the same bytes.

#include <filesystem>
#include <string>

#include "attackgraph/property_graph.hpp"

namespace ag {

inline constexpr const char* kArchiveHeader = "attackgraph-archive 1";

// Nodes carrying any label in `exclude` are left out with their edges.
std::string save_archive(const PropertyGraph& g, const LabelSet& exclude = {});
PropertyGraph load_archive(const std::string& text);

PropertyGraph read_archive_file(const std::filesystem::path& path);
// Writes through a temporary sibling file and renames it into place.
void write_archive_file(const PropertyGraph& g, const std::filesystem::path& path);

// Node ids in canonical order, excluded nodes dropped.
std::vector<NodeId> canonical_node_order(const PropertyGraph& g, const LabelSet& exclude = {});

} // namespace ag
