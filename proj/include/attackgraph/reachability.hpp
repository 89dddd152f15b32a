#pragma once

// Reachability graph derivation.
//
// Two end devices reach each other when they share a subnet, when a direct
// connection edge joins them, or when a path of TCP connection edges joins
// them and some router ALLOWS (and no router DENIES) the pair. The result
// is materialized as REACHES edges in the same graph.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "attackgraph/property_graph.hpp"

namespace ag {

namespace edge {
inline constexpr const char* kReaches = "REACHES";
} // namespace edge

// Attribute on incrementally produced REACHES edges naming the merge
// generation (its NEW{k}_CONNECTS_TO edge type).
inline constexpr const char* kGenerationAttr = "generation";

struct NodeFilter {
    LabelSet labels;
    AttrMap attrs;
};

struct FullScope {
    NodeFilter source;
    NodeFilter target;
};

struct IncrementalPaperFaithful {
    std::string generation;
};

struct IncrementalSound {
    std::string generation;
};

using ReachabilityMode = std::variant<FullScope, IncrementalPaperFaithful, IncrementalSound>;

struct ReachabilityReport {
    std::vector<std::pair<std::string, std::string>> edges_added;
    std::uint64_t visits = 0;
    ReachabilityMode mode;
};

enum class IncrementalKind { PaperFaithful, Sound };

// "NEW_CONNECTS_TO" for k = 1, "NEW{k}_CONNECTS_TO" otherwise.
std::string generation_edge_type(int k);
// Inverse of generation_edge_type; nullopt for anything else.
std::optional<int> generation_index(const std::string& edge_type);
// CONNECTS_TO plus every NEW{k}_CONNECTS_TO type present in g.
std::set<std::string> connection_edge_types(const PropertyGraph& g);

// Evaluates every ordered pair of distinct in-scope end devices.
ReachabilityReport compute_full(PropertyGraph& g, const NodeFilter& scope = {});
ReachabilityReport compute_full(PropertyGraph& g, const NodeFilter& source, const NodeFilter& target);

// PaperFaithful evaluates the direct and TCP-path clauses over the
// generation's edges only. Sound evaluates them over all connection edges
// but keeps only witnesses that use at least one generation edge.
ReachabilityReport compute_incremental(PropertyGraph& g, IncrementalKind kind, const std::string& generation);

// Firewall test for the TCP-path clause.
bool firewall_permits(const PropertyGraph& g, const std::string& source, const std::string& destination);

bool reaches(const PropertyGraph& g, const std::string& a, const std::string& b);

// All materialized REACHES pairs, sorted by (source name, target name).
std::vector<std::pair<std::string, std::string>> reaches_pairs(const PropertyGraph& g);

} // namespace ag
