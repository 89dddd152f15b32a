#pragma once

// System join and leave events.
//
// A merge session records one join: the generation edge type carrying its
// cross-topology links, the two topologies, the vicinity filter, and the
// devices it touched. Sessions live in the graph as MergeSession nodes so
// that a saved workspace keeps them.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "attackgraph/attack_graph.hpp"
#include "attackgraph/property_graph.hpp"
#include "attackgraph/reachability.hpp"

namespace ag {

namespace label {
inline constexpr const char* kMergedTopologies = "MergedTopologies";
inline constexpr const char* kMergeSession = "MergeSession";
} // namespace label

struct MergeSession {
    int session_id = 0;
    std::string edge_type;
    std::pair<std::string, std::string> topologies;
    AttrMap vicinity;
    std::vector<EdgeId> created_edges;
    std::vector<std::string> devices;  // names of nodes labelled MergedTopologies by this session
    bool active = true;
    bool reach_updated = false;
};

// topoA joins topoB; the vicinity filter applies to topoB's devices.
MergeSession merge_topologies(PropertyGraph& g, const std::string& topo_a, const std::string& topo_b,
                              const AttrMap& vicinity);

MergeSession load_session(const PropertyGraph& g, int session_id);
std::vector<MergeSession> list_sessions(const PropertyGraph& g);

// Runs incremental reachability over the session's generation and marks
// the session reachability-updated.
ReachabilityReport update_reachability(PropertyGraph& g, int session_id, IncrementalKind kind);

AttackGraphStats merge_attack_graphs(PropertyGraph& g, int session_id, const std::string& target_topology,
                                     const std::string& target_attack_label);

// Deletes the session's generation edges and generation-tagged REACHES
// edges, releases its MergedTopologies labels, closes it. Returns the
// number of edges removed.
std::size_t demerge_topology(PropertyGraph& g, int session_id);

// Detach-deletes MergedAttackGraphs nodes, optionally only those also
// carrying filter. Returns the number of nodes removed.
std::size_t demerge_attack_graphs(PropertyGraph& g, const std::optional<std::string>& filter = std::nullopt);

} // namespace ag
