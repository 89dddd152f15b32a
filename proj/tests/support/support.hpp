#pragma once

// Test-only helpers: brute-force oracles, random scenario generators and
// the case-study pipeline.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "attackgraph/property_graph.hpp"
#include "attackgraph/scenario.hpp"

namespace agtest {

using ag::NodeId;
using ag::PropertyGraph;
using NamePairs = std::set<std::pair<std::string, std::string>>;

std::string fixture(const std::string& file);
std::string golden(const std::string& file);

// ---- oracles ------------------------------------------------------------

// Reachability by the three clauses, evaluated with a Floyd-Warshall
// closure over TCP connection edges read straight from the edge list.
NamePairs reach_oracle(const PropertyGraph& g);

// Exploit names obtained by propagating privileges breadth-first from the
// target topology's privileged devices over the materialized REACHES edges.
std::set<std::string> exploit_oracle(const PropertyGraph& g, const std::string& target_topology);

// Every simple path between two nodes by exhaustive DFS over the raw edge
// list, as name sequences; nodes must carry one of `labels`.
std::vector<std::vector<std::string>> path_oracle(const PropertyGraph& g, const std::string& from_node,
                                                  const std::string& to_node, const ag::LabelSet& labels);

// Kahn's algorithm over the nodes carrying `label`; true when acyclic.
bool topologically_sortable(const PropertyGraph& g, const std::string& label);

NamePairs reaches_set(const PropertyGraph& g);
std::set<std::string> names_with_label(const PropertyGraph& g, const std::string& label);

// ---- random instances ---------------------------------------------------

struct RandomShape {
    int max_devices = 12;
    int max_routers = 4;
    int max_rules = 8;
};

ag::ScenarioDoc random_scenario(std::mt19937& rng, const std::string& topology, const std::string& prefix,
                                const RandomShape& shape = {});

// Firewall rules whose endpoints may name any end device in g.
std::vector<ag::FirewallRuleSpec> random_cross_rules(std::mt19937& rng, const PropertyGraph& g,
                                                     const std::string& topology, int count);

// ---- case study ---------------------------------------------------------

inline const ag::LabelSet kMetricLabels{"PatientAttackGraph", "ClinicAttackGraph", "MergedAttackGraphs"};

// Loads both fixtures, derives reachability, builds the pruned clinic and
// the patient attack graphs.
PropertyGraph case_study_base();

struct FloorRun {
    int session = 0;
    std::size_t reach_added = 0;
    std::uint64_t reach_visits = 0;
};

// Merge for "floor N", paper-faithful incremental reach, attack merge.
FloorRun run_floor(PropertyGraph& g, int floor, const std::string& target_topology,
                   const std::string& target_label);

// Canonical archive text without merge-session records.
std::string snapshot(const PropertyGraph& g);

} // namespace agtest
