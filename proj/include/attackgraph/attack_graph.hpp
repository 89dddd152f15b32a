#pragma once

// Exploit-dependency attack graphs.
//
// Condition nodes hold a privilege on a device ("User/SuperUser(X)") or a
// protocol capability between two devices ("FTP(A, B)"). Exploit nodes
// ("CVE(A, B)") consume conditions through EXPLOITS edges and grant the
// post-condition through a LEADS edge.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "attackgraph/property_graph.hpp"

namespace ag {

namespace label {
inline constexpr const char* kCondition = "Condition";
inline constexpr const char* kExploit = "Exploit";
inline constexpr const char* kMergedAttackGraphs = "MergedAttackGraphs";
} // namespace label

namespace edge {
inline constexpr const char* kExploits = "EXPLOITS";
inline constexpr const char* kLeads = "LEADS";
} // namespace edge

struct GenerationParams {
    std::string target_topology;
    std::string attack_graph_label;
    // New nodes also get MergedAttackGraphs and extra_labels; existing
    // nodes are reused untouched.
    bool merged = false;
    LabelSet extra_labels;
    // When set, a source/target pair is only examined if the target is in
    // focus or the source's privilege was created by this run.
    std::optional<std::set<std::string>> focus;
};

struct AttackGraphStats {
    std::uint64_t conditions_created = 0;
    std::uint64_t exploits_created = 0;
    std::uint64_t edges_created = 0;
    std::uint64_t iterations = 0;
    std::vector<std::string> warnings;
};

std::string privilege_condition_name(const std::string& device);
std::string protocol_condition_name(const std::string& protocol, const std::string& src, const std::string& dst);
std::string exploit_name(const std::string& cve, const std::string& src, const std::string& dst);

// Seeds privilege conditions from devices with a privilege attribute, then
// applies exploits over REACHES edges into target-topology devices until
// nothing new is created.
AttackGraphStats generate(PropertyGraph& g, const GenerationParams& params);

// Breaks every directed cycle among nodes carrying attack_label by
// detach-deleting the exploit nodes of a shortest cycle, repeatedly.
// Returns the number of exploits removed.
std::size_t prune_cycles(PropertyGraph& g, const std::string& attack_label);

// Deletes Condition nodes under attack_label that have no incident edge.
std::size_t remove_orphan_conditions(PropertyGraph& g, const std::string& attack_label);

} // namespace ag
