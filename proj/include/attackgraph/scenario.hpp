#pragma once

// Scenario documents and topology-graph construction.
//
// A scenario document describes one system: its devices, the
// vulnerabilities on them, physical links, and router firewall rules.
// load_scenario() turns it into nodes and edges under the document's
// topology label.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attackgraph/property_graph.hpp"

namespace ag {

// Labels and edge types shared across modules.
namespace label {
inline constexpr const char* kEndDevice = "EndDevice";
inline constexpr const char* kRouter = "Router";
inline constexpr const char* kInternet = "Internet";
inline constexpr const char* kVulnerability = "Vulnerability";
inline constexpr const char* kFirewall = "Firewall";
inline constexpr const char* kTopology = "Topology";
} // namespace label

namespace edge {
inline constexpr const char* kConnectsTo = "CONNECTS_TO";
inline constexpr const char* kHas = "HAS";
inline constexpr const char* kAllows = "ALLOWS";
inline constexpr const char* kDenies = "DENIES";
} // namespace edge

enum class DeviceKind { EndDevice, Router, InternetHost };
enum class RuleAction { Allows, Denies };

struct DeviceSpec {
    std::string name;
    std::string topology;  // defaults to the document's topology when empty
    DeviceKind kind = DeviceKind::EndDevice;
    std::optional<std::string> subnet;
    std::optional<std::string> floor;
    std::vector<std::string> accessibility;
    std::optional<std::string> privilege;
};

struct VulnerabilitySpec {
    std::string cve_id;
    std::string host;
    std::vector<std::string> pre_conditions;
    std::vector<std::string> post_conditions;
};

struct FirewallRuleSpec {
    std::string rule_name;
    std::string router;
    std::string source;
    std::string destination;
    std::string src_port = "any";
    std::string dst_port = "any";
    std::string protocol = "TCP";
    RuleAction action = RuleAction::Allows;
};

struct LinkSpec {
    std::string a;
    std::string b;
    std::string via = "TCP";
};

struct ScenarioDoc {
    std::string topology;
    std::vector<DeviceSpec> devices;
    std::vector<VulnerabilitySpec> vulnerabilities;
    std::vector<LinkSpec> links;
    std::vector<FirewallRuleSpec> firewall_rules;
};

// Protocol tokens accepted in accessibility lists and pre-conditions.
const std::vector<std::string>& protocol_vocabulary();
bool is_privilege_token(const std::string& token);

std::string device_kind_name(DeviceKind kind);
std::string rule_action_name(RuleAction action);
// "subnet 1" -> "Subnet1"
std::string subnet_category(const std::string& subnet);

ScenarioDoc parse_scenario(const std::string& yaml_text);
ScenarioDoc read_scenario_file(const std::filesystem::path& path);

// Checks referential consistency against the document and the devices
// already present in g. Throws ScenarioError.
void validate_scenario(const ScenarioDoc& doc, const PropertyGraph& g);

// Validates, then materializes the document. Nothing is written to g when
// validation fails. Returns the topology label.
std::string load_scenario(const ScenarioDoc& doc, PropertyGraph& g);

struct FirewallExpansion {
    std::size_t rule_nodes = 0;
    std::vector<std::string> warnings;
};

// One Firewall node per (source device, destination device) pair, attached
// to the owning router by an ALLOWS or DENIES edge. "Any" denotes the
// Internet hosts present in g.
FirewallExpansion expand_firewall_rules(std::span<const FirewallRuleSpec> rules,
                                        const std::string& topology, PropertyGraph& g);

// Lookup helpers over loaded topology graphs.
std::optional<NodeId> find_device(const PropertyGraph& g, const std::string& name);
NodeId require_device(const PropertyGraph& g, const std::string& name);
bool topology_registered(const PropertyGraph& g, const std::string& topology);

} // namespace ag
