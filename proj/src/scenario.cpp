#include "attackgraph/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "attackgraph/errors.hpp"

namespace ag {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_any(const std::string& s) { return lower(s) == "any"; }

bool contains(const std::vector<std::string>& list, const std::string& item)
{
    return std::find(list.begin(), list.end(), item) != list.end();
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where)
{
    for (const auto& kv : node) {
        auto key = kv.first.as<std::string>();
        if (!allowed.contains(key))
            throw ScenarioError(where + ": unknown key '" + key + "'");
    }
}

std::string required_text(const YAML::Node& node, const std::string& key, const std::string& where)
{
    if (!node[key] || !node[key].IsScalar())
        throw ScenarioError(where + ": missing text field '" + key + "'");
    return node[key].as<std::string>();
}

std::optional<std::string> optional_text(const YAML::Node& node, const std::string& key)
{
    if (!node[key] || node[key].IsNull())
        return std::nullopt;
    return node[key].as<std::string>();
}

std::vector<std::string> text_list(const YAML::Node& node, const std::string& key, const std::string& where)
{
    std::vector<std::string> out;
    if (!node[key] || node[key].IsNull())
        return out;
    if (!node[key].IsSequence())
        throw ScenarioError(where + ": field '" + key + "' must be a list");
    for (const auto& item : node[key])
        out.push_back(item.as<std::string>());
    return out;
}

DeviceKind parse_kind(const std::string& text, const std::string& where)
{
    if (text == "EndDevice")
        return DeviceKind::EndDevice;
    if (text == "Router")
        return DeviceKind::Router;
    if (text == "Internet-host")
        return DeviceKind::InternetHost;
    throw ScenarioError(where + ": unknown device kind '" + text + "'");
}

RuleAction parse_action(const std::string& text, const std::string& where)
{
    auto up = text;
    std::transform(up.begin(), up.end(), up.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "ALLOWS")
        return RuleAction::Allows;
    if (up == "DENIES")
        return RuleAction::Denies;
    throw ScenarioError(where + ": unknown firewall action '" + text + "'");
}

bool is_end_device(DeviceKind k) { return k != DeviceKind::Router; }

// Devices named in a firewall rule endpoint, resolved against the graph.
std::vector<NodeId> resolve_endpoint(const PropertyGraph& g, const std::string& ref)
{
    if (is_any(ref))
        return g.match_nodes({label::kInternet, label::kEndDevice});
    if (auto dev = find_device(g, ref); dev && g.node(*dev).has_label(label::kEndDevice))
        return {*dev};
    std::vector<NodeId> members;
    for (NodeId n : g.match_nodes({label::kEndDevice})) {
        auto subnet = g.node(n).text("subnet");
        if (subnet && lower(*subnet) == lower(ref))
            members.push_back(n);
    }
    return members;
}

} // namespace

const std::vector<std::string>& protocol_vocabulary()
{
    static const std::vector<std::string> vocab = {
        "IP", "TCP", "UDP", "HTTP", "HTTPS", "FTP", "SSH", "MYSQL", "SMB", "RDP", "Telnet",
        "Bluetooth", "L2CAP", "SDP", "ZigBee", "WiFi", "NFC",
    };
    return vocab;
}

bool is_privilege_token(const std::string& token) { return token == "User" || token == "SuperUser"; }

std::string device_kind_name(DeviceKind kind)
{
    switch (kind) {
    case DeviceKind::EndDevice:
        return "EndDevice";
    case DeviceKind::Router:
        return "Router";
    case DeviceKind::InternetHost:
        return "Internet-host";
    }
    return "EndDevice";
}

std::string rule_action_name(RuleAction action)
{
    return action == RuleAction::Allows ? edge::kAllows : edge::kDenies;
}

std::string subnet_category(const std::string& subnet)
{
    std::string out;
    bool upper_next = true;
    for (char c : subnet) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            upper_next = true;
            continue;
        }
        out += upper_next ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
        upper_next = false;
    }
    return out;
}

ScenarioDoc parse_scenario(const std::string& yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ScenarioError(std::string("malformed scenario document: ") + e.what());
    }
    if (!root.IsMap())
        throw ScenarioError("scenario document must be a mapping");
    check_keys(root, {"topology", "devices", "vulnerabilities", "links", "firewall_rules"}, "scenario");

    ScenarioDoc doc;
    try {
        doc.topology = required_text(root, "topology", "scenario");
        for (const auto& d : root["devices"]) {
            std::string where = "device";
            check_keys(d, {"name", "topology", "kind", "subnet", "floor", "accessibility", "privilege"}, where);
            DeviceSpec spec;
            spec.name = required_text(d, "name", where);
            where += " '" + spec.name + "'";
            spec.topology = optional_text(d, "topology").value_or("");
            spec.kind = parse_kind(optional_text(d, "kind").value_or("EndDevice"), where);
            spec.subnet = optional_text(d, "subnet");
            spec.floor = optional_text(d, "floor");
            spec.accessibility = text_list(d, "accessibility", where);
            spec.privilege = optional_text(d, "privilege");
            doc.devices.push_back(std::move(spec));
        }
        for (const auto& v : root["vulnerabilities"]) {
            std::string where = "vulnerability";
            check_keys(v, {"cve_id", "host", "pre_conditions", "post_conditions"}, where);
            VulnerabilitySpec spec;
            spec.cve_id = required_text(v, "cve_id", where);
            spec.host = required_text(v, "host", where);
            spec.pre_conditions = text_list(v, "pre_conditions", where);
            spec.post_conditions = text_list(v, "post_conditions", where);
            doc.vulnerabilities.push_back(std::move(spec));
        }
        for (const auto& l : root["links"]) {
            check_keys(l, {"a", "b", "via"}, "link");
            LinkSpec spec;
            spec.a = required_text(l, "a", "link");
            spec.b = required_text(l, "b", "link");
            spec.via = optional_text(l, "via").value_or("TCP");
            doc.links.push_back(std::move(spec));
        }
        for (const auto& r : root["firewall_rules"]) {
            std::string where = "firewall rule";
            check_keys(r, {"rule_name", "router", "source", "destination", "src_port", "dst_port", "protocol",
                           "action"},
                       where);
            FirewallRuleSpec spec;
            spec.rule_name = required_text(r, "rule_name", where);
            spec.router = required_text(r, "router", where);
            spec.source = required_text(r, "source", where);
            spec.destination = required_text(r, "destination", where);
            spec.src_port = optional_text(r, "src_port").value_or("any");
            spec.dst_port = optional_text(r, "dst_port").value_or("any");
            spec.protocol = optional_text(r, "protocol").value_or("TCP");
            spec.action = parse_action(required_text(r, "action", where), where);
            doc.firewall_rules.push_back(std::move(spec));
        }
    } catch (const YAML::Exception& e) {
        throw ScenarioError(std::string("malformed scenario document: ") + e.what());
    }
    return doc;
}

ScenarioDoc read_scenario_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open scenario file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void validate_scenario(const ScenarioDoc& doc, const PropertyGraph& g)
{
    if (doc.topology.empty())
        throw ScenarioError("scenario has no topology label");

    std::map<std::string, const DeviceSpec*> devices;
    std::set<std::string> subnets;
    const auto& vocab = protocol_vocabulary();
    for (const auto& d : doc.devices) {
        if (d.name.empty())
            throw ScenarioError("device with empty name");
        if (!devices.emplace(d.name, &d).second || find_device(g, d.name))
            throw ScenarioError("duplicate device name '" + d.name + "'");
        if (!d.topology.empty() && d.topology != doc.topology)
            throw ScenarioError("device '" + d.name + "' belongs to topology '" + d.topology +
                                "', expected '" + doc.topology + "'");
        for (const auto& a : d.accessibility)
            if (!contains(vocab, a))
                throw ScenarioError("device '" + d.name + "': unknown protocol '" + a + "'");
        if (d.privilege) {
            if (!is_end_device(d.kind))
                throw ScenarioError("device '" + d.name + "': privilege only applies to end devices");
            if (!is_privilege_token(*d.privilege))
                throw ScenarioError("device '" + d.name + "': privilege must be User or SuperUser");
        }
        if (d.subnet)
            subnets.insert(lower(*d.subnet));
    }
    for (NodeId n : g.match_nodes({label::kEndDevice}))
        if (auto s = g.node(n).text("subnet"))
            subnets.insert(lower(*s));

    for (const auto& v : doc.vulnerabilities) {
        auto it = devices.find(v.host);
        if (it == devices.end())
            throw ScenarioError("vulnerability " + v.cve_id + ": unknown host '" + v.host + "'");
        if (!is_end_device(it->second->kind))
            throw ScenarioError("vulnerability " + v.cve_id + ": host '" + v.host + "' is not an end device");
        if (v.pre_conditions.empty() || v.post_conditions.empty())
            throw ScenarioError("vulnerability " + v.cve_id + " on '" + v.host +
                                "' needs pre- and post-conditions");
        for (const auto& c : v.pre_conditions)
            if (!is_privilege_token(c) && !contains(vocab, c))
                throw ScenarioError("vulnerability " + v.cve_id + ": unknown pre-condition '" + c + "'");
        for (const auto& c : v.post_conditions)
            if (!is_privilege_token(c))
                throw ScenarioError("vulnerability " + v.cve_id + ": post-condition '" + c +
                                    "' is not a privilege");
    }
    for (const auto& l : doc.links) {
        for (const auto* end : {&l.a, &l.b})
            if (!devices.contains(*end))
                throw ScenarioError("link " + l.a + " - " + l.b + ": unknown device '" + *end + "'");
        if (l.a == l.b)
            throw ScenarioError("link " + l.a + " - " + l.b + " is a self-loop");
        if (!contains(vocab, l.via))
            throw ScenarioError("link " + l.a + " - " + l.b + ": unknown protocol '" + l.via + "'");
    }
    for (const auto& r : doc.firewall_rules) {
        auto it = devices.find(r.router);
        if (it == devices.end() || it->second->kind != DeviceKind::Router)
            throw ScenarioError("firewall rule " + r.rule_name + ": unknown router '" + r.router + "'");
        for (const auto* end : {&r.source, &r.destination}) {
            if (is_any(*end) || subnets.contains(lower(*end)))
                continue;
            auto dev = devices.find(*end);
            if (dev != devices.end() && is_end_device(dev->second->kind))
                continue;
            auto existing = find_device(g, *end);
            if (existing && g.node(*existing).has_label(label::kEndDevice))
                continue;
            throw ScenarioError("firewall rule " + r.rule_name + ": unknown source/destination '" + *end + "'");
        }
    }
}

std::string load_scenario(const ScenarioDoc& doc, PropertyGraph& g)
{
    validate_scenario(doc, g);
    const std::string& topo = doc.topology;
    g.merge_node({label::kTopology}, {{"name", topo}});

    std::map<std::string, NodeId> ids;
    for (const auto& d : doc.devices) {
        LabelSet labels{topo};
        AttrMap attrs{{"name", d.name}};
        switch (d.kind) {
        case DeviceKind::Router:
            labels.insert(label::kRouter);
            break;
        case DeviceKind::InternetHost:
            labels.insert(label::kInternet);
            [[fallthrough]];
        case DeviceKind::EndDevice:
            labels.insert(label::kEndDevice);
            attrs["accessibility"] = d.accessibility;
            break;
        }
        if (d.subnet) {
            attrs["subnet"] = *d.subnet;
            labels.insert(subnet_category(*d.subnet));
        }
        if (d.floor)
            attrs["floor"] = *d.floor;
        if (d.privilege)
            attrs["privilege"] = *d.privilege;
        ids[d.name] = g.create_node(std::move(labels), std::move(attrs));
    }
    for (const auto& v : doc.vulnerabilities) {
        NodeId vn = g.create_node({topo, label::kVulnerability},
                                  {{"name", v.cve_id},
                                   {"host", v.host},
                                   {"preConditions", v.pre_conditions},
                                   {"postConditions", v.post_conditions}});
        g.merge_edge(ids.at(v.host), vn, edge::kHas);
    }
    for (const auto& l : doc.links) {
        g.merge_edge(ids.at(l.a), ids.at(l.b), edge::kConnectsTo, {{"via", l.via}});
        g.merge_edge(ids.at(l.b), ids.at(l.a), edge::kConnectsTo, {{"via", l.via}});
    }
    expand_firewall_rules(doc.firewall_rules, topo, g);
    return topo;
}

FirewallExpansion expand_firewall_rules(std::span<const FirewallRuleSpec> rules, const std::string& topology,
                                        PropertyGraph& g)
{
    FirewallExpansion out;
    for (const auto& r : rules) {
        auto router = find_device(g, r.router);
        if (!router || !g.node(*router).has_label(label::kRouter))
            throw ScenarioError("firewall rule " + r.rule_name + ": unknown router '" + r.router + "'");
        auto sources = resolve_endpoint(g, r.source);
        auto destinations = resolve_endpoint(g, r.destination);
        std::size_t made = 0;
        for (NodeId s : sources) {
            for (NodeId d : destinations) {
                if (s == d)
                    continue;
                auto [fw, created] = g.merge_node({topology, label::kFirewall},
                                                  {{"name", r.rule_name},
                                                   {"source", g.node(s).name()},
                                                   {"destination", g.node(d).name()},
                                                   {"srcPort", r.src_port},
                                                   {"dstPort", r.dst_port},
                                                   {"protocol", r.protocol}});
                g.merge_edge(*router, fw, rule_action_name(r.action));
                if (created)
                    ++made;
            }
        }
        if (made == 0)
            out.warnings.push_back("firewall rule " + r.rule_name + " on " + r.router + " (" + r.source +
                                   " -> " + r.destination + ") expands to no device pair");
        out.rule_nodes += made;
    }
    return out;
}

std::optional<NodeId> find_device(const PropertyGraph& g, const std::string& name)
{
    for (NodeId n : g.match_nodes({}, {{"name", name}})) {
        const Node& nd = g.node(n);
        if (nd.has_label(label::kEndDevice) || nd.has_label(label::kRouter))
            return n;
    }
    return std::nullopt;
}

NodeId require_device(const PropertyGraph& g, const std::string& name)
{
    if (auto n = find_device(g, name))
        return *n;
    throw UnknownDevice("unknown device '" + name + "'");
}

bool topology_registered(const PropertyGraph& g, const std::string& topology)
{
    return !g.match_nodes({label::kTopology}, {{"name", topology}}).empty();
}

} // namespace ag
