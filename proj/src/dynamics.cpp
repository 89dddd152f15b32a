#include "attackgraph/dynamics.hpp"

#include <algorithm>
#include <set>

#include "attackgraph/errors.hpp"
#include "attackgraph/scenario.hpp"

namespace ag {

namespace {

constexpr const char* kActive = "active";
constexpr const char* kClosed = "closed";

bool has_protocol(const Node& n, const std::string& proto)
{
    auto acc = n.list("accessibility");
    return std::find(acc.begin(), acc.end(), proto) != acc.end();
}

NodeId session_node(const PropertyGraph& g, int session_id)
{
    auto hits = g.match_nodes({label::kMergeSession}, {{"session", std::to_string(session_id)}});
    if (hits.empty())
        throw UnknownSession("unknown merge session " + std::to_string(session_id));
    return hits.front();
}

MergeSession read_session(const PropertyGraph& g, NodeId n)
{
    const Node& nd = g.node(n);
    MergeSession s;
    s.session_id = std::stoi(nd.text("session").value_or("0"));
    s.edge_type = nd.text("edgeType").value_or("");
    auto topos = nd.list("topologies");
    if (topos.size() == 2)
        s.topologies = {topos[0], topos[1]};
    for (const auto& kv : nd.list("vicinity")) {
        auto eq = kv.find('=');
        if (eq != std::string::npos)
            s.vicinity[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    s.devices = nd.list("devices");
    s.active = nd.text("state") == kActive;
    s.reach_updated = nd.text("reachUpdated") == "true";
    if (!s.edge_type.empty())
        s.created_edges = g.edges_of_type(s.edge_type);
    return s;
}

void require_topology(const PropertyGraph& g, const std::string& topo)
{
    if (!topology_registered(g, topo))
        throw UnknownTopology("unknown topology '" + topo + "'");
}

MergeSession require_active(const PropertyGraph& g, int session_id)
{
    auto s = load_session(g, session_id);
    if (!s.active)
        throw SessionStateError("merge session " + std::to_string(session_id) + " is already demerged");
    return s;
}

} // namespace

MergeSession merge_topologies(PropertyGraph& g, const std::string& topo_a, const std::string& topo_b,
                              const AttrMap& vicinity)
{
    require_topology(g, topo_a);
    require_topology(g, topo_b);
    if (topo_a == topo_b)
        throw Error("cannot merge topology '" + topo_a + "' with itself");

    int last_session = 0;
    int last_generation = 0;
    for (const auto& s : list_sessions(g)) {
        last_session = std::max(last_session, s.session_id);
        last_generation = std::max(last_generation, generation_index(s.edge_type).value_or(0));
    }
    for (const auto& t : g.edge_types())
        last_generation = std::max(last_generation, generation_index(t).value_or(0));

    MergeSession s;
    s.session_id = last_session + 1;
    s.edge_type = generation_edge_type(last_generation + 1);
    s.topologies = {topo_a, topo_b};
    s.vicinity = vicinity;

    std::set<NodeId> touched;
    auto link = [&](NodeId a, NodeId b, const std::string& via) {
        for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
            auto [e, created] = g.merge_edge(x, y, s.edge_type, {{"via", via}});
            if (created)
                s.created_edges.push_back(e);
        }
        touched.insert(a);
        touched.insert(b);
    };

    // IP end devices of one side attach to the other side's routers.
    for (auto [mine, other] : {std::pair{topo_a, topo_b}, std::pair{topo_b, topo_a}}) {
        auto routers = g.match_nodes({other, label::kRouter});
        for (NodeId d : g.match_nodes({mine, label::kEndDevice}, {{"accessibility", std::string("IP")}}))
            for (NodeId r : routers)
                link(d, r, "TCP");
    }
    // Bluetooth devices pair up with those in the host's vicinity.
    auto near = g.match_nodes({topo_b, label::kEndDevice}, vicinity);
    for (NodeId a : g.match_nodes({topo_a, label::kEndDevice})) {
        if (!has_protocol(g.node(a), "Bluetooth"))
            continue;
        for (NodeId b : near)
            if (has_protocol(g.node(b), "Bluetooth"))
                link(a, b, "Bluetooth");
    }

    for (NodeId n : touched) {
        g.add_label(n, label::kMergedTopologies);
        s.devices.push_back(g.node(n).name());
    }
    std::sort(s.devices.begin(), s.devices.end());

    TextList vic;
    for (const auto& [k, v] : vicinity)
        vic.push_back(k + "=" + to_string(v));
    g.create_node({label::kMergeSession}, {{"name", "session " + std::to_string(s.session_id)},
                                           {"session", std::to_string(s.session_id)},
                                           {"edgeType", s.edge_type},
                                           {"topologies", TextList{topo_a, topo_b}},
                                           {"vicinity", vic},
                                           {"devices", s.devices},
                                           {"state", std::string(kActive)},
                                           {"reachUpdated", std::string("false")}});
    return s;
}

MergeSession load_session(const PropertyGraph& g, int session_id)
{
    return read_session(g, session_node(g, session_id));
}

std::vector<MergeSession> list_sessions(const PropertyGraph& g)
{
    std::vector<MergeSession> out;
    for (NodeId n : g.match_nodes({label::kMergeSession}))
        out.push_back(read_session(g, n));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.session_id < b.session_id; });
    return out;
}

ReachabilityReport update_reachability(PropertyGraph& g, int session_id, IncrementalKind kind)
{
    auto s = require_active(g, session_id);
    auto report = compute_incremental(g, kind, s.edge_type);
    g.set_attr(session_node(g, session_id), "reachUpdated", std::string("true"));
    return report;
}

AttackGraphStats merge_attack_graphs(PropertyGraph& g, int session_id, const std::string& target_topology,
                                     const std::string& target_attack_label)
{
    auto s = require_active(g, session_id);
    if (!s.reach_updated)
        throw SessionStateError("merge session " + std::to_string(session_id) +
                                " needs its reachability update before the attack-graph merge");
    require_topology(g, target_topology);

    GenerationParams p;
    p.target_topology = target_topology;
    p.attack_graph_label = target_attack_label;
    p.merged = true;
    p.extra_labels = {s.topologies.first};
    p.focus = std::set<std::string>(s.devices.begin(), s.devices.end());
    return generate(g, p);
}

std::size_t demerge_topology(PropertyGraph& g, int session_id)
{
    auto s = require_active(g, session_id);
    std::size_t removed = 0;
    for (EdgeId e : g.edges_of_type(s.edge_type)) {
        g.delete_edge(e);
        ++removed;
    }
    for (EdgeId e : g.edges_of_type(edge::kReaches)) {
        if (attrs_match(g.edge(e).attrs, {{kGenerationAttr, s.edge_type}})) {
            g.delete_edge(e);
            ++removed;
        }
    }

    // Keep the label on devices another active session still claims.
    std::set<std::string> claimed;
    for (const auto& other : list_sessions(g))
        if (other.active && other.session_id != session_id)
            claimed.insert(other.devices.begin(), other.devices.end());
    for (const auto& name : s.devices) {
        if (claimed.contains(name))
            continue;
        for (NodeId n : g.match_nodes({label::kMergedTopologies}, {{"name", name}}))
            g.remove_label(n, label::kMergedTopologies);
    }

    NodeId sn = session_node(g, session_id);
    g.set_attr(sn, "state", std::string(kClosed));
    return removed;
}

std::size_t demerge_attack_graphs(PropertyGraph& g, const std::optional<std::string>& filter)
{
    LabelSet labels{label::kMergedAttackGraphs};
    if (filter)
        labels.insert(*filter);
    auto doomed = g.match_nodes(labels);
    for (NodeId n : doomed)
        g.detach_delete(n);
    return doomed.size();
}

} // namespace ag
