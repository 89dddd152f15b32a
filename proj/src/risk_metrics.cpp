#include "attackgraph/risk_metrics.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "attackgraph/attack_graph.hpp"

namespace ag {

namespace {

struct Endpoints {
    NodeId start;
    NodeId end;
};

std::optional<NodeId> privilege_node(const PropertyGraph& g, const std::string& device, const LabelSet& labels)
{
    for (NodeId n : g.match_nodes({label::kCondition}, {{"name", privilege_condition_name(device)}}))
        if (g.node(n).has_any_label(labels))
            return n;
    return std::nullopt;
}

std::optional<Endpoints> endpoints(const PropertyGraph& g, const std::string& start, const std::string& end,
                                   const LabelSet& labels)
{
    if (start == end)
        return std::nullopt;
    auto s = privilege_node(g, start, labels);
    auto e = privilege_node(g, end, labels);
    if (!s || !e)
        return std::nullopt;
    return Endpoints{*s, *e};
}

// In-scope successors sorted by name.
std::vector<NodeId> successors(const PropertyGraph& g, NodeId n, const LabelSet& labels)
{
    std::vector<NodeId> out;
    for (const char* type : {edge::kExploits, edge::kLeads}) {
        for (EdgeId e : g.out_edges(n, type)) {
            g.add_visits(1);
            NodeId d = g.edge(e).dst;
            if (g.node(d).has_any_label(labels))
                out.push_back(d);
        }
    }
    std::sort(out.begin(), out.end(), [&](NodeId a, NodeId b) {
        const auto na = g.node(a).name();
        const auto nb = g.node(b).name();
        return na != nb ? na < nb : a < b;
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

AttackPath make_path(const PropertyGraph& g, std::vector<NodeId> nodes)
{
    AttackPath p;
    for (NodeId n : nodes)
        p.names.push_back(g.node(n).name());
    p.nodes = std::move(nodes);
    return p;
}

void dfs(const PropertyGraph& g, NodeId at, NodeId goal, const LabelSet& labels, std::vector<NodeId>& stack,
         std::unordered_set<NodeId>& on_path, std::vector<AttackPath>& out)
{
    if (at == goal) {
        out.push_back(make_path(g, stack));
        return;
    }
    for (NodeId next : successors(g, at, labels)) {
        if (on_path.contains(next))
            continue;
        stack.push_back(next);
        on_path.insert(next);
        dfs(g, next, goal, labels, stack, on_path, out);
        on_path.erase(next);
        stack.pop_back();
    }
}

} // namespace

std::vector<AttackPath> enumerate_attack_paths(const PropertyGraph& g, const std::string& start_device,
                                               const std::string& end_device, const LabelSet& labels)
{
    std::vector<AttackPath> out;
    auto ends = endpoints(g, start_device, end_device, labels);
    if (!ends)
        return out;
    std::vector<NodeId> stack{ends->start};
    std::unordered_set<NodeId> on_path{ends->start};
    dfs(g, ends->start, ends->end, labels, stack, on_path, out);
    std::stable_sort(out.begin(), out.end(), [](const AttackPath& a, const AttackPath& b) { return a.names < b.names; });
    return out;
}

std::optional<AttackPath> shortest_attack_path(const PropertyGraph& g, const std::string& start_device,
                                               const std::string& end_device, const LabelSet& labels)
{
    auto ends = endpoints(g, start_device, end_device, labels);
    if (!ends)
        return std::nullopt;

    // Distance to the goal, over reversed in-scope edges.
    std::unordered_map<NodeId, std::size_t> dist{{ends->end, 0}};
    std::deque<NodeId> frontier{ends->end};
    while (!frontier.empty()) {
        NodeId at = frontier.front();
        frontier.pop_front();
        for (const char* type : {edge::kExploits, edge::kLeads}) {
            for (EdgeId e : g.in_edges(at, type)) {
                g.add_visits(1);
                NodeId prev = g.edge(e).src;
                if (g.node(prev).has_any_label(labels) && dist.emplace(prev, dist[at] + 1).second)
                    frontier.push_back(prev);
            }
        }
    }
    if (!dist.contains(ends->start))
        return std::nullopt;

    std::vector<NodeId> nodes{ends->start};
    while (nodes.back() != ends->end) {
        const std::size_t want = dist.at(nodes.back()) - 1;
        for (NodeId next : successors(g, nodes.back(), labels)) {
            auto it = dist.find(next);
            if (it != dist.end() && it->second == want) {
                nodes.push_back(next);
                break;
            }
        }
    }
    return make_path(g, std::move(nodes));
}

std::size_t count_attack_paths(const PropertyGraph& g, const std::string& start_device,
                               const std::string& end_device, const LabelSet& labels)
{
    return enumerate_attack_paths(g, start_device, end_device, labels).size();
}

PathHistogram path_length_histogram(const PropertyGraph& g, const std::string& start_device,
                                    const std::string& end_device, const LabelSet& labels)
{
    PathHistogram h;
    for (const auto& p : enumerate_attack_paths(g, start_device, end_device, labels))
        ++h[p.length()];
    return h;
}

} // namespace ag
