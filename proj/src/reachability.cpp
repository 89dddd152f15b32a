#include "attackgraph/reachability.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <regex>
#include <set>
#include <unordered_set>

#include "attackgraph/errors.hpp"
#include "attackgraph/scenario.hpp"

namespace ag {

namespace {

const AttrMap kTcp{{"via", std::string("TCP")}};

bool is_tcp(const Edge& e) { return attrs_match(e.attrs, kTcp); }

std::vector<NodeId> sorted_by_name(const PropertyGraph& g, std::vector<NodeId> ids)
{
    std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
        const auto na = g.node(a).name();
        const auto nb = g.node(b).name();
        return na != nb ? na < nb : a < b;
    });
    return ids;
}

std::vector<NodeId> end_devices(const PropertyGraph& g, const NodeFilter& filter)
{
    LabelSet labels = filter.labels;
    labels.insert(label::kEndDevice);
    return sorted_by_name(g, g.match_nodes(labels, filter.attrs));
}

bool same_subnet(const Node& a, const Node& b)
{
    auto sa = a.text("subnet");
    auto sb = b.text("subnet");
    return sa && sb && *sa == *sb;
}

bool direct_edge(const PropertyGraph& g, NodeId n, NodeId m, const std::set<std::string>& types)
{
    for (const auto& t : types) {
        for (EdgeId e : g.out_edges(n, t)) {
            g.add_visits(1);
            if (g.edge(e).dst == m)
                return true;
        }
    }
    return false;
}

// Creates n-[:REACHES]->m unless some REACHES edge already joins the pair.
bool ensure_reaches(PropertyGraph& g, NodeId n, NodeId m, const AttrMap& attrs)
{
    for (EdgeId e : g.out_edges(n, edge::kReaches)) {
        g.add_visits(1);
        if (g.edge(e).dst == m)
            return false;
    }
    g.create_edge(n, m, edge::kReaches, attrs);
    return true;
}

class Recorder {
public:
    Recorder(PropertyGraph& g, AttrMap tag) : g_(g), tag_(std::move(tag)) {}

    void offer(NodeId n, NodeId m)
    {
        if (n == m)
            return;
        if (ensure_reaches(g_, n, m, tag_))
            added_.emplace_back(g_.node(n).name(), g_.node(m).name());
    }

    std::vector<std::pair<std::string, std::string>> take() { return std::move(added_); }

private:
    PropertyGraph& g_;
    AttrMap tag_;
    std::vector<std::pair<std::string, std::string>> added_;
};

// Same-subnet clause, evaluated by bucketing end devices on their subnet.
void subnet_pairs(const PropertyGraph& g, const std::vector<NodeId>& devices, Recorder& rec)
{
    std::map<std::string, std::vector<NodeId>> buckets;
    for (NodeId n : devices)
        if (auto s = g.node(n).text("subnet"))
            buckets[*s].push_back(n);
    for (const auto& [subnet, members] : buckets)
        for (NodeId a : members)
            for (NodeId b : members) {
                g.add_visits(1);
                rec.offer(a, b);
            }
}

void check_generation(const std::string& generation)
{
    if (!generation_index(generation))
        throw UnknownGeneration("unknown merge generation '" + generation + "'");
}

ReachabilityReport paper_faithful(PropertyGraph& g, const std::string& gen)
{
    const auto before = g.visits();
    Recorder rec(g, {{kGenerationAttr, gen}});
    subnet_pairs(g, end_devices(g, {}), rec);

    std::set<NodeId> source_set;
    for (EdgeId e : g.edges_of_type(gen)) {
        g.add_visits(1);
        NodeId src = g.edge(e).src;
        if (g.node(src).has_label(label::kEndDevice))
            source_set.insert(src);
    }
    for (NodeId n : sorted_by_name(g, {source_set.begin(), source_set.end()})) {
        std::set<NodeId> direct;
        for (EdgeId e : g.out_edges(n, gen)) {
            g.add_visits(1);
            NodeId m = g.edge(e).dst;
            if (m != n && g.node(m).has_label(label::kEndDevice))
                direct.insert(m);
        }
        // TCP paths made only of generation edges.
        std::set<NodeId> via_tcp;
        std::unordered_set<NodeId> seen{n};
        std::deque<NodeId> frontier{n};
        while (!frontier.empty()) {
            NodeId at = frontier.front();
            frontier.pop_front();
            g.add_visits(1);
            for (EdgeId e : g.out_edges(at, gen)) {
                g.add_visits(1);
                const Edge& ed = g.edge(e);
                if (!is_tcp(ed))
                    continue;
                if (ed.dst != n && g.node(ed.dst).has_label(label::kEndDevice))
                    via_tcp.insert(ed.dst);
                if (seen.insert(ed.dst).second)
                    frontier.push_back(ed.dst);
            }
        }
        const auto name = g.node(n).name();
        for (NodeId m : sorted_by_name(g, {via_tcp.begin(), via_tcp.end()}))
            if (!direct.contains(m) && firewall_permits(g, name, g.node(m).name()))
                direct.insert(m);
        for (NodeId m : sorted_by_name(g, {direct.begin(), direct.end()}))
            rec.offer(n, m);
    }
    return {rec.take(), g.visits() - before, IncrementalPaperFaithful{gen}};
}

ReachabilityReport sound(PropertyGraph& g, const std::string& gen)
{
    const auto before = g.visits();
    Recorder rec(g, {{kGenerationAttr, gen}});
    subnet_pairs(g, end_devices(g, {}), rec);
    const auto types = connection_edge_types(g);

    std::set<std::pair<NodeId, NodeId>> found;
    std::set<NodeId> tcp_tails;
    for (EdgeId e : g.edges_of_type(gen)) {
        g.add_visits(1);
        const Edge& ed = g.edge(e);
        if (g.node(ed.src).has_label(label::kEndDevice) && g.node(ed.dst).has_label(label::kEndDevice) &&
            ed.src != ed.dst)
            found.emplace(ed.src, ed.dst);
        if (is_tcp(ed))
            tcp_tails.insert(ed.src);
    }

    // Devices that can walk to the tail of a generation TCP edge.
    std::set<NodeId> candidates;
    {
        std::unordered_set<NodeId> seen(tcp_tails.begin(), tcp_tails.end());
        std::deque<NodeId> frontier(tcp_tails.begin(), tcp_tails.end());
        while (!frontier.empty()) {
            NodeId at = frontier.front();
            frontier.pop_front();
            g.add_visits(1);
            if (g.node(at).has_label(label::kEndDevice))
                candidates.insert(at);
            for (const auto& t : types)
                for (EdgeId e : g.in_edges(at, t)) {
                    g.add_visits(1);
                    const Edge& ed = g.edge(e);
                    if (is_tcp(ed) && seen.insert(ed.src).second)
                        frontier.push_back(ed.src);
                }
        }
    }

    // Walk (node, used-a-generation-edge) states from each candidate.
    for (NodeId n : sorted_by_name(g, {candidates.begin(), candidates.end()})) {
        std::set<std::pair<NodeId, bool>> seen{{n, false}};
        std::deque<std::pair<NodeId, bool>> frontier{{n, false}};
        std::set<NodeId> reached;
        while (!frontier.empty()) {
            auto [at, used] = frontier.front();
            frontier.pop_front();
            g.add_visits(1);
            if (used && at != n && g.node(at).has_label(label::kEndDevice))
                reached.insert(at);
            for (const auto& t : types)
                for (EdgeId e : g.out_edges(at, t)) {
                    g.add_visits(1);
                    const Edge& ed = g.edge(e);
                    if (!is_tcp(ed))
                        continue;
                    std::pair<NodeId, bool> next{ed.dst, used || t == gen};
                    if (seen.insert(next).second)
                        frontier.push_back(next);
                }
        }
        const auto name = g.node(n).name();
        for (NodeId m : reached)
            if (!found.contains({n, m}) && firewall_permits(g, name, g.node(m).name()))
                found.emplace(n, m);
    }

    std::vector<std::pair<NodeId, NodeId>> ordered(found.begin(), found.end());
    std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
        auto ka = std::make_pair(g.node(a.first).name(), g.node(a.second).name());
        auto kb = std::make_pair(g.node(b.first).name(), g.node(b.second).name());
        return ka < kb;
    });
    for (const auto& [n, m] : ordered)
        rec.offer(n, m);
    return {rec.take(), g.visits() - before, IncrementalSound{gen}};
}

} // namespace

std::string generation_edge_type(int k)
{
    if (k < 1)
        throw std::invalid_argument("merge generation index must be >= 1");
    return k == 1 ? std::string("NEW_CONNECTS_TO") : "NEW" + std::to_string(k) + "_CONNECTS_TO";
}

std::optional<int> generation_index(const std::string& edge_type)
{
    static const std::regex pattern("NEW([0-9]*)_CONNECTS_TO");
    std::smatch m;
    if (!std::regex_match(edge_type, m, pattern))
        return std::nullopt;
    if (m[1].length() == 0)
        return 1;
    int k = std::stoi(m[1].str());
    if (k < 2)
        return std::nullopt;
    return k;
}

std::set<std::string> connection_edge_types(const PropertyGraph& g)
{
    std::set<std::string> types{edge::kConnectsTo};
    for (const auto& t : g.edge_types())
        if (generation_index(t))
            types.insert(t);
    return types;
}

bool firewall_permits(const PropertyGraph& g, const std::string& source, const std::string& destination)
{
    bool allowed = false;
    for (NodeId fw : g.match_nodes({label::kFirewall}, {{"source", source}, {"destination", destination}})) {
        for (EdgeId e : g.in_edges(fw, edge::kDenies)) {
            g.add_visits(1);
            if (g.node(g.edge(e).src).has_label(label::kRouter))
                return false;
        }
        for (EdgeId e : g.in_edges(fw, edge::kAllows)) {
            g.add_visits(1);
            if (g.node(g.edge(e).src).has_label(label::kRouter))
                allowed = true;
        }
    }
    return allowed;
}

ReachabilityReport compute_full(PropertyGraph& g, const NodeFilter& scope)
{
    return compute_full(g, scope, scope);
}

ReachabilityReport compute_full(PropertyGraph& g, const NodeFilter& source, const NodeFilter& target)
{
    const auto before = g.visits();
    const auto types = connection_edge_types(g);
    Recorder rec(g, {});
    const auto sources = end_devices(g, source);
    const auto targets = end_devices(g, target);
    for (NodeId n : sources) {
        for (NodeId m : targets) {
            if (n == m)
                continue;
            g.add_visits(1);
            const Node& nd = g.node(n);
            const Node& md = g.node(m);
            bool ok = same_subnet(nd, md) || direct_edge(g, n, m, types) ||
                      (g.path_exists(n, m, types, kTcp) && firewall_permits(g, nd.name(), md.name()));
            if (ok)
                rec.offer(n, m);
        }
    }
    return {rec.take(), g.visits() - before, FullScope{source, target}};
}

ReachabilityReport compute_incremental(PropertyGraph& g, IncrementalKind kind, const std::string& generation)
{
    check_generation(generation);
    return kind == IncrementalKind::PaperFaithful ? paper_faithful(g, generation) : sound(g, generation);
}

bool reaches(const PropertyGraph& g, const std::string& a, const std::string& b)
{
    NodeId n = require_device(g, a);
    NodeId m = require_device(g, b);
    if (n == m)
        return false;
    for (EdgeId e : g.out_edges(n, edge::kReaches))
        if (g.edge(e).dst == m)
            return true;
    return false;
}

std::vector<std::pair<std::string, std::string>> reaches_pairs(const PropertyGraph& g)
{
    std::set<std::pair<std::string, std::string>> pairs;
    for (EdgeId e : g.edges_of_type(edge::kReaches)) {
        const Edge& ed = g.edge(e);
        pairs.emplace(g.node(ed.src).name(), g.node(ed.dst).name());
    }
    return {pairs.begin(), pairs.end()};
}

} // namespace ag
