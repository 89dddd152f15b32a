#include "attackgraph/attack_graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>
#include <unordered_map>

#include "attackgraph/reachability.hpp"
#include "attackgraph/scenario.hpp"

namespace ag {

namespace {

class Builder {
public:
    Builder(PropertyGraph& g, const GenerationParams& p, AttackGraphStats& stats)
        : g_(g), p_(p), stats_(stats)
    {
    }

    // Returns the node and whether it was created now.
    std::pair<NodeId, bool> node(const char* kind, const std::string& name)
    {
        auto [id, created] = g_.merge_node({kind}, {{"name", name}});
        if (created) {
            g_.add_label(id, p_.attack_graph_label);
            if (p_.merged) {
                g_.add_label(id, label::kMergedAttackGraphs);
                for (const auto& l : p_.extra_labels)
                    g_.add_label(id, l);
            }
            if (std::string(kind) == label::kCondition)
                ++stats_.conditions_created;
            else
                ++stats_.exploits_created;
            changed_ = true;
        } else if (!p_.merged) {
            g_.add_label(id, p_.attack_graph_label);
        }
        return {id, created};
    }

    void link(NodeId a, NodeId b, const char* type)
    {
        if (g_.merge_edge(a, b, type).second) {
            ++stats_.edges_created;
            changed_ = true;
        }
    }

    bool take_changed() { return std::exchange(changed_, false); }

private:
    PropertyGraph& g_;
    const GenerationParams& p_;
    AttackGraphStats& stats_;
    bool changed_ = false;
};

std::optional<NodeId> find_condition(const PropertyGraph& g, const std::string& name)
{
    auto hits = g.match_nodes({label::kCondition}, {{"name", name}});
    if (hits.empty())
        return std::nullopt;
    return hits.front();
}

bool in_label(const PropertyGraph& g, NodeId n, const std::string& l) { return g.node(n).has_label(l); }

// Shortest directed path from `from` back to `to` inside the label, as the
// node sequence including both ends.
std::optional<std::vector<NodeId>> return_path(const PropertyGraph& g, NodeId from, NodeId to,
                                               const std::string& l)
{
    std::unordered_map<NodeId, NodeId> parent{{from, from}};
    std::deque<NodeId> frontier{from};
    while (!frontier.empty()) {
        NodeId at = frontier.front();
        frontier.pop_front();
        g.add_visits(1);
        if (at == to) {
            std::vector<NodeId> path{to};
            while (path.back() != from)
                path.push_back(parent.at(path.back()));
            std::reverse(path.begin(), path.end());
            return path;
        }
        for (EdgeId e : g.out_edges(at)) {
            g.add_visits(1);
            NodeId next = g.edge(e).dst;
            if (in_label(g, next, l) && parent.emplace(next, at).second)
                frontier.push_back(next);
        }
    }
    return std::nullopt;
}

} // namespace

std::string privilege_condition_name(const std::string& device) { return "User/SuperUser(" + device + ")"; }

std::string protocol_condition_name(const std::string& protocol, const std::string& src, const std::string& dst)
{
    return protocol + "(" + src + ", " + dst + ")";
}

std::string exploit_name(const std::string& cve, const std::string& src, const std::string& dst)
{
    return cve + "(" + src + ", " + dst + ")";
}

AttackGraphStats generate(PropertyGraph& g, const GenerationParams& params)
{
    AttackGraphStats stats;
    Builder b(g, params, stats);
    std::set<NodeId> fresh_privileges;

    auto devices = g.match_nodes({label::kEndDevice});
    std::sort(devices.begin(), devices.end(),
              [&](NodeId x, NodeId y) { return g.node(x).name() < g.node(y).name(); });

    // Seed privileges: the attacker's footholds.
    for (NodeId n : devices) {
        const Node& nd = g.node(n);
        if (nd.has_label(params.target_topology) && nd.text("privilege")) {
            auto [c, created] = b.node(label::kCondition, privilege_condition_name(nd.name()));
            if (created)
                fresh_privileges.insert(c);
        }
    }
    b.take_changed();

    bool any_reach = false;
    for (;;) {
        for (NodeId n : devices) {
            const Node& src = g.node(n);
            auto priv = find_condition(g, privilege_condition_name(src.name()));
            if (!priv)
                continue;
            const bool fresh = fresh_privileges.contains(*priv);
            const auto access = src.list("accessibility");

            std::vector<NodeId> targets;
            for (EdgeId e : g.out_edges(n, edge::kReaches)) {
                g.add_visits(1);
                NodeId m = g.edge(e).dst;
                const Node& dst = g.node(m);
                if (!dst.has_label(params.target_topology))
                    continue;
                any_reach = true;
                if (params.focus && !fresh && !params.focus->contains(dst.name()))
                    continue;
                targets.push_back(m);
            }
            std::sort(targets.begin(), targets.end(),
                      [&](NodeId x, NodeId y) { return g.node(x).name() < g.node(y).name(); });

            for (NodeId m : targets) {
                const std::string dst_name = g.node(m).name();
                std::vector<NodeId> vulns;
                for (EdgeId e : g.out_edges(m, edge::kHas)) {
                    g.add_visits(1);
                    if (g.node(g.edge(e).dst).has_label(label::kVulnerability))
                        vulns.push_back(g.edge(e).dst);
                }
                std::sort(vulns.begin(), vulns.end(),
                          [&](NodeId x, NodeId y) { return g.node(x).name() < g.node(y).name(); });

                for (NodeId v : vulns) {
                    const Node& vn = g.node(v);
                    const auto pre = vn.list("preConditions");
                    const auto post = vn.list("postConditions");
                    std::vector<std::string> protocols;
                    bool met = true;
                    for (const auto& c : pre) {
                        if (is_privilege_token(c))
                            continue;  // any held privilege satisfies it
                        if (std::find(access.begin(), access.end(), c) == access.end()) {
                            met = false;
                            break;
                        }
                        protocols.push_back(c);
                    }
                    if (!met || post.empty())
                        continue;

                    const std::string src_name = src.name();
                    NodeId exploit = b.node(label::kExploit, exploit_name(vn.name(), src_name, dst_name)).first;
                    b.link(*priv, exploit, edge::kExploits);
                    for (const auto& c : protocols) {
                        NodeId pc = b.node(label::kCondition, protocol_condition_name(c, src_name, dst_name)).first;
                        b.link(pc, exploit, edge::kExploits);
                    }
                    // User and SuperUser outcomes share one condition node.
                    auto [granted, created] = b.node(label::kCondition, privilege_condition_name(dst_name));
                    if (created)
                        fresh_privileges.insert(granted);
                    b.link(exploit, granted, edge::kLeads);
                }
            }
        }
        if (!b.take_changed())
            break;
        ++stats.iterations;
    }
    if (!any_reach)
        stats.warnings.push_back("no REACHES edge leads into " + params.target_topology +
                                 " from a privileged device; attack graph is empty");
    return stats;
}

std::size_t prune_cycles(PropertyGraph& g, const std::string& attack_label)
{
    std::size_t removed = 0;
    for (;;) {
        std::vector<std::tuple<std::string, std::string, std::string, EdgeId>> edges;
        for (NodeId n : g.match_nodes({attack_label})) {
            for (EdgeId e : g.out_edges(n)) {
                g.add_visits(1);
                const Edge& ed = g.edge(e);
                if (in_label(g, ed.dst, attack_label))
                    edges.emplace_back(g.node(ed.src).name(), g.node(ed.dst).name(), ed.type, e);
            }
        }
        std::sort(edges.begin(), edges.end());

        bool broke = false;
        for (const auto& [s, d, t, e] : edges) {
            const Edge& ed = g.edge(e);
            auto cycle = return_path(g, ed.dst, ed.src, attack_label);
            if (!cycle)
                continue;
            std::size_t here = 0;
            for (NodeId n : *cycle) {
                if (g.node(n).has_label(label::kExploit)) {
                    g.detach_delete(n);
                    ++here;
                }
            }
            if (here == 0)
                continue;  // no exploit to cut on this cycle
            removed += here;
            broke = true;
            break;
        }
        if (!broke)
            return removed;
    }
}

std::size_t remove_orphan_conditions(PropertyGraph& g, const std::string& attack_label)
{
    std::size_t removed = 0;
    for (NodeId n : g.match_nodes({attack_label, label::kCondition})) {
        g.add_visits(1);
        if (g.degree(n) == 0) {
            g.delete_node(n);
            ++removed;
        }
    }
    return removed;
}

} // namespace ag
