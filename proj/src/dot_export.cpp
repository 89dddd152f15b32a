#include "attackgraph/dot_export.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "attackgraph/archive.hpp"
#include "attackgraph/attack_graph.hpp"
#include "attackgraph/dynamics.hpp"
#include "attackgraph/scenario.hpp"

namespace ag {

namespace {

struct Style {
    const char* shape;
    const char* color;
};

Style style_of(const Node& n)
{
    if (n.has_label(label::kCondition))
        return {"ellipse", "lightyellow"};
    if (n.has_label(label::kExploit))
        return {"box", "lightcoral"};
    if (n.has_label(label::kInternet))
        return {"doubleoctagon", "lightgrey"};
    if (n.has_label(label::kRouter))
        return {"diamond", "lightblue"};
    if (n.has_label(label::kEndDevice))
        return {"box3d", "palegreen"};
    if (n.has_label(label::kVulnerability))
        return {"note", "orange"};
    if (n.has_label(label::kFirewall))
        return {"hexagon", "khaki"};
    if (n.has_label(label::kMergeSession))
        return {"folder", "plum"};
    if (n.has_label(label::kTopology))
        return {"tab", "white"};
    return {"ellipse", "white"};
}

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + '"';
}

std::string base_id(const Node& n, std::size_t index)
{
    auto name = n.name();
    if (name.empty())
        return "n" + std::to_string(index);
    if (n.has_label(label::kVulnerability))
        return name + "@" + n.text("host").value_or("");
    if (n.has_label(label::kFirewall))
        return name + "(" + n.text("source").value_or("") + "->" + n.text("destination").value_or("") + ")";
    return name;
}

} // namespace

std::string export_dot(const PropertyGraph& g, const LabelSet& selection)
{
    std::vector<NodeId> chosen;
    for (NodeId n : canonical_node_order(g))
        if (selection.empty() || g.node(n).has_any_label(selection))
            chosen.push_back(n);

    std::map<NodeId, std::string> ids;
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        auto id = base_id(g.node(chosen[i]), i);
        if (auto k = seen[id]++; k > 0)
            id += "#" + std::to_string(k + 1);
        ids[chosen[i]] = id;
    }

    std::ostringstream out;
    out << "digraph attackgraph {\n";
    out << "  rankdir=LR;\n";
    out << "  node [fontname=\"Helvetica\", style=filled];\n";
    for (NodeId n : chosen) {
        const Node& nd = g.node(n);
        auto st = style_of(nd);
        auto text = nd.name().empty() ? ids[n] : nd.name();
        out << "  " << quote(ids[n]) << " [label=" << quote(text) << ", shape=" << st.shape
            << ", fillcolor=" << st.color << "];\n";
    }

    std::vector<std::tuple<std::string, std::string, std::string>> edges;
    for (const auto& [eid, e] : g.edges()) {
        auto s = ids.find(e.src);
        auto d = ids.find(e.dst);
        if (s == ids.end() || d == ids.end())
            continue;
        std::string label = e.type;
        if (auto via = e.attrs.find("via"); via != e.attrs.end())
            label += " via=" + to_string(via->second);
        edges.emplace_back(s->second, d->second, label);
    }
    std::sort(edges.begin(), edges.end());
    for (const auto& [s, d, l] : edges)
        out << "  " << quote(s) << " -> " << quote(d) << " [label=" << quote(l) << "];\n";
    out << "}\n";
    return out.str();
}

} // namespace ag
