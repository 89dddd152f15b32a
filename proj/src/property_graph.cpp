#include "attackgraph/property_graph.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "attackgraph/errors.hpp"

namespace ag {

namespace {

const std::vector<EdgeId> kNoEdges;

std::string id_text(NodeId n) { return "node #" + std::to_string(raw(n)); }

} // namespace

bool attr_value_matches(const AttrValue& actual, const AttrValue& wanted)
{
    if (const auto* want = std::get_if<std::string>(&wanted)) {
        if (const auto* text = std::get_if<std::string>(&actual))
            return *text == *want;
        const auto& list = std::get<TextList>(actual);
        return std::find(list.begin(), list.end(), *want) != list.end();
    }
    const auto* list = std::get_if<TextList>(&actual);
    return list != nullptr && *list == std::get<TextList>(wanted);
}

bool attrs_match(const AttrMap& attrs, const AttrMap& filter)
{
    for (const auto& [key, wanted] : filter) {
        auto it = attrs.find(key);
        if (it == attrs.end() || !attr_value_matches(it->second, wanted))
            return false;
    }
    return true;
}

std::string to_string(const AttrValue& value)
{
    if (const auto* text = std::get_if<std::string>(&value))
        return *text;
    std::string out = "[";
    const auto& list = std::get<TextList>(value);
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i)
            out += ", ";
        out += list[i];
    }
    return out + "]";
}

bool Node::has_label(std::string_view label) const
{
    return labels.find(std::string(label)) != labels.end();
}

bool Node::has_any_label(const LabelSet& wanted) const
{
    return std::any_of(wanted.begin(), wanted.end(),
                       [&](const std::string& l) { return labels.contains(l); });
}

std::optional<std::string> Node::text(const std::string& key) const
{
    auto it = attrs.find(key);
    if (it == attrs.end())
        return std::nullopt;
    if (const auto* t = std::get_if<std::string>(&it->second))
        return *t;
    return std::nullopt;
}

TextList Node::list(const std::string& key) const
{
    auto it = attrs.find(key);
    if (it == attrs.end())
        return {};
    if (const auto* t = std::get_if<std::string>(&it->second))
        return {*t};
    return std::get<TextList>(it->second);
}

std::string Node::name() const { return text("name").value_or(""); }

PropertyGraph::PropertyGraph(const PropertyGraph& other)
    : nodes_(other.nodes_),
      edges_(other.edges_),
      out_(other.out_),
      in_(other.in_),
      label_index_(other.label_index_),
      type_index_(other.type_index_),
      next_node_(other.next_node_),
      next_edge_(other.next_edge_),
      stats_(other.stats_),
      visits_(other.visits())
{
}

PropertyGraph& PropertyGraph::operator=(const PropertyGraph& other)
{
    if (this != &other) {
        PropertyGraph copy(other);
        *this = std::move(copy);
    }
    return *this;
}

PropertyGraph::PropertyGraph(PropertyGraph&& other) noexcept
    : nodes_(std::move(other.nodes_)),
      edges_(std::move(other.edges_)),
      out_(std::move(other.out_)),
      in_(std::move(other.in_)),
      label_index_(std::move(other.label_index_)),
      type_index_(std::move(other.type_index_)),
      next_node_(other.next_node_),
      next_edge_(other.next_edge_),
      stats_(other.stats_),
      visits_(other.visits())
{
}

PropertyGraph& PropertyGraph::operator=(PropertyGraph&& other) noexcept
{
    nodes_ = std::move(other.nodes_);
    edges_ = std::move(other.edges_);
    out_ = std::move(other.out_);
    in_ = std::move(other.in_);
    label_index_ = std::move(other.label_index_);
    type_index_ = std::move(other.type_index_);
    next_node_ = other.next_node_;
    next_edge_ = other.next_edge_;
    stats_ = other.stats_;
    visits_.store(other.visits(), std::memory_order_relaxed);
    return *this;
}

Node& PropertyGraph::node_mut(NodeId n)
{
    auto it = nodes_.find(n);
    if (it == nodes_.end())
        throw UnknownNode("unknown " + id_text(n));
    return it->second;
}

const Node& PropertyGraph::node(NodeId n) const
{
    auto it = nodes_.find(n);
    if (it == nodes_.end())
        throw UnknownNode("unknown " + id_text(n));
    return it->second;
}

const Edge& PropertyGraph::edge(EdgeId e) const
{
    auto it = edges_.find(e);
    if (it == edges_.end())
        throw UnknownNode("unknown edge #" + std::to_string(raw(e)));
    return it->second;
}

NodeId PropertyGraph::create_node(LabelSet labels, AttrMap attrs)
{
    if (labels.empty())
        throw std::invalid_argument("create_node: a node needs at least one label");
    NodeId id{next_node_++};
    for (const auto& l : labels)
        label_index_[l].insert(id);
    nodes_.emplace(id, Node{id, std::move(labels), std::move(attrs)});
    out_[id];
    in_[id];
    ++stats_.nodes_created;
    add_visits(1);
    return id;
}

std::pair<NodeId, bool> PropertyGraph::merge_node(const LabelSet& labels, const AttrMap& key_attrs)
{
    if (key_attrs.empty())
        throw std::invalid_argument("merge_node: key attributes must not be empty");
    auto found = match_nodes(labels, key_attrs);
    if (found.size() > 1)
        throw AmbiguousMatch("merge_node: " + std::to_string(found.size()) +
                             " nodes match the merge key");
    if (found.size() == 1)
        return {found.front(), false};
    return {create_node(labels, key_attrs), true};
}

void PropertyGraph::add_label(NodeId n, const std::string& label)
{
    auto& nd = node_mut(n);
    if (nd.labels.insert(label).second)
        label_index_[label].insert(n);
}

void PropertyGraph::remove_label(NodeId n, const std::string& label)
{
    auto& nd = node_mut(n);
    if (nd.labels.erase(label) == 0)
        return;
    auto it = label_index_.find(label);
    if (it != label_index_.end()) {
        it->second.erase(n);
        if (it->second.empty())
            label_index_.erase(it);
    }
}

void PropertyGraph::set_attr(NodeId n, const std::string& key, AttrValue value)
{
    node_mut(n).attrs[key] = std::move(value);
}

void PropertyGraph::remove_attr(NodeId n, const std::string& key) { node_mut(n).attrs.erase(key); }

EdgeId PropertyGraph::create_edge(NodeId src, NodeId dst, std::string type, AttrMap attrs)
{
    if (!contains(src))
        throw UnknownNode("edge source " + id_text(src) + " does not exist");
    if (!contains(dst))
        throw UnknownNode("edge target " + id_text(dst) + " does not exist");
    EdgeId id{next_edge_++};
    out_[src][type].push_back(id);
    in_[dst][type].push_back(id);
    type_index_[type].insert(id);
    edges_.emplace(id, Edge{id, src, dst, std::move(type), std::move(attrs)});
    ++stats_.edges_created;
    add_visits(1);
    return id;
}

std::pair<EdgeId, bool> PropertyGraph::merge_edge(NodeId src, NodeId dst, const std::string& type,
                                                  const AttrMap& attrs)
{
    if (!contains(src))
        throw UnknownNode("edge source " + id_text(src) + " does not exist");
    if (!contains(dst))
        throw UnknownNode("edge target " + id_text(dst) + " does not exist");
    for (EdgeId e : out_edges(src, type)) {
        add_visits(1);
        const Edge& ed = edges_.at(e);
        if (ed.dst == dst && ed.attrs == attrs)
            return {e, false};
    }
    return {create_edge(src, dst, type, attrs), true};
}

void PropertyGraph::unlink(const Edge& e)
{
    auto erase_from = [&](std::unordered_map<NodeId, Adjacency>& adj, NodeId n) {
        auto it = adj.find(n);
        if (it == adj.end())
            return;
        auto t = it->second.find(e.type);
        if (t == it->second.end())
            return;
        std::erase(t->second, e.id);
        if (t->second.empty())
            it->second.erase(t);
    };
    erase_from(out_, e.src);
    erase_from(in_, e.dst);
    auto t = type_index_.find(e.type);
    if (t != type_index_.end()) {
        t->second.erase(e.id);
        if (t->second.empty())
            type_index_.erase(t);
    }
}

void PropertyGraph::delete_edge(EdgeId e)
{
    auto it = edges_.find(e);
    if (it == edges_.end())
        throw UnknownNode("unknown edge #" + std::to_string(raw(e)));
    unlink(it->second);
    edges_.erase(it);
    ++stats_.edges_deleted;
}

std::size_t PropertyGraph::detach_delete(NodeId n)
{
    node(n);
    std::vector<EdgeId> incident = out_edges(n);
    for (EdgeId e : in_edges(n))
        if (std::find(incident.begin(), incident.end(), e) == incident.end())
            incident.push_back(e);
    for (EdgeId e : incident)
        delete_edge(e);
    delete_node(n);
    return incident.size();
}

void PropertyGraph::delete_node(NodeId n)
{
    const Node& nd = node(n);
    if (degree(n) != 0)
        throw ConnectedNode(id_text(n) + " still has edges; use detach_delete");
    for (const auto& l : nd.labels) {
        auto it = label_index_.find(l);
        if (it != label_index_.end()) {
            it->second.erase(n);
            if (it->second.empty())
                label_index_.erase(it);
        }
    }
    out_.erase(n);
    in_.erase(n);
    nodes_.erase(n);
    ++stats_.nodes_deleted;
}

std::vector<NodeId> PropertyGraph::match_nodes(const LabelSet& labels, const AttrMap& filter) const
{
    std::vector<NodeId> result;
    auto check = [&](const Node& nd) {
        add_visits(1);
        if (std::all_of(labels.begin(), labels.end(),
                        [&](const std::string& l) { return nd.labels.contains(l); }) &&
            attrs_match(nd.attrs, filter))
            result.push_back(nd.id);
    };

    if (labels.empty()) {
        for (const auto& [id, nd] : nodes_)
            check(nd);
        return result;
    }
    // Scan the smallest label bucket.
    const std::set<NodeId>* smallest = nullptr;
    for (const auto& l : labels) {
        auto it = label_index_.find(l);
        if (it == label_index_.end())
            return result;
        if (smallest == nullptr || it->second.size() < smallest->size())
            smallest = &it->second;
    }
    for (NodeId id : *smallest)
        check(nodes_.at(id));
    return result;
}

bool PropertyGraph::path_exists(NodeId src, NodeId dst, const std::set<std::string>& edge_types,
                                const AttrMap& attr_predicate,
                                std::optional<std::size_t> max_hops) const
{
    node(src);
    node(dst);
    std::unordered_set<NodeId> visited;
    std::deque<std::pair<NodeId, std::size_t>> frontier{{src, 0}};
    visited.insert(src);
    while (!frontier.empty()) {
        auto [at, hops] = frontier.front();
        frontier.pop_front();
        add_visits(1);
        if (max_hops && hops >= *max_hops)
            continue;
        auto adj = out_.find(at);
        if (adj == out_.end())
            continue;
        for (const auto& type : edge_types) {
            auto t = adj->second.find(type);
            if (t == adj->second.end())
                continue;
            for (EdgeId e : t->second) {
                add_visits(1);
                const Edge& ed = edges_.at(e);
                if (!attrs_match(ed.attrs, attr_predicate))
                    continue;
                if (ed.dst == dst)
                    return true;
                if (visited.insert(ed.dst).second)
                    frontier.emplace_back(ed.dst, hops + 1);
            }
        }
    }
    return false;
}

std::vector<EdgeId> PropertyGraph::out_edges(NodeId n) const
{
    std::vector<EdgeId> result;
    auto it = out_.find(n);
    if (it == out_.end())
        return result;
    for (const auto& [type, list] : it->second)
        result.insert(result.end(), list.begin(), list.end());
    std::sort(result.begin(), result.end());
    return result;
}

std::vector<EdgeId> PropertyGraph::in_edges(NodeId n) const
{
    std::vector<EdgeId> result;
    auto it = in_.find(n);
    if (it == in_.end())
        return result;
    for (const auto& [type, list] : it->second)
        result.insert(result.end(), list.begin(), list.end());
    std::sort(result.begin(), result.end());
    return result;
}

const std::vector<EdgeId>& PropertyGraph::out_edges(NodeId n, const std::string& type) const
{
    auto it = out_.find(n);
    if (it == out_.end())
        return kNoEdges;
    auto t = it->second.find(type);
    return t == it->second.end() ? kNoEdges : t->second;
}

const std::vector<EdgeId>& PropertyGraph::in_edges(NodeId n, const std::string& type) const
{
    auto it = in_.find(n);
    if (it == in_.end())
        return kNoEdges;
    auto t = it->second.find(type);
    return t == it->second.end() ? kNoEdges : t->second;
}

std::vector<EdgeId> PropertyGraph::edges_of_type(const std::string& type) const
{
    auto it = type_index_.find(type);
    if (it == type_index_.end())
        return {};
    return {it->second.begin(), it->second.end()};
}

std::vector<std::string> PropertyGraph::edge_types() const
{
    std::vector<std::string> types;
    for (const auto& [type, ids] : type_index_)
        types.push_back(type);
    return types;
}

std::size_t PropertyGraph::degree(NodeId n) const
{
    std::size_t d = 0;
    if (auto it = out_.find(n); it != out_.end())
        for (const auto& [type, list] : it->second)
            d += list.size();
    if (auto it = in_.find(n); it != in_.end())
        for (const auto& [type, list] : it->second)
            d += list.size();
    return d;
}

} // namespace ag
