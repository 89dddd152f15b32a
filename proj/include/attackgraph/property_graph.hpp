#pragma once

// In-process labelled property graph.
//
// Nodes carry a set of labels and an attribute map; edges are directed and
// typed and carry their own attribute map. Adjacency is indexed by edge type
// in both directions, and a label index backs node matching. Every element a
// query examines bumps the visit counter, which stands in for the "database
// hits" of a graph database.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace ag {

enum class NodeId : std::uint64_t {};
enum class EdgeId : std::uint64_t {};

constexpr std::uint64_t raw(NodeId id) { return static_cast<std::uint64_t>(id); }
constexpr std::uint64_t raw(EdgeId id) { return static_cast<std::uint64_t>(id); }

using TextList = std::vector<std::string>;
using AttrValue = std::variant<std::string, TextList>;
using AttrMap = std::map<std::string, AttrValue>;
using LabelSet = std::set<std::string>;

// Filter semantics: a text filter value matches a list attribute when the
// list contains it; a list filter value needs exact list equality.
bool attr_value_matches(const AttrValue& actual, const AttrValue& wanted);
bool attrs_match(const AttrMap& attrs, const AttrMap& filter);

std::string to_string(const AttrValue& value);

struct Node {
    NodeId id{};
    LabelSet labels;
    AttrMap attrs;

    bool has_label(std::string_view label) const;
    bool has_any_label(const LabelSet& wanted) const;
    // Text attribute, or nullopt when absent or list-valued.
    std::optional<std::string> text(const std::string& key) const;
    // List attribute; a text attribute reads as a one-element list.
    TextList list(const std::string& key) const;
    std::string name() const;
};

struct Edge {
    EdgeId id{};
    NodeId src{};
    NodeId dst{};
    std::string type;
    AttrMap attrs;
};

// Cumulative mutation counters, used for run reports.
struct MutationStats {
    std::uint64_t nodes_created = 0;
    std::uint64_t nodes_deleted = 0;
    std::uint64_t edges_created = 0;
    std::uint64_t edges_deleted = 0;
};

class PropertyGraph {
public:
    PropertyGraph() = default;
    PropertyGraph(const PropertyGraph& other);
    PropertyGraph& operator=(const PropertyGraph& other);
    PropertyGraph(PropertyGraph&& other) noexcept;
    PropertyGraph& operator=(PropertyGraph&& other) noexcept;

    NodeId create_node(LabelSet labels, AttrMap attrs = {});

    // Returns the unique node carrying every label and matching every key
    // attribute, creating it when none exists. Throws AmbiguousMatch when
    // more than one node matches.
    std::pair<NodeId, bool> merge_node(const LabelSet& labels, const AttrMap& key_attrs);

    void add_label(NodeId n, const std::string& label);
    void remove_label(NodeId n, const std::string& label);
    void set_attr(NodeId n, const std::string& key, AttrValue value);
    void remove_attr(NodeId n, const std::string& key);

    EdgeId create_edge(NodeId src, NodeId dst, std::string type, AttrMap attrs = {});
    // Edge identity is (src, dst, type, full attribute map).
    std::pair<EdgeId, bool> merge_edge(NodeId src, NodeId dst, const std::string& type,
                                       const AttrMap& attrs = {});
    void delete_edge(EdgeId e);

    // Removes the node and every incident edge; returns the number of edges removed.
    std::size_t detach_delete(NodeId n);
    // Plain delete; throws ConnectedNode if any edge is incident.
    void delete_node(NodeId n);

    std::vector<NodeId> match_nodes(const LabelSet& labels, const AttrMap& filter = {}) const;

    // True iff a directed path of at least one edge leads from src to dst
    // using only edges whose type is in edge_types and whose attributes
    // match attr_predicate. Breadth-first with a visited set.
    bool path_exists(NodeId src, NodeId dst, const std::set<std::string>& edge_types,
                     const AttrMap& attr_predicate = {},
                     std::optional<std::size_t> max_hops = std::nullopt) const;

    bool contains(NodeId n) const { return nodes_.contains(n); }
    bool contains(EdgeId e) const { return edges_.contains(e); }
    const Node& node(NodeId n) const;
    const Edge& edge(EdgeId e) const;

    std::vector<EdgeId> out_edges(NodeId n) const;
    std::vector<EdgeId> in_edges(NodeId n) const;
    const std::vector<EdgeId>& out_edges(NodeId n, const std::string& type) const;
    const std::vector<EdgeId>& in_edges(NodeId n, const std::string& type) const;
    std::vector<EdgeId> edges_of_type(const std::string& type) const;
    std::vector<std::string> edge_types() const;
    std::size_t degree(NodeId n) const;

    // Ordered by id.
    const std::map<NodeId, Node>& nodes() const { return nodes_; }
    const std::map<EdgeId, Edge>& edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::uint64_t visits() const { return visits_.load(std::memory_order_relaxed); }
    void add_visits(std::uint64_t n) const { visits_.fetch_add(n, std::memory_order_relaxed); }
    const MutationStats& mutation_stats() const { return stats_; }

private:
    using Adjacency = std::unordered_map<std::string, std::vector<EdgeId>>;

    Node& node_mut(NodeId n);
    void unlink(const Edge& e);

    std::map<NodeId, Node> nodes_;
    std::map<EdgeId, Edge> edges_;
    std::unordered_map<NodeId, Adjacency> out_;
    std::unordered_map<NodeId, Adjacency> in_;
    std::map<std::string, std::set<NodeId>> label_index_;
    std::map<std::string, std::set<EdgeId>> type_index_;
    std::uint64_t next_node_ = 1;
    std::uint64_t next_edge_ = 1;
    MutationStats stats_;
    mutable std::atomic<std::uint64_t> visits_{0};
};

} // namespace ag
