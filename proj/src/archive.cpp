#include "attackgraph/archive.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "attackgraph/errors.hpp"

namespace ag {

namespace {

using nlohmann::json;

json attrs_json(const AttrMap& attrs)
{
    json j = json::object();
    for (const auto& [k, v] : attrs) {
        if (const auto* s = std::get_if<std::string>(&v))
            j[k] = *s;
        else
            j[k] = std::get<TextList>(v);
    }
    return j;
}

AttrMap attrs_from(const json& j)
{
    AttrMap out;
    for (const auto& [k, v] : j.items()) {
        if (v.is_string())
            out[k] = v.get<std::string>();
        else if (v.is_array())
            out[k] = v.get<TextList>();
        else
            throw ArchiveError("attribute '" + k + "' must be text or a list of text");
    }
    return out;
}

std::string node_head(const Node& n)
{
    return json(std::vector<std::string>(n.labels.begin(), n.labels.end())).dump() + attrs_json(n.attrs).dump();
}

bool excluded(const Node& n, const LabelSet& exclude) { return !exclude.empty() && n.has_any_label(exclude); }

} // namespace

std::vector<NodeId> canonical_node_order(const PropertyGraph& g, const LabelSet& exclude)
{
    using Key = std::tuple<std::string, std::string, std::string, NodeId>;
    std::vector<Key> keys;
    for (const auto& [id, n] : g.nodes()) {
        if (excluded(n, exclude))
            continue;
        std::vector<std::string> sig;
        for (EdgeId e : g.out_edges(id)) {
            const Edge& ed = g.edge(e);
            const Node& other = g.node(ed.dst);
            if (!excluded(other, exclude))
                sig.push_back(">" + ed.type + attrs_json(ed.attrs).dump() + node_head(other));
        }
        for (EdgeId e : g.in_edges(id)) {
            const Edge& ed = g.edge(e);
            const Node& other = g.node(ed.src);
            if (!excluded(other, exclude))
                sig.push_back("<" + ed.type + attrs_json(ed.attrs).dump() + node_head(other));
        }
        std::sort(sig.begin(), sig.end());
        keys.emplace_back(n.name(), node_head(n), json(sig).dump(), id);
    }
    std::sort(keys.begin(), keys.end());
    std::vector<NodeId> out;
    out.reserve(keys.size());
    for (const auto& k : keys)
        out.push_back(std::get<3>(k));
    return out;
}

std::string save_archive(const PropertyGraph& g, const LabelSet& exclude)
{
    auto order = canonical_node_order(g, exclude);
    std::map<NodeId, std::size_t> index;
    std::ostringstream out;
    out << kArchiveHeader << '\n';
    for (std::size_t i = 0; i < order.size(); ++i) {
        index[order[i]] = i;
        const Node& n = g.node(order[i]);
        json rec{{"labels", std::vector<std::string>(n.labels.begin(), n.labels.end())},
                 {"attrs", attrs_json(n.attrs)}};
        out << "node " << i << ' ' << rec.dump() << '\n';
    }

    std::vector<std::tuple<std::size_t, std::size_t, std::string, std::string>> edges;
    for (const auto& [id, e] : g.edges()) {
        auto s = index.find(e.src);
        auto d = index.find(e.dst);
        if (s == index.end() || d == index.end())
            continue;
        edges.emplace_back(s->second, d->second, e.type, attrs_json(e.attrs).dump());
    }
    std::sort(edges.begin(), edges.end());
    for (const auto& [s, d, type, attrs] : edges) {
        json rec{{"type", type}, {"attrs", json::parse(attrs)}};
        out << "edge " << s << ' ' << d << ' ' << rec.dump() << '\n';
    }
    return out.str();
}

PropertyGraph load_archive(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kArchiveHeader)
        throw ArchiveError("not an attack-graph archive (bad header)");

    PropertyGraph g;
    std::vector<NodeId> ids;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream rec(line);
        std::string kind;
        rec >> kind;
        try {
            if (kind == "node") {
                std::size_t idx = 0;
                rec >> idx;
                if (!rec || idx != ids.size())
                    throw ArchiveError("node index out of sequence");
                std::string rest;
                std::getline(rec, rest);
                auto j = json::parse(rest);
                auto labels = j.at("labels").get<std::vector<std::string>>();
                ids.push_back(g.create_node(LabelSet(labels.begin(), labels.end()), attrs_from(j.at("attrs"))));
            } else if (kind == "edge") {
                std::size_t s = 0, d = 0;
                rec >> s >> d;
                if (!rec || s >= ids.size() || d >= ids.size())
                    throw ArchiveError("edge endpoint out of range");
                std::string rest;
                std::getline(rec, rest);
                auto j = json::parse(rest);
                g.create_edge(ids[s], ids[d], j.at("type").get<std::string>(), attrs_from(j.at("attrs")));
            } else {
                throw ArchiveError("unknown record '" + kind + "'");
            }
        } catch (const json::exception& e) {
            throw ArchiveError("archive line " + std::to_string(lineno) + ": " + e.what());
        } catch (const ArchiveError& e) {
            throw ArchiveError("archive line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return g;
}

PropertyGraph read_archive_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ArchiveError("cannot open archive: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return load_archive(buf.str());
}

void write_archive_file(const PropertyGraph& g, const std::filesystem::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ArchiveError("cannot write archive: " + tmp.string());
        out << save_archive(g);
        if (!out.flush())
            throw ArchiveError("cannot write archive: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace ag
