#include "support.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "attackgraph/archive.hpp"
#include "attackgraph/attack_graph.hpp"
#include "attackgraph/dynamics.hpp"
#include "attackgraph/reachability.hpp"

namespace agtest {

std::string fixture(const std::string& file) { return std::string(AG_FIXTURE_DIR) + "/" + file; }
std::string golden(const std::string& file) { return std::string(AG_GOLDEN_DIR) + "/" + file; }

namespace {

bool connection_type(const std::string& t)
{
    if (t == "CONNECTS_TO")
        return true;
    const std::string tail = "_CONNECTS_TO";
    if (t.size() < 3 + tail.size() || t.compare(0, 3, "NEW") != 0 ||
        t.compare(t.size() - tail.size(), tail.size(), tail) != 0)
        return false;
    auto digits = t.substr(3, t.size() - 3 - tail.size());
    return std::all_of(digits.begin(), digits.end(), ::isdigit);
}

std::string text_attr(const ag::AttrMap& attrs, const std::string& key)
{
    auto it = attrs.find(key);
    if (it == attrs.end())
        return {};
    if (auto* s = std::get_if<std::string>(&it->second))
        return *s;
    return {};
}

std::vector<std::string> list_attr(const ag::AttrMap& attrs, const std::string& key)
{
    auto it = attrs.find(key);
    if (it == attrs.end())
        return {};
    if (auto* l = std::get_if<ag::TextList>(&it->second))
        return *l;
    return {std::get<std::string>(it->second)};
}

} // namespace

NamePairs reach_oracle(const PropertyGraph& g)
{
    std::vector<NodeId> all;
    std::map<NodeId, std::size_t> idx;
    for (const auto& [id, n] : g.nodes()) {
        idx[id] = all.size();
        all.push_back(id);
    }
    const std::size_t n = all.size();
    std::vector<std::vector<char>> tcp(n, std::vector<char>(n, 0));
    std::vector<std::vector<char>> direct(n, std::vector<char>(n, 0));
    for (const auto& [eid, e] : g.edges()) {
        if (!connection_type(e.type))
            continue;
        direct[idx[e.src]][idx[e.dst]] = 1;
        if (text_attr(e.attrs, "via") == "TCP")
            tcp[idx[e.src]][idx[e.dst]] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (tcp[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (tcp[k][j])
                        tcp[i][j] = 1;

    NamePairs allowed, denied;
    for (const auto& [eid, e] : g.edges()) {
        const auto& router = g.nodes().at(e.src);
        const auto& rule = g.nodes().at(e.dst);
        if (!router.labels.contains("Router") || !rule.labels.contains("Firewall"))
            continue;
        auto key = std::make_pair(text_attr(rule.attrs, "source"), text_attr(rule.attrs, "destination"));
        if (e.type == "ALLOWS")
            allowed.insert(key);
        else if (e.type == "DENIES")
            denied.insert(key);
    }

    NamePairs out;
    for (NodeId a : all) {
        const auto& na = g.nodes().at(a);
        if (!na.labels.contains("EndDevice"))
            continue;
        for (NodeId b : all) {
            const auto& nb = g.nodes().at(b);
            if (a == b || !nb.labels.contains("EndDevice"))
                continue;
            auto sa = text_attr(na.attrs, "subnet");
            auto sb = text_attr(nb.attrs, "subnet");
            auto names = std::make_pair(text_attr(na.attrs, "name"), text_attr(nb.attrs, "name"));
            bool ok = (!sa.empty() && sa == sb) || direct[idx[a]][idx[b]] ||
                      (tcp[idx[a]][idx[b]] && allowed.contains(names) && !denied.contains(names));
            if (ok)
                out.insert(names);
        }
    }
    return out;
}

std::set<std::string> exploit_oracle(const PropertyGraph& g, const std::string& target_topology)
{
    std::map<NodeId, std::vector<NodeId>> reaches, has;
    for (const auto& [eid, e] : g.edges()) {
        if (e.type == "REACHES")
            reaches[e.src].push_back(e.dst);
        else if (e.type == "HAS")
            has[e.src].push_back(e.dst);
    }
    std::set<NodeId> held;
    std::deque<NodeId> queue;
    for (const auto& [id, n] : g.nodes()) {
        if (n.labels.contains("EndDevice") && n.labels.contains(target_topology) && n.attrs.contains("privilege")) {
            held.insert(id);
            queue.push_back(id);
        }
    }
    std::set<std::string> exploits;
    while (!queue.empty()) {
        NodeId a = queue.front();
        queue.pop_front();
        const auto& src = g.nodes().at(a);
        auto access = list_attr(src.attrs, "accessibility");
        for (NodeId b : reaches[a]) {
            const auto& dst = g.nodes().at(b);
            if (!dst.labels.contains(target_topology))
                continue;
            for (NodeId v : has[b]) {
                const auto& vn = g.nodes().at(v);
                bool ok = !list_attr(vn.attrs, "postConditions").empty();
                for (const auto& c : list_attr(vn.attrs, "preConditions"))
                    if (c != "User" && c != "SuperUser" && std::find(access.begin(), access.end(), c) == access.end())
                        ok = false;
                if (!ok)
                    continue;
                exploits.insert(text_attr(vn.attrs, "name") + "(" + text_attr(src.attrs, "name") + ", " +
                                text_attr(dst.attrs, "name") + ")");
                if (held.insert(b).second)
                    queue.push_back(b);
            }
        }
    }
    return exploits;
}

std::vector<std::vector<std::string>> path_oracle(const PropertyGraph& g, const std::string& from_node,
                                                  const std::string& to_node, const ag::LabelSet& labels)
{
    auto in_scope = [&](NodeId id) {
        const auto& n = g.nodes().at(id);
        return std::any_of(labels.begin(), labels.end(), [&](const auto& l) { return n.labels.contains(l); });
    };
    std::optional<NodeId> from, to;
    for (const auto& [id, n] : g.nodes()) {
        if (!in_scope(id))
            continue;
        if (text_attr(n.attrs, "name") == from_node)
            from = id;
        if (text_attr(n.attrs, "name") == to_node)
            to = id;
    }
    std::vector<std::vector<std::string>> out;
    if (!from || !to || *from == *to)
        return out;

    std::vector<std::pair<NodeId, NodeId>> raw;
    for (const auto& [eid, e] : g.edges())
        if ((e.type == "EXPLOITS" || e.type == "LEADS") && in_scope(e.src) && in_scope(e.dst))
            raw.emplace_back(e.src, e.dst);

    std::vector<NodeId> path{*from};
    std::function<void()> walk = [&] {
        if (path.back() == *to) {
            std::vector<std::string> names;
            for (NodeId id : path)
                names.push_back(text_attr(g.nodes().at(id).attrs, "name"));
            out.push_back(names);
            return;
        }
        std::set<NodeId> tried;
        for (const auto& [s, d] : raw) {
            if (s != path.back() || std::find(path.begin(), path.end(), d) != path.end() || !tried.insert(d).second)
                continue;
            path.push_back(d);
            walk();
            path.pop_back();
        }
    };
    walk();
    return out;
}

bool topologically_sortable(const PropertyGraph& g, const std::string& label)
{
    std::map<NodeId, int> indegree;
    for (const auto& [id, n] : g.nodes())
        if (n.labels.contains(label))
            indegree[id] = 0;
    std::map<NodeId, std::vector<NodeId>> adj;
    for (const auto& [eid, e] : g.edges()) {
        if (indegree.contains(e.src) && indegree.contains(e.dst)) {
            adj[e.src].push_back(e.dst);
            ++indegree[e.dst];
        }
    }
    std::deque<NodeId> ready;
    for (const auto& [id, d] : indegree)
        if (d == 0)
            ready.push_back(id);
    std::size_t emitted = 0;
    while (!ready.empty()) {
        NodeId id = ready.front();
        ready.pop_front();
        ++emitted;
        for (NodeId d : adj[id])
            if (--indegree[d] == 0)
                ready.push_back(d);
    }
    return emitted == indegree.size();
}

NamePairs reaches_set(const PropertyGraph& g)
{
    auto pairs = ag::reaches_pairs(g);
    return {pairs.begin(), pairs.end()};
}

std::set<std::string> names_with_label(const PropertyGraph& g, const std::string& label)
{
    std::set<std::string> out;
    for (NodeId id : g.match_nodes({label}))
        out.insert(g.node(id).name());
    return out;
}

ag::ScenarioDoc random_scenario(std::mt19937& rng, const std::string& topology, const std::string& prefix,
                                const RandomShape& shape)
{
    auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    ag::ScenarioDoc doc;
    doc.topology = topology;
    const int routers = pick(1, shape.max_routers);
    const int ends = pick(2, shape.max_devices - routers);
    std::vector<std::string> router_names, end_names;
    std::set<std::string> subnets;

    for (int i = 0; i < routers; ++i) {
        ag::DeviceSpec d;
        d.name = prefix + " router " + std::to_string(i);
        d.kind = ag::DeviceKind::Router;
        router_names.push_back(d.name);
        doc.devices.push_back(d);
    }
    const std::vector<std::string> protocols{"HTTP", "FTP", "SSH", "MYSQL"};
    for (int i = 0; i < ends; ++i) {
        ag::DeviceSpec d;
        d.name = prefix + " device " + std::to_string(i);
        d.kind = chance(0.15) ? ag::DeviceKind::InternetHost : ag::DeviceKind::EndDevice;
        if (chance(0.7)) {
            d.subnet = prefix + " subnet " + std::to_string(pick(1, 3));
            subnets.insert(*d.subnet);
        }
        d.floor = "floor " + std::to_string(pick(1, 3));
        if (chance(0.75))
            d.accessibility.push_back("IP");
        if (chance(0.5))
            d.accessibility.push_back("Bluetooth");
        for (const auto& p : protocols)
            if (chance(0.3))
                d.accessibility.push_back(p);
        if (chance(0.2))
            d.privilege = chance(0.5) ? "User" : "SuperUser";
        end_names.push_back(d.name);
        doc.devices.push_back(d);
    }

    for (int i = 1; i < routers; ++i)
        doc.links.push_back({router_names[pick(0, i - 1)], router_names[i], "TCP"});
    for (const auto& e : end_names)
        if (chance(0.8))
            doc.links.push_back({e, router_names[pick(0, routers - 1)], "TCP"});
    for (int i = 0; i < ends; ++i) {
        int j = pick(0, ends - 1);
        if (i != j && chance(0.25))
            doc.links.push_back({end_names[i], end_names[j], chance(0.5) ? "TCP" : "Bluetooth"});
    }

    for (const auto& e : end_names) {
        for (int k = pick(0, 2); k > 0; --k) {
            ag::VulnerabilitySpec v;
            v.cve_id = "CVE-2000-" + std::to_string(pick(1000, 1999));
            v.host = e;
            v.pre_conditions = {"User"};
            const std::vector<std::string> any{"IP", "Bluetooth", "HTTP", "FTP", "SSH", "MYSQL"};
            v.pre_conditions.push_back(any[pick(0, static_cast<int>(any.size()) - 1)]);
            v.post_conditions = {chance(0.5) ? "User" : "SuperUser"};
            doc.vulnerabilities.push_back(v);
        }
    }

    std::vector<std::string> endpoints(end_names);
    endpoints.insert(endpoints.end(), subnets.begin(), subnets.end());
    endpoints.push_back("Any");
    for (int k = pick(0, shape.max_rules); k > 0; --k) {
        ag::FirewallRuleSpec r;
        r.rule_name = "Rule" + std::to_string(k);
        r.router = router_names[pick(0, routers - 1)];
        r.source = endpoints[pick(0, static_cast<int>(endpoints.size()) - 1)];
        r.destination = endpoints[pick(0, static_cast<int>(endpoints.size()) - 1)];
        r.action = chance(0.7) ? ag::RuleAction::Allows : ag::RuleAction::Denies;
        doc.firewall_rules.push_back(r);
    }
    return doc;
}

std::vector<ag::FirewallRuleSpec> random_cross_rules(std::mt19937& rng, const PropertyGraph& g,
                                                     const std::string& topology, int count)
{
    std::vector<std::string> routers, ends;
    for (NodeId id : g.match_nodes({topology, "Router"}))
        routers.push_back(g.node(id).name());
    for (NodeId id : g.match_nodes({"EndDevice"}))
        ends.push_back(g.node(id).name());
    std::sort(routers.begin(), routers.end());
    std::sort(ends.begin(), ends.end());
    std::vector<ag::FirewallRuleSpec> out;
    if (routers.empty() || ends.empty())
        return out;
    auto pick = [&](const std::vector<std::string>& v) {
        return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
    };
    for (int k = 0; k < count; ++k) {
        ag::FirewallRuleSpec r;
        r.rule_name = "Cross" + std::to_string(k);
        r.router = pick(routers);
        r.source = pick(ends);
        r.destination = pick(ends);
        r.action = std::bernoulli_distribution(0.75)(rng) ? ag::RuleAction::Allows : ag::RuleAction::Denies;
        out.push_back(r);
    }
    return out;
}

PropertyGraph case_study_base()
{
    PropertyGraph g;
    ag::load_scenario(ag::read_scenario_file(fixture("clinic.yaml")), g);
    ag::load_scenario(ag::read_scenario_file(fixture("patient.yaml")), g);
    ag::compute_full(g);
    ag::generate(g, {"ClinicTopology", "ClinicAttackGraph"});
    ag::prune_cycles(g, "ClinicAttackGraph");
    ag::remove_orphan_conditions(g, "ClinicAttackGraph");
    ag::generate(g, {"PatientTopology", "PatientAttackGraph"});
    return g;
}

FloorRun run_floor(PropertyGraph& g, int floor, const std::string& target_topology,
                   const std::string& target_label)
{
    FloorRun run;
    auto s = ag::merge_topologies(g, "PatientTopology", "ClinicTopology",
                                  {{"floor", "floor " + std::to_string(floor)}});
    run.session = s.session_id;
    auto r = ag::update_reachability(g, s.session_id, ag::IncrementalKind::PaperFaithful);
    run.reach_added = r.edges_added.size();
    run.reach_visits = r.visits;
    ag::merge_attack_graphs(g, s.session_id, target_topology, target_label);
    return run;
}

std::string snapshot(const PropertyGraph& g) { return ag::save_archive(g, {ag::label::kMergeSession}); }

} // namespace agtest
