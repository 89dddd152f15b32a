#include "attackgraph/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "attackgraph/archive.hpp"
#include "attackgraph/attack_graph.hpp"
#include "attackgraph/dot_export.hpp"
#include "attackgraph/dynamics.hpp"
#include "attackgraph/errors.hpp"
#include "attackgraph/reachability.hpp"
#include "attackgraph/risk_metrics.hpp"
#include "attackgraph/scenario.hpp"

namespace ag {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class UsageError : public Error {
public:
    using Error::Error;
};

class WorkspaceLock {
public:
    explicit WorkspaceLock(const fs::path& workspace)
    {
        auto path = workspace;
        path += ".lock";
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0)
            throw ArchiveError("cannot open lock file " + path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw Error("workspace " + workspace.string() + " is in use by another process");
        }
    }
    WorkspaceLock(const WorkspaceLock&) = delete;
    WorkspaceLock& operator=(const WorkspaceLock&) = delete;
    ~WorkspaceLock()
    {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

private:
    int fd_ = -1;
};

AttrMap parse_assignments(const std::vector<std::string>& items, const std::string& flag)
{
    AttrMap out;
    for (const auto& item : items) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError(flag + " expects KEY=VALUE, got '" + item + "'");
        std::string value = item.substr(eq + 1);
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        out[item.substr(0, eq)] = value;
    }
    return out;
}

json stats_json(const AttackGraphStats& s)
{
    return {{"conditions_created", s.conditions_created},
            {"exploits_created", s.exploits_created},
            {"edges_created", s.edges_created},
            {"iterations", s.iterations},
            {"warnings", s.warnings}};
}

json reach_json(const ReachabilityReport& r)
{
    json edges = json::array();
    for (const auto& [a, b] : r.edges_added)
        edges.push_back({a, b});
    json j{{"edges_added", edges}, {"count", r.edges_added.size()}, {"engine_visits", r.visits}};
    if (const auto* p = std::get_if<IncrementalPaperFaithful>(&r.mode)) {
        j["mode"] = "paper-faithful";
        j["generation"] = p->generation;
    } else if (const auto* s = std::get_if<IncrementalSound>(&r.mode)) {
        j["mode"] = "sound";
        j["generation"] = s->generation;
    } else {
        j["mode"] = "full";
    }
    return j;
}

json session_json(const MergeSession& s)
{
    AttrMap vicinity = s.vicinity;
    json vic = json::object();
    for (const auto& [k, v] : vicinity)
        vic[k] = to_string(v);
    return {{"session", s.session_id},
            {"edge_type", s.edge_type},
            {"topologies", {s.topologies.first, s.topologies.second}},
            {"vicinity", vic},
            {"edges", s.created_edges.size()},
            {"devices", s.devices},
            {"state", s.active ? "active" : "closed"}};
}

json path_json(const AttackPath& p) { return {{"length", p.length()}, {"nodes", p.names}}; }

void require_topology(const PropertyGraph& g, const std::string& topo)
{
    if (!topology_registered(g, topo))
        throw UnknownTopology("unknown topology '" + topo + "'");
}

struct Options {
    std::string graph;
    std::vector<std::string> files;

    std::vector<std::string> reach_labels;
    std::vector<std::string> reach_where;
    std::optional<int> incremental;
    bool sound = false;

    std::string target;
    std::string attack_label;
    bool prune = false;

    std::string topo_a;
    std::string topo_b;
    std::vector<std::string> vicinity;

    int session = 0;
    std::optional<int> demerge_session;
    std::optional<std::string> demerge_attack;
    std::string attack_filter;

    std::string kind;
    std::string from;
    std::string to;
    std::vector<std::string> labels;

    bool dot = false;
    std::vector<std::string> select;
    std::string out_file;
    std::string save_file;
};

struct Outcome {
    json result;
    bool mutated = false;
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Attack-graph workbench for merging IoT topologies", "attackgraph"};
    app.require_subcommand(1);
    app.add_option("--graph", o.graph, "Workspace archive (default: $ATTACKGRAPH_WORKSPACE)");

    auto* load = app.add_subcommand("load", "Load scenario files into the workspace");
    load->add_option("files", o.files, "Scenario documents");

    auto* reach = app.add_subcommand("reach", "Derive REACHES edges");
    reach->add_option("--label", o.reach_labels, "Restrict to devices carrying these labels");
    reach->add_option("--where", o.reach_where, "Restrict to devices with KEY=VALUE");
    auto* inc = reach->add_option("--incremental", o.incremental, "Update for merge session N only");
    reach->add_flag("--sound", o.sound, "Also find paths mixing old and new links")->needs(inc);
    inc->excludes("--label")->excludes("--where");

    auto* attack = app.add_subcommand("attack", "Generate an attack graph");
    attack->add_option("--target", o.target, "Target topology")->required();
    attack->add_option("--label", o.attack_label, "Attack-graph label")->required();
    attack->add_flag("--prune-cycles", o.prune, "Remove cycles and orphan conditions afterwards");

    auto* merge = app.add_subcommand("merge", "Join topology A into topology B");
    merge->add_option("A", o.topo_a, "Joining topology")->required();
    merge->add_option("B", o.topo_b, "Host topology")->required();
    merge->add_option("--vicinity", o.vicinity, "KEY=VALUE filter on the host side");

    auto* amerge = app.add_subcommand("attack-merge", "Extend attack graphs after a merge");
    amerge->add_option("--session", o.session, "Merge session")->required();
    amerge->add_option("--target", o.target, "Target topology")->required();
    amerge->add_option("--label", o.attack_label, "Attack-graph label of the target")->required();

    auto* demerge = app.add_subcommand("demerge", "Undo a topology merge or merged attack graphs");
    auto* dm_session = demerge->add_option("--session", o.demerge_session, "Merge session to undo");
    auto* dm_attack = demerge->add_option("--attack", o.attack_filter, "Remove merged attack-graph nodes [of topology T]")
                          ->expected(0, 1);
    dm_session->excludes(dm_attack);
    demerge->require_option(1);

    auto* metric = app.add_subcommand("metric", "Attack-path metrics");
    metric->add_option("--kind", o.kind, "shortest | count | histogram | list")
        ->required()
        ->check(CLI::IsMember({"shortest", "count", "histogram", "list"}));
    metric->add_option("--from", o.from, "Start device")->required();
    metric->add_option("--to", o.to, "End device")->required();
    metric->add_option("--labels", o.labels, "Attack-graph labels to traverse")->required();

    auto* exp = app.add_subcommand("export", "Export the workspace");
    auto* exp_dot = exp->add_flag("--dot", o.dot, "Graphviz document");
    exp->add_option("--select", o.select, "Only nodes with these labels")->needs(exp_dot);
    exp->add_option("--out", o.out_file, "Write the DOT document here")->needs(exp_dot);
    auto* exp_save = exp->add_option("--save", o.save_file, "Copy the archive to FILE");
    exp_dot->excludes(exp_save);
    exp->require_option(1, 0);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "attackgraph: " << e.what() << '\n';
        return kExitUsage;
    }
    if (dm_attack->count() > 0 && !o.attack_filter.empty())
        o.demerge_attack = o.attack_filter;

    const auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    try {
        if (o.graph.empty()) {
            if (const char* env = std::getenv("ATTACKGRAPH_WORKSPACE"))
                o.graph = env;
        }
        if (o.graph.empty())
            throw UsageError("no workspace: pass --graph or set ATTACKGRAPH_WORKSPACE");
        const fs::path ws = o.graph;

        WorkspaceLock lock(ws);
        PropertyGraph g;
        if (fs::exists(ws))
            g = read_archive_file(ws);
        else if (command != "load")
            throw ArchiveError("workspace " + ws.string() + " does not exist; run 'load' first");

        const auto stats_before = g.mutation_stats();
        const auto visits_before = g.visits();
        const auto t0 = std::chrono::steady_clock::now();
        Outcome res;

        if (command == "load") {
            json topologies = json::array();
            for (const auto& f : o.files)
                topologies.push_back(load_scenario(read_scenario_file(f), g));
            res = {{{"topologies", topologies}}, true};
        } else if (command == "reach") {
            if (o.incremental) {
                auto kind = o.sound ? IncrementalKind::Sound : IncrementalKind::PaperFaithful;
                res = {reach_json(update_reachability(g, *o.incremental, kind)), true};
                res.result["session"] = *o.incremental;
            } else {
                NodeFilter scope{LabelSet(o.reach_labels.begin(), o.reach_labels.end()),
                                 parse_assignments(o.reach_where, "--where")};
                res = {reach_json(compute_full(g, scope)), true};
            }
        } else if (command == "attack") {
            require_topology(g, o.target);
            auto stats = generate(g, {o.target, o.attack_label, false, {}, std::nullopt});
            json j = stats_json(stats);
            if (o.prune) {
                j["exploits_pruned"] = prune_cycles(g, o.attack_label);
                j["orphans_removed"] = remove_orphan_conditions(g, o.attack_label);
            }
            res = {j, true};
        } else if (command == "merge") {
            auto session = merge_topologies(g, o.topo_a, o.topo_b, parse_assignments(o.vicinity, "--vicinity"));
            res = {session_json(session), true};
        } else if (command == "attack-merge") {
            auto stats = merge_attack_graphs(g, o.session, o.target, o.attack_label);
            json j = stats_json(stats);
            j["session"] = o.session;
            res = {j, true};
        } else if (command == "demerge") {
            if (o.demerge_session) {
                auto removed = demerge_topology(g, *o.demerge_session);
                res = {{{"session", *o.demerge_session}, {"edges_removed", removed}}, true};
            } else {
                auto removed = demerge_attack_graphs(g, o.demerge_attack);
                res = {{{"filter", o.demerge_attack ? json(*o.demerge_attack) : json(nullptr)},
                        {"nodes_removed", removed}},
                       true};
            }
        } else if (command == "metric") {
            require_device(g, o.from);
            require_device(g, o.to);
            LabelSet labels(o.labels.begin(), o.labels.end());
            json j{{"metric", o.kind}, {"from", o.from}, {"to", o.to}, {"labels", o.labels}};
            if (o.kind == "shortest") {
                auto p = shortest_attack_path(g, o.from, o.to, labels);
                j["value"] = p ? json(p->length()) : json(nullptr);
                j["path"] = p ? json(p->names) : json(nullptr);
            } else if (o.kind == "count") {
                j["value"] = count_attack_paths(g, o.from, o.to, labels);
            } else if (o.kind == "histogram") {
                json h = json::array();
                for (const auto& [len, count] : path_length_histogram(g, o.from, o.to, labels))
                    h.push_back({{"length", len}, {"count", count}});
                j["histogram"] = h;
            } else {
                json paths = json::array();
                for (const auto& p : enumerate_attack_paths(g, o.from, o.to, labels))
                    paths.push_back(path_json(p));
                j["paths"] = paths;
                j["value"] = paths.size();
            }
            res = {j, false};
        } else if (command == "export") {
            if (o.dot) {
                auto doc = export_dot(g, LabelSet(o.select.begin(), o.select.end()));
                json j{{"format", "dot"}};
                if (o.out_file.empty()) {
                    j["dot"] = doc;
                } else {
                    std::ofstream f(o.out_file, std::ios::binary | std::ios::trunc);
                    if (!(f << doc))
                        throw ArchiveError("cannot write " + o.out_file);
                    j["file"] = o.out_file;
                }
                res = {j, false};
            } else {
                write_archive_file(g, o.save_file);
                res = {{{"format", "archive"}, {"file", o.save_file}}, false};
            }
        }

        const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
        if (res.mutated)
            write_archive_file(g, ws);

        const auto& after = g.mutation_stats();
        json report{{"command", command},
                    {"nodes_created", after.nodes_created - stats_before.nodes_created},
                    {"nodes_deleted", after.nodes_deleted - stats_before.nodes_deleted},
                    {"edges_created", after.edges_created - stats_before.edges_created},
                    {"edges_deleted", after.edges_deleted - stats_before.edges_deleted},
                    {"visits", g.visits() - visits_before},
                    {"result", res.result},
                    {"elapsed_ms", elapsed.count()}};
        out << report.dump(2) << '\n';
        return kExitOk;
    } catch (const UsageError& e) {
        err << "attackgraph: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ScenarioError& e) {
        err << "attackgraph: scenario error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ArchiveError& e) {
        err << "attackgraph: workspace error: " << e.what() << '\n';
        return kExitInput;
    } catch (const UnknownDevice& e) {
        err << "attackgraph: " << e.what() << '\n';
        return kExitUnknownName;
    } catch (const UnknownTopology& e) {
        err << "attackgraph: " << e.what() << '\n';
        return kExitUnknownName;
    } catch (const UnknownGeneration& e) {
        err << "attackgraph: " << e.what() << '\n';
        return kExitUnknownName;
    } catch (const UnknownSession& e) {
        err << "attackgraph: " << e.what() << '\n';
        return kExitUnknownName;
    } catch (const UnknownNode& e) {
        err << "attackgraph: " << e.what() << '\n';
        return kExitUnknownName;
    } catch (const SessionStateError& e) {
        err << "attackgraph: session error: " << e.what() << '\n';
        return kExitSessionState;
    } catch (const std::exception& e) {
        err << "attackgraph: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace ag
