#include <gtest/gtest.h>

#include <regex>

#include "attackgraph/attack_graph.hpp"
#include "attackgraph/reachability.hpp"
#include "attackgraph/scenario.hpp"
#include "support.hpp"

using namespace ag;

namespace {

PropertyGraph clinic_raw()
{
    PropertyGraph g;
    load_scenario(read_scenario_file(agtest::fixture("clinic.yaml")), g);
    load_scenario(read_scenario_file(agtest::fixture("patient.yaml")), g);
    compute_full(g);
    generate(g, {"ClinicTopology", "ClinicAttackGraph"});
    return g;
}

std::set<std::string> exploits(const PropertyGraph& g, const std::string& l)
{
    std::set<std::string> out;
    for (NodeId n : g.match_nodes({l, label::kExploit}))
        out.insert(g.node(n).name());
    return out;
}

} // namespace

TEST(AttackGraph, Names)
{
    EXPECT_EQ(privilege_condition_name("Database"), "User/SuperUser(Database)");
    EXPECT_EQ(protocol_condition_name("FTP", "Workstation 1", "Workstation 2"), "FTP(Workstation 1, Workstation 2)");
    EXPECT_EQ(exploit_name("CVE-2017-6753", "Attacker Machine", "Workstation 1"),
              "CVE-2017-6753(Attacker Machine, Workstation 1)");
}

TEST(AttackGraph, ClinicRawGraph)
{
    auto g = clinic_raw();
    std::set<std::string> expected{
        "CVE-2017-6753(Attacker Machine, Workstation 1)", "CVE-2021-41635(Workstation 1, Workstation 2)",
        "CVE-2022-30318(Workstation 1, Workstation 3)",   "CVE-2009-2446(Workstation 2, Database)",
        "CVE-2009-2446(Workstation 3, Database)",         "CVE-2017-1000251(Workstation 1, Kiosk)",
        "CVE-2017-8628(Kiosk, Workstation 1)"};
    EXPECT_EQ(exploits(g, "ClinicAttackGraph"), expected);
    EXPECT_EQ(agtest::exploit_oracle(g, "ClinicTopology"), expected);
    // One privilege condition per compromised device, never duplicated.
    EXPECT_EQ(g.match_nodes({label::kCondition}, {{"name", "User/SuperUser(Database)"}}).size(), 1u);
    EXPECT_FALSE(agtest::topologically_sortable(g, "ClinicAttackGraph"));
}

TEST(AttackGraph, PatientGraph)
{
    PropertyGraph g;
    load_scenario(read_scenario_file(agtest::fixture("patient.yaml")), g);
    compute_full(g);
    auto stats = generate(g, {"PatientTopology", "PatientAttackGraph"});
    EXPECT_EQ(exploits(g, "PatientAttackGraph"),
              (std::set<std::string>{"CVE-2017-1000251(Smart Phone, Smart Watch)"}));
    EXPECT_EQ(stats.exploits_created, 1u);
    EXPECT_EQ(stats.conditions_created, 3u);
    EXPECT_EQ(stats.edges_created, 3u);
}

TEST(AttackGraph, EdgeShapeAndPreconditions)
{
    auto g = clinic_raw();
    const std::regex shape(R"((.+)\((.+), (.+)\))");
    for (NodeId n : g.match_nodes({"ClinicAttackGraph"})) {
        const Node& nd = g.node(n);
        for (EdgeId e : g.out_edges(n)) {
            const Edge& ed = g.edge(e);
            const Node& other = g.node(ed.dst);
            if (ed.type == edge::kExploits) {
                EXPECT_TRUE(nd.has_label(label::kCondition));
                EXPECT_TRUE(other.has_label(label::kExploit));
            } else {
                EXPECT_EQ(ed.type, edge::kLeads);
                EXPECT_TRUE(nd.has_label(label::kExploit));
                EXPECT_TRUE(other.has_label(label::kCondition));
            }
        }
        if (!nd.has_label(label::kExploit))
            continue;
        std::smatch m;
        const std::string name = nd.name();
        ASSERT_TRUE(std::regex_match(name, m, shape)) << name;
        EXPECT_TRUE(reaches(g, m[2], m[3])) << name;
        EXPECT_GE(g.in_edges(n, edge::kExploits).size(), 1u);
        EXPECT_GE(g.out_edges(n, edge::kLeads).size(), 1u);
        // Every protocol pre-condition is fed in and available to the source.
        auto access = g.node(require_device(g, m[2])).list("accessibility");
        std::set<std::string> feeds;
        for (EdgeId e : g.in_edges(n, edge::kExploits))
            feeds.insert(g.node(g.edge(e).src).name());
        for (NodeId v : g.match_nodes({label::kVulnerability}, {{"name", m[1].str()}, {"host", m[3].str()}})) {
            for (const auto& c : g.node(v).list("preConditions")) {
                if (is_privilege_token(c))
                    continue;
                EXPECT_TRUE(feeds.contains(protocol_condition_name(c, m[2], m[3]))) << name << " " << c;
                EXPECT_NE(std::find(access.begin(), access.end(), c), access.end());
            }
        }
    }
}

TEST(AttackGraph, RegenerationCreatesNothing)
{
    auto g = clinic_raw();
    auto again = generate(g, {"ClinicTopology", "ClinicAttackGraph"});
    EXPECT_EQ(again.conditions_created + again.exploits_created + again.edges_created, 0u);
    EXPECT_EQ(again.iterations, 0u);
}

TEST(AttackGraph, NoPrivilegeMeansEmpty)
{
    PropertyGraph g;
    auto doc = read_scenario_file(agtest::fixture("clinic.yaml"));
    for (auto& d : doc.devices)
        d.privilege.reset();
    load_scenario(doc, g);
    compute_full(g);
    auto stats = generate(g, {"ClinicTopology", "ClinicAttackGraph"});
    EXPECT_TRUE(g.match_nodes({"ClinicAttackGraph"}).empty());
    EXPECT_EQ(stats.iterations, 0u);
}

TEST(AttackGraph, WarnsWithoutReachability)
{
    PropertyGraph g;
    load_scenario(read_scenario_file(agtest::fixture("clinic.yaml")), g);
    auto stats = generate(g, {"ClinicTopology", "ClinicAttackGraph"});
    EXPECT_EQ(stats.warnings.size(), 1u);
    EXPECT_EQ(g.match_nodes({label::kExploit}).size(), 0u);
}

TEST(AttackGraph, PruneClinicCycle)
{
    auto g = clinic_raw();
    auto edges_before = g.edge_count();
    EXPECT_EQ(prune_cycles(g, "ClinicAttackGraph"), 2u);
    EXPECT_TRUE(agtest::topologically_sortable(g, "ClinicAttackGraph"));
    // Each pruned exploit had 2 inputs and 1 output.
    EXPECT_EQ(edges_before - g.edge_count(), 6u);
    EXPECT_EQ(remove_orphan_conditions(g, "ClinicAttackGraph"), 3u);
    for (NodeId n : g.match_nodes({"ClinicAttackGraph", label::kCondition}))
        EXPECT_GT(g.degree(n), 0u);
    EXPECT_TRUE(g.match_nodes({label::kCondition}, {{"name", "User/SuperUser(Kiosk)"}}).empty());
    EXPECT_EQ(prune_cycles(g, "ClinicAttackGraph"), 0u);
    EXPECT_EQ(remove_orphan_conditions(g, "ClinicAttackGraph"), 0u);
}

TEST(AttackGraph, PruneTwoIndependentCycles)
{
    PropertyGraph g;
    const std::string l = "AG";
    auto cond = [&](const std::string& n) { return g.create_node({l, label::kCondition}, {{"name", n}}); };
    auto expl = [&](const std::string& n) { return g.create_node({l, label::kExploit}, {{"name", n}}); };
    NodeId a = cond("A"), b = cond("B"), c = cond("C"), d = cond("D");
    NodeId ab = expl("ab"), ba = expl("ba"), cd = expl("cd"), dc = expl("dc");
    g.create_edge(a, ab, edge::kExploits);
    g.create_edge(ab, b, edge::kLeads);
    g.create_edge(b, ba, edge::kExploits);
    g.create_edge(ba, a, edge::kLeads);
    g.create_edge(c, cd, edge::kExploits);
    g.create_edge(cd, d, edge::kLeads);
    g.create_edge(d, dc, edge::kExploits);
    g.create_edge(dc, c, edge::kLeads);
    EXPECT_EQ(prune_cycles(g, l), 4u);
    EXPECT_TRUE(agtest::topologically_sortable(g, l));
    EXPECT_EQ(remove_orphan_conditions(g, l), 4u);
}

TEST(AttackGraph, OrphanRemovalSkipsExploits)
{
    PropertyGraph g;
    g.create_node({"AG", label::kExploit}, {{"name", "lonely"}});
    g.create_node({"AG", label::kCondition}, {{"name", "orphan"}});
    EXPECT_EQ(remove_orphan_conditions(g, "AG"), 1u);
    EXPECT_EQ(g.node_count(), 1u);
}

TEST(AttackGraph, RandomizedAgainstOracle)
{
    std::mt19937 rng(5);
    agtest::RandomShape shape{6, 2, 6};
    for (int i = 0; i < 80; ++i) {
        PropertyGraph g;
        load_scenario(agtest::random_scenario(rng, "T", "t", shape), g);
        compute_full(g);
        generate(g, {"T", "AG"});
        ASSERT_EQ(exploits(g, "AG"), agtest::exploit_oracle(g, "T")) << "instance " << i;
    }
}
