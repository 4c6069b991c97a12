#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gridgame/attack_graph.hpp"
#include "gridgame/datalog.hpp"
#include "gridgame/error.hpp"
#include "support.hpp"

using namespace gridgame;
using datalog::parse_fact;
using datalog::parse_rule;
using NT = LogicalAttackGraph::NodeType;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<Fact> chain_facts() {
  return {
      parse_fact("attackerLocated(a)"),
      parse_fact("netAccess(a,b,tcp,445)"),
      parse_fact("netAccess(b,c,tcp,445)"),
      parse_fact("vulExists(b,CVE-1,remote,codeExec)"),
      parse_fact("vulExists(c,CVE-2,remote,codeExec)"),
  };
}

std::set<Fact> fact_set(const datalog::Model& m) { return {m.facts.begin(), m.facts.end()}; }

std::set<test::Instance> instance_set(const datalog::Model& m) {
  std::set<test::Instance> out;
  for (const auto& d : m.derivations) {
    std::vector<Fact> body;
    for (auto b : d.body) body.push_back(m.facts[b]);
    out.emplace(d.rule, body, m.facts[d.head]);
  }
  return out;
}

}  // namespace

TEST_SUITE("attack_graph") {
  TEST_CASE("fact and rule parsing") {
    const auto f = parse_fact("netAccess(h1,h2,tcp,502).");
    CHECK(f.predicate == "netAccess");
    CHECK(f.args == std::vector<std::string>{"h1", "h2", "tcp", "502"});
    CHECK(f.to_string() == "netAccess(h1,h2,tcp,502)");
    const auto r = parse_rule("execCode(H, user) :- netReach(H, P, Q), vulExists(H, V, remote, codeExec).");
    CHECK(r.body.size() == 2);
    CHECK(r.head.args[0].variable);
    CHECK_FALSE(r.body[1].args[2].variable);
    CHECK_THROWS_AS(datalog::validate_rule(parse_rule("execCode(H, X) :- attackerLocated(H).")), ValidationError);
    CHECK_THROWS_AS(datalog::validate_rule(parse_rule("bogus(H) :- attackerLocated(H).")), ValidationError);
  }

  TEST_CASE("single remote exploit") {
    const std::vector<Fact> facts = {parse_fact("attackerLocated(a)"), parse_fact("netAccess(a,b,tcp,445)"),
                                     parse_fact("vulExists(b,v,remote,codeExec)")};
    const auto g = derive_attack_graph(facts, builtin_ruleset());
    CHECK(g.find(parse_fact("execCode(b,user)")).has_value());
  }

  TEST_CASE("no attacker location derives nothing") {
    auto facts = chain_facts();
    facts.erase(facts.begin());
    const auto m = datalog::evaluate(facts, builtin_ruleset());
    for (const auto& f : m.facts) CHECK(f.predicate != "execCode");
  }

  TEST_CASE("three-host chain matches the naive oracle") {
    const auto& rules = builtin_ruleset();
    const auto m = datalog::evaluate(chain_facts(), rules);
    CHECK(fact_set(m) == test::naive_fixpoint(chain_facts(), rules));
    CHECK(instance_set(m) == test::instances(fact_set(m), rules));
    CHECK(instance_set(m).size() == m.derivations.size());

    const auto dag = extract_proof_dag(derive_attack_graph(chain_facts(), rules));
    CHECK(dag.is_acyclic());
    const auto c = dag.find(parse_fact("execCode(c,user)"));
    REQUIRE(c);
    // execCode(c,user) <- AND(remote exploit) <- netReach(c) <- AND(multi-hop) <- execCode(b,user) <- AND(remote exploit)
    const auto& and_c = dag.predecessors(*c);
    REQUIRE(and_c.size() == 1);
    CHECK(dag.node(and_c[0]).technique == "T1190");
    const auto reach_c = dag.find(parse_fact("netReach(c,tcp,445)"));
    REQUIRE(reach_c);
    const auto& and_reach = dag.predecessors(*reach_c);
    REQUIRE(and_reach.size() == 1);
    const auto b = dag.find(parse_fact("execCode(b,user)"));
    REQUIRE(b);
    const auto& body = dag.predecessors(and_reach[0]);
    CHECK(std::find(body.begin(), body.end(), *b) != body.end());
    CHECK(dag.node(dag.predecessors(*b)[0]).technique == "T1190");
  }

  TEST_CASE("random fact sets match the naive oracle") {
    Rng rng(2);
    const auto& rules = builtin_ruleset();
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(4));
      std::vector<Fact> facts{{"attackerLocated", {"h0"}}};
      const char* conseq[] = {"codeExec", "privEscalation", "dos"};
      for (int a = 0; a < n; ++a) {
        const auto ha = "h" + std::to_string(a);
        for (int b = 0; b < n; ++b)
          if (a != b && rng.uniform() < 0.4) facts.push_back({"netAccess", {ha, "h" + std::to_string(b), "tcp", "1"}});
        if (rng.uniform() < 0.6)
          facts.push_back({"vulExists", {ha, "V" + std::to_string(a), rng.below(4) ? "remote" : "local",
                                         conseq[rng.below(3)]}});
        if (rng.uniform() < 0.5) facts.push_back({"hasAccount", {"u", ha}});
      }
      const auto m = datalog::evaluate(facts, rules);
      CHECK(fact_set(m) == test::naive_fixpoint(facts, rules));
      CHECK(instance_set(m) == test::instances(fact_set(m), rules));
      CHECK(instance_set(m).size() == m.derivations.size());
      std::set<Fact> more = fact_set(m);
      facts.push_back({"netAccess", {"h0", "h1", "udp", "9"}});
      const auto grown = fact_set(datalog::evaluate(facts, rules));
      CHECK(std::includes(grown.begin(), grown.end(), more.begin(), more.end()));
    }
  }

  TEST_CASE("builtin ruleset metadata") {
    const auto& rules = builtin_ruleset();
    CHECK(rules.size() >= 6);
    for (const auto& r : rules) {
      CHECK_NOTHROW(datalog::validate_rule(r));
      CHECK_FALSE(r.technique.empty());
    }
    const auto remote = std::find_if(rules.begin(), rules.end(), [](const Rule& r) { return r.label == "remote exploit"; });
    REQUIRE(remote != rules.end());
    CHECK(remote->technique == "T1190");
  }

  TEST_CASE("AND nodes point at exactly their rule bodies") {
    const auto g = derive_attack_graph(chain_facts(), builtin_ruleset());
    for (const auto& n : g.nodes()) {
      if (n.type != NT::And) continue;
      CHECK_FALSE(g.predecessors(n.id).empty());
      CHECK(g.successors(n.id).size() == 1);
    }
    CHECK(g.count(NT::Leaf) == chain_facts().size());
  }

  TEST_CASE("facts from topology") {
    auto t = test::topology_of({test::host("a", 4, 1.0), test::host("b", 3, 1.0, {test::vuln("CVE-1")})}, {{"a", "b"}},
                               {"a"});
    t.nodes[0].services.clear();
    const auto facts = facts_from_topology(t);
    auto count = [&](const std::vector<Fact>& fs, const std::string& p) {
      return std::count_if(fs.begin(), fs.end(), [&](const Fact& f) { return f.predicate == p; });
    };
    CHECK(count(facts, "netAccess") == 1);
    CHECK(count(facts, "vulExists") == 1);
    CHECK(count(facts, "attackerLocated") == 1);

    Measure block;
    block.kind = MeasureKind::AccessRestriction;
    block.target = link_id("a", "b");
    const std::vector<Measure> ms{block};
    CHECK(count(facts_from_topology(t, ms), "netAccess") == 0);
  }

  TEST_CASE("default scenario fact count") {
    const auto t = default_scenario().topology;
    std::size_t want = t.entry_points.size();
    for (const auto& n : t.nodes) want += n.vulnerabilities.size() + n.accounts.size();
    for (const auto& l : t.edges) want += t.node(l.a).services.size() + t.node(l.b).services.size();
    CHECK(facts_from_topology(t).size() == want);
  }

  TEST_CASE("edge weight arithmetic") {
    CHECK(edge_weight(3.0, 1500.0, 0.5) == doctest::Approx(0.004).epsilon(1e-15));
    CHECK(edge_weight(2.0, 400.0, 1.0) == 2.0 / 400.0);
    CHECK(edge_weight(2.0, 0.0, 1.0) == 2.0);
  }

  TEST_CASE("action graph projection and weights") {
    const auto c = test::chain_scenario();
    const auto lag = derive_attack_graph(facts_from_topology(c.topology), builtin_ruleset());
    auto g = project_actions(lag, c.topology);
    const auto entry = g.find_state("entry", "root");
    const auto mid = g.find_state("mid", "user");
    REQUIRE(entry);
    REQUIRE(mid);
    CHECK(g.start_states == std::vector<std::size_t>{*entry});
    BeliefTable beliefs;
    const WeightContext ctx{0.5, 1.0, 0.5};
    auto usable = assign_weights(g, beliefs, c.topology, c.engine.ttc, ctx);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& edge = g.edges[e];
      CHECK_FALSE(edge.derivations.empty());
      CHECK(usable[e]);
      CHECK(edge.weight > 0.0);
      const double cost = std::max(c.topology.node(g.states[edge.dst].host).outage_cost, 1.0);
      CHECK(edge.weight == edge.ttc / cost);
    }
    beliefs.record("mid", "CVE-2000-0001", false);
    usable = assign_weights(g, beliefs, c.topology, c.engine.ttc, ctx);
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (g.edges[e].action_key == "CVE-2000-0001") CHECK_FALSE(usable[e]);
    const auto pruned = to_action_graph(lag, beliefs, c.topology, c.engine.ttc, ctx);
    CHECK(pruned.reachable_hosts() == std::vector<std::string>{"entry"});
  }

  TEST_CASE("zero outage cost clamps to c_min") {
    auto t = test::topology_of({test::host("a", 4, 1.0), test::host("b", 3, 0.0, {test::vuln("CVE-1")})}, {{"a", "b"}},
                               {"a"});
    const auto lag = derive_attack_graph(facts_from_topology(t), builtin_ruleset());
    const auto g = to_action_graph(lag, {}, t, TTCParams{}, {});
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].weight == g.edges[0].ttc);
  }

  TEST_CASE("removing netAccess never adds paths") {
    const auto c = default_scenario();
    const auto full = to_action_graph(derive_attack_graph(facts_from_topology(c.topology), builtin_ruleset()), {},
                                      c.topology, c.engine.ttc, {});
    auto facts = facts_from_topology(c.topology);
    Rng rng(4);
    for (int i = 0; i < 40; ++i) {
      const auto k = rng.below(facts.size());
      if (facts[k].predicate == "netAccess") facts.erase(facts.begin() + static_cast<long>(k));
    }
    const auto less = to_action_graph(derive_attack_graph(facts, builtin_ruleset()), {}, c.topology, c.engine.ttc, {});
    const auto a = full.reachable_hosts();
    const auto b = less.reachable_hosts();
    CHECK(std::includes(a.begin(), a.end(), b.begin(), b.end()));
  }

  TEST_CASE("weights are bit-stable") {
    const auto c = default_scenario();
    const auto lag = derive_attack_graph(facts_from_topology(c.topology), builtin_ruleset());
    const auto g1 = to_action_graph(lag, {}, c.topology, c.engine.ttc, {});
    const auto g2 = to_action_graph(lag, {}, c.topology, c.engine.ttc, {});
    REQUIRE(g1.edges.size() == g2.edges.size());
    for (std::size_t e = 0; e < g1.edges.size(); ++e) CHECK(g1.edges[e].weight == g2.edges[e].weight);
  }

  TEST_CASE("MulVAL import") {
    const auto toy = import_mulval_graph("1,\"execCode(b,user)\",\"OR\",0\n2,\"RULE 2 (remote exploit)\",\"AND\",0\n"
                                         "3,\"attackerLocated(a)\",\"LEAF\",1\n",
                                         "1,2,-1\n2,3,-1\n");
    CHECK(toy.nodes().size() == 3);
    CHECK(toy.edges().size() == 2);
    CHECK(toy.node(3).type == NT::Leaf);
    const auto& te = toy.edges();
    CHECK(std::find(te.begin(), te.end(), LogicalAttackGraph::Edge{3, 2}) != te.end());
    CHECK(std::find(te.begin(), te.end(), LogicalAttackGraph::Edge{2, 1}) != te.end());
    CHECK_THROWS_AS(import_mulval_graph("1,\"x\",\"LEAF\",0\n", "1,99,-1\n"), ParseError);
    CHECK_THROWS_AS(import_mulval_graph("1,\"x\",\"MAYBE\",0\n", ""), ParseError);

    const auto sample = import_mulval_graph(read_file(GRIDGAME_TEST_DATA "/mulval/VERTICES.CSV"),
                                            read_file(GRIDGAME_TEST_DATA "/mulval/ARCS.CSV"));
    CHECK(sample.nodes().size() == 23);
    CHECK(sample.edges().size() == 22);
    CHECK(sample.is_acyclic());
  }

  TEST_CASE("exports") {
    const auto g = derive_attack_graph(chain_facts(), builtin_ruleset());
    const auto dot = to_dot(g);
    CHECK(dot.rfind("digraph", 0) == 0);
    const auto j = nlohmann::json::parse(to_json(g));
    CHECK(j["nodes"].size() == g.nodes().size());
    CHECK(j["edges"].size() == g.edges().size());
  }
}
