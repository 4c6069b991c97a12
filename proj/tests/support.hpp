#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "gridgame/attack_graph.hpp"
#include "gridgame/datalog.hpp"
#include "gridgame/rng.hpp"
#include "gridgame/scenario.hpp"
#include "gridgame/topology.hpp"

namespace gridgame::test {

inline Vulnerability vuln(std::string id, AccessComplexity ac = AccessComplexity::Low, double expl = 10.0,
                          Locality loc = Locality::Remote, Consequence c = Consequence::CodeExec) {
  return {std::move(id), ac, expl, loc, c};
}

inline NodeProfile host(std::string id, int level, double peak_kw, std::vector<Vulnerability> vulns = {},
                        std::vector<std::string> accounts = {}) {
  NodeProfile n;
  n.id = std::move(id);
  n.purdue_level = level;
  n.peak_power_kw = peak_kw;
  n.vulnerabilities = std::move(vulns);
  n.services = {{"tcp", 445}};
  n.accounts = std::move(accounts);
  return n;
}

/// Single-subnet topology; addresses 10.0.0.x in node order.
inline TopologyGraph topology_of(std::vector<NodeProfile> nodes, std::vector<std::pair<std::string, std::string>> links,
                                 std::vector<std::string> entries) {
  TopologyGraph t;
  Subnet s{"S0", nodes.empty() ? 0 : nodes.front().purdue_level, {}};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].subnet = "S0";
    nodes[i].address = "10.0.0." + std::to_string(i + 1);
    s.nodes.push_back(nodes[i].id);
  }
  t.nodes = std::move(nodes);
  for (auto& [a, b] : links) t.edges.emplace_back(a, b);
  t.subnets = {s};
  t.entry_points = std::move(entries);
  apply_outage_costs(t, CostModel{});
  return t;
}

/// Scenario around an explicit topology; the pool is every distinct vulnerability used.
inline ScenarioConfig scenario_of(TopologyGraph t) {
  ScenarioConfig c;
  for (const auto& n : t.nodes)
    for (const auto& v : n.vulnerabilities)
      if (std::none_of(c.vulnerability_pool.begin(), c.vulnerability_pool.end(),
                       [&](const Vulnerability& p) { return p.id == v.id; }))
        c.vulnerability_pool.push_back(v);
  c.topology = std::move(t);
  c.engine.noise.background_rate = 0.0;
  c.validate();
  return c;
}

/// entry -> mid -> scada chain with one remote code-exec vulnerability on
/// each hop target.
inline ScenarioConfig chain_scenario() {
  auto t = topology_of({host("entry", 4, 1.0), host("mid", 3, 5.0, {vuln("CVE-2000-0001")}),
                        host("scada", 2, 50.0, {vuln("CVE-2000-0002", AccessComplexity::High)})},
                       {{"entry", "mid"}, {"mid", "scada"}}, {"entry"});
  return scenario_of(std::move(t));
}

// ---- naive Datalog oracle ----

using Binding = std::map<std::string, std::string>;

inline bool unify(const datalog::Atom& atom, const Fact& fact, Binding& b) {
  if (atom.predicate != fact.predicate || atom.args.size() != fact.args.size()) return false;
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    const auto& term = atom.args[i];
    if (!term.variable) {
      if (term.name != fact.args[i]) return false;
      continue;
    }
    auto [it, inserted] = b.emplace(term.name, fact.args[i]);
    if (!inserted && it->second != fact.args[i]) return false;
  }
  return true;
}

inline Fact ground(const datalog::Atom& atom, const Binding& b) {
  Fact f{atom.predicate, {}};
  for (const auto& t : atom.args) f.args.push_back(t.variable ? b.at(t.name) : t.name);
  return f;
}

/// Ground instance: (rule index, body facts, head fact).
using Instance = std::tuple<std::size_t, std::vector<Fact>, Fact>;

/// All ground rule instances whose bodies hold in `facts`.
inline std::set<Instance> instances(const std::set<Fact>& facts, const std::vector<Rule>& rules) {
  std::set<Instance> out;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const auto& rule = rules[r];
    std::vector<Fact> chosen;
    std::function<void(std::size_t, Binding)> search = [&](std::size_t k, Binding b) {
      if (k == rule.body.size()) {
        out.emplace(r, chosen, ground(rule.head, b));
        return;
      }
      for (const auto& f : facts) {
        Binding next = b;
        if (!unify(rule.body[k], f, next)) continue;
        chosen.push_back(f);
        search(k + 1, next);
        chosen.pop_back();
      }
    };
    search(0, {});
  }
  return out;
}

/// Naive fixpoint: apply every rule to every fact until nothing changes.
inline std::set<Fact> naive_fixpoint(const std::vector<Fact>& input, const std::vector<Rule>& rules) {
  std::set<Fact> facts(input.begin(), input.end());
  while (true) {
    const auto before = facts.size();
    for (const auto& inst : instances(facts, rules)) facts.insert(std::get<2>(inst));
    if (facts.size() == before) return facts;
  }
}

// ---- electrical oracle ----

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

struct Wire {
  int a;
  int b;
  double r;
};

/// Current-flow betweenness straight from the definition: one grounded
/// Laplacian solve per ordered pair, throughput from Ohm's law.
inline std::vector<double> electrical_betweenness(int n, const std::vector<Wire>& wires) {
  std::vector<double> total(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (s == t) continue;
      std::vector<int> slot(static_cast<std::size_t>(n), -1);
      int m = 0;
      for (int v = 0; v < n; ++v)
        if (v != t) slot[static_cast<std::size_t>(v)] = m++;
      std::vector<std::vector<double>> a(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m)));
      for (const auto& w : wires) {
        const double g = 1.0 / w.r;
        const int i = slot[static_cast<std::size_t>(w.a)];
        const int j = slot[static_cast<std::size_t>(w.b)];
        if (i >= 0) a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] += g;
        if (j >= 0) a[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] += g;
        if (i >= 0 && j >= 0) {
          a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -= g;
          a[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] -= g;
        }
      }
      std::vector<double> rhs(static_cast<std::size_t>(m), 0.0);
      rhs[static_cast<std::size_t>(slot[static_cast<std::size_t>(s)])] = 1.0;
      const auto x = gauss_solve(a, rhs);
      auto phi = [&](int v) { return v == t ? 0.0 : x[static_cast<std::size_t>(slot[static_cast<std::size_t>(v)])]; };
      for (int v = 0; v < n; ++v) {
        double incident = 0.0;
        for (const auto& w : wires)
          if (w.a == v || w.b == v) incident += std::abs(phi(w.a) - phi(w.b)) / w.r;
        const double supply = (v == s || v == t) ? 1.0 : 0.0;
        total[static_cast<std::size_t>(v)] += 0.5 * (incident - supply);
      }
    }
  for (auto& x : total) x /= static_cast<double>((n - 1) * (n - 2));
  return total;
}

/// Shortest-path betweenness on a tree: count interior visits of the
/// unique path between every ordered pair.
inline std::vector<double> tree_betweenness(int n, const std::vector<Wire>& wires) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& w : wires) {
    adj[static_cast<std::size_t>(w.a)].push_back(w.b);
    adj[static_cast<std::size_t>(w.b)].push_back(w.a);
  }
  std::vector<double> total(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s) {
    std::vector<int> parent(static_cast<std::size_t>(n), -2);
    parent[static_cast<std::size_t>(s)] = -1;
    std::vector<int> stack{s};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adj[static_cast<std::size_t>(v)])
        if (parent[static_cast<std::size_t>(w)] == -2) {
          parent[static_cast<std::size_t>(w)] = v;
          stack.push_back(w);
        }
    }
    for (int t = 0; t < n; ++t) {
      if (t == s) continue;
      for (int v = parent[static_cast<std::size_t>(t)]; v != s; v = parent[static_cast<std::size_t>(v)])
        total[static_cast<std::size_t>(v)] += 1.0;
    }
  }
  for (auto& x : total) x /= static_cast<double>((n - 1) * (n - 2));
  return total;
}

/// Random tree on n nodes (each node attaches to an earlier one) with
/// resistances in [0.5, 4].
inline std::vector<Wire> random_tree(Rng& rng, int n) {
  std::vector<Wire> w;
  for (int v = 1; v < n; ++v)
    w.push_back({static_cast<int>(rng.below(static_cast<std::uint64_t>(v))), v, 0.5 + 3.5 * rng.uniform()});
  return w;
}

// ---- path oracle ----

struct BestPath {
  double weight = 0.0;
  std::vector<std::string> states;
};

/// Exhaustive search over simple paths from any source to any goal.
/// Ties on weight go to the lexicographically smallest state-id sequence.
inline std::optional<BestPath> brute_force_path(const ActionGraph& g, const std::vector<std::size_t>& sources,
                                                const std::vector<std::size_t>& goals,
                                                const std::vector<bool>& usable) {
  std::optional<BestPath> best;
  std::set<std::size_t> goal_set(goals.begin(), goals.end());
  std::vector<std::size_t> trail;
  std::vector<bool> seen(g.states.size(), false);
  std::function<void(std::size_t, double)> dfs = [&](std::size_t v, double w) {
    if (goal_set.count(v)) {
      BestPath p{w, {}};
      for (auto s : trail) p.states.push_back(g.states[s].id());
      if (!best || p.weight < best->weight || (p.weight == best->weight && p.states < best->states)) best = p;
      return;
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& edge = g.edges[e];
      if (edge.src != v || (!usable.empty() && !usable[e]) || seen[edge.dst]) continue;
      seen[edge.dst] = true;
      trail.push_back(edge.dst);
      dfs(edge.dst, w + edge.weight);
      trail.pop_back();
      seen[edge.dst] = false;
    }
  };
  for (auto s : sources) {
    std::fill(seen.begin(), seen.end(), false);
    seen[s] = true;
    trail = {s};
    dfs(s, 0.0);
  }
  return best;
}

/// Random action graph over n states with integer weights in [1, 9].
inline ActionGraph random_action_graph(Rng& rng, int n, double density) {
  ActionGraph g;
  for (int i = 0; i < n; ++i) g.states.push_back({"h" + std::to_string(i), "user"});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b || rng.uniform() >= density) continue;
      const int parallel = 1 + static_cast<int>(rng.below(2));
      for (int k = 0; k < parallel; ++k) {
        ActionEdge e;
        e.src = static_cast<std::size_t>(a);
        e.dst = static_cast<std::size_t>(b);
        e.action_key = "v" + std::to_string(k);
        e.weight = static_cast<double>(1 + rng.below(9));
        g.edges.push_back(e);
      }
    }
  g.start_states = {0};
  return g;
}

}  // namespace gridgame::test
