#include "gridgame/agents.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>

#include "gridgame/error.hpp"

namespace gridgame {

double DefenderState::learning_rate(const std::string& node) const {
  auto it = q.find(node);
  return it == q.end() ? 1.0 : it->second;
}

std::vector<double> DefenderState::effects_on(const std::string& host, bool include_pending) const {
  std::vector<double> out;
  auto collect = [&](const std::vector<Measure>& list) {
    for (const auto& m : list)
      if ((m.kind == MeasureKind::Patching || m.kind == MeasureKind::Hardening) && m.target == host)
        out.push_back(m.effect);
  };
  collect(preventive);
  if (include_pending) collect(pending);
  return out;
}

bool DefenderState::link_blocked(const std::string& link_id) const {
  auto hit = [&](const Measure& m) { return m.blocks_edge() && m.target == link_id; };
  return std::any_of(reactive.begin(), reactive.end(), hit) || std::any_of(preventive.begin(), preventive.end(), hit);
}

double DefenderState::detection_probability_on(const Link& link) const {
  double p = detection_probability;
  for (const auto& m : preventive)
    if (m.kind == MeasureKind::MonitoringBoost && (m.target == link.a || m.target == link.b)) p += m.detection_boost;
  return std::clamp(p, 0.0, 1.0);
}

std::vector<Measure> activate_pending(DefenderState& defender) {
  std::vector<Measure> activated;
  std::vector<Measure> waiting;
  for (auto& m : defender.pending) {
    if (defender.elapsed >= m.purchased_at + m.lead_time)
      activated.push_back(std::move(m));
    else
      waiting.push_back(std::move(m));
  }
  defender.pending = std::move(waiting);
  defender.preventive.insert(defender.preventive.end(), activated.begin(), activated.end());
  return activated;
}

double edge_success_rate(const ActionEdge& edge, const std::string& host, const AttackerState& attacker,
                         const DefenderState& defender) {
  const auto effects = defender.effects_on(host);
  if (edge.vulnerability) return actual_success_rate(*edge.vulnerability, attacker.skill, effects);
  return actual_success_rate(attacker.credential_exploitability, attacker.skill, effects);
}

std::string select_target(const AttackerState&, const TopologyGraph& topology, const ActionGraph& graph,
                          const std::vector<bool>& usable) {
  const auto reachable = graph.reachable_hosts(usable);
  std::set<std::string> start_hosts;
  for (auto s : graph.start_states) start_hosts.insert(graph.states[s].host);

  auto best_of = [&](bool skip_start) -> std::optional<std::string> {
    std::optional<std::string> best;
    double best_cost = -1.0;
    for (const auto& h : reachable) {
      if (skip_start && start_hosts.count(h)) continue;
      auto idx = topology.index_of(h);
      if (!idx) continue;
      const double c = topology.nodes[*idx].outage_cost;
      if (!best || c > best_cost || (c == best_cost && h < *best)) {
        best = h;
        best_cost = c;
      }
    }
    return best;
  };
  if (auto t = best_of(true)) return *t;
  if (auto t = best_of(false)) return *t;
  throw NonTraversable("select_target: no reachable node");
}

std::optional<PlannedPath> plan_path(const ActionGraph& graph, std::span<const std::size_t> sources,
                                     std::span<const std::size_t> goals, const std::vector<bool>& usable) {
  const std::size_t n = graph.states.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto allowed = [&](std::size_t e) {
    return (usable.empty() || usable[e]) && std::isfinite(graph.edges[e].weight) && graph.edges[e].weight > 0.0;
  };

  std::vector<std::vector<std::size_t>> incoming(n);
  std::vector<std::vector<std::size_t>> outgoing(n);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    if (!allowed(e)) continue;
    incoming[graph.edges[e].dst].push_back(e);
    outgoing[graph.edges[e].src].push_back(e);
  }

  // Distance to the nearest goal.
  std::vector<double> h(n, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> todo;
  for (auto g : goals) {
    if (g >= n) throw Error("plan_path: goal state out of range");
    h[g] = 0.0;
    todo.emplace(0.0, g);
  }
  while (!todo.empty()) {
    auto [d, v] = todo.top();
    todo.pop();
    if (d > h[v]) continue;
    for (auto e : incoming[v]) {
      const auto u = graph.edges[e].src;
      const double nd = d + graph.edges[e].weight;
      if (nd < h[u]) {
        h[u] = nd;
        todo.emplace(nd, u);
      }
    }
  }

  std::optional<std::size_t> start;
  for (auto s : sources) {
    if (s >= n) throw Error("plan_path: source state out of range");
    if (!std::isfinite(h[s])) continue;
    if (!start || h[s] < h[*start] || (h[s] == h[*start] && graph.states[s].id() < graph.states[*start].id()))
      start = s;
  }
  if (!start) return std::nullopt;

  PlannedPath path;
  path.weight = h[*start];
  path.states.push_back(*start);
  std::size_t cur = *start;
  while (h[cur] != 0.0) {
    std::optional<std::size_t> pick;
    for (auto e : outgoing[cur]) {
      const auto& edge = graph.edges[e];
      if (edge.weight + h[edge.dst] != h[cur]) continue;
      if (!pick) {
        pick = e;
        continue;
      }
      const auto& a = graph.states[edge.dst].id();
      const auto& b = graph.states[graph.edges[*pick].dst].id();
      if (a < b) pick = e;
    }
    if (!pick || path.edges.size() > graph.edges.size()) throw Error("plan_path: inconsistent distances");
    path.edges.push_back(*pick);
    cur = graph.edges[*pick].dst;
    path.states.push_back(cur);
  }
  return path;
}

PlannedPath plan_path(const ActionGraph& graph, std::size_t source, std::size_t goal, const std::vector<bool>& usable) {
  const std::size_t s[] = {source};
  const std::size_t g[] = {goal};
  auto path = plan_path(graph, std::span<const std::size_t>(s), std::span<const std::size_t>(g), usable);
  if (!path)
    throw NonTraversable("plan_path: " + graph.states.at(goal).id() + " unreachable from " +
                         graph.states.at(source).id());
  return *path;
}

AttemptResult attempt_action(Rng& rng, AttackerState& attacker, const ActionGraph& graph, std::size_t edge,
                             DefenderState& defender) {
  const auto& e = graph.edges.at(edge);
  const auto& host = graph.states[e.dst].host;
  AttemptResult r;
  r.rate = edge_success_rate(e, host, attacker, defender);
  r.draw = rng.uniform();
  r.elapsed = e.ttc;
  const bool success = r.draw < r.rate;
  attacker.beliefs.record(host, e.action_key, success);
  attacker.elapsed_time += e.ttc;
  defender.advance(e.ttc);
  if (success) {
    attacker.position = graph.states[e.dst].id();
    attacker.compromised.insert(attacker.position);
    r.outcome = AttemptOutcome::Success;
  } else {
    r.outcome = attacker.beliefs.belief(host, e.action_key) < attacker.abandon_threshold ? AttemptOutcome::Abandon
                                                                                         : AttemptOutcome::Retry;
  }
  return r;
}

double update_skill(AttackerState& attacker) {
  ++attacker.attacks;
  attacker.skill = std::min(attacker.skill_init + attacker.skill_increment * attacker.attacks, 1.0);
  return attacker.skill;
}

namespace {

double node_probability(const NodeProfile& node, const DefenderState& defender) {
  double p = 0.0;
  for (const auto& v : node.vulnerabilities) p = std::max(p, v.exploitability / 10.0);
  for (double eff : defender.effects_on(node.id, true)) p *= 1.0 - eff;
  return p;
}

bool has_measure(const DefenderState& d, MeasureKind kind, const std::string& target) {
  auto hit = [&](const Measure& m) { return m.kind == kind && m.target == target; };
  return std::any_of(d.preventive.begin(), d.preventive.end(), hit) ||
         std::any_of(d.pending.begin(), d.pending.end(), hit);
}

// Links whose removal (on top of `removed`) would split their component.
std::set<std::string> bridges(const TopologyGraph& topology, const std::set<std::string>& removed) {
  const std::size_t n = topology.nodes.size();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  std::vector<const Link*> kept;
  for (const auto& link : topology.edges) {
    if (removed.count(link.id())) continue;
    const auto a = *topology.index_of(link.a);
    const auto b = *topology.index_of(link.b);
    adj[a].emplace_back(b, kept.size());
    adj[b].emplace_back(a, kept.size());
    kept.push_back(&link);
  }
  std::vector<int> disc(n, -1), low(n, 0);
  std::set<std::string> out;
  int timer = 0;
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t v, std::size_t via) {
    disc[v] = low[v] = timer++;
    for (auto [w, e] : adj[v]) {
      if (e == via) continue;
      if (disc[w] >= 0) {
        low[v] = std::min(low[v], disc[w]);
        continue;
      }
      dfs(w, e);
      low[v] = std::min(low[v], low[w]);
      if (low[w] > disc[v]) out.insert(kept[e]->id());
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (disc[v] < 0) dfs(v, std::numeric_limits<std::size_t>::max());
  return out;
}

}  // namespace

RiskReport risk_report(const DefenderState& defender, const TopologyGraph& topology) {
  RiskReport report;
  for (const auto& node : topology.nodes) {
    NodeRisk r{node.id, node_probability(node, defender), node.outage_cost, defender.learning_rate(node.id)};
    report.total += r.value();
    report.nodes.push_back(std::move(r));
  }
  return report;
}

std::vector<Measure> defender_plan(DefenderState& defender, const RiskReport& report, std::span<const Measure> catalog,
                                   const TopologyGraph& topology) {
  std::vector<Measure> bought;
  if (catalog.empty()) return bought;

  std::map<std::string, double> value;
  for (const auto& r : report.nodes) value[r.node] = r.value();

  std::set<std::string> restricted;
  for (const auto& list : {defender.preventive, defender.pending})
    for (const auto& m : list)
      if (m.kind == MeasureKind::AccessRestriction) restricted.insert(m.target);

  while (true) {
    const double funds = defender.funds();
    std::optional<Measure> best;
    double best_ratio = 0.0;
    double best_gain = 0.0;
    std::string best_node;
    std::set<std::string> cut;
    bool cut_ready = false;

    for (const auto& node : topology.nodes) {
      const double v = value[node.id];
      if (!(v > 0.0)) continue;
      for (const auto& item : catalog) {
        if (!item.preventive() || !(item.cost > 0.0) || item.cost > funds) continue;
        Measure m = item;
        double factor = 0.0;
        switch (item.kind) {
          case MeasureKind::Patching:
          case MeasureKind::Hardening:
            if (has_measure(defender, item.kind, node.id)) continue;
            m.target = node.id;
            factor = item.effect;
            break;
          case MeasureKind::MonitoringBoost:
            if (has_measure(defender, item.kind, node.id)) continue;
            m.target = node.id;
            factor = item.detection_boost;
            break;
          case MeasureKind::AccessRestriction: {
            if (!cut_ready) {
              cut = bridges(topology, restricted);
              cut_ready = true;
            }
            std::optional<std::string> link;
            for (const auto& w : topology.neighbours(node.id)) {
              const auto id = link_id(node.id, w);
              if (restricted.count(id) || cut.count(id)) continue;
              link = id;
              break;
            }
            if (!link) continue;
            m.target = *link;
            factor = item.effect;
            break;
          }
          case MeasureKind::ReactiveBlock:
            continue;
        }
        const double gain = v * factor;
        if (!(gain > 0.0)) continue;
        const double ratio = gain / item.cost;
        if (!best || ratio > best_ratio ||
            (ratio == best_ratio && std::tie(m.name, m.target) < std::tie(best->name, best->target))) {
          best = m;
          best_ratio = ratio;
          best_gain = gain;
          best_node = node.id;
        }
      }
    }
    if (!best) break;

    best->purchased_at = defender.elapsed;
    defender.spent += best->cost;
    value[best_node] -= best_gain;
    if (best->kind == MeasureKind::AccessRestriction) restricted.insert(best->target);
    defender.pending.push_back(*best);
    bought.push_back(std::move(*best));
  }
  return bought;
}

Measure react(DefenderState& defender, const Link& detected) {
  Measure m;
  m.name = "reactive block";
  m.kind = MeasureKind::ReactiveBlock;
  m.technique = "D3-ITF";
  m.target = detected.id();
  m.purchased_at = defender.elapsed;
  if (std::find(defender.reactive.begin(), defender.reactive.end(), m) == defender.reactive.end() &&
      !defender.link_blocked(m.target))
    defender.reactive.push_back(m);
  defender.detected_nodes.insert(detected.a);
  defender.detected_nodes.insert(detected.b);
  return m;
}

void update_q(DefenderState& defender, const std::set<std::string>& detected_nodes) {
  for (const auto& node : detected_nodes) defender.q[node] = defender.learning_rate(node) + defender.q_increment;
}

}  // namespace gridgame
