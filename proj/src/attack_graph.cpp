#include "gridgame/attack_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridgame/error.hpp"

namespace gridgame {

using NodeType = LogicalAttackGraph::NodeType;

std::string_view to_string(NodeType t) {
  switch (t) {
    case NodeType::Leaf: return "LEAF";
    case NodeType::And: return "AND";
    case NodeType::Or: return "OR";
  }
  return "?";
}

int LogicalAttackGraph::add_node(NodeType type, std::string label, std::optional<Fact> fact, std::string technique,
                                 double metric) {
  const int id = static_cast<int>(nodes_.size()) + 1;
  nodes_.push_back({id, type, std::move(label), std::move(fact), std::move(technique), metric});
  preds_.emplace_back();
  succs_.emplace_back();
  return id;
}

void LogicalAttackGraph::add_edge(int src, int dst) {
  const auto n = static_cast<int>(nodes_.size());
  if (src < 1 || src > n || dst < 1 || dst > n) throw Error("attack graph edge references unknown node");
  auto& out = succs_[static_cast<std::size_t>(src - 1)];
  if (std::find(out.begin(), out.end(), dst) != out.end()) return;
  out.push_back(dst);
  preds_[static_cast<std::size_t>(dst - 1)].push_back(src);
  edges_.push_back({src, dst});
}

std::optional<int> LogicalAttackGraph::find(const Fact& fact) const {
  for (const auto& n : nodes_)
    if (n.type != NodeType::And && n.fact && *n.fact == fact) return n.id;
  return std::nullopt;
}

std::size_t LogicalAttackGraph::count(NodeType type) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.type == type; }));
}

bool LogicalAttackGraph::is_acyclic() const {
  std::vector<int> indegree(nodes_.size(), 0);
  for (const auto& e : edges_) ++indegree[static_cast<std::size_t>(e.dst - 1)];
  std::queue<int> ready;
  for (std::size_t i = 0; i < indegree.size(); ++i)
    if (indegree[i] == 0) ready.push(static_cast<int>(i) + 1);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const int id = ready.front();
    ready.pop();
    ++seen;
    for (int s : successors(id))
      if (--indegree[static_cast<std::size_t>(s - 1)] == 0) ready.push(s);
  }
  return seen == nodes_.size();
}

std::vector<Fact> facts_from_topology(const TopologyGraph& topology, std::span<const Measure> measures) {
  std::set<std::string> blocked;
  for (const auto& m : measures)
    if (m.blocks_edge()) blocked.insert(m.target);

  std::vector<Fact> facts;
  for (const auto& entry : topology.entry_points) facts.push_back({"attackerLocated", {entry}});
  for (const auto& link : topology.edges) {
    if (blocked.count(link.id())) continue;
    for (const auto& [src, dst] : {std::pair{link.a, link.b}, std::pair{link.b, link.a}}) {
      for (const auto& svc : topology.node(dst).services)
        facts.push_back({"netAccess", {src, dst, svc.protocol, std::to_string(svc.port)}});
    }
  }
  for (const auto& n : topology.nodes) {
    for (const auto& v : n.vulnerabilities)
      facts.push_back({"vulExists", {n.id, v.id, std::string(to_string(v.locality)), std::string(to_string(v.consequence))}});
    for (const auto& account : n.accounts) facts.push_back({"hasAccount", {account, n.id}});
  }
  return facts;
}

const std::vector<Rule>& builtin_ruleset() {
  using datalog::parse_rule;
  static const std::vector<Rule> rules = [] {
    std::vector<Rule> r = {
        parse_rule("execCode(H, root) :- attackerLocated(H).", "initial foothold", "T1133"),
        parse_rule("netReach(H2, Proto, Port) :- execCode(H1, Priv), netAccess(H1, H2, Proto, Port).",
                   "multi-hop network access", "T1021"),
        parse_rule("execCode(H, user) :- netReach(H, Proto, Port), vulExists(H, V, remote, codeExec).",
                   "remote exploit", "T1190"),
        parse_rule("execCode(H, root) :- netReach(H, Proto, Port), vulExists(H, V, remote, privEscalation).",
                   "remote privilege exploit", "T1210"),
        parse_rule("execCode(H, root) :- execCode(H, user), vulExists(H, V, local, privEscalation).",
                   "local privilege escalation", "T1068"),
        parse_rule("execCode(H2, user) :- execCode(H1, root), hasAccount(U, H1), hasAccount(U, H2), "
                   "netAccess(H1, H2, Proto, Port).",
                   "credential reuse", "T1078"),
        parse_rule("denialOfService(H) :- execCode(H, root).", "denial of service on compromise", "T0814"),
        parse_rule("denialOfService(H) :- netReach(H, Proto, Port), vulExists(H, V, remote, dos).",
                   "remote denial of service", "T1499"),
        parse_rule("dataExfiltration(H) :- execCode(H, root).", "data exfiltration", "T1041"),
    };
    for (const auto& rule : r) datalog::validate_rule(rule);
    return r;
  }();
  return rules;
}

LogicalAttackGraph derive_attack_graph(const std::vector<Fact>& facts, const std::vector<Rule>& rules) {
  const auto model = datalog::evaluate(facts, rules);
  LogicalAttackGraph g;
  std::vector<int> node_of(model.facts.size(), 0);
  for (std::size_t i = 0; i < model.input_count; ++i)
    node_of[i] = g.add_node(NodeType::Leaf, model.facts[i].to_string(), model.facts[i]);

  for (const auto& d : model.derivations) {
    if (d.head < model.input_count) continue;
    const auto& rule = rules[d.rule];
    const int and_id = g.add_node(NodeType::And, "RULE " + std::to_string(d.rule) + " (" + rule.label + ")",
                                  std::nullopt, rule.technique);
    for (auto b : d.body) g.add_edge(node_of[b], and_id);
    if (node_of[d.head] == 0)
      node_of[d.head] = g.add_node(NodeType::Or, model.facts[d.head].to_string(), model.facts[d.head]);
    g.add_edge(and_id, node_of[d.head]);
  }
  return g;
}

LogicalAttackGraph extract_proof_dag(const LogicalAttackGraph& graph) {
  std::set<int> keep;
  for (const auto& n : graph.nodes()) {
    if (n.type != NodeType::Or) continue;
    keep.insert(n.id);
    const auto& preds = graph.predecessors(n.id);
    if (preds.empty()) continue;
    const int first = *std::min_element(preds.begin(), preds.end());
    keep.insert(first);
    for (int b : graph.predecessors(first)) keep.insert(b);
  }
  LogicalAttackGraph out;
  std::map<int, int> remap;
  for (int id : keep) {
    const auto& n = graph.node(id);
    remap[id] = out.add_node(n.type, n.label, n.fact, n.technique, n.metric);
  }
  for (const auto& e : graph.edges()) {
    if (!keep.count(e.src) || !keep.count(e.dst)) continue;
    // An AND node keeps all of its body; an OR node keeps only its first AND.
    if (graph.node(e.dst).type == NodeType::Or) {
      const auto& preds = graph.predecessors(e.dst);
      if (e.src != *std::min_element(preds.begin(), preds.end())) continue;
    }
    out.add_edge(remap[e.src], remap[e.dst]);
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return fields;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) out.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

long parse_id(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where, "invalid integer '" + s + "'");
  }
}

}  // namespace

LogicalAttackGraph import_mulval_graph(std::string_view vertices_csv, std::string_view arcs_csv) {
  LogicalAttackGraph g;
  std::map<long, int> id_map;
  int line_no = 0;
  for (auto line : lines_of(vertices_csv)) {
    ++line_no;
    const auto where = "VERTICES.CSV:" + std::to_string(line_no);
    auto f = split_csv_line(line);
    if (f.size() < 3) throw ParseError(where, "expected id,label,type[,metric]");
    const long id = parse_id(f[0], where);
    NodeType type;
    if (f[2] == "LEAF") type = NodeType::Leaf;
    else if (f[2] == "AND") type = NodeType::And;
    else if (f[2] == "OR") type = NodeType::Or;
    else throw ParseError(where, "unknown node type '" + f[2] + "'");
    double metric = 0.0;
    if (f.size() > 3 && !f[3].empty()) {
      try {
        metric = std::stod(f[3]);
      } catch (const std::exception&) {
        throw ParseError(where, "invalid metric '" + f[3] + "'");
      }
    }
    std::optional<Fact> fact;
    if (type != NodeType::And) {
      try {
        fact = datalog::parse_fact(f[1]);
      } catch (const Error&) {
      }
    }
    if (id_map.count(id)) throw ParseError(where, "duplicate vertex id " + f[0]);
    id_map[id] = g.add_node(type, f[1], std::move(fact), {}, metric);
  }

  std::vector<std::pair<int, int>> arcs;
  line_no = 0;
  for (auto line : lines_of(arcs_csv)) {
    ++line_no;
    const auto where = "ARCS.CSV:" + std::to_string(line_no);
    auto f = split_csv_line(line);
    if (f.size() < 2) throw ParseError(where, "expected src,dst[,weight]");
    const long src = parse_id(f[0], where);
    const long dst = parse_id(f[1], where);
    for (long id : {src, dst})
      if (!id_map.count(id)) throw ParseError(where, "dangling arc: no vertex with id " + std::to_string(id));
    arcs.emplace_back(id_map[src], id_map[dst]);
  }
  // Arcs are consequence-first; a LEAF destination marks that orientation.
  const bool reversed = std::any_of(arcs.begin(), arcs.end(),
                                    [&](const auto& a) { return g.node(a.second).type == NodeType::Leaf; });
  for (auto [s, d] : arcs) reversed ? g.add_edge(d, s) : g.add_edge(s, d);
  return g;
}

namespace {
std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}
}  // namespace

std::string to_dot(const LogicalAttackGraph& graph) {
  std::ostringstream os;
  os << "digraph attack_graph {\n";
  for (const auto& n : graph.nodes()) {
    const char* shape = n.type == NodeType::Leaf ? "box" : n.type == NodeType::And ? "ellipse" : "diamond";
    os << "  n" << n.id << " [label=\"" << n.id << ": " << dot_escape(n.label) << "\", shape=" << shape << "];\n";
  }
  for (const auto& e : graph.edges()) os << "  n" << e.src << " -> n" << e.dst << ";\n";
  os << "}\n";
  return os.str();
}

std::string to_json(const LogicalAttackGraph& graph) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  j["edges"] = nlohmann::json::array();
  for (const auto& n : graph.nodes()) {
    nlohmann::json node{{"id", n.id}, {"label", n.label}, {"type", to_string(n.type)}, {"metric", n.metric}};
    if (!n.technique.empty()) node["technique"] = n.technique;
    j["nodes"].push_back(std::move(node));
  }
  for (const auto& e : graph.edges()) j["edges"].push_back({{"src", e.src}, {"dst", e.dst}});
  return j.dump(2);
}

std::optional<std::size_t> ActionGraph::find_state(std::string_view host, std::string_view privilege) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].host == host && states[i].privilege == privilege) return i;
  return std::nullopt;
}

std::vector<std::size_t> ActionGraph::states_on(std::string_view host) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].host == host) out.push_back(i);
  return out;
}

std::vector<std::size_t> ActionGraph::out_edges(std::size_t state) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].src == state) out.push_back(i);
  return out;
}

std::vector<std::string> ActionGraph::reachable_hosts(const std::vector<bool>& usable) const {
  std::vector<std::vector<std::size_t>> adj(states.size());
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (usable.empty() || usable[i]) adj[edges[i].src].push_back(edges[i].dst);
  std::vector<bool> seen(states.size(), false);
  std::queue<std::size_t> todo;
  for (auto s : start_states)
    if (!seen[s]) {
      seen[s] = true;
      todo.push(s);
    }
  while (!todo.empty()) {
    auto s = todo.front();
    todo.pop();
    for (auto d : adj[s])
      if (!seen[d]) {
        seen[d] = true;
        todo.push(d);
      }
  }
  std::set<std::string> hosts;
  for (std::size_t i = 0; i < states.size(); ++i)
    if (seen[i]) hosts.insert(states[i].host);
  return {hosts.begin(), hosts.end()};
}

namespace {

// Attributes gathered while walking back from an AND node to the privilege
// states it depends on.
struct Support {
  std::vector<int> sources;  // execCode node ids
  std::optional<std::string> vulnerability;
  std::optional<std::string> account;
  std::optional<std::pair<std::string, std::string>> hop;
  std::string protocol;
  std::uint16_t port = 0;
};

Support merge(const Support& a, const Support& b) {
  Support out = a;
  out.sources.insert(out.sources.end(), b.sources.begin(), b.sources.end());
  if (!out.vulnerability) out.vulnerability = b.vulnerability;
  if (!out.account) out.account = b.account;
  if (!out.hop) {
    out.hop = b.hop;
    if (b.hop) {
      out.protocol = b.protocol;
      out.port = b.port;
    }
  }
  if (out.protocol.empty()) {
    out.protocol = b.protocol;
    out.port = b.port;
  }
  return out;
}

std::uint16_t to_port(const std::string& s) {
  try {
    auto v = std::stoul(s);
    return v <= 65535 ? static_cast<std::uint16_t>(v) : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

class Projector {
public:
  explicit Projector(const LogicalAttackGraph& g) : g_(g) {}

  std::vector<Support> combos(int and_id) {
    constexpr std::size_t kLimit = 4096;
    std::vector<Support> result{Support{}};
    for (int p : g_.predecessors(and_id)) {
      auto alts = contributions(p);
      if (alts.empty()) return {};
      std::vector<Support> next;
      for (const auto& r : result)
        for (const auto& a : alts) {
          if (next.size() >= kLimit) break;
          next.push_back(merge(r, a));
        }
      result = std::move(next);
    }
    return result;
  }

private:
  std::vector<Support> contributions(int id) {
    const auto& n = g_.node(id);
    if (n.fact && n.fact->predicate == "execCode") return {Support{{id}, {}, {}, {}, {}, 0}};
    if (n.type == NodeType::Leaf) {
      Support s;
      if (n.fact) {
        const auto& f = *n.fact;
        if (f.predicate == "vulExists" && f.args.size() >= 2) s.vulnerability = f.args[1];
        if (f.predicate == "hasAccount" && !f.args.empty()) s.account = f.args[0];
        if ((f.predicate == "netAccess" || f.predicate == "hacl") && f.args.size() == 4) {
          s.hop = {f.args[0], f.args[1]};
          s.protocol = f.args[2];
          s.port = to_port(f.args[3]);
        }
        if (f.predicate == "netAccess" && f.args.size() == 3) {
          s.protocol = f.args[1];
          s.port = to_port(f.args[2]);
        }
      }
      return {s};
    }
    if (n.type == NodeType::Or) {
      if (auto it = memo_.find(id); it != memo_.end()) return it->second;
      if (!visiting_.insert(id).second) return {};
      std::vector<Support> out;
      for (int d : g_.predecessors(id)) {
        auto c = combos(d);
        out.insert(out.end(), c.begin(), c.end());
      }
      visiting_.erase(id);
      memo_[id] = out;
      return out;
    }
    return combos(id);
  }

  const LogicalAttackGraph& g_;
  std::map<int, std::vector<Support>> memo_;
  std::set<int> visiting_;
};

std::string rule_name(const std::string& and_label) {
  auto open = and_label.find('(');
  auto close = and_label.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) return and_label;
  return and_label.substr(open + 1, close - open - 1);
}

}  // namespace

ActionGraph project_actions(const LogicalAttackGraph& lag, const TopologyGraph& topology) {
  ActionGraph out;
  std::map<int, std::size_t> state_of;
  for (const auto& n : lag.nodes()) {
    if (n.type == NodeType::And || !n.fact || n.fact->predicate != "execCode" || n.fact->args.size() != 2) continue;
    PrivilegeState st{n.fact->args[0], n.fact->args[1]};
    auto existing = out.find_state(st.host, st.privilege);
    state_of[n.id] = existing ? *existing : out.states.size();
    if (!existing) out.states.push_back(std::move(st));
    if (n.type == NodeType::Leaf) out.start_states.push_back(state_of[n.id]);
  }

  auto find_vuln = [&](const std::string& host, const std::string& vid) -> std::optional<Vulnerability> {
    auto idx = topology.index_of(host);
    if (!idx) return std::nullopt;
    for (const auto& v : topology.nodes[*idx].vulnerabilities)
      if (v.id == vid) return v;
    return std::nullopt;
  };

  Projector projector(lag);
  std::map<std::tuple<std::size_t, std::size_t, std::string>, std::size_t> edge_index;
  for (const auto& n : lag.nodes()) {
    if (n.type != NodeType::And) continue;
    const auto& succ = lag.successors(n.id);
    if (succ.size() != 1 || !state_of.count(succ.front())) continue;
    const auto dst = state_of[succ.front()];
    for (const auto& sup : projector.combos(n.id)) {
      if (sup.sources.empty()) {
        if (std::find(out.start_states.begin(), out.start_states.end(), dst) == out.start_states.end())
          out.start_states.push_back(dst);
        continue;
      }
      for (int src_node : sup.sources) {
        const auto src = state_of.at(src_node);
        if (src == dst) continue;
        std::string key = sup.vulnerability ? *sup.vulnerability
                          : sup.account     ? "cred:" + *sup.account
                                            : rule_name(n.label);
        auto [it, inserted] = edge_index.emplace(std::tuple{src, dst, key}, out.edges.size());
        if (!inserted) {
          auto& derivs = out.edges[it->second].derivations;
          if (std::find(derivs.begin(), derivs.end(), n.id) == derivs.end()) derivs.push_back(n.id);
          continue;
        }
        ActionEdge e;
        e.src = src;
        e.dst = dst;
        e.action_key = key;
        const auto& host = out.states[dst].host;
        if (sup.vulnerability) e.vulnerability = find_vuln(host, *sup.vulnerability);
        e.technique = n.technique;
        e.rule = rule_name(n.label);
        const auto& src_host = out.states[src].host;
        if (src_host != host) e.link = Link(src_host, host);
        e.protocol = sup.protocol;
        e.port = sup.port;
        e.derivations.push_back(n.id);
        out.edges.push_back(std::move(e));
      }
    }
  }
  std::sort(out.start_states.begin(), out.start_states.end());
  return out;
}

double edge_weight(double ttc_time, double cost, double belief, double c_min) {
  const double c = std::max(cost, c_min);
  if (!(belief > 0.0) || !(ttc_time > 0.0) || !(c > 0.0)) return std::numeric_limits<double>::infinity();
  return ttc_time / (c * belief);
}

std::vector<bool> assign_weights(ActionGraph& graph, const BeliefTable& beliefs, const TopologyGraph& topology,
                                 const TTCParams& ttc_params, const WeightContext& ctx) {
  std::map<std::string, const NodeProfile*> by_id;
  for (const auto& n : topology.nodes) by_id[n.id] = &n;
  std::vector<bool> usable(graph.edges.size(), false);
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    auto& e = graph.edges[i];
    const auto& host = graph.states[e.dst].host;
    auto it = by_id.find(host);
    const NodeProfile* node = it == by_id.end() ? nullptr : it->second;
    const int count = node ? static_cast<int>(node->vulnerabilities.size()) : 1;
    const double first_stage = p1(ctx.skill, count, ttc_params.p1_coeff);
    e.ttc = ttc(ttc_params, first_stage, ctx.unsuccessful_rate);
    e.belief = beliefs.belief(host, e.action_key);
    e.weight = edge_weight(e.ttc, node ? node->outage_cost : 0.0, e.belief, ctx.c_min);
    usable[i] = std::isfinite(e.weight) && e.weight > 0.0;
  }
  return usable;
}

ActionGraph to_action_graph(const LogicalAttackGraph& lag, const BeliefTable& beliefs, const TopologyGraph& topology,
                            const TTCParams& ttc_params, const WeightContext& ctx) {
  auto graph = project_actions(lag, topology);
  const auto usable = assign_weights(graph, beliefs, topology, ttc_params, ctx);
  std::vector<ActionEdge> kept;
  for (std::size_t i = 0; i < graph.edges.size(); ++i)
    if (usable[i]) kept.push_back(std::move(graph.edges[i]));
  graph.edges = std::move(kept);
  return graph;
}

std::string to_dot(const ActionGraph& graph) {
  std::ostringstream os;
  os << "digraph action_graph {\n";
  for (std::size_t i = 0; i < graph.states.size(); ++i)
    os << "  s" << i << " [label=\"" << dot_escape(graph.states[i].id()) << "\"];\n";
  for (const auto& e : graph.edges)
    os << "  s" << e.src << " -> s" << e.dst << " [label=\"" << dot_escape(e.action_key) << " w=" << e.weight
       << "\"];\n";
  os << "}\n";
  return os.str();
}

std::string to_json(const ActionGraph& graph) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  j["edges"] = nlohmann::json::array();
  for (std::size_t i = 0; i < graph.states.size(); ++i) {
    const bool start = std::find(graph.start_states.begin(), graph.start_states.end(), i) != graph.start_states.end();
    j["nodes"].push_back({{"id", graph.states[i].id()},
                          {"host", graph.states[i].host},
                          {"privilege", graph.states[i].privilege},
                          {"start", start}});
  }
  for (const auto& e : graph.edges) {
    nlohmann::json edge{{"src", graph.states[e.src].id()}, {"dst", graph.states[e.dst].id()},
                        {"action", e.action_key},          {"technique", e.technique},
                        {"rule", e.rule},                  {"ttc", e.ttc},
                        {"weight", std::isfinite(e.weight) ? nlohmann::json(e.weight) : nlohmann::json(nullptr)}};
    j["edges"].push_back(std::move(edge));
  }
  return j.dump(2);
}

}  // namespace gridgame
