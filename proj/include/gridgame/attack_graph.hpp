#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridgame/datalog.hpp"
#include "gridgame/measure.hpp"
#include "gridgame/risk.hpp"
#include "gridgame/topology.hpp"

namespace gridgame {

using datalog::Fact;
using datalog::Rule;

/// AND-OR proof graph. Node ids are 1-based and dense; edges run from
/// preconditions to consequences (body fact -> AND -> head fact).
class LogicalAttackGraph {
public:
  enum class NodeType { Leaf, And, Or };

  struct Node {
    int id = 0;
    NodeType type = NodeType::Leaf;
    std::string label;
    std::optional<Fact> fact;  // set for LEAF/OR nodes whose label parses
    std::string technique;     // AND nodes only
    double metric = 0.0;
  };

  struct Edge {
    int src = 0;
    int dst = 0;
    bool operator==(const Edge&) const = default;
  };

  int add_node(NodeType type, std::string label, std::optional<Fact> fact = std::nullopt,
               std::string technique = {}, double metric = 0.0);
  void add_edge(int src, int dst);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id - 1)); }
  const std::vector<int>& predecessors(int id) const { return preds_.at(static_cast<std::size_t>(id - 1)); }
  const std::vector<int>& successors(int id) const { return succs_.at(static_cast<std::size_t>(id - 1)); }

  /// Id of the LEAF/OR node holding `fact`, if any.
  std::optional<int> find(const Fact& fact) const;
  std::size_t count(NodeType type) const;
  bool is_acyclic() const;

private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> succs_;
};

std::string_view to_string(LogicalAttackGraph::NodeType t);

/// Ground facts describing the topology: netAccess per permitted
/// (link, service) pair, vulExists per node vulnerability, hasAccount per
/// account and attackerLocated per entry point. Links targeted by an
/// edge-blocking measure contribute no netAccess facts.
std::vector<Fact> facts_from_topology(const TopologyGraph& topology, std::span<const Measure> measures = {});

/// Built-in interaction rules, each tagged with an ATT&CK technique.
const std::vector<Rule>& builtin_ruleset();

/// Full AND-OR graph of the least fixpoint: one LEAF per input fact, one OR
/// per derived fact, one AND per ground rule application. May contain
/// cycles (e.g. mutual reachability between two compromised hosts).
LogicalAttackGraph derive_attack_graph(const std::vector<Fact>& facts, const std::vector<Rule>& rules);

/// Keeps, for every OR node, only its first derivation (deterministic rule
/// order); the result is acyclic.
LogicalAttackGraph extract_proof_dag(const LogicalAttackGraph& graph);

/// Reads MulVAL's VERTICES.CSV / ARCS.CSV exports.
LogicalAttackGraph import_mulval_graph(std::string_view vertices_csv, std::string_view arcs_csv);

std::string to_dot(const LogicalAttackGraph& graph);
std::string to_json(const LogicalAttackGraph& graph);

/// Attacker privilege on a host, e.g. ("l2s0h0", "root").
struct PrivilegeState {
  std::string host;
  std::string privilege;

  std::string id() const { return host + ":" + privilege; }
  bool operator==(const PrivilegeState&) const = default;
};

/// One attacker action between privilege states.
struct ActionEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::string action_key;  // vulnerability id, "cred:<account>" or the rule label
  std::optional<Vulnerability> vulnerability;
  std::string technique;
  std::string rule;
  std::optional<Link> link;  // topology link crossed, absent for same-host actions
  std::string protocol;
  std::uint16_t port = 0;
  std::vector<int> derivations;  // AND node ids in the logical graph

  double ttc = 0.0;
  double belief = 1.0;
  double weight = 0.0;
};

class ActionGraph {
public:
  std::vector<PrivilegeState> states;
  std::vector<ActionEdge> edges;
  std::vector<std::size_t> start_states;

  std::optional<std::size_t> find_state(std::string_view host, std::string_view privilege) const;
  std::vector<std::size_t> states_on(std::string_view host) const;
  std::vector<std::size_t> out_edges(std::size_t state) const;
  /// Hosts with at least one state reachable from the start states over
  /// edges allowed by `usable` (all edges when empty).
  std::vector<std::string> reachable_hosts(const std::vector<bool>& usable = {}) const;
};

struct WeightContext {
  double skill = 0.5;
  double c_min = 1.0;
  double unsuccessful_rate = 0.5;  // u in the TTC model
};

/// Unweighted projection of the logical graph onto privilege states.
/// Every edge lists the AND nodes it was projected from.
ActionGraph project_actions(const LogicalAttackGraph& lag, const TopologyGraph& topology);

/// Fills ttc/belief/weight: W = t / (max(C, c_min) * P). Returns a mask of
/// edges with finite positive weight (P > 0 and t > 0).
std::vector<bool> assign_weights(ActionGraph& graph, const BeliefTable& beliefs, const TopologyGraph& topology,
                                 const TTCParams& ttc_params, const WeightContext& ctx);

/// project_actions + assign_weights, dropping edges without a usable weight.
ActionGraph to_action_graph(const LogicalAttackGraph& lag, const BeliefTable& beliefs, const TopologyGraph& topology,
                            const TTCParams& ttc_params, const WeightContext& ctx);

/// Single-edge weight t / (max(cost, c_min) * belief).
double edge_weight(double ttc_time, double cost, double belief, double c_min = 1.0);

std::string to_dot(const ActionGraph& graph);
std::string to_json(const ActionGraph& graph);

}  // namespace gridgame
