#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gridgame/attack_graph.hpp"
#include "gridgame/centrality.hpp"
#include "gridgame/measure.hpp"
#include "gridgame/risk.hpp"
#include "gridgame/rng.hpp"
#include "gridgame/topology.hpp"

namespace gridgame {

struct AttackerState {
  double skill = 0.5;
  double skill_init = 0.5;
  double skill_increment = 0.02;
  int attacks = 0;  // completed rounds
  double abandon_threshold = 0.2;
  double credential_exploitability = 8.6;  // stands in for CVSS when no vulnerability is used
  BeliefTable beliefs;
  std::set<std::string> compromised;  // privilege state ids held this round
  std::string position;               // current privilege state id
  double elapsed_time = 0.0;
  std::string goal;                   // target host
};

struct DefenderState {
  double capital = 0.0;
  double income = 0.0;  // funds per time unit, accrued continuously
  double elapsed = 0.0;
  double spent = 0.0;

  std::map<std::string, double> q;  // per-node learning rate, absent = 1
  double q_increment = 0.5;

  int sensor_count = 0;
  double detection_probability = 0.8;
  SensorPlacement sensors;

  std::vector<Measure> catalog;
  std::vector<Measure> preventive;  // active
  std::vector<Measure> pending;     // purchased, activate at a round boundary
  std::vector<Measure> reactive;    // blocks raised during the current round
  std::set<std::string> detected_nodes;  // nodes on detected segments this round

  /// capital + income * elapsed - spent.
  double funds() const { return capital + income * elapsed - spent; }
  void advance(double dt) { elapsed += dt; }
  double learning_rate(const std::string& node) const;

  /// Success-rate reductions acting on `host` (active preventive measures).
  std::vector<double> effects_on(const std::string& host, bool include_pending = false) const;
  bool link_blocked(const std::string& link_id) const;
  double detection_probability_on(const Link& link) const;
};

/// Moves pending measures whose lead time has elapsed into the active set.
/// Returns the activated measures.
std::vector<Measure> activate_pending(DefenderState& defender);

/// Actual success probability of traversing `edge` given the defender's
/// active measures on the destination host.
double edge_success_rate(const ActionEdge& edge, const std::string& host, const AttackerState& attacker,
                         const DefenderState& defender);

/// Highest outage-cost host reachable over `usable` edges, ties by id.
/// Hosts the attacker starts on are only chosen if nothing else is
/// reachable. Throws NonTraversable when no host is reachable.
std::string select_target(const AttackerState& attacker, const TopologyGraph& topology, const ActionGraph& graph,
                          const std::vector<bool>& usable = {});

struct PlannedPath {
  std::vector<std::size_t> edges;
  std::vector<std::size_t> states;  // edges.size() + 1 entries
  double weight = 0.0;
};

/// Minimum-weight path from any source to any goal over `usable` edges.
/// Among equal-weight paths the lexicographically smallest sequence of
/// state ids wins. nullopt when no goal is reachable.
std::optional<PlannedPath> plan_path(const ActionGraph& graph, std::span<const std::size_t> sources,
                                     std::span<const std::size_t> goals, const std::vector<bool>& usable = {});

/// Single source/goal form; throws NonTraversable when unreachable.
PlannedPath plan_path(const ActionGraph& graph, std::size_t source, std::size_t goal,
                      const std::vector<bool>& usable = {});

enum class AttemptOutcome { Success, Retry, Abandon };

struct AttemptResult {
  AttemptOutcome outcome = AttemptOutcome::Retry;
  double rate = 0.0;
  double draw = 0.0;
  double elapsed = 0.0;
};

/// One exploitation attempt along `edge`. Success iff a uniform draw falls
/// below the actual success rate. Either way the outcome is recorded in the
/// attacker's beliefs and both clocks advance by the edge's TTC. A failure
/// becomes Abandon when the updated belief drops below the threshold.
AttemptResult attempt_action(Rng& rng, AttackerState& attacker, const ActionGraph& graph, std::size_t edge,
                             DefenderState& defender);

/// Counts a completed attack; skill = min(skill_init + increment * attacks, 1).
double update_skill(AttackerState& attacker);

/// Defender's current view: P_i from vulnerabilities and measures, C_i the
/// outage cost, Q_i the learning rate.
RiskReport risk_report(const DefenderState& defender, const TopologyGraph& topology);

/// Greedy purchase by risk reduction per unit cost until nothing affordable
/// helps. Purchases go to `pending`; funds drop by exactly their cost.
std::vector<Measure> defender_plan(DefenderState& defender, const RiskReport& report,
                                   std::span<const Measure> catalog, const TopologyGraph& topology);

/// Instant zero-cost block of the detected link; idempotent.
Measure react(DefenderState& defender, const Link& detected);

/// Q_i += increment for every node in `detected_nodes` (once each).
void update_q(DefenderState& defender, const std::set<std::string>& detected_nodes);

}  // namespace gridgame
