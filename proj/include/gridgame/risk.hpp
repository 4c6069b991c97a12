#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridgame/topology.hpp"

namespace gridgame {

/// Two-stage time-to-compromise parameters (time units).
struct TTCParams {
  double t1 = 1.0;
  double t2 = 5.8;
  double p1_coeff = 1.0;

  bool operator==(const TTCParams&) const = default;
};

/// t1*P1 + t2*(1-P1)*(1-u). Throws on probabilities outside [0,1].
double ttc(const TTCParams& params, double p1, double u);

/// First-stage probability 1 - exp(-count * skill * coeff).
double p1(double skill, int exploitable_vuln_count, double coeff = 1.0);

/// Stage-two failure rate used by default: 1 - skill.
inline double default_unsuccessful_rate(double skill) { return 1.0 - skill; }

/// clamp(skill * exploitability/10 * prod(1 - effect), 0.01, 1.0).
/// `effects` are the success-rate reductions of preventive measures on the node.
double actual_success_rate(const Vulnerability& v, double skill, std::span<const double> effects);
double actual_success_rate(double exploitability, double skill, std::span<const double> effects);

inline constexpr double kMinSuccessRate = 0.01;

/// Sum of P_i * C_i.
double risk(std::span<const double> p, std::span<const double> c);
/// Sum of P_i * C_i * Q_i (defender's learned risk).
double risk_learned(std::span<const double> p, std::span<const double> c, std::span<const double> q);

/// Complexity-class score: Low 2.9, Medium 3.9, High 6.5.
double access_complexity_score(AccessComplexity ac);

/// Attack complexity in [0,10]: mean class score of the exploited
/// vulnerabilities plus a path-length bonus of 0.5 per hop beyond the
/// first, capped at 3.5. No exploits scores 0.
double complexity_score(std::span<const Vulnerability> exploited, int path_hops);

/// Attacker's record of attempt outcomes per (node, action key).
class BeliefTable {
public:
  using Key = std::pair<std::string, std::string>;  // (node id, vulnerability or action key)

  void record(const std::string& node, const std::string& action, bool success);
  /// Arithmetic mean of recorded outcomes; 1 when nothing was recorded.
  double belief(const std::string& node, const std::string& action) const;
  const std::vector<unsigned char>& outcomes(const std::string& node, const std::string& action) const;

  const std::map<Key, std::vector<unsigned char>>& entries() const { return records_; }
  bool operator==(const BeliefTable&) const = default;

private:
  std::map<Key, std::vector<unsigned char>> records_;
};

struct NodeRisk {
  std::string node;
  double probability = 0.0;
  double cost = 0.0;
  double learning_rate = 1.0;

  double value() const { return probability * cost * learning_rate; }
};

struct RiskReport {
  std::vector<NodeRisk> nodes;
  double total = 0.0;
};

}  // namespace gridgame
