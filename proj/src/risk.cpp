#include "gridgame/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridgame/error.hpp"

namespace gridgame {

namespace {
bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }
}  // namespace

double ttc(const TTCParams& params, double p1, double u) {
  if (!is_probability(p1) || !is_probability(u)) throw Error("ttc: probability outside [0,1]");
  if (!(params.t1 > 0.0) || !(params.t2 > 0.0)) throw Error("ttc: stage times must be positive");
  return params.t1 * p1 + params.t2 * (1.0 - p1) * (1.0 - u);
}

double p1(double skill, int exploitable_vuln_count, double coeff) {
  if (!is_probability(skill) || exploitable_vuln_count < 0 || coeff < 0.0)
    throw Error("p1: input out of range");
  return 1.0 - std::exp(-static_cast<double>(exploitable_vuln_count) * skill * coeff);
}

double actual_success_rate(double exploitability, double skill, std::span<const double> effects) {
  if (!is_probability(skill)) throw Error("actual_success_rate: skill outside [0,1]");
  double rate = skill * exploitability / 10.0;
  for (double e : effects) rate *= 1.0 - e;
  return std::clamp(rate, kMinSuccessRate, 1.0);
}

double actual_success_rate(const Vulnerability& v, double skill, std::span<const double> effects) {
  return actual_success_rate(v.exploitability, skill, effects);
}

double risk(std::span<const double> p, std::span<const double> c) {
  if (p.size() != c.size()) throw Error("risk: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * c[i];
  return total;
}

double risk_learned(std::span<const double> p, std::span<const double> c, std::span<const double> q) {
  if (p.size() != c.size() || p.size() != q.size()) throw Error("risk_learned: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * c[i] * q[i];
  return total;
}

double access_complexity_score(AccessComplexity ac) {
  switch (ac) {
    case AccessComplexity::Low: return 2.9;
    case AccessComplexity::Medium: return 3.9;
    case AccessComplexity::High: return 6.5;
  }
  return 0.0;
}

double complexity_score(std::span<const Vulnerability> exploited, int path_hops) {
  if (path_hops < 0) throw Error("complexity_score: negative hop count");
  if (exploited.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& v : exploited) sum += access_complexity_score(v.access_complexity);
  const double mean = sum / static_cast<double>(exploited.size());
  const double path = std::min(3.5, 0.5 * static_cast<double>(std::max(path_hops - 1, 0)));
  return std::clamp(mean + path, 0.0, 10.0);
}

void BeliefTable::record(const std::string& node, const std::string& action, bool success) {
  records_[{node, action}].push_back(success ? 1 : 0);
}

double BeliefTable::belief(const std::string& node, const std::string& action) const {
  auto it = records_.find({node, action});
  if (it == records_.end() || it->second.empty()) return 1.0;
  const auto hits = std::accumulate(it->second.begin(), it->second.end(), 0u);
  return static_cast<double>(hits) / static_cast<double>(it->second.size());
}

const std::vector<unsigned char>& BeliefTable::outcomes(const std::string& node, const std::string& action) const {
  static const std::vector<unsigned char> none;
  auto it = records_.find({node, action});
  return it == records_.end() ? none : it->second;
}

}  // namespace gridgame
