#include "gridgame/centrality.hpp"

#include <cmath>
#include <tuple>

namespace gridgame {

namespace {

double rate_of(const std::map<std::string, double>& q, const std::string& id) {
  auto it = q.find(id);
  return it == q.end() ? 1.0 : it->second;
}

}  // namespace

std::map<std::string, double> node_centrality(const TopologyGraph& topology,
                                              const std::map<std::string, double>& learning_rates, double c_min) {
  ResistorNetwork<double> whole;
  whole.n = static_cast<Index>(topology.nodes.size());
  std::map<std::string, Index> idx;
  for (std::size_t i = 0; i < topology.nodes.size(); ++i) idx[topology.nodes[i].id] = static_cast<Index>(i);
  for (const auto& link : topology.edges) {
    const auto& a = topology.nodes[static_cast<std::size_t>(idx.at(link.a))];
    const auto& b = topology.nodes[static_cast<std::size_t>(idx.at(link.b))];
    const double r = edge_resistance(a.outage_cost, b.outage_cost, c_min) /
                     (rate_of(learning_rates, a.id) * rate_of(learning_rates, b.id));
    whole.edges.push_back({idx.at(link.a), idx.at(link.b), r});
  }

  std::map<std::string, double> scores;
  for (const auto& n : topology.nodes) scores[n.id] = 0.0;

  const auto comp = whole.components();
  const Index groups = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  for (Index c = 0; c < groups; ++c) {
    std::vector<Index> members;
    std::vector<Index> local(static_cast<std::size_t>(whole.n), -1);
    for (Index v = 0; v < whole.n; ++v)
      if (comp[static_cast<std::size_t>(v)] == c) {
        local[static_cast<std::size_t>(v)] = static_cast<Index>(members.size());
        members.push_back(v);
      }
    if (members.size() < 3) continue;
    ResistorNetwork<double> sub;
    sub.n = static_cast<Index>(members.size());
    for (const auto& e : whole.edges)
      if (comp[static_cast<std::size_t>(e.a)] == c)
        sub.edges.push_back({local[static_cast<std::size_t>(e.a)], local[static_cast<std::size_t>(e.b)], e.resistance});
    const auto cb = current_flow_betweenness(sub);
    for (std::size_t i = 0; i < members.size(); ++i)
      scores[topology.nodes[static_cast<std::size_t>(members[i])].id] = cb(static_cast<Index>(i));
  }
  return scores;
}

SensorPlacement place_sensors(const TopologyGraph& topology, int k, const std::map<std::string, double>& learning_rates,
                              double c_min) {
  if (k < 0) throw Error("place_sensors: negative sensor count");
  if (static_cast<std::size_t>(k) > topology.edges.size())
    throw Error("place_sensors: " + std::to_string(k) + " sensors requested but only " +
                std::to_string(topology.edges.size()) + " links exist");
  SensorPlacement out;
  if (k == 0) return out;

  const auto scores = node_centrality(topology, learning_rates, c_min);
  std::vector<std::pair<double, const Link*>> ranked;
  double top = 0.0;
  for (const auto& link : topology.edges) {
    const double s = 0.5 * (scores.at(link.a) + scores.at(link.b));
    top = std::max(top, s);
    ranked.emplace_back(s, &link);
  }
  // Quantised scores; equal values fall back to the link id.
  auto bucket = [&](double s) { return top > 0.0 ? std::llround(s / top * 1e10) : 0LL; };
  std::sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
    const auto bx = bucket(x.first);
    const auto by = bucket(y.first);
    if (bx != by) return bx > by;
    return x.second->id() < y.second->id();
  });
  for (int i = 0; i < k; ++i) {
    out.links.push_back(*ranked[static_cast<std::size_t>(i)].second);
    out.scores.push_back(ranked[static_cast<std::size_t>(i)].first);
  }
  return out;
}

}  // namespace gridgame
