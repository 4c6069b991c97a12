#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gridgame/error.hpp"
#include "gridgame/topology.hpp"

namespace gridgame {

using Index = Eigen::Index;

/// Undirected network with positive edge resistances.
template <typename Scalar = double>
struct ResistorNetwork {
  struct Edge {
    Index a;
    Index b;
    Scalar resistance;
  };

  Index n = 0;
  std::vector<Edge> edges;

  void validate() const {
    for (const auto& e : edges) {
      if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n || e.a == e.b)
        throw Error("resistor network: bad edge endpoints");
      if (!(e.resistance > Scalar(0)) || !std::isfinite(static_cast<double>(e.resistance)))
        throw Error("resistor network: resistance must be finite and positive");
    }
  }

  /// Component label per node.
  std::vector<Index> components() const {
    std::vector<Index> label(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
    for (const auto& e : edges) {
      adj[static_cast<std::size_t>(e.a)].push_back(e.b);
      adj[static_cast<std::size_t>(e.b)].push_back(e.a);
    }
    Index next = 0;
    for (Index s = 0; s < n; ++s) {
      if (label[static_cast<std::size_t>(s)] >= 0) continue;
      std::queue<Index> todo;
      todo.push(s);
      label[static_cast<std::size_t>(s)] = next;
      while (!todo.empty()) {
        auto v = todo.front();
        todo.pop();
        for (auto w : adj[static_cast<std::size_t>(v)])
          if (label[static_cast<std::size_t>(w)] < 0) {
            label[static_cast<std::size_t>(w)] = next;
            todo.push(w);
          }
      }
      ++next;
    }
    return label;
  }

  bool connected() const {
    const auto c = components();
    return std::all_of(c.begin(), c.end(), [](Index x) { return x == 0; });
  }
};

/// Unit current injected at `source` and extracted at `sink`.
template <typename Scalar = double>
struct FlowSolution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Index source = 0;
  Index sink = 0;
  Vector potentials;  // sink grounded at 0
  Vector currents;    // per edge, positive from edge.a to edge.b
  Vector supplies;    // +1 at source, -1 at sink, 0 elsewhere
  std::vector<std::pair<Index, Index>> endpoints;
};

/// 1 / max(c_i, c_j), costs clamped below at c_min.
template <typename Scalar>
Scalar edge_resistance(Scalar c_i, Scalar c_j, Scalar c_min = Scalar(1)) {
  if (c_i < Scalar(0) || c_j < Scalar(0)) throw Error("edge_resistance: negative cost");
  return Scalar(1) / std::max({c_i, c_j, c_min});
}

/// Weighted graph Laplacian with conductances 1/r.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> laplacian(const ResistorNetwork<Scalar>& net) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> L =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(net.n, net.n);
  for (const auto& e : net.edges) {
    const Scalar g = Scalar(1) / e.resistance;
    L(e.a, e.a) += g;
    L(e.b, e.b) += g;
    L(e.a, e.b) -= g;
    L(e.b, e.a) -= g;
  }
  return L;
}

template <typename Scalar>
FlowSolution<Scalar> solve_flow(const ResistorNetwork<Scalar>& net, Index s, Index t) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  net.validate();
  if (s == t) throw Error("solve_flow: source equals sink");
  if (s < 0 || s >= net.n || t < 0 || t >= net.n) throw Error("solve_flow: terminal out of range");
  const auto comp = net.components();
  if (comp[static_cast<std::size_t>(s)] != comp[static_cast<std::size_t>(t)])
    throw Error("solve_flow: source and sink are disconnected");

  // Restrict to the terminals' component and ground the sink.
  std::vector<Index> members;
  for (Index v = 0; v < net.n; ++v)
    if (comp[static_cast<std::size_t>(v)] == comp[static_cast<std::size_t>(s)] && v != t) members.push_back(v);
  std::vector<Index> slot(static_cast<std::size_t>(net.n), -1);
  for (std::size_t i = 0; i < members.size(); ++i) slot[static_cast<std::size_t>(members[i])] = static_cast<Index>(i);

  const Matrix L = laplacian(net);
  const auto m = static_cast<Index>(members.size());
  Matrix reduced(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) reduced(i, j) = L(members[static_cast<std::size_t>(i)], members[static_cast<std::size_t>(j)]);
  Vector rhs = Vector::Zero(m);
  rhs(slot[static_cast<std::size_t>(s)]) = Scalar(1);
  const Vector x = reduced.ldlt().solve(rhs);

  FlowSolution<Scalar> sol;
  sol.source = s;
  sol.sink = t;
  sol.potentials = Vector::Zero(net.n);
  for (Index i = 0; i < m; ++i) sol.potentials(members[static_cast<std::size_t>(i)]) = x(i);
  sol.currents = Vector::Zero(static_cast<Index>(net.edges.size()));
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    const auto& e = net.edges[k];
    sol.currents(static_cast<Index>(k)) = (sol.potentials(e.a) - sol.potentials(e.b)) / e.resistance;
    sol.endpoints.emplace_back(e.a, e.b);
  }
  sol.supplies = Vector::Zero(net.n);
  sol.supplies(s) = Scalar(1);
  sol.supplies(t) = Scalar(-1);
  return sol;
}

/// Half of (sum of |current| on edges incident to v, minus |supply at v|).
template <typename Scalar>
Scalar throughput(const FlowSolution<Scalar>& sol, Index v) {
  if (v < 0 || v >= sol.supplies.size()) throw Error("throughput: node not in network");
  Scalar incident = 0;
  for (std::size_t k = 0; k < sol.endpoints.size(); ++k)
    if (sol.endpoints[k].first == v || sol.endpoints[k].second == v)
      incident += std::abs(sol.currents(static_cast<Index>(k)));
  return (incident - std::abs(sol.supplies(v))) / Scalar(2);
}

/// Current-flow betweenness: sum of throughput over ordered pairs (s,t),
/// s != t, normalised by (n-1)(n-2). Requires a connected network, n >= 3.
///
/// Uses one factorisation of the grounded Laplacian: the potentials for a
/// pair are the difference of two columns of its inverse.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> current_flow_betweenness(const ResistorNetwork<Scalar>& net) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  net.validate();
  const Index n = net.n;
  if (n < 3) throw Error("current_flow_betweenness: need at least 3 nodes");
  if (!net.connected()) throw Error("current_flow_betweenness: network is disconnected");

  const Matrix L = laplacian(net);
  Matrix G = Matrix::Zero(n, n);
  G.bottomRightCorner(n - 1, n - 1) = L.bottomRightCorner(n - 1, n - 1).ldlt().solve(Matrix::Identity(n - 1, n - 1));

  const auto m = static_cast<Index>(net.edges.size());
  // Row k: current on edge k per unit injection at each node (sink = node 0).
  Matrix transfer(m, n);
  for (Index k = 0; k < m; ++k) {
    const auto& e = net.edges[static_cast<std::size_t>(k)];
    transfer.row(k) = (G.row(e.a) - G.row(e.b)) / e.resistance;
  }

  Vector total = Vector::Zero(n);
  Vector flow(m);
  for (Index s = 0; s < n; ++s) {
    for (Index t = s + 1; t < n; ++t) {
      flow = (transfer.col(s) - transfer.col(t)).cwiseAbs();
      for (Index k = 0; k < m; ++k) {
        const auto& e = net.edges[static_cast<std::size_t>(k)];
        total(e.a) += flow(k);
        total(e.b) += flow(k);
      }
      total(s) -= Scalar(1);
      total(t) -= Scalar(1);
    }
  }
  // total holds 2*tau summed over unordered pairs, i.e. tau over ordered pairs.
  return total / (Scalar(n - 1) * Scalar(n - 2));
}

/// IDS sensors sit on links.
struct SensorPlacement {
  std::vector<Link> links;
  std::vector<double> scores;

  bool covers(const std::string& link_id) const {
    return std::any_of(links.begin(), links.end(), [&](const Link& l) { return l.id() == link_id; });
  }
  std::optional<std::size_t> sensor_index(const std::string& link_id) const {
    for (std::size_t i = 0; i < links.size(); ++i)
      if (links[i].id() == link_id) return i;
    return std::nullopt;
  }
};

/// Node centrality over the topology with outage-cost resistances; each
/// edge's resistance is divided by Q at both endpoints. Disconnected
/// components are scored separately.
std::map<std::string, double> node_centrality(const TopologyGraph& topology,
                                              const std::map<std::string, double>& learning_rates = {},
                                              double c_min = 1.0);

/// Top-K links by mean endpoint centrality; ties by link id.
SensorPlacement place_sensors(const TopologyGraph& topology, int k,
                              const std::map<std::string, double>& learning_rates = {}, double c_min = 1.0);

}  // namespace gridgame
