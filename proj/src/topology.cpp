#include "gridgame/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <utility>

#include "gridgame/error.hpp"
#include "gridgame/rng.hpp"

namespace gridgame {

std::string_view to_string(AccessComplexity v) {
  switch (v) {
    case AccessComplexity::Low: return "Low";
    case AccessComplexity::Medium: return "Medium";
    case AccessComplexity::High: return "High";
  }
  return "?";
}

std::string_view to_string(Locality v) { return v == Locality::Remote ? "remote" : "local"; }

std::string_view to_string(Consequence v) {
  switch (v) {
    case Consequence::PrivEscalation: return "privEscalation";
    case Consequence::CodeExec: return "codeExec";
    case Consequence::Dos: return "dos";
    case Consequence::InfoLeak: return "infoLeak";
  }
  return "?";
}

std::optional<AccessComplexity> parse_access_complexity(std::string_view s) {
  if (s == "Low") return AccessComplexity::Low;
  if (s == "Medium") return AccessComplexity::Medium;
  if (s == "High") return AccessComplexity::High;
  return std::nullopt;
}

std::optional<Locality> parse_locality(std::string_view s) {
  if (s == "remote") return Locality::Remote;
  if (s == "local") return Locality::Local;
  return std::nullopt;
}

std::optional<Consequence> parse_consequence(std::string_view s) {
  if (s == "privEscalation") return Consequence::PrivEscalation;
  if (s == "codeExec") return Consequence::CodeExec;
  if (s == "dos") return Consequence::Dos;
  if (s == "infoLeak") return Consequence::InfoLeak;
  return std::nullopt;
}

Link::Link(std::string x, std::string y, std::string m) : medium(std::move(m)) {
  if (y < x) std::swap(x, y);
  a = std::move(x);
  b = std::move(y);
}

std::string link_id(std::string_view x, std::string_view y) {
  return x < y ? std::string(x) + "--" + std::string(y) : std::string(y) + "--" + std::string(x);
}

std::optional<std::size_t> TopologyGraph::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  return std::nullopt;
}

const NodeProfile& TopologyGraph::node(std::string_view id) const {
  auto idx = index_of(id);
  if (!idx) throw ValidationError("unknown node '" + std::string(id) + "'");
  return nodes[*idx];
}

NodeProfile& TopologyGraph::node(std::string_view id) {
  return const_cast<NodeProfile&>(std::as_const(*this).node(id));
}

std::vector<std::string> TopologyGraph::neighbours(std::string_view id) const {
  std::vector<std::string> out;
  for (const auto& e : edges) {
    if (e.a == id) out.push_back(e.b);
    else if (e.b == id) out.push_back(e.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void TopologyGraph::validate() const {
  std::set<std::string> ids;
  for (const auto& n : nodes) {
    if (n.id.empty()) throw ValidationError("node with empty id");
    if (!ids.insert(n.id).second) throw ValidationError("duplicate node id '" + n.id + "'");
    if (n.purdue_level < 0 || n.purdue_level > 5)
      throw ValidationError("node '" + n.id + "': purdue_level outside [0,5]");
    if (n.peak_power_kw < 0.0) throw ValidationError("node '" + n.id + "': negative peak power");
    if (n.outage_cost < 0.0) throw ValidationError("node '" + n.id + "': negative outage cost");
    std::set<std::string> vids;
    for (const auto& v : n.vulnerabilities) {
      if (v.exploitability < 0.0 || v.exploitability > 10.0)
        throw ValidationError("vulnerability '" + v.id + "': exploitability outside [0,10]");
      if (!vids.insert(v.id).second)
        throw ValidationError("node '" + n.id + "': vulnerability '" + v.id + "' listed twice");
    }
  }

  std::vector<std::string> dangling;
  std::set<std::string> seen_links;
  for (const auto& e : edges) {
    if (!ids.count(e.a)) dangling.push_back(e.a);
    if (!ids.count(e.b)) dangling.push_back(e.b);
    if (e.a == e.b) throw ValidationError("self-loop on '" + e.a + "'");
    if (!seen_links.insert(e.id()).second) throw ValidationError("duplicate link " + e.id());
  }
  if (!dangling.empty()) {
    std::string msg = "edge references unknown node(s):";
    for (const auto& d : dangling) msg += " " + d;
    throw ValidationError(msg);
  }

  std::map<std::string, std::string> owner;
  for (const auto& s : subnets) {
    for (const auto& n : s.nodes) {
      if (!ids.count(n)) throw ValidationError("subnet '" + s.id + "' references unknown node '" + n + "'");
      if (!owner.emplace(n, s.id).second)
        throw ValidationError("node '" + n + "' belongs to more than one subnet");
    }
  }
  if (owner.size() != nodes.size()) {
    for (const auto& n : nodes)
      if (!owner.count(n.id)) throw ValidationError("node '" + n.id + "' is in no subnet");
  }

  for (const auto& s : subnets) {
    if (s.nodes.empty()) continue;
    std::set<std::string> members(s.nodes.begin(), s.nodes.end());
    std::set<std::string> reached{s.nodes.front()};
    std::queue<std::string> todo;
    todo.push(s.nodes.front());
    while (!todo.empty()) {
      auto cur = todo.front();
      todo.pop();
      for (const auto& e : edges) {
        if (!e.touches(cur)) continue;
        const auto& other = e.a == cur ? e.b : e.a;
        if (members.count(other) && reached.insert(other).second) todo.push(other);
      }
    }
    if (reached.size() != members.size())
      throw ValidationError("subnet '" + s.id + "' is not connected");
  }

  if (entry_points.empty()) throw ValidationError("no entry points");
  for (const auto& e : entry_points)
    if (!ids.count(e)) throw ValidationError("entry point references unknown node '" + e + "'");
}

double outage_cost(const NodeProfile& profile, double rate, double horizon_hours,
                   const PurdueCriticality& criticality) {
  if (rate < 0.0 || horizon_hours <= 0.0 || profile.peak_power_kw < 0.0)
    throw Error("outage_cost: negative rate/power or non-positive horizon");
  if (profile.purdue_level < 0 || profile.purdue_level > 5)
    throw Error("outage_cost: purdue level outside [0,5]");
  const double crit = criticality[static_cast<std::size_t>(profile.purdue_level)];
  if (crit < 0.0) throw Error("outage_cost: negative criticality");
  return profile.peak_power_kw * rate * horizon_hours * crit;
}

void apply_outage_costs(TopologyGraph& topology, const CostModel& model) {
  for (auto& n : topology.nodes)
    n.outage_cost = outage_cost(n, model.rate_per_kwh, model.horizon_hours, model.criticality);
}

namespace {

struct RoleSpec {
  std::string_view role;
  double power_lo;
  double power_hi;
  std::vector<Service> services;
  std::string_view account;
};

const std::vector<RoleSpec>& roles_for_level(int level) {
  static const std::array<std::vector<RoleSpec>, 6> table = {{
      {{"ied", 50, 250, {{"tcp", 102}, {"tcp", 502}}, ""},
       {"field-sensor", 40, 180, {{"udp", 161}, {"tcp", 502}}, ""}},
      {{"plc", 150, 400, {{"tcp", 502}, {"tcp", 102}}, "ops"},
       {"rtu", 120, 350, {{"tcp", 20000}, {"tcp", 502}}, "ops"}},
      {{"hmi", 80, 200, {{"tcp", 3389}, {"tcp", 5900}}, "eng"},
       {"eng-ws", 60, 160, {{"tcp", 3389}, {"tcp", 445}}, "eng"}},
      {{"historian", 60, 150, {{"tcp", 1433}, {"tcp", 443}}, "eng"},
       {"ops-server", 50, 140, {{"tcp", 22}, {"tcp", 443}}, "eng"}},
      {{"office-host", 5, 25, {{"tcp", 445}, {"tcp", 3389}}, "corp"},
       {"business-server", 15, 40, {{"tcp", 443}, {"tcp", 445}}, "corp"}},
      {{"enterprise-ws", 5, 20, {{"tcp", 445}, {"tcp", 80}}, "corp"},
       {"enterprise-server", 10, 40, {{"tcp", 443}, {"tcp", 22}}, "corp"}},
  }};
  return table[static_cast<std::size_t>(level)];
}

const RoleSpec& scada_role() {
  static const RoleSpec spec{"scada-server", 2400, 2600, {{"tcp", 20000}, {"tcp", 443}, {"tcp", 3389}}, "eng"};
  return spec;
}

}  // namespace

TopologyGraph generate_purdue_topology(const GeneratorParams& params, std::uint64_t seed,
                                       const std::vector<Vulnerability>& pool,
                                       const CostModel& costs) {
  const int total = std::accumulate(params.levels.begin(), params.levels.end(), 0);
  if (total < 1) throw Error("generate_purdue_topology: zero subnets");
  for (int c : params.levels)
    if (c < 0) throw Error("generate_purdue_topology: negative subnet count");
  if (params.hosts_min < 1 || params.hosts_max < params.hosts_min)
    throw Error("generate_purdue_topology: invalid host range");
  if (params.vulns_min < 0 || params.vulns_max < params.vulns_min)
    throw Error("generate_purdue_topology: invalid vulnerability range");

  Rng rng(seed);
  TopologyGraph g;
  std::array<std::vector<std::size_t>, 6> subnets_at;  // indices into g.subnets
  bool scada_placed = false;

  for (int level = 5; level >= 0; --level) {
    const auto& roles = roles_for_level(level);
    for (int s = 0; s < params.levels[static_cast<std::size_t>(level)]; ++s) {
      Subnet subnet;
      subnet.id = "L" + std::to_string(level) + "-S" + std::to_string(s);
      subnet.purdue_level = level;
      const auto hosts = rng.between(params.hosts_min, params.hosts_max);
      for (std::int64_t h = 0; h < hosts; ++h) {
        const RoleSpec* spec = &roles[rng.below(roles.size())];
        if (level == 2 && h == 0 && !scada_placed) {
          spec = &scada_role();
          scada_placed = true;
        }
        NodeProfile n;
        n.id = "l" + std::to_string(level) + "s" + std::to_string(s) + "h" + std::to_string(h);
        n.role = std::string(spec->role);
        n.subnet = subnet.id;
        n.purdue_level = level;
        n.peak_power_kw = std::round(spec->power_lo + rng.uniform() * (spec->power_hi - spec->power_lo));
        n.services = spec->services;
        if (!spec->account.empty()) n.accounts.emplace_back(spec->account);
        n.address = "10." + std::to_string(level) + "." + std::to_string(s) + "." + std::to_string(10 + h);

        if (!pool.empty()) {
          std::vector<std::size_t> order(pool.size());
          std::iota(order.begin(), order.end(), 0);
          const auto k = std::min<std::size_t>(static_cast<std::size_t>(rng.between(params.vulns_min, params.vulns_max)),
                                               pool.size());
          for (std::size_t i = 0; i < k; ++i) {
            std::swap(order[i], order[i + rng.below(order.size() - i)]);
            n.vulnerabilities.push_back(pool[order[i]]);
          }
        }
        subnet.nodes.push_back(n.id);
        g.nodes.push_back(std::move(n));
      }
      // Star around the gateway plus an occasional extra link.
      for (std::size_t h = 1; h < subnet.nodes.size(); ++h)
        g.edges.emplace_back(subnet.nodes[0], subnet.nodes[h]);
      if (subnet.nodes.size() >= 3 && rng.uniform() < params.intra_link) {
        const auto x = 1 + rng.below(subnet.nodes.size() - 1);
        auto y = 1 + rng.below(subnet.nodes.size() - 2);
        if (y >= x) ++y;
        if (y < subnet.nodes.size()) g.edges.emplace_back(subnet.nodes[x], subnet.nodes[y]);
      }
      subnets_at[static_cast<std::size_t>(level)].push_back(g.subnets.size());
      g.subnets.push_back(std::move(subnet));
    }
  }

  // Gateways uplink to the nearest populated level above.
  for (int level = 0; level < 5; ++level) {
    int above = level + 1;
    while (above <= 5 && subnets_at[static_cast<std::size_t>(above)].empty()) ++above;
    if (above > 5) continue;
    const auto& parents = subnets_at[static_cast<std::size_t>(above)];
    const auto& mine = subnets_at[static_cast<std::size_t>(level)];
    for (std::size_t i = 0; i < mine.size(); ++i) {
      const auto& gw = g.subnets[mine[i]].nodes.front();
      const auto first = i % parents.size();
      g.edges.emplace_back(gw, g.subnets[parents[first]].nodes.front());
      if (parents.size() >= 2 && rng.uniform() < params.uplink_redundancy) {
        auto second = rng.below(parents.size() - 1);
        if (second >= first) ++second;
        g.edges.emplace_back(gw, g.subnets[parents[second]].nodes.front());
      }
    }
  }

  for (int level = 5; level >= 0; --level) {
    const auto& top = subnets_at[static_cast<std::size_t>(level)];
    if (top.empty()) continue;
    for (auto idx : top) g.entry_points.push_back(g.subnets[idx].nodes.front());
    break;
  }

  apply_outage_costs(g, costs);
  g.validate();
  return g;
}

std::vector<Vulnerability> default_vulnerability_pool() {
  using AC = AccessComplexity;
  using L = Locality;
  using C = Consequence;
  return {
      {"CVE-2019-0708", AC::Low, 10.0, L::Remote, C::CodeExec},
      {"CVE-2008-4250", AC::Low, 10.0, L::Remote, C::CodeExec},
      {"CVE-2014-6271", AC::Low, 10.0, L::Remote, C::CodeExec},
      {"CVE-2017-0144", AC::Medium, 8.6, L::Remote, C::CodeExec},
      {"CVE-2021-44228", AC::Medium, 8.6, L::Remote, C::CodeExec},
      {"CVE-2010-2568", AC::Medium, 8.6, L::Remote, C::CodeExec},
      {"CVE-2012-0002", AC::Medium, 8.6, L::Remote, C::CodeExec},
      {"CVE-2020-1472", AC::Medium, 8.6, L::Remote, C::PrivEscalation},
      {"CVE-2018-7841", AC::High, 4.9, L::Remote, C::CodeExec},
      {"CVE-2016-2776", AC::High, 4.9, L::Remote, C::CodeExec},
      {"CVE-2019-6579", AC::High, 4.9, L::Remote, C::CodeExec},
      {"CVE-2015-5374", AC::Low, 10.0, L::Remote, C::Dos},
      {"CVE-2014-0160", AC::Low, 10.0, L::Remote, C::InfoLeak},
      {"CVE-2016-5195", AC::Low, 3.9, L::Local, C::PrivEscalation},
      {"CVE-2021-4034", AC::Low, 3.9, L::Local, C::PrivEscalation},
      {"CVE-2017-5753", AC::Medium, 3.4, L::Local, C::InfoLeak},
  };
}

}  // namespace gridgame
