#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridgame {

enum class AccessComplexity { Low, Medium, High };
enum class Locality { Remote, Local };
enum class Consequence { PrivEscalation, CodeExec, Dos, InfoLeak };

std::string_view to_string(AccessComplexity v);
std::string_view to_string(Locality v);
std::string_view to_string(Consequence v);
std::optional<AccessComplexity> parse_access_complexity(std::string_view s);
std::optional<Locality> parse_locality(std::string_view s);
std::optional<Consequence> parse_consequence(std::string_view s);

struct Vulnerability {
  std::string id;
  AccessComplexity access_complexity = AccessComplexity::Medium;
  double exploitability = 0.0;  // CVSS exploitability subscore, [0, 10]
  Locality locality = Locality::Remote;
  Consequence consequence = Consequence::CodeExec;

  bool operator==(const Vulnerability&) const = default;
};

struct Service {
  std::string protocol;  // "tcp" or "udp"
  std::uint16_t port = 0;

  bool operator==(const Service&) const = default;
};

struct NodeProfile {
  std::string id;
  std::string role;
  std::string subnet;
  int purdue_level = 0;
  double peak_power_kw = 0.0;
  double outage_cost = 0.0;
  std::vector<Vulnerability> vulnerabilities;
  std::vector<Service> services;
  std::vector<std::string> accounts;
  std::string address;  // dotted IPv4

  bool operator==(const NodeProfile&) const = default;
};

/// Undirected link. Endpoints are stored in lexicographic order.
struct Link {
  std::string a;
  std::string b;
  std::string medium = "ethernet";

  Link() = default;
  Link(std::string x, std::string y, std::string m = "ethernet");

  /// Stable identifier "a--b"; used for deterministic ordering.
  std::string id() const { return a + "--" + b; }
  bool touches(std::string_view n) const { return a == n || b == n; }
  bool joins(std::string_view x, std::string_view y) const {
    return (a == x && b == y) || (a == y && b == x);
  }

  bool operator==(const Link&) const = default;
};

std::string link_id(std::string_view x, std::string_view y);

struct Subnet {
  std::string id;
  int purdue_level = 0;
  std::vector<std::string> nodes;

  bool operator==(const Subnet&) const = default;
};

struct TopologyGraph {
  std::vector<NodeProfile> nodes;
  std::vector<Link> edges;
  std::vector<Subnet> subnets;
  std::vector<std::string> entry_points;

  std::optional<std::size_t> index_of(std::string_view id) const;
  const NodeProfile& node(std::string_view id) const;  // throws if absent
  NodeProfile& node(std::string_view id);
  std::vector<std::string> neighbours(std::string_view id) const;

  /// Throws ValidationError on dangling references, duplicate ids,
  /// disconnected subnets or a missing entry point.
  void validate() const;

  bool operator==(const TopologyGraph&) const = default;
};

/// Multiplier per Purdue level (index = level).
using PurdueCriticality = std::array<double, 6>;

inline constexpr PurdueCriticality kDefaultCriticality = {3.0, 2.5, 2.0, 1.5, 1.0, 1.0};

struct CostModel {
  double rate_per_kwh = 10.0;  // interruption cost, currency per kW*h
  double horizon_hours = 12.0;
  PurdueCriticality criticality = kDefaultCriticality;

  bool operator==(const CostModel&) const = default;
};

/// peak_power_kw * rate * horizon * criticality(level).
double outage_cost(const NodeProfile& profile, double rate, double horizon_hours,
                   const PurdueCriticality& criticality = kDefaultCriticality);

/// Recomputes outage_cost for every node.
void apply_outage_costs(TopologyGraph& topology, const CostModel& model);

struct GeneratorParams {
  std::array<int, 6> levels = {6, 5, 4, 3, 2, 1};  // subnets per Purdue level
  int hosts_min = 2;
  int hosts_max = 4;
  int vulns_min = 1;
  int vulns_max = 3;
  double uplink_redundancy = 0.5;  // chance of a second uplink per subnet
  double intra_link = 0.35;        // chance of an extra in-subnet link

  bool operator==(const GeneratorParams&) const = default;
};

/// Deterministic Purdue-layered topology. Vulnerabilities are drawn from
/// `pool`; outage costs are computed with `costs`.
TopologyGraph generate_purdue_topology(const GeneratorParams& params, std::uint64_t seed,
                                       const std::vector<Vulnerability>& pool,
                                       const CostModel& costs = {});

/// Representative CVE pool used by the shipped scenarios.
std::vector<Vulnerability> default_vulnerability_pool();

}  // namespace gridgame
