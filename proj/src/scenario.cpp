#include "gridgame/scenario.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>

#include "gridgame/error.hpp"
#include "gridgame/signature.hpp"

namespace gridgame {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<GenerationMethod, std::string_view>, 3> kMethodNames{{
    {GenerationMethod::WithDefender, "with_defender"},
    {GenerationMethod::SingleAttackRandom, "single_attack_random"},
    {GenerationMethod::OptimalNoDefender, "optimal_no_defender"},
}};

std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path.empty() ? "/" : path, "expected an object");
  return j;
}

const json& require_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  return j;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError(child(path, key), "unknown key");
  }
}

const json* member(const json& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

const json& required(const json& obj, std::string_view key, const std::string& path) {
  const json* m = member(obj, key);
  if (!m) throw ParseError(child(path, key), "missing required key");
  return *m;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(path, "expected a finite number");
  return v;
}

std::int64_t as_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  }
  throw ParseError(path, "expected an integer");
}

std::uint64_t as_u64(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const auto v = as_integer(j, path);
  if (v < 0) throw ParseError(path, "expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

double number_or(const json& obj, std::string_view key, const std::string& path, double fallback) {
  const json* m = member(obj, key);
  return m ? as_number(*m, child(path, key)) : fallback;
}

int int_or(const json& obj, std::string_view key, const std::string& path, int fallback) {
  const json* m = member(obj, key);
  if (!m) return fallback;
  const auto v = as_integer(*m, child(path, key));
  if (v < INT32_MIN || v > INT32_MAX) throw ParseError(child(path, key), "integer out of range");
  return static_cast<int>(v);
}

std::string string_or(const json& obj, std::string_view key, const std::string& path, std::string fallback) {
  const json* m = member(obj, key);
  return m ? as_string(*m, child(path, key)) : fallback;
}

template <typename T>
T parse_enum(const json& j, const std::string& path, std::optional<T> (*parse)(std::string_view)) {
  const auto s = as_string(j, path);
  auto v = parse(s);
  if (!v) throw ParseError(path, "unknown value \"" + s + "\"");
  return *v;
}

Vulnerability parse_vulnerability(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"id", "access_complexity", "exploitability", "locality", "consequence"});
  Vulnerability v;
  v.id = as_string(required(j, "id", path), child(path, "id"));
  v.access_complexity =
      parse_enum(required(j, "access_complexity", path), child(path, "access_complexity"), parse_access_complexity);
  v.exploitability = as_number(required(j, "exploitability", path), child(path, "exploitability"));
  v.locality = parse_enum(required(j, "locality", path), child(path, "locality"), parse_locality);
  v.consequence = parse_enum(required(j, "consequence", path), child(path, "consequence"), parse_consequence);
  return v;
}

json vulnerability_json(const Vulnerability& v) {
  return {{"id", v.id},
          {"access_complexity", to_string(v.access_complexity)},
          {"exploitability", v.exploitability},
          {"locality", to_string(v.locality)},
          {"consequence", to_string(v.consequence)}};
}

CostModel parse_costs(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"rate_per_kwh", "horizon_hours", "criticality"});
  CostModel c;
  c.rate_per_kwh = number_or(j, "rate_per_kwh", path, c.rate_per_kwh);
  c.horizon_hours = number_or(j, "horizon_hours", path, c.horizon_hours);
  if (const json* crit = member(j, "criticality")) {
    const auto p = child(path, "criticality");
    require_array(*crit, p);
    if (crit->size() != c.criticality.size()) throw ParseError(p, "expected 6 entries, one per Purdue level");
    for (std::size_t i = 0; i < c.criticality.size(); ++i) c.criticality[i] = as_number((*crit)[i], child(p, i));
  }
  return c;
}

GeneratorParams parse_generator(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"levels", "hosts_min", "hosts_max", "vulns_min", "vulns_max", "uplink_redundancy", "intra_link"});
  GeneratorParams g;
  if (const json* levels = member(j, "levels")) {
    const auto p = child(path, "levels");
    require_array(*levels, p);
    if (levels->size() > g.levels.size()) throw ParseError(p, "at most 6 Purdue levels");
    g.levels.fill(0);
    for (std::size_t i = 0; i < levels->size(); ++i) {
      const auto v = as_integer((*levels)[i], child(p, i));
      if (v < 0 || v > 1000) throw ParseError(child(p, i), "subnet count out of range");
      g.levels[i] = static_cast<int>(v);
    }
  }
  g.hosts_min = int_or(j, "hosts_min", path, g.hosts_min);
  g.hosts_max = int_or(j, "hosts_max", path, g.hosts_max);
  g.vulns_min = int_or(j, "vulns_min", path, g.vulns_min);
  g.vulns_max = int_or(j, "vulns_max", path, g.vulns_max);
  g.uplink_redundancy = number_or(j, "uplink_redundancy", path, g.uplink_redundancy);
  g.intra_link = number_or(j, "intra_link", path, g.intra_link);
  if (g.hosts_min < 1 || g.hosts_max < g.hosts_min) throw ParseError(child(path, "hosts_min"), "need 1 <= hosts_min <= hosts_max");
  if (g.vulns_min < 0 || g.vulns_max < g.vulns_min) throw ParseError(child(path, "vulns_min"), "need 0 <= vulns_min <= vulns_max");
  return g;
}

json generator_json(const GeneratorParams& g) {
  return {{"levels", g.levels},           {"hosts_min", g.hosts_min},
          {"hosts_max", g.hosts_max},     {"vulns_min", g.vulns_min},
          {"vulns_max", g.vulns_max},     {"uplink_redundancy", g.uplink_redundancy},
          {"intra_link", g.intra_link}};
}

struct ExplicitTopology {
  TopologyGraph graph;
  std::vector<std::optional<double>> declared_costs;
};

ExplicitTopology parse_explicit_topology(const json& j, const std::string& path,
                                         const std::map<std::string, Vulnerability>& pool) {
  check_keys(j, path, {"nodes", "edges", "subnets", "entry_points"});
  ExplicitTopology out;
  auto& t = out.graph;

  const auto nodes_path = child(path, "nodes");
  const auto& nodes = require_array(required(j, "nodes", path), nodes_path);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto p = child(nodes_path, i);
    const auto& n = require_object(nodes[i], p);
    check_keys(n, p,
               {"id", "role", "subnet", "purdue_level", "peak_power_kw", "outage_cost", "vulnerabilities", "services",
                "accounts", "address"});
    NodeProfile node;
    node.id = as_string(required(n, "id", p), child(p, "id"));
    node.role = string_or(n, "role", p, "host");
    node.subnet = string_or(n, "subnet", p, "");
    node.purdue_level = int_or(n, "purdue_level", p, 0);
    node.peak_power_kw = number_or(n, "peak_power_kw", p, 0.0);
    node.address = string_or(n, "address", p, "");
    if (const json* c = member(n, "outage_cost"))
      out.declared_costs.push_back(as_number(*c, child(p, "outage_cost")));
    else
      out.declared_costs.push_back(std::nullopt);
    if (const json* vs = member(n, "vulnerabilities")) {
      const auto vp = child(p, "vulnerabilities");
      require_array(*vs, vp);
      for (std::size_t k = 0; k < vs->size(); ++k) {
        const auto id = as_string((*vs)[k], child(vp, k));
        auto it = pool.find(id);
        if (it == pool.end())
          throw ValidationError("node \"" + node.id + "\" references unknown vulnerability \"" + id + "\"");
        node.vulnerabilities.push_back(it->second);
      }
    }
    if (const json* ss = member(n, "services")) {
      const auto sp = child(p, "services");
      require_array(*ss, sp);
      for (std::size_t k = 0; k < ss->size(); ++k) {
        const auto q = child(sp, k);
        const auto& s = require_object((*ss)[k], q);
        check_keys(s, q, {"protocol", "port"});
        Service svc;
        svc.protocol = as_string(required(s, "protocol", q), child(q, "protocol"));
        const auto port = as_integer(required(s, "port", q), child(q, "port"));
        if (port < 0 || port > 65535) throw ParseError(child(q, "port"), "port out of range");
        svc.port = static_cast<std::uint16_t>(port);
        node.services.push_back(std::move(svc));
      }
    }
    if (const json* as = member(n, "accounts")) {
      const auto ap = child(p, "accounts");
      require_array(*as, ap);
      for (std::size_t k = 0; k < as->size(); ++k) node.accounts.push_back(as_string((*as)[k], child(ap, k)));
    }
    t.nodes.push_back(std::move(node));
  }

  const auto edges_path = child(path, "edges");
  const auto& edges = require_array(required(j, "edges", path), edges_path);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto p = child(edges_path, i);
    if (edges[i].is_array()) {
      if (edges[i].size() < 2 || edges[i].size() > 3) throw ParseError(p, "expected [a, b] or [a, b, medium]");
      Link l(as_string(edges[i][0], child(p, 0)), as_string(edges[i][1], child(p, 1)),
             edges[i].size() == 3 ? as_string(edges[i][2], child(p, 2)) : "ethernet");
      t.edges.push_back(std::move(l));
      continue;
    }
    const auto& e = require_object(edges[i], p);
    check_keys(e, p, {"a", "b", "medium"});
    t.edges.emplace_back(as_string(required(e, "a", p), child(p, "a")), as_string(required(e, "b", p), child(p, "b")),
                         string_or(e, "medium", p, "ethernet"));
  }

  if (const json* subnets = member(j, "subnets")) {
    const auto sp = child(path, "subnets");
    require_array(*subnets, sp);
    for (std::size_t i = 0; i < subnets->size(); ++i) {
      const auto p = child(sp, i);
      const auto& s = require_object((*subnets)[i], p);
      check_keys(s, p, {"id", "purdue_level", "nodes"});
      Subnet sub;
      sub.id = as_string(required(s, "id", p), child(p, "id"));
      sub.purdue_level = int_or(s, "purdue_level", p, 0);
      const auto np = child(p, "nodes");
      const auto& members = require_array(required(s, "nodes", p), np);
      for (std::size_t k = 0; k < members.size(); ++k) sub.nodes.push_back(as_string(members[k], child(np, k)));
      t.subnets.push_back(std::move(sub));
    }
  } else {
    Subnet all{"S0", t.nodes.empty() ? 0 : t.nodes.front().purdue_level, {}};
    for (auto& n : t.nodes) {
      all.nodes.push_back(n.id);
      if (n.subnet.empty()) n.subnet = all.id;
    }
    t.subnets.push_back(std::move(all));
  }
  for (auto& sub : t.subnets)
    for (const auto& id : sub.nodes)
      if (auto idx = t.index_of(id); idx && t.nodes[*idx].subnet.empty()) t.nodes[*idx].subnet = sub.id;

  const auto ep = child(path, "entry_points");
  const auto& entries = require_array(required(j, "entry_points", path), ep);
  for (std::size_t i = 0; i < entries.size(); ++i) t.entry_points.push_back(as_string(entries[i], child(ep, i)));
  return out;
}

json topology_json(const TopologyGraph& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    json vulns = json::array();
    for (const auto& v : n.vulnerabilities) vulns.push_back(v.id);
    json services = json::array();
    for (const auto& s : n.services) services.push_back({{"protocol", s.protocol}, {"port", s.port}});
    nodes.push_back({{"id", n.id},
                     {"role", n.role},
                     {"subnet", n.subnet},
                     {"purdue_level", n.purdue_level},
                     {"peak_power_kw", n.peak_power_kw},
                     {"outage_cost", n.outage_cost},
                     {"vulnerabilities", vulns},
                     {"services", services},
                     {"accounts", n.accounts},
                     {"address", n.address}});
  }
  json edges = json::array();
  for (const auto& e : t.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"medium", e.medium}});
  json subnets = json::array();
  for (const auto& s : t.subnets) subnets.push_back({{"id", s.id}, {"purdue_level", s.purdue_level}, {"nodes", s.nodes}});
  return {{"nodes", nodes}, {"edges", edges}, {"subnets", subnets}, {"entry_points", t.entry_points}};
}

Measure parse_measure(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"name", "kind", "technique", "cost", "lead_time", "effect", "detection_boost"});
  Measure m;
  m.name = as_string(required(j, "name", path), child(path, "name"));
  m.kind = parse_enum(required(j, "kind", path), child(path, "kind"), parse_measure_kind);
  m.technique = string_or(j, "technique", path, "");
  m.cost = number_or(j, "cost", path, 0.0);
  m.lead_time = number_or(j, "lead_time", path, 0.0);
  m.effect = number_or(j, "effect", path, 0.0);
  m.detection_boost = number_or(j, "detection_boost", path, 0.0);
  return m;
}

json measure_json(const Measure& m) {
  return {{"name", m.name},          {"kind", to_string(m.kind)},
          {"technique", m.technique}, {"cost", m.cost},
          {"lead_time", m.lead_time}, {"effect", m.effect},
          {"detection_boost", m.detection_boost}};
}

DefenderConfig parse_defender(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path,
             {"capital", "income", "sensor_count", "detection_probability", "q_increment", "catalog", "fund_levels"});
  DefenderConfig d;
  d.capital = number_or(j, "capital", path, d.capital);
  d.income = number_or(j, "income", path, d.income);
  d.sensor_count = int_or(j, "sensor_count", path, 0);
  d.detection_probability = number_or(j, "detection_probability", path, d.detection_probability);
  d.q_increment = number_or(j, "q_increment", path, d.q_increment);
  if (const json* cat = member(j, "catalog")) {
    const auto p = child(path, "catalog");
    require_array(*cat, p);
    d.catalog.clear();
    for (std::size_t i = 0; i < cat->size(); ++i) d.catalog.push_back(parse_measure((*cat)[i], child(p, i)));
  }
  if (const json* levels = member(j, "fund_levels")) {
    const auto p = child(path, "fund_levels");
    require_array(*levels, p);
    d.fund_levels.clear();
    for (std::size_t i = 0; i < levels->size(); ++i) {
      const auto q = child(p, i);
      const auto& l = require_object((*levels)[i], q);
      check_keys(l, q, {"name", "capital", "income"});
      d.fund_levels.push_back({as_string(required(l, "name", q), child(q, "name")),
                               as_number(required(l, "capital", q), child(q, "capital")),
                               as_number(required(l, "income", q), child(q, "income"))});
    }
  }
  return d;
}

AttackerConfig parse_attacker(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"skill_init", "skill_increment", "abandon_threshold", "credential_exploitability"});
  AttackerConfig a;
  a.skill_init = number_or(j, "skill_init", path, a.skill_init);
  a.skill_increment = number_or(j, "skill_increment", path, a.skill_increment);
  a.abandon_threshold = number_or(j, "abandon_threshold", path, a.abandon_threshold);
  a.credential_exploitability = number_or(j, "credential_exploitability", path, a.credential_exploitability);
  return a;
}

EngineConfig parse_engine(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path,
             {"rounds", "seed", "generation_method", "ttc", "noise", "max_actions", "c_min", "time_unit_seconds",
              "epoch", "record_type"});
  EngineConfig e;
  e.rounds = int_or(j, "rounds", path, e.rounds);
  if (const json* s = member(j, "seed")) e.seed = as_u64(*s, child(path, "seed"));
  if (const json* m = member(j, "generation_method"))
    e.method = parse_enum(*m, child(path, "generation_method"), parse_generation_method);
  if (const json* t = member(j, "ttc")) {
    const auto p = child(path, "ttc");
    require_object(*t, p);
    check_keys(*t, p, {"t1", "t2", "p1_coeff"});
    e.ttc.t1 = number_or(*t, "t1", p, e.ttc.t1);
    e.ttc.t2 = number_or(*t, "t2", p, e.ttc.t2);
    e.ttc.p1_coeff = number_or(*t, "p1_coeff", p, e.ttc.p1_coeff);
  }
  if (const json* n = member(j, "noise")) {
    const auto p = child(path, "noise");
    require_object(*n, p);
    check_keys(*n, p, {"background_rate"});
    e.noise.background_rate = number_or(*n, "background_rate", p, e.noise.background_rate);
  }
  e.max_actions = int_or(j, "max_actions", path, e.max_actions);
  e.c_min = number_or(j, "c_min", path, e.c_min);
  e.time_unit_seconds = number_or(j, "time_unit_seconds", path, e.time_unit_seconds);
  if (const json* ep = member(j, "epoch")) {
    const auto v = as_u64(*ep, child(path, "epoch"));
    if (v > UINT32_MAX) throw ParseError(child(path, "epoch"), "must fit in 32 bits");
    e.epoch = static_cast<std::uint32_t>(v);
  }
  if (const json* rt = member(j, "record_type")) {
    const auto v = as_u64(*rt, child(path, "record_type"));
    if (v > UINT32_MAX) throw ParseError(child(path, "record_type"), "must fit in 32 bits");
    e.record_type = static_cast<std::uint32_t>(v);
  }
  return e;
}

}  // namespace

std::string_view to_string(GenerationMethod m) {
  for (const auto& [method, name] : kMethodNames)
    if (method == m) return name;
  return "unknown";
}

std::optional<GenerationMethod> parse_generation_method(std::string_view s) {
  for (const auto& [method, name] : kMethodNames)
    if (name == s) return method;
  return std::nullopt;
}

std::vector<FundLevel> default_fund_levels() {
  return {{"low", 1000.0, 1.0}, {"medium", 5000.0, 5.0}, {"high", 20000.0, 20.0}};
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  topology.validate();

  std::set<std::string> ids;
  std::map<std::uint32_t, std::string> signatures;
  for (const auto& v : vulnerability_pool) {
    if (v.id.empty()) fail("vulnerability with empty id");
    if (!ids.insert(v.id).second) fail("duplicate vulnerability id \"" + v.id + "\"");
    if (!(v.exploitability >= 0.0 && v.exploitability <= 10.0))
      fail("vulnerability \"" + v.id + "\": exploitability outside [0,10]");
    const auto sid = signature_id(v.id);
    if (is_benign_signature(sid)) fail("vulnerability \"" + v.id + "\" hashes into the benign signature range");
    auto [it, fresh] = signatures.emplace(sid, v.id);
    if (!fresh) fail("signature collision between \"" + it->second + "\" and \"" + v.id + "\"");
  }
  for (const auto& n : topology.nodes)
    for (const auto& v : n.vulnerabilities) {
      auto it = std::find_if(vulnerability_pool.begin(), vulnerability_pool.end(),
                             [&](const Vulnerability& p) { return p.id == v.id; });
      if (it == vulnerability_pool.end() || !(*it == v))
        fail("node \"" + n.id + "\" references unknown vulnerability \"" + v.id + "\"");
    }

  if (costs.rate_per_kwh < 0.0) fail("costs: negative rate_per_kwh");
  if (!(costs.horizon_hours > 0.0)) fail("costs: horizon_hours must be positive");
  for (double c : costs.criticality)
    if (c < 0.0) fail("costs: negative criticality");
  for (const auto& n : topology.nodes)
    if (n.outage_cost != outage_cost(n, costs.rate_per_kwh, costs.horizon_hours, costs.criticality))
      fail("node \"" + n.id + "\": outage_cost does not match the cost model");

  if (defender.capital < 0.0 || defender.income < 0.0) fail("defender: capital and income must be non-negative");
  if (defender.sensor_count < 0) fail("defender: sensor_count must be >= 0");
  if (static_cast<std::size_t>(defender.sensor_count) > topology.edges.size())
    fail("defender: sensor_count " + std::to_string(defender.sensor_count) + " exceeds link count " +
         std::to_string(topology.edges.size()));
  if (!(defender.detection_probability >= 0.0 && defender.detection_probability <= 1.0))
    fail("defender: detection_probability outside [0,1]");
  if (defender.q_increment < 0.0) fail("defender: q_increment must be >= 0");
  for (const auto& m : defender.catalog) {
    if (m.name.empty()) fail("defender: catalog entry without a name");
    if (!m.preventive()) fail("defender: catalog entry \"" + m.name + "\" is not a preventive measure");
    if (m.cost < 0.0 || m.lead_time < 0.0) fail("defender: catalog entry \"" + m.name + "\" has negative cost or lead time");
    if (!(m.effect >= 0.0 && m.effect < 1.0)) fail("defender: catalog entry \"" + m.name + "\" effect outside [0,1)");
    if (!(m.detection_boost >= 0.0 && m.detection_boost <= 1.0))
      fail("defender: catalog entry \"" + m.name + "\" detection_boost outside [0,1]");
  }
  std::set<std::string> level_names;
  for (const auto& l : defender.fund_levels) {
    if (!level_names.insert(l.name).second) fail("defender: duplicate fund level \"" + l.name + "\"");
    if (l.capital < 0.0 || l.income < 0.0) fail("defender: fund level \"" + l.name + "\" is negative");
  }

  if (!(attacker.skill_init >= 0.0 && attacker.skill_init <= 1.0)) fail("attacker: skill_init outside [0,1]");
  if (attacker.skill_increment < 0.0) fail("attacker: skill_increment must be >= 0");
  if (!(attacker.abandon_threshold >= 0.0 && attacker.abandon_threshold <= 1.0))
    fail("attacker: abandon_threshold outside [0,1]");
  if (!(attacker.credential_exploitability >= 0.0 && attacker.credential_exploitability <= 10.0))
    fail("attacker: credential_exploitability outside [0,10]");

  if (engine.rounds < 1) fail("engine: rounds must be >= 1");
  if (!(engine.ttc.t1 > 0.0) || !(engine.ttc.t2 > 0.0)) fail("engine: ttc t1 and t2 must be positive");
  if (engine.ttc.p1_coeff < 0.0) fail("engine: ttc p1_coeff must be >= 0");
  if (engine.noise.background_rate < 0.0) fail("engine: background_rate must be >= 0");
  if (engine.max_actions < 1) fail("engine: max_actions must be >= 1");
  if (!(engine.c_min > 0.0)) fail("engine: c_min must be positive");
  if (!(engine.time_unit_seconds > 0.0)) fail("engine: time_unit_seconds must be positive");
}

ScenarioConfig load_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("/", std::string("malformed JSON: ") + e.what());
  }
  require_object(doc, "");
  check_keys(doc, "", {"topology", "vulnerability_pool", "costs", "defender", "attacker", "engine"});

  ScenarioConfig cfg;
  if (const json* pool = member(doc, "vulnerability_pool")) {
    require_array(*pool, "/vulnerability_pool");
    for (std::size_t i = 0; i < pool->size(); ++i)
      cfg.vulnerability_pool.push_back(parse_vulnerability((*pool)[i], child("/vulnerability_pool", i)));
  } else {
    cfg.vulnerability_pool = default_vulnerability_pool();
  }
  std::map<std::string, Vulnerability> pool_by_id;
  for (const auto& v : cfg.vulnerability_pool) pool_by_id.emplace(v.id, v);

  if (const json* c = member(doc, "costs")) cfg.costs = parse_costs(*c, "/costs");

  const auto& topo = require_object(required(doc, "topology", ""), "/topology");
  if (const json* gen = member(topo, "generator")) {
    check_keys(topo, "/topology", {"generator", "seed"});
    cfg.source.generator = parse_generator(*gen, "/topology/generator");
    if (const json* s = member(topo, "seed")) cfg.source.seed = as_u64(*s, "/topology/seed");
    try {
      cfg.topology = generate_purdue_topology(*cfg.source.generator, cfg.source.seed, cfg.vulnerability_pool, cfg.costs);
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw ValidationError(std::string("topology generator: ") + e.what());
    }
  } else {
    auto parsed = parse_explicit_topology(topo, "/topology", pool_by_id);
    cfg.topology = std::move(parsed.graph);
    cfg.topology.validate();
    apply_outage_costs(cfg.topology, cfg.costs);
    for (std::size_t i = 0; i < cfg.topology.nodes.size(); ++i) {
      const auto& declared = parsed.declared_costs[i];
      if (declared && *declared != cfg.topology.nodes[i].outage_cost) {
        std::ostringstream os;
        os << "node \"" << cfg.topology.nodes[i].id << "\": declared outage_cost " << *declared
           << " differs from computed " << cfg.topology.nodes[i].outage_cost;
        throw ValidationError(os.str());
      }
    }
  }

  if (const json* d = member(doc, "defender")) cfg.defender = parse_defender(*d, "/defender");
  if (const json* a = member(doc, "attacker")) cfg.attacker = parse_attacker(*a, "/attacker");
  if (const json* e = member(doc, "engine")) cfg.engine = parse_engine(*e, "/engine");
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_scenario(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.path(), path.string() + ": " + (e.what() + e.path().size() + 2));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json to_json(const ScenarioConfig& c) {
  json doc;
  json pool = json::array();
  for (const auto& v : c.vulnerability_pool) pool.push_back(vulnerability_json(v));
  doc["vulnerability_pool"] = pool;
  doc["costs"] = {{"rate_per_kwh", c.costs.rate_per_kwh},
                  {"horizon_hours", c.costs.horizon_hours},
                  {"criticality", c.costs.criticality}};
  if (c.source.generator)
    doc["topology"] = {{"generator", generator_json(*c.source.generator)}, {"seed", c.source.seed}};
  else
    doc["topology"] = topology_json(c.topology);

  json catalog = json::array();
  for (const auto& m : c.defender.catalog) catalog.push_back(measure_json(m));
  json levels = json::array();
  for (const auto& l : c.defender.fund_levels)
    levels.push_back({{"name", l.name}, {"capital", l.capital}, {"income", l.income}});
  doc["defender"] = {{"capital", c.defender.capital},
                     {"income", c.defender.income},
                     {"sensor_count", c.defender.sensor_count},
                     {"detection_probability", c.defender.detection_probability},
                     {"q_increment", c.defender.q_increment},
                     {"catalog", catalog},
                     {"fund_levels", levels}};
  doc["attacker"] = {{"skill_init", c.attacker.skill_init},
                     {"skill_increment", c.attacker.skill_increment},
                     {"abandon_threshold", c.attacker.abandon_threshold},
                     {"credential_exploitability", c.attacker.credential_exploitability}};
  doc["engine"] = {{"rounds", c.engine.rounds},
                   {"seed", c.engine.seed},
                   {"generation_method", to_string(c.engine.method)},
                   {"ttc", {{"t1", c.engine.ttc.t1}, {"t2", c.engine.ttc.t2}, {"p1_coeff", c.engine.ttc.p1_coeff}}},
                   {"noise", {{"background_rate", c.engine.noise.background_rate}}},
                   {"max_actions", c.engine.max_actions},
                   {"c_min", c.engine.c_min},
                   {"time_unit_seconds", c.engine.time_unit_seconds},
                   {"epoch", c.engine.epoch},
                   {"record_type", c.engine.record_type}};
  return doc;
}

std::string save_scenario(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string scenario_hash(const ScenarioConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(config).dump())));
  return buf;
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  c.vulnerability_pool = default_vulnerability_pool();
  c.source.generator = GeneratorParams{};
  c.source.seed = 2024;
  c.topology = generate_purdue_topology(*c.source.generator, c.source.seed, c.vulnerability_pool, c.costs);
  c.defender.sensor_count = 10;
  apply_fund_level(c, "medium");
  c.engine.rounds = 30;
  c.engine.seed = 42;
  c.validate();
  return c;
}

void apply_fund_level(ScenarioConfig& config, std::string_view level) {
  for (const auto& l : config.defender.fund_levels)
    if (l.name == level) {
      config.defender.capital = l.capital;
      config.defender.income = l.income;
      return;
    }
  throw ValidationError("unknown fund level \"" + std::string(level) + "\"");
}

}  // namespace gridgame
