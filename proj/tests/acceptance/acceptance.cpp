#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gridgame/agents.hpp"
#include "gridgame/alerts.hpp"
#include "gridgame/attack_graph.hpp"
#include "gridgame/centrality.hpp"
#include "gridgame/engine.hpp"
#include "gridgame/risk.hpp"
#include "gridgame/signature.hpp"
#include "support.hpp"

using namespace gridgame;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::string& tolerance, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::ostringstream line;
  line.precision(3);
  line << (o.pass ? "PASS " : "FAIL ") << name << " [tol " << tolerance << "] " << o.detail << " (" << std::fixed
       << secs << " s)";
  std::cout << line.str() << std::endl;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

Outcome skill_schedule() {
  const auto log = run_campaign(default_scenario());
  if (log.records.size() != 30) return {false, "expected 30 rounds"};
  for (const auto& r : log.records) {
    const double want = std::min(0.5 + 0.02 * (r.round - 1), 1.0);
    if (r.skill != want) return {false, "round " + std::to_string(r.round) + " skill " + fmt(r.skill)};
    if ((r.round >= 26) != (r.skill == 1.0)) return {false, "round " + std::to_string(r.round) + " cap mismatch"};
  }
  return {true, "30 rounds, skill 1.0 from round 26"};
}

ResistorNetwork<double> network(int n, const std::vector<test::Wire>& wires) {
  ResistorNetwork<double> net;
  net.n = n;
  for (const auto& w : wires) net.edges.push_back({w.a, w.b, w.r});
  return net;
}

Outcome centrality_oracle() {
  double worst = 0.0;
  const std::vector<std::pair<int, std::vector<test::Wire>>> named = {
      {3, {{0, 1, 1.0}, {1, 2, 1.0}}},
      {4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}}},
      {4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}}},
  };
  for (const auto& [n, wires] : named) {
    const auto cb = current_flow_betweenness(network(n, wires));
    const auto want = test::electrical_betweenness(n, wires);
    for (int v = 0; v < n; ++v) worst = std::max(worst, std::abs(cb(v) - want[static_cast<std::size_t>(v)]));
  }
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(10));
    const auto wires = test::random_tree(rng, n);
    const auto cb = current_flow_betweenness(network(n, wires));
    const auto want = test::tree_betweenness(n, wires);
    for (int v = 0; v < n; ++v) worst = std::max(worst, std::abs(cb(v) - want[static_cast<std::size_t>(v)]));
  }
  return {worst <= 1e-9, "P3/S4/C4 + 50 trees, max abs error " + fmt(worst)};
}

Outcome dijkstra_oracle() {
  Rng rng(77);
  int reachable = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const auto g = test::random_action_graph(rng, n, 0.35);
    const std::vector<std::size_t> src{0};
    const std::vector<std::size_t> goal{static_cast<std::size_t>(n - 1)};
    const auto got = plan_path(g, src, goal);
    const auto want = test::brute_force_path(g, src, goal, {});
    if (got.has_value() != want.has_value()) return {false, "reachability differs on graph " + std::to_string(trial)};
    if (!got) continue;
    ++reachable;
    std::vector<std::string> ids;
    for (auto s : got->states) ids.push_back(g.states[s].id());
    if (got->weight != want->weight || ids != want->states)
      return {false, "path differs on graph " + std::to_string(trial)};
  }
  return {true, "100 graphs, " + std::to_string(reachable) + " with a path"};
}

Outcome formula_suite() {
  std::vector<std::string> bad;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  expect(std::abs(edge_weight(3.0, 1500.0, 0.5) - 0.004) <= 1e-15, "edge weight 3/(1500*0.5)");
  expect(edge_weight(3.0, 1500.0, 1.0) == 3.0 / 1500.0, "edge weight with unit belief");
  expect(edge_weight(3.0, 0.0, 1.0) == 3.0, "edge weight cost clamp");
  const TTCParams p;
  expect(ttc(p, 1.0, 0.7) == p.t1, "ttc P1=1");
  expect(ttc(p, 0.0, 0.0) == p.t2, "ttc P1=0 u=0");
  expect(ttc({2.0, 4.0, 1.0}, 0.5, 0.5) == 2.0, "ttc 2,4,0.5,0.5");
  const std::vector<double> one{1.0};
  const std::vector<double> hundred{100.0};
  expect(risk(one, hundred) == 100.0, "risk [1]x[100]");
  const std::vector<double> pv{0.5, 0.2};
  const std::vector<double> cv{10.0, 100.0};
  expect(risk(pv, cv) == 25.0, "risk 25");
  const std::vector<double> zero{0.0, 0.0};
  expect(risk(zero, cv) == 0.0, "risk zero");
  const std::vector<double> half{0.5};
  const std::vector<double> ten{10.0};
  const std::vector<double> two{2.0};
  expect(risk_learned(half, ten, two) == 10.0, "learned risk 10");
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto n = 1 + rng.below(30);
    std::vector<double> ps;
    std::vector<double> cs;
    for (std::uint64_t k = 0; k < n; ++k) {
      ps.push_back(rng.uniform());
      cs.push_back(1e6 * rng.uniform());
    }
    const std::vector<double> qs(ps.size(), 1.0);
    if (risk_learned(ps, cs, qs) != risk(ps, cs)) {
      bad.push_back("identity case " + std::to_string(i));
      break;
    }
  }
  if (!bad.empty()) return {false, bad.front()};
  return {true, "10 examples + 1000 identity cases"};
}

Outcome complexity_trend() {
  const auto base = default_scenario();
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 10; ++i) seeds.push_back(base.engine.seed + i);
  const auto low = sweep(base, {5}, {"low"}, seeds).front();
  const auto high = sweep(base, {15}, {"high"}, seeds).front();
  const bool pass = high.mean > low.mean && high.ci_low > low.ci_high;
  return {pass, "10 seeds: 5/low mean " + fmt(low.mean) + " CI [" + fmt(low.ci_low) + ", " + fmt(low.ci_high) +
                    "]; 15/high mean " + fmt(high.mean) + " CI [" + fmt(high.ci_low) + ", " + fmt(high.ci_high) + "]"};
}

std::vector<std::uint8_t> golden_bytes() {
  std::vector<std::uint8_t> b = {0x00, 0x00, 0x00, 0x69, 0x00, 0x00, 0x00, 0x54, 0x00, 0x00, 0x00, 0x07,
                                 0x00, 0x00, 0x00, 0x03, 0x65, 0x53, 0xF1, 0x00, 0x00, 0x07, 0xA1, 0x20,
                                 0x00, 0x12, 0xD6, 0x87, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x02,
                                 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01};
  const std::uint8_t src[16] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff, 10, 0, 0, 1};
  const std::uint8_t dst[16] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff, 192, 168, 1, 20};
  b.insert(b.end(), src, src + 16);
  b.insert(b.end(), dst, dst + 16);
  const std::uint8_t tail[] = {0xC0, 0x00, 0x01, 0xF6, 0x06, 0x00, 0x00, 0x01,
                               0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
  b.insert(b.end(), tail, tail + sizeof tail);
  return b;
}

Outcome unified2_exact() {
  Unified2Event e;
  e.sensor_id = 7;
  e.event_id = 3;
  e.event_second = 1700000000;
  e.event_microsecond = 500000;
  e.signature_id = 1234567;
  e.generator_id = 1;
  e.signature_revision = 2;
  e.classification_id = 2;
  e.priority_id = 1;
  e.ip_source = ipv4_mapped("10.0.0.1");
  e.ip_destination = ipv4_mapped("192.168.1.20");
  e.sport_itype = 0xC000;
  e.dport_icode = 502;
  e.protocol = 6;
  e.blocked = 1;
  const auto golden = golden_bytes();
  if (serialize_unified2(e) != golden) return {false, "golden record differs"};
  if (!(parse_unified2_record(golden) == e)) return {false, "golden record parse differs"};
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    Unified2Event r;
    r.sensor_id = static_cast<std::uint32_t>(rng.next());
    r.event_id = static_cast<std::uint32_t>(rng.next());
    r.event_second = static_cast<std::uint32_t>(rng.next());
    r.event_microsecond = static_cast<std::uint32_t>(rng.below(1000000));
    r.signature_id = static_cast<std::uint32_t>(rng.next());
    r.generator_id = static_cast<std::uint32_t>(rng.next());
    r.signature_revision = static_cast<std::uint32_t>(rng.next());
    r.classification_id = static_cast<std::uint32_t>(rng.next());
    r.priority_id = static_cast<std::uint32_t>(rng.next());
    for (auto& x : r.ip_source) x = static_cast<std::uint8_t>(rng.next());
    for (auto& x : r.ip_destination) x = static_cast<std::uint8_t>(rng.next());
    r.sport_itype = static_cast<std::uint16_t>(rng.next());
    r.dport_icode = static_cast<std::uint16_t>(rng.next());
    r.protocol = static_cast<std::uint8_t>(rng.next());
    r.impact_flag = static_cast<std::uint8_t>(rng.next());
    r.impact = static_cast<std::uint8_t>(rng.next());
    r.blocked = static_cast<std::uint8_t>(rng.next());
    r.mpls_label = static_cast<std::uint32_t>(rng.next());
    r.vlan_id = static_cast<std::uint16_t>(rng.next());
    r.padding = static_cast<std::uint16_t>(rng.next());
    const auto bytes = serialize_unified2(r);
    if (bytes.size() != kUnified2RecordSize || !(parse_unified2_record(bytes) == r))
      return {false, "round trip failed at event " + std::to_string(i)};
  }
  return {true, "golden 92-byte record + 1000 round trips"};
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(os.str())));
  return buf;
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no CLI path given"};
  const auto root = fs::temp_directory_path() / "gridgame-acceptance-determinism";
  fs::remove_all(root);
  const std::string scenario = std::string(GRIDGAME_SCENARIO_DIR) + "/default.json";
  for (const char* run : {"a", "b"}) {
    const std::string cmd =
        "\"" + cli + "\" run --scenario \"" + scenario + "\" --seed 42 --out \"" + (root / run).string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
  }
  std::string summary;
  for (const char* f : {"alerts.u2", "labels.csv", "manifest.json", "rounds.jsonl"}) {
    const auto a = file_hash(root / "a" / f);
    const auto b = file_hash(root / "b" / f);
    if (a != b) return {false, std::string(f) + " hash " + a + " != " + b};
    if (std::string(f) == "alerts.u2") summary = "alerts.u2 " + a;
  }
  fs::remove_all(root);
  return {true, "4 files hash-identical, " + summary};
}

ScenarioConfig fuzz_scenario(Rng& rng) {
  ScenarioConfig c;
  c.vulnerability_pool = default_vulnerability_pool();
  GeneratorParams g;
  for (auto& n : g.levels) n = static_cast<int>(rng.below(3));
  if (std::all_of(g.levels.begin(), g.levels.end(), [](int n) { return n == 0; }))
    g.levels[rng.below(6)] = 1;
  g.hosts_min = 1;
  g.hosts_max = 1 + static_cast<int>(rng.below(3));
  g.vulns_min = 0;
  g.vulns_max = static_cast<int>(rng.below(3));
  c.source.generator = g;
  c.source.seed = rng.next();
  c.topology = generate_purdue_topology(g, c.source.seed, c.vulnerability_pool, c.costs);
  c.defender.sensor_count = static_cast<int>(rng.below(std::min<std::size_t>(c.topology.edges.size(), 6) + 1));
  c.defender.detection_probability = rng.uniform();
  c.defender.capital = 5000.0 * rng.uniform();
  c.defender.income = 10.0 * rng.uniform();
  c.attacker.skill_init = rng.uniform();
  c.attacker.abandon_threshold = 0.4 * rng.uniform();
  c.engine.rounds = 1 + static_cast<int>(rng.below(3));
  c.engine.seed = rng.next();
  c.engine.method = kAllMethods[rng.below(3)];
  c.engine.max_actions = 1 + static_cast<int>(rng.below(30));
  c.engine.noise.background_rate = rng.uniform();
  c.validate();
  return c;
}

std::string check_log(const ScenarioConfig& c, const CampaignLog& log) {
  if (static_cast<int>(log.records.size()) != c.engine.rounds) return "record count";
  if (log.events.size() != log.labels.size()) return "event/label count";
  double last_skill = -1.0;
  std::size_t k = 0;
  for (const auto& r : log.records) {
    if (static_cast<int>(r.actions.size()) > c.engine.max_actions) return "action cap exceeded";
    if (r.action_cap && r.outcome != RoundOutcome::FailedNonTraversable) return "cap outcome";
    if (!(r.complexity >= 0.0 && r.complexity <= 10.0)) return "complexity range";
    const bool reached = !r.realized_path.empty() && r.realized_path.back().rfind(r.target + ":", 0) == 0;
    if ((r.outcome == RoundOutcome::Success) != reached) return "success iff goal compromised";
    if (r.outcome == RoundOutcome::FailedDetected && r.detections.empty()) return "detected without detection";
    if (r.skill < last_skill || r.skill > 1.0) return "skill monotone";
    last_skill = r.skill;
    if (r.funds < 0.0) return "negative funds";
    if (r.end_time < r.start_time) return "time runs backwards";
    for (std::size_t i = 0; i < r.actions.size(); ++i)
      if (r.actions[i].index != static_cast<int>(i) + 1) return "action index";
    for (auto id : r.alert_ids) {
      if (k >= log.events.size() || log.events[k].event_id != id || log.labels[k].event_id != id) return "alert ids";
      const auto& l = log.labels[k];
      if (l.round != r.round) return "label round";
      if (l.label == AlertLabel::Attack) {
        const auto sep = l.action_ref.find(':');
        if (sep == std::string::npos || std::stoi(l.action_ref.substr(0, sep)) != r.round) return "action ref round";
        const int a = std::stoi(l.action_ref.substr(sep + 1));
        if (a < 1 || a > static_cast<int>(r.actions.size())) return "action ref index";
      }
      ++k;
    }
  }
  if (k != log.events.size()) return "unowned events";
  for (const auto& [node, q] : log.defender.q)
    if (q < 1.0) return "learning rate below 1 on " + node;
  return {};
}

Outcome termination_fuzz() {
  Rng rng(31337);
  int capped = 0;
  int success = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = fuzz_scenario(rng);
    const auto log = run_campaign(c);
    const auto err = check_log(c, log);
    if (!err.empty()) return {false, "scenario " + std::to_string(i) + ": " + err};
    for (const auto& r : log.records) {
      capped += r.action_cap;
      success += r.outcome == RoundOutcome::Success;
    }
  }
  return {true, "1000 scenarios, " + std::to_string(success) + " successful rounds, " + std::to_string(capped) +
                    " capped rounds"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  report("skill_schedule", "exact", skill_schedule);
  report("centrality_oracle", "1e-9", centrality_oracle);
  report("dijkstra_oracle", "exact", dijkstra_oracle);
  report("formula_suite", "exact", formula_suite);
  report("complexity_trend", "non-overlapping 95% CI", complexity_trend);
  report("unified2_bit_exact", "exact", unified2_exact);
  report("determinism", "byte-identical", [&] { return determinism(cli); });
  report("termination_integrity", "exact", termination_fuzz);
  return failures == 0 ? 0 : 1;
}
