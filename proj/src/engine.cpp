#include "gridgame/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "gridgame/attack_graph.hpp"
#include "gridgame/error.hpp"

namespace gridgame {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t { kAttempts = 0, kDetection = 1, kNoise = 2, kWalk = 3 };

std::uint32_t classification_of(const ActionEdge& e) {
  if (!e.vulnerability) return 5;
  switch (e.vulnerability->consequence) {
    case Consequence::PrivEscalation: return 1;
    case Consequence::CodeExec: return 2;
    case Consequence::Dos: return 3;
    case Consequence::InfoLeak: return 4;
  }
  return 5;
}

std::string address_of(const TopologyGraph& t, const std::string& host) {
  auto idx = t.index_of(host);
  return idx ? t.nodes[*idx].address : std::string{};
}

struct RoundGraph {
  ActionGraph graph;
};

RoundGraph build_graph(const ScenarioConfig& config, const DefenderState& defender) {
  const auto facts = facts_from_topology(config.topology, defender.preventive);
  const auto lag = derive_attack_graph(facts, builtin_ruleset());
  RoundGraph rg;
  rg.graph = project_actions(lag, config.topology);
  return rg;
}

std::vector<bool> usable_edges(RoundGraph& rg, const ScenarioConfig& config, const AttackerState& attacker,
                               const DefenderState& defender) {
  WeightContext ctx{attacker.skill, config.engine.c_min, default_unsuccessful_rate(attacker.skill)};
  auto usable = assign_weights(rg.graph, attacker.beliefs, config.topology, config.engine.ttc, ctx);
  for (std::size_t i = 0; i < usable.size(); ++i)
    if (usable[i] && rg.graph.edges[i].link && defender.link_blocked(rg.graph.edges[i].link->id())) usable[i] = false;
  return usable;
}

}  // namespace

std::string_view to_string(RoundOutcome o) {
  switch (o) {
    case RoundOutcome::Success: return "success";
    case RoundOutcome::FailedDetected: return "failed_detected";
    case RoundOutcome::FailedNonTraversable: return "failed_non_traversable";
  }
  return "unknown";
}

CampaignState initial_state(const ScenarioConfig& config) {
  CampaignState s;
  s.attacker.skill = config.attacker.skill_init;
  s.attacker.skill_init = config.attacker.skill_init;
  s.attacker.skill_increment = config.attacker.skill_increment;
  s.attacker.abandon_threshold = config.attacker.abandon_threshold;
  s.attacker.credential_exploitability = config.attacker.credential_exploitability;
  s.defender.capital = config.defender.capital;
  s.defender.income = config.defender.income;
  s.defender.sensor_count = config.defender.sensor_count;
  s.defender.detection_probability = config.defender.detection_probability;
  s.defender.q_increment = config.defender.q_increment;
  s.defender.catalog = config.defender.catalog;
  return s;
}

RoundRecord run_round(const ScenarioConfig& config, CampaignState& state, int round, GenerationMethod method,
                      std::uint64_t seed) {
  auto& attacker = state.attacker;
  auto& defender = state.defender;
  const bool defended = method == GenerationMethod::WithDefender;
  const std::uint64_t round_seed = Rng::derive(seed, static_cast<std::uint64_t>(round)).next();
  Rng attempts = Rng::derive(round_seed, kAttempts);
  Rng detection = Rng::derive(round_seed, kDetection);
  Rng noise = Rng::derive(round_seed, kNoise);
  Rng walk = Rng::derive(round_seed, kWalk);
  const AlertClock clock{config.engine.epoch, config.engine.time_unit_seconds};

  RoundRecord rec;
  rec.round = round;
  rec.skill = attacker.skill;
  rec.funds = defender.funds();
  rec.start_time = attacker.elapsed_time;

  if (defended) activate_pending(defender);
  defender.sensors = place_sensors(config.topology, defender.sensor_count, defender.q, config.engine.c_min);

  RoundGraph rg = build_graph(config, defender);
  auto& graph = rg.graph;
  auto usable = usable_edges(rg, config, attacker, defender);

  attacker.compromised.clear();
  for (auto s : graph.start_states) attacker.compromised.insert(graph.states[s].id());
  attacker.position = graph.start_states.empty() ? std::string{} : graph.states[graph.start_states.front()].id();

  std::vector<std::pair<Unified2Event, std::string>> round_events;  // event, action ref
  std::optional<std::string> target;
  try {
    target = select_target(attacker, config.topology, graph, usable);
  } catch (const NonTraversable&) {
  }
  bool reached = false;
  std::set<std::string> start_hosts;
  for (auto s : graph.start_states) start_hosts.insert(graph.states[s].host);

  if (target && !start_hosts.count(*target)) {
    rec.target = *target;
    attacker.goal = *target;
    const auto goals = graph.states_on(*target);
    auto held = [&]() {
      std::vector<std::size_t> out;
      for (std::size_t i = 0; i < graph.states.size(); ++i)
        if (attacker.compromised.count(graph.states[i].id())) out.push_back(i);
      return out;
    };
    if (method == GenerationMethod::SingleAttackRandom && !graph.start_states.empty())
      attacker.position = graph.states[graph.start_states[walk.below(graph.start_states.size())]].id();

    bool first_plan = true;
    while (static_cast<int>(rec.actions.size()) < config.engine.max_actions) {
      std::optional<std::size_t> chosen;
      if (method == GenerationMethod::SingleAttackRandom) {
        const auto pos = std::find_if(graph.states.begin(), graph.states.end(),
                                      [&](const PrivilegeState& s) { return s.id() == attacker.position; });
        std::vector<std::size_t> options;
        if (pos != graph.states.end())
          for (auto e : graph.out_edges(static_cast<std::size_t>(pos - graph.states.begin())))
            if (usable[e] && !attacker.compromised.count(graph.states[graph.edges[e].dst].id())) options.push_back(e);
        if (options.empty()) break;
        chosen = options[walk.below(options.size())];
        if (first_plan) {
          rec.planned_path = {attacker.position};
          first_plan = false;
        }
      } else {
        const auto sources = held();
        auto path = plan_path(graph, sources, goals, usable);
        if (!path) break;
        if (path->edges.empty()) {
          reached = true;
          break;
        }
        if (first_plan) {
          for (auto s : path->states) rec.planned_path.push_back(graph.states[s].id());
          first_plan = false;
        }
        chosen = path->edges.front();
      }

      const auto& edge = graph.edges[*chosen];
      const auto& src_state = graph.states[edge.src];
      const auto& dst_state = graph.states[edge.dst];
      if (rec.realized_path.empty()) rec.realized_path.push_back(src_state.id());

      ActionRecord act;
      act.index = static_cast<int>(rec.actions.size()) + 1;
      act.src = src_state.id();
      act.dst = dst_state.id();
      act.action_key = edge.action_key;
      act.technique = edge.technique;
      act.link = edge.link ? edge.link->id() : std::string{};
      act.start_time = attacker.elapsed_time;
      act.ttc = edge.ttc;
      act.rate = edge_success_rate(edge, dst_state.host, attacker, defender);
      attacker.position = src_state.id();

      const double action_time = attacker.elapsed_time;
      const auto result = attempt_action(attempts, attacker, graph, *chosen, defender);
      act.success = result.outcome == AttemptOutcome::Success;
      act.abandoned = result.outcome == AttemptOutcome::Abandon;

      if (edge.link) {
        WireAction wire;
        wire.signature_key = edge.vulnerability ? edge.vulnerability->id : edge.action_key;
        wire.exploitability =
            edge.vulnerability ? edge.vulnerability->exploitability : attacker.credential_exploitability;
        wire.classification = classification_of(edge);
        wire.link = *edge.link;
        wire.src_address = address_of(config.topology, src_state.host);
        wire.dst_address = address_of(config.topology, dst_state.host);
        wire.protocol = edge.protocol;
        wire.port = edge.port;
        wire.time = action_time;
        auto alerts = emit_attack_alerts(wire, defender.sensors, defender.detection_probability_on(*edge.link),
                                         detection, clock);
        if (!alerts.empty()) {
          act.detected = true;
          if (defended) {
            react(defender, *edge.link);
            act.blocked = true;
            for (auto& a : alerts) a.blocked = 1;
          }
          for (auto& a : alerts) round_events.emplace_back(a, act.ref(round));
          rec.detections.push_back({act.index, act.link, 0});
        }
      }
      rec.actions.push_back(act);

      if (act.success) {
        rec.realized_path.push_back(dst_state.id());
        if (edge.vulnerability) rec.exploited.push_back(edge.vulnerability->id);
        if (dst_state.host == *target) {
          reached = true;
          break;
        }
      }
      usable = usable_edges(rg, config, attacker, defender);
    }
    if (!reached && static_cast<int>(rec.actions.size()) >= config.engine.max_actions) rec.action_cap = true;
  }
  rec.end_time = attacker.elapsed_time;

  if (reached)
    rec.outcome = RoundOutcome::Success;
  else if (rec.action_cap)
    rec.outcome = RoundOutcome::FailedNonTraversable;
  else if (!rec.detections.empty())
    rec.outcome = RoundOutcome::FailedDetected;
  else
    rec.outcome = RoundOutcome::FailedNonTraversable;

  std::vector<Vulnerability> exploited;
  for (const auto& id : rec.exploited)
    for (const auto& v : config.vulnerability_pool)
      if (v.id == id) exploited.push_back(v);
  const int hops = rec.realized_path.empty() ? 0 : static_cast<int>(rec.realized_path.size()) - 1;
  rec.complexity = complexity_score(exploited, hops);

  for (auto& e : emit_background(config.engine.noise.background_rate, rec.start_time, rec.elapsed(), noise,
                                 defender.sensors, config.topology, clock))
    round_events.emplace_back(e, std::string{});
  std::stable_sort(round_events.begin(), round_events.end(), [](const auto& x, const auto& y) {
    return std::tie(x.first.event_second, x.first.event_microsecond) <
           std::tie(y.first.event_second, y.first.event_microsecond);
  });
  for (auto& [event, ref] : round_events) {
    event.event_id = state.next_event_id++;
    LabeledAlert label{event.event_id, ref.empty() ? AlertLabel::Background : AlertLabel::Attack, round, ref};
    rec.alert_ids.push_back(event.event_id);
    if (!ref.empty()) {
      for (auto& d : rec.detections)
        if (d.event_id == 0 && ref == std::to_string(round) + ":" + std::to_string(d.action)) {
          d.event_id = event.event_id;
          break;
        }
    }
    state.events.push_back(event);
    state.labels.push_back(std::move(label));
  }

  update_skill(attacker);
  if (defended) {
    update_q(defender, defender.detected_nodes);
    defender.detected_nodes.clear();
    defender.reactive.clear();
    const auto report = risk_report(defender, config.topology);
    for (const auto& m : defender_plan(defender, report, defender.catalog, config.topology))
      rec.purchases.push_back(m.name + "@" + m.target);
  }
  return rec;
}

CampaignLog run_variant(const ScenarioConfig& config, GenerationMethod method) {
  config.validate();
  CampaignLog log;
  log.scenario_hash = scenario_hash(config);
  log.seed = config.engine.seed;
  log.method = method;
  CampaignState state = initial_state(config);
  if (method == GenerationMethod::WithDefender) {
    const auto report = risk_report(state.defender, config.topology);
    defender_plan(state.defender, report, state.defender.catalog, config.topology);
  }
  for (int r = 1; r <= config.engine.rounds; ++r)
    log.records.push_back(run_round(config, state, r, method, config.engine.seed));
  log.events = std::move(state.events);
  log.labels = std::move(state.labels);
  log.attacker = std::move(state.attacker);
  log.defender = std::move(state.defender);
  return log;
}

CampaignLog run_campaign(const ScenarioConfig& config) { return run_variant(config, config.engine.method); }

json to_json(const RoundRecord& r) {
  json actions = json::array();
  for (const auto& a : r.actions)
    actions.push_back({{"index", a.index},
                       {"src", a.src},
                       {"dst", a.dst},
                       {"action", a.action_key},
                       {"technique", a.technique},
                       {"link", a.link},
                       {"start_time", a.start_time},
                       {"ttc", a.ttc},
                       {"rate", a.rate},
                       {"success", a.success},
                       {"detected", a.detected},
                       {"blocked", a.blocked},
                       {"abandoned", a.abandoned}});
  json detections = json::array();
  for (const auto& d : r.detections)
    detections.push_back({{"action", d.action}, {"link", d.link}, {"event_id", d.event_id}});
  return {{"round", r.round},
          {"target", r.target},
          {"outcome", to_string(r.outcome)},
          {"action_cap", r.action_cap},
          {"planned_path", r.planned_path},
          {"realized_path", r.realized_path},
          {"exploited", r.exploited},
          {"complexity", r.complexity},
          {"detections", detections},
          {"start_time", r.start_time},
          {"end_time", r.end_time},
          {"alert_ids", r.alert_ids},
          {"purchases", r.purchases},
          {"funds", r.funds},
          {"skill", r.skill},
          {"actions", actions}};
}

json manifest_json(const CampaignLog& log, const ScenarioConfig& config) {
  std::size_t attack = 0;
  for (const auto& l : log.labels) attack += l.label == AlertLabel::Attack;
  return {{"format_version", kFormatVersion},
          {"record_type", config.engine.record_type},
          {"scenario_hash", log.scenario_hash},
          {"seed", log.seed},
          {"rounds", log.records.size()},
          {"generation_method", to_string(log.method)},
          {"versions", {{"gridgame", kVersion}, {"rng", Rng::kName}}},
          {"event_count", log.events.size()},
          {"attack_events", attack},
          {"files", {"alerts.u2", "labels.csv", "rounds.jsonl"}}};
}

std::string labels_csv(const std::vector<LabeledAlert>& labels) {
  std::string out = "event_id,label,round,action_ref\n";
  for (const auto& l : labels) {
    out += std::to_string(l.event_id);
    out += ',';
    out += to_string(l.label);
    out += ',';
    out += std::to_string(l.round);
    out += ',';
    out += l.action_ref;
    out += '\n';
  }
  return out;
}

std::vector<std::uint8_t> alerts_bytes(const CampaignLog& log, std::uint32_t record_type) {
  std::vector<std::uint8_t> out;
  out.reserve(log.events.size() * kUnified2RecordSize);
  for (const auto& e : log.events) append_unified2(out, e, record_type);
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace

void export_dataset(const CampaignLog& log, const ScenarioConfig& config, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(dir.string() + ": " + ec.message());
  write_file(dir / "manifest.json", manifest_json(log, config).dump(2) + "\n");
  std::string rounds;
  for (const auto& r : log.records) rounds += to_json(r).dump() + "\n";
  write_file(dir / "rounds.jsonl", rounds);
  const auto bytes = alerts_bytes(log, config.engine.record_type);
  write_file(dir / "alerts.u2", std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  write_file(dir / "labels.csv", labels_csv(log.labels));
}

std::pair<double, double> confidence_interval95(const std::vector<double>& xs) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (xs.size() < 2) return {nan, nan};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double half = boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(n);
  return {mean - half, mean + half};
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& task) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::exception_ptr> errors(count);
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= count) return;
        i = next++;
      }
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(count, 1)));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::vector<int>& sensors,
                            const std::vector<std::string>& funds, const std::vector<std::uint64_t>& seeds,
                            unsigned jobs) {
  if (sensors.empty() || funds.empty() || seeds.empty()) throw Error("sweep: empty grid");
  struct Cell {
    double mean = 0.0;
    double success = 0.0;
  };
  const std::size_t per_row = seeds.size();
  std::vector<ScenarioConfig> configs;
  for (int k : sensors)
    for (const auto& f : funds) {
      ScenarioConfig c = base;
      c.defender.sensor_count = k;
      apply_fund_level(c, f);
      c.engine.method = GenerationMethod::WithDefender;
      c.validate();
      configs.push_back(std::move(c));
    }
  std::vector<Cell> cells(configs.size() * per_row);
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    ScenarioConfig c = configs[i / per_row];
    c.engine.seed = seeds[i % per_row];
    const auto log = run_campaign(c);
    double total = 0.0;
    double wins = 0.0;
    for (const auto& r : log.records) {
      total += r.complexity;
      wins += r.outcome == RoundOutcome::Success;
    }
    cells[i] = {total / static_cast<double>(log.records.size()), wins / static_cast<double>(log.records.size())};
  });

  std::vector<SweepRow> rows;
  std::size_t row = 0;
  for (int k : sensors)
    for (const auto& f : funds) {
      SweepRow r;
      r.sensors = k;
      r.funds = f;
      r.seeds = static_cast<int>(per_row);
      double success = 0.0;
      for (std::size_t s = 0; s < per_row; ++s) {
        r.per_seed.push_back(cells[row * per_row + s].mean);
        success += cells[row * per_row + s].success;
      }
      r.mean = std::accumulate(r.per_seed.begin(), r.per_seed.end(), 0.0) / static_cast<double>(per_row);
      double ss = 0.0;
      for (double x : r.per_seed) ss += (x - r.mean) * (x - r.mean);
      r.sd = per_row > 1 ? std::sqrt(ss / static_cast<double>(per_row - 1)) : std::numeric_limits<double>::quiet_NaN();
      std::tie(r.ci_low, r.ci_high) = confidence_interval95(r.per_seed);
      r.success_rate = success / static_cast<double>(per_row);
      rows.push_back(std::move(r));
      ++row;
    }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "sensors,funds,seeds,mean_complexity,sd,ci95_low,ci95_high,success_rate\n";
  auto num = [](double v) {
    if (std::isnan(v)) return std::string("NaN");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const auto& r : rows)
    os << r.sensors << ',' << r.funds << ',' << r.seeds << ',' << num(r.mean) << ',' << num(r.sd) << ','
       << num(r.ci_low) << ',' << num(r.ci_high) << ',' << num(r.success_rate) << '\n';
  return os.str();
}

}  // namespace gridgame
