#include "gridgame/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gridgame/attack_graph.hpp"
#include "gridgame/centrality.hpp"
#include "gridgame/engine.hpp"
#include "gridgame/error.hpp"
#include "gridgame/scenario.hpp"

namespace gridgame {

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::string sensors;
  std::string funds;
  int seeds = 1;
  std::string method;
  std::string out;
  unsigned jobs = 0;
  std::string what;
  std::string format = "csv";
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 10);
    if (used != text.size() || text.empty() || text[0] == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(origin + ": invalid seed \"" + text + "\"");
  }
}

ScenarioConfig load(const Options& o, bool required) {
  ScenarioConfig c;
  if (o.scenario.empty()) {
    if (required) throw UsageError("--scenario is required");
    c = default_scenario();
  } else {
    c = load_scenario_file(o.scenario);
  }
  if (o.seed) {
    c.engine.seed = *o.seed;
  } else if (const char* env = std::getenv("GRIDGAME_SEED"); env && *env) {
    c.engine.seed = parse_seed(env, "GRIDGAME_SEED");
  }
  if (o.rounds) c.engine.rounds = *o.rounds;
  if (!o.method.empty()) {
    auto m = parse_generation_method(o.method);
    if (!m) throw UsageError("unknown --method \"" + o.method + "\"");
    c.engine.method = *m;
  }
  return c;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(path + ": cannot open for writing");
  f << text;
}

int cmd_run(Options o, std::ostream& out) {
  auto c = load(o, true);
  if (!o.sensors.empty()) {
    try {
      c.defender.sensor_count = std::stoi(o.sensors);
    } catch (const std::exception&) {
      throw UsageError("--sensors expects an integer for run");
    }
  }
  if (!o.funds.empty()) apply_fund_level(c, o.funds);
  if (o.out.empty()) throw UsageError("--out is required");
  c.validate();
  const auto log = run_campaign(c);
  export_dataset(log, c, o.out);
  std::size_t wins = 0;
  for (const auto& r : log.records) wins += r.outcome == RoundOutcome::Success;
  out << "rounds=" << log.records.size() << " successes=" << wins << " events=" << log.events.size()
      << " out=" << o.out << "\n";
  return 0;
}

int cmd_sweep(Options o, std::ostream& out) {
  auto c = load(o, false);
  std::vector<int> sensors;
  for (const auto& s : split_list(o.sensors.empty() ? "5,10,15" : o.sensors)) {
    try {
      sensors.push_back(std::stoi(s));
    } catch (const std::exception&) {
      throw UsageError("--sensors: not an integer \"" + s + "\"");
    }
  }
  auto funds = split_list(o.funds.empty() ? "low,medium,high" : o.funds);
  if (o.seeds < 1) throw UsageError("--seeds must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < o.seeds; ++i) seeds.push_back(c.engine.seed + static_cast<std::uint64_t>(i));
  const auto csv = sweep_csv(sweep(c, sensors, funds, seeds, o.jobs));
  if (o.out.empty()) {
    out << csv;
  } else {
    std::filesystem::create_directories(o.out);
    write_text((std::filesystem::path(o.out) / "sweep.csv").string(), csv, out);
    out << "wrote " << (std::filesystem::path(o.out) / "sweep.csv").string() << "\n";
  }
  return 0;
}

int cmd_compare(Options o, std::ostream& out) {
  auto c = load(o, false);
  if (!o.rounds && c.engine.rounds < 50) c.engine.rounds = 50;
  if (c.engine.rounds < 50)
    throw ValidationError("compare-methods needs at least 50 rounds, got " + std::to_string(c.engine.rounds));
  if (o.out.empty()) throw UsageError("--out is required");
  if (o.seeds < 1) throw UsageError("--seeds must be >= 1");
  c.validate();

  struct Task {
    std::uint64_t seed;
    GenerationMethod method;
    std::string dir;
  };
  std::vector<Task> tasks;
  for (int i = 0; i < o.seeds; ++i) {
    const auto seed = c.engine.seed + static_cast<std::uint64_t>(i);
    for (auto m : kAllMethods)
      tasks.push_back({seed, m, "seed-" + std::to_string(seed) + "/" + std::string(to_string(m))});
  }
  std::vector<std::string> rows(tasks.size());
  parallel_for(tasks.size(), o.jobs, [&](std::size_t i) {
    ScenarioConfig local = c;
    local.engine.seed = tasks[i].seed;
    local.engine.method = tasks[i].method;
    const auto log = run_campaign(local);
    export_dataset(log, local, std::filesystem::path(o.out) / tasks[i].dir);
    std::size_t wins = 0;
    std::size_t attack = 0;
    double complexity = 0.0;
    std::set<std::vector<std::string>> paths;
    for (const auto& r : log.records) {
      wins += r.outcome == RoundOutcome::Success;
      complexity += r.complexity;
      paths.insert(r.realized_path);
    }
    for (const auto& l : log.labels) attack += l.label == AlertLabel::Attack;
    std::ostringstream row;
    row << tasks[i].seed << ',' << to_string(tasks[i].method) << ',' << log.records.size() << ',' << wins << ','
        << paths.size() << ',' << attack << ',' << log.events.size() - attack << ','
        << complexity / static_cast<double>(log.records.size()) << ',' << tasks[i].dir << '\n';
    rows[i] = row.str();
  });

  nlohmann::json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["scenario_hash"] = scenario_hash(c);
  manifest["rounds"] = c.engine.rounds;
  manifest["train_rounds"] = {1, 29};
  manifest["test_rounds"] = {30, c.engine.rounds};
  manifest["bundles"] = nlohmann::json::array();
  for (const auto& t : tasks)
    manifest["bundles"].push_back({{"seed", t.seed}, {"method", to_string(t.method)}, {"path", t.dir}});
  write_text((std::filesystem::path(o.out) / "manifest.json").string(), manifest.dump(2) + "\n", out);

  std::string csv =
      "seed,method,rounds,successes,distinct_paths,attack_events,background_events,mean_complexity,bundle\n";
  for (const auto& r : rows) csv += r;
  write_text((std::filesystem::path(o.out) / "comparison.csv").string(), csv, out);
  out << "bundles=" << tasks.size() << " out=" << o.out << "\n";
  return 0;
}

int cmd_inspect(Options o, std::ostream& out) {
  auto c = load(o, true);
  std::string text;
  if (o.what == "centrality") {
    std::ostringstream os;
    os << "node_id,score\n";
    os.precision(17);
    for (const auto& [id, score] : node_centrality(c.topology, {}, c.engine.c_min)) os << id << ',' << score << '\n';
    text = os.str();
  } else if (o.what == "sensors") {
    std::ostringstream os;
    os << "link_id,score\n";
    os.precision(17);
    const auto placement = place_sensors(c.topology, c.defender.sensor_count, {}, c.engine.c_min);
    for (std::size_t i = 0; i < placement.links.size(); ++i)
      os << placement.links[i].id() << ',' << placement.scores[i] << '\n';
    text = os.str();
  } else if (o.what == "attack-graph" || o.what == "action-graph") {
    const auto lag = derive_attack_graph(facts_from_topology(c.topology), builtin_ruleset());
    const bool json = o.format == "json";
    if (!json && o.format != "dot" && o.format != "csv") throw UsageError("--format must be dot or json");
    if (o.what == "attack-graph") {
      text = json ? to_json(lag) + "\n" : to_dot(lag);
    } else {
      WeightContext ctx{c.attacker.skill_init, c.engine.c_min, default_unsuccessful_rate(c.attacker.skill_init)};
      const auto g = to_action_graph(lag, {}, c.topology, c.engine.ttc, ctx);
      text = json ? to_json(g) + "\n" : to_dot(g);
    }
  } else {
    throw UsageError("inspect: unknown target \"" + o.what + "\" (centrality, sensors, attack-graph, action-graph)");
  }
  write_text(o.out, text, out);
  return 0;
}

int cmd_validate(Options o, std::ostream& out) {
  const auto c = load(o, true);
  out << "ok " << o.scenario << " nodes=" << c.topology.nodes.size() << " links=" << c.topology.edges.size()
      << " subnets=" << c.topology.subnets.size() << " hash=" << scenario_hash(c) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attacker-defender campaign simulator for smart-grid IDS datasets", "gridgame"};
  app.require_subcommand(1, 1);
  Options o;

  auto scenario = [&](CLI::App* sub) { sub->add_option("--scenario", o.scenario, "Scenario JSON file"); };
  auto seed = [&](CLI::App* sub) {
    sub->add_option_function<std::string>(
        "--seed", [&](const std::string& s) { o.seed = parse_seed(s, "--seed"); }, "RNG seed (falls back to GRIDGAME_SEED)");
  };
  auto rounds = [&](CLI::App* sub) {
    sub->add_option_function<int>("--rounds", [&](int r) { o.rounds = r; }, "Number of attacks M");
  };
  auto jobs = [&](CLI::App* sub) { sub->add_option("--jobs", o.jobs, "Worker threads (0 = logical cores)"); };

  auto* run = app.add_subcommand("run", "Run one campaign and export its dataset bundle");
  scenario(run);
  seed(run);
  rounds(run);
  run->add_option("--sensors", o.sensors, "Sensor count K");
  run->add_option("--funds", o.funds, "Fund level name");
  run->add_option("--method", o.method, "with_defender | single_attack_random | optimal_no_defender");
  run->add_option("--out", o.out, "Output directory");

  auto* sw = app.add_subcommand("sweep", "Mean attack complexity over a sensors x funds grid");
  scenario(sw);
  seed(sw);
  rounds(sw);
  sw->add_option("--sensors", o.sensors, "Comma-separated sensor counts");
  sw->add_option("--funds", o.funds, "Comma-separated fund levels");
  sw->add_option("--seeds", o.seeds, "Seeds per cell");
  sw->add_option("--out", o.out, "Output directory (CSV to stdout if omitted)");
  jobs(sw);

  auto* cmp = app.add_subcommand("compare-methods", "Bundles for all generation methods per seed");
  scenario(cmp);
  seed(cmp);
  rounds(cmp);
  cmp->add_option("--seeds", o.seeds, "Number of seeds");
  cmp->add_option("--out", o.out, "Output directory");
  jobs(cmp);

  auto* ins = app.add_subcommand("inspect", "Dump centrality, sensors or graphs");
  ins->add_option("what", o.what, "centrality | sensors | attack-graph | action-graph")->required();
  scenario(ins);
  ins->add_option("--format", o.format, "dot | json for graphs");
  ins->add_option("--out", o.out, "Output file (stdout if omitted)");

  auto* val = app.add_subcommand("validate", "Check a scenario file");
  scenario(val);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    if (chosen == run) return cmd_run(o, out);
    if (chosen == sw) return cmd_sweep(o, out);
    if (chosen == cmp) return cmd_compare(o, out);
    if (chosen == ins) return cmd_inspect(o, out);
    return cmd_validate(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << chosen->help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gridgame
