#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridgame/agents.hpp"
#include "gridgame/alerts.hpp"
#include "gridgame/scenario.hpp"

namespace gridgame {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

enum class RoundOutcome { Success, FailedDetected, FailedNonTraversable };
std::string_view to_string(RoundOutcome o);

struct ActionRecord {
  int index = 0;  // 1-based within the round
  std::string src;
  std::string dst;
  std::string action_key;
  std::string technique;
  std::string link;  // empty for same-host actions
  double start_time = 0.0;
  double ttc = 0.0;
  double rate = 0.0;
  bool success = false;
  bool detected = false;
  bool blocked = false;
  bool abandoned = false;

  std::string ref(int round) const { return std::to_string(round) + ":" + std::to_string(index); }
};

struct Detection {
  int action = 0;
  std::string link;
  std::uint32_t event_id = 0;
};

struct RoundRecord {
  int round = 0;
  std::string target;
  std::vector<std::string> planned_path;   // privilege state ids of the first plan
  std::vector<std::string> realized_path;  // states reached by successful actions, from the foothold
  RoundOutcome outcome = RoundOutcome::FailedNonTraversable;
  bool action_cap = false;
  std::vector<std::string> exploited;  // vulnerability ids, in order
  double complexity = 0.0;
  std::vector<Detection> detections;
  std::vector<ActionRecord> actions;
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<std::uint32_t> alert_ids;
  std::vector<std::string> purchases;  // "name@target" bought after the round
  double funds = 0.0;                  // defender funds at round start
  double skill = 0.0;                  // attacker skill during the round

  double elapsed() const { return end_time - start_time; }
};

struct CampaignLog {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  GenerationMethod method = GenerationMethod::WithDefender;
  std::vector<RoundRecord> records;
  std::vector<Unified2Event> events;
  std::vector<LabeledAlert> labels;
  AttackerState attacker;
  DefenderState defender;
};

/// Per-round mutable context shared by the engine loop.
struct CampaignState {
  AttackerState attacker;
  DefenderState defender;
  std::uint32_t next_event_id = 1;
  std::vector<Unified2Event> events;
  std::vector<LabeledAlert> labels;
};

/// Fresh agents for `config` (no initial purchases).
CampaignState initial_state(const ScenarioConfig& config);

/// One attack. `round` is 1-based and selects the child RNG streams.
RoundRecord run_round(const ScenarioConfig& config, CampaignState& state, int round, GenerationMethod method,
                      std::uint64_t seed);

/// config.engine.rounds rounds with the configured method and seed.
CampaignLog run_campaign(const ScenarioConfig& config);
CampaignLog run_variant(const ScenarioConfig& config, GenerationMethod method);

nlohmann::json to_json(const RoundRecord& record);
nlohmann::json manifest_json(const CampaignLog& log, const ScenarioConfig& config);
std::string labels_csv(const std::vector<LabeledAlert>& labels);
std::vector<std::uint8_t> alerts_bytes(const CampaignLog& log, std::uint32_t record_type);

/// Writes manifest.json, rounds.jsonl, alerts.u2 and labels.csv into `dir`.
void export_dataset(const CampaignLog& log, const ScenarioConfig& config, const std::filesystem::path& dir);

struct SweepRow {
  int sensors = 0;
  std::string funds;
  int seeds = 0;
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;  // NaN with fewer than two seeds
  double ci_high = 0.0;
  double success_rate = 0.0;
  std::vector<double> per_seed;  // mean complexity per seed
};

/// Two-sided 95% t-interval of the mean; NaN bounds for n < 2.
std::pair<double, double> confidence_interval95(const std::vector<double>& xs);

/// Grid of (sensors x fund level) campaigns, `seeds` seeds each, run with
/// the defender. Rows are in grid order regardless of `jobs`.
std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::vector<int>& sensors,
                            const std::vector<std::string>& funds, const std::vector<std::uint64_t>& seeds,
                            unsigned jobs = 1);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Runs `tasks` on up to `jobs` threads; exceptions are rethrown in task order.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& task);

}  // namespace gridgame
