#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridgame/measure.hpp"
#include "gridgame/risk.hpp"
#include "gridgame/topology.hpp"

namespace gridgame {

enum class GenerationMethod { WithDefender, SingleAttackRandom, OptimalNoDefender };

std::string_view to_string(GenerationMethod m);
std::optional<GenerationMethod> parse_generation_method(std::string_view s);
inline constexpr GenerationMethod kAllMethods[] = {GenerationMethod::WithDefender, GenerationMethod::SingleAttackRandom,
                                                   GenerationMethod::OptimalNoDefender};

struct FundLevel {
  std::string name;
  double capital = 0.0;
  double income = 0.0;
  bool operator==(const FundLevel&) const = default;
};

/// low (1000, 1), medium (5000, 5), high (20000, 20).
std::vector<FundLevel> default_fund_levels();

struct DefenderConfig {
  double capital = 5000.0;
  double income = 5.0;  // per time unit
  int sensor_count = 0;
  double detection_probability = 0.8;
  double q_increment = 0.5;
  std::vector<Measure> catalog = default_catalog();
  std::vector<FundLevel> fund_levels = default_fund_levels();
  bool operator==(const DefenderConfig&) const = default;
};

struct AttackerConfig {
  double skill_init = 0.5;
  double skill_increment = 0.02;
  double abandon_threshold = 0.2;
  double credential_exploitability = 8.6;
  bool operator==(const AttackerConfig&) const = default;
};

struct NoiseConfig {
  double background_rate = 0.2;  // events per time unit per sensor
  bool operator==(const NoiseConfig&) const = default;
};

struct EngineConfig {
  int rounds = 1;
  std::uint64_t seed = 0;
  GenerationMethod method = GenerationMethod::WithDefender;
  TTCParams ttc;
  NoiseConfig noise;
  int max_actions = 200;
  double c_min = 1.0;
  double time_unit_seconds = 3600.0;
  std::uint32_t epoch = 1700000000;  // event_second of simulated time 0
  std::uint32_t record_type = 105;
  bool operator==(const EngineConfig&) const = default;
};

/// Where the topology came from; a generated topology is saved as its
/// generator parameters.
struct TopologySource {
  std::optional<GeneratorParams> generator;
  std::uint64_t seed = 0;
  bool operator==(const TopologySource&) const = default;
};

struct ScenarioConfig {
  TopologySource source;
  TopologyGraph topology;
  std::vector<Vulnerability> vulnerability_pool;
  CostModel costs;
  DefenderConfig defender;
  AttackerConfig attacker;
  EngineConfig engine;

  /// Throws ValidationError on any invariant or cross-reference violation.
  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses and validates a scenario document. ParseError paths are JSON
/// pointers into the document.
ScenarioConfig load_scenario(std::string_view text);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioConfig& config);
std::string save_scenario(const ScenarioConfig& config);

/// FNV-1a-64 of the canonical document, as 16 hex digits.
std::string scenario_hash(const ScenarioConfig& config);

/// 21 generated subnets, 10 sensors, 30 rounds, medium funds.
ScenarioConfig default_scenario();

/// Applies a named fund level from the scenario's table.
void apply_fund_level(ScenarioConfig& config, std::string_view level);

}  // namespace gridgame
