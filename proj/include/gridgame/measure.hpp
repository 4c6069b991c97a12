#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridgame {

enum class MeasureKind { Patching, Hardening, AccessRestriction, MonitoringBoost, ReactiveBlock };

std::string_view to_string(MeasureKind k);
std::optional<MeasureKind> parse_measure_kind(std::string_view s);

/// Defender countermeasure. Catalog entries have an empty target; purchased
/// or triggered measures name a node id, or a link id ("a--b") for the
/// edge-blocking kinds.
struct Measure {
  std::string name;
  MeasureKind kind = MeasureKind::Patching;
  std::string technique;  // D3FEND identifier
  std::string target;
  double cost = 0.0;
  double lead_time = 0.0;
  double effect = 0.0;           // success-rate reduction in [0,1)
  double detection_boost = 0.0;  // added to sensor detection probability
  double purchased_at = 0.0;

  bool preventive() const { return kind != MeasureKind::ReactiveBlock; }
  bool blocks_edge() const {
    return kind == MeasureKind::AccessRestriction || kind == MeasureKind::ReactiveBlock;
  }
  bool targets_edge() const { return blocks_edge(); }

  bool operator==(const Measure&) const = default;
};

/// Patching, hardening, access restriction and monitoring boost.
std::vector<Measure> default_catalog();

}  // namespace gridgame
