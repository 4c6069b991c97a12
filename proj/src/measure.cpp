#include "gridgame/measure.hpp"

#include <array>
#include <utility>

namespace gridgame {

namespace {

constexpr std::array<std::pair<MeasureKind, std::string_view>, 5> kKindNames{{
    {MeasureKind::Patching, "patching"},
    {MeasureKind::Hardening, "hardening"},
    {MeasureKind::AccessRestriction, "access_restriction"},
    {MeasureKind::MonitoringBoost, "monitoring_boost"},
    {MeasureKind::ReactiveBlock, "reactive_block"},
}};

}  // namespace

std::string_view to_string(MeasureKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "unknown";
}

std::optional<MeasureKind> parse_measure_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

std::vector<Measure> default_catalog() {
  Measure patch{"patch vulnerable software", MeasureKind::Patching, "D3-SU", {}, 2000.0, 1.0, 0.6, 0.0, 0.0};
  Measure harden{"application hardening", MeasureKind::Hardening, "D3-AH", {}, 1200.0, 1.0, 0.4, 0.0, 0.0};
  Measure restrict{"network traffic filtering", MeasureKind::AccessRestriction, "D3-NTF", {}, 3000.0, 2.0, 0.5, 0.0,
                   0.0};
  Measure monitor{"network traffic analysis", MeasureKind::MonitoringBoost, "D3-NTA", {}, 1500.0, 0.5, 0.0, 0.1, 0.0};
  return {patch, harden, restrict, monitor};
}

}  // namespace gridgame
