#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridgame/centrality.hpp"
#include "gridgame/rng.hpp"
#include "gridgame/topology.hpp"

namespace gridgame {

using Address = std::array<std::uint8_t, 16>;

/// Unified2 IPv6-style event body, 84 bytes on the wire.
struct Unified2Event {
  std::uint32_t sensor_id = 0;
  std::uint32_t event_id = 0;
  std::uint32_t event_second = 0;
  std::uint32_t event_microsecond = 0;
  std::uint32_t signature_id = 0;
  std::uint32_t generator_id = 0;
  std::uint32_t signature_revision = 0;
  std::uint32_t classification_id = 0;
  std::uint32_t priority_id = 0;
  Address ip_source{};
  Address ip_destination{};
  std::uint16_t sport_itype = 0;
  std::uint16_t dport_icode = 0;
  std::uint8_t protocol = 0;
  std::uint8_t impact_flag = 0;
  std::uint8_t impact = 0;
  std::uint8_t blocked = 0;
  std::uint32_t mpls_label = 0;
  std::uint16_t vlan_id = 0;
  std::uint16_t padding = 0;

  bool operator==(const Unified2Event&) const = default;
};

inline constexpr std::size_t kUnified2HeaderSize = 8;
inline constexpr std::size_t kUnified2BodySize = 84;
inline constexpr std::size_t kUnified2RecordSize = kUnified2HeaderSize + kUnified2BodySize;
inline constexpr std::uint32_t kUnified2EventType = 105;

/// ::ffff:a.b.c.d; throws Error on a malformed dotted quad.
Address ipv4_mapped(std::string_view dotted);
/// Dotted quad for IPv4-mapped addresses, otherwise colon-separated hex.
std::string format_address(const Address& a);

std::uint8_t protocol_number(std::string_view protocol);
/// 1 for exploitability >= 7, 2 for >= 4, 3 otherwise.
std::uint32_t priority_band(double exploitability);

/// Header (record type, length 84) followed by the body; big-endian.
std::vector<std::uint8_t> serialize_unified2(const Unified2Event& event, std::uint32_t record_type = kUnified2EventType);
void append_unified2(std::vector<std::uint8_t>& out, const Unified2Event& event,
                     std::uint32_t record_type = kUnified2EventType);

struct Unified2Stream {
  std::vector<Unified2Event> events;
  std::vector<std::string> warnings;  // one per skipped record
};

/// Parses concatenated records. Records of another type are skipped with a
/// warning; a truncated record throws ParseError naming its byte offset.
Unified2Stream parse_unified2(std::span<const std::uint8_t> bytes, std::uint32_t record_type = kUnified2EventType);

/// Exactly one record.
Unified2Event parse_unified2_record(std::span<const std::uint8_t> bytes,
                                    std::uint32_t record_type = kUnified2EventType);

enum class AlertLabel { Attack, Background };
std::string_view to_string(AlertLabel l);

struct LabeledAlert {
  std::uint32_t event_id = 0;
  AlertLabel label = AlertLabel::Background;
  int round = 0;
  std::string action_ref;  // "round:action" for attack alerts, empty otherwise

  bool operator==(const LabeledAlert&) const = default;
};

/// Simulated time to Unified2 timestamps.
struct AlertClock {
  std::uint32_t epoch = 1700000000;
  double time_unit_seconds = 3600.0;

  /// (second, microsecond) for simulated time `t`.
  std::pair<std::uint32_t, std::uint32_t> stamp(double t) const;
};

/// An attacker action as seen on the wire.
struct WireAction {
  std::string signature_key;  // vulnerability id or action key
  double exploitability = 0.0;
  std::uint32_t classification = 0;
  Link link;
  std::string src_address;
  std::string dst_address;
  std::string protocol;
  std::uint16_t port = 0;
  double time = 0.0;
};

/// One event with probability `p_detect` if the action's link carries a
/// sensor; nothing otherwise. Draws from `rng` only for covered links.
/// event_id is left 0 for the caller to assign.
std::vector<Unified2Event> emit_attack_alerts(const WireAction& action, const SensorPlacement& sensors,
                                              double p_detect, Rng& rng, const AlertClock& clock);

/// Poisson(rate * duration * |sensors|) benign events over
/// [start, start + duration). event_id is left 0.
std::vector<Unified2Event> emit_background(double rate, double start, double duration, Rng& rng,
                                           const SensorPlacement& sensors, const TopologyGraph& topology,
                                           const AlertClock& clock);

}  // namespace gridgame
