#include "gridgame/alerts.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "gridgame/error.hpp"
#include "gridgame/signature.hpp"

namespace gridgame {

namespace {

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

class Cursor {
public:
  explicit Cursor(const std::uint8_t* p) : p_(p) {}
  std::uint32_t u32() {
    const std::uint32_t v = (std::uint32_t{p_[0]} << 24) | (std::uint32_t{p_[1]} << 16) | (std::uint32_t{p_[2]} << 8) |
                            std::uint32_t{p_[3]};
    p_ += 4;
    return v;
  }
  std::uint16_t u16() {
    const auto v = static_cast<std::uint16_t>((p_[0] << 8) | p_[1]);
    p_ += 2;
    return v;
  }
  std::uint8_t u8() { return *p_++; }
  Address addr() {
    Address a;
    std::copy(p_, p_ + 16, a.begin());
    p_ += 16;
    return a;
  }

private:
  const std::uint8_t* p_;
};

Unified2Event decode_body(const std::uint8_t* p) {
  Cursor c(p);
  Unified2Event e;
  e.sensor_id = c.u32();
  e.event_id = c.u32();
  e.event_second = c.u32();
  e.event_microsecond = c.u32();
  e.signature_id = c.u32();
  e.generator_id = c.u32();
  e.signature_revision = c.u32();
  e.classification_id = c.u32();
  e.priority_id = c.u32();
  e.ip_source = c.addr();
  e.ip_destination = c.addr();
  e.sport_itype = c.u16();
  e.dport_icode = c.u16();
  e.protocol = c.u8();
  e.impact_flag = c.u8();
  e.impact = c.u8();
  e.blocked = c.u8();
  e.mpls_label = c.u32();
  e.vlan_id = c.u16();
  e.padding = c.u16();
  return e;
}

std::uint32_t read32(const std::uint8_t* p) { return Cursor(p).u32(); }

std::string address_of(const TopologyGraph& topology, const std::string& node) {
  auto idx = topology.index_of(node);
  return idx ? topology.nodes[*idx].address : std::string{};
}

Address address_or_zero(const std::string& dotted) {
  if (dotted.empty()) return Address{};
  return ipv4_mapped(dotted);
}

}  // namespace

Address ipv4_mapped(std::string_view dotted) {
  Address a{};
  a[10] = 0xff;
  a[11] = 0xff;
  const char* p = dotted.data();
  const char* end = dotted.data() + dotted.size();
  for (int i = 0; i < 4; ++i) {
    unsigned v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || next == p || v > 255) throw Error("bad IPv4 address \"" + std::string(dotted) + "\"");
    a[static_cast<std::size_t>(12 + i)] = static_cast<std::uint8_t>(v);
    p = next;
    if (i < 3) {
      if (p == end || *p != '.') throw Error("bad IPv4 address \"" + std::string(dotted) + "\"");
      ++p;
    }
  }
  if (p != end) throw Error("bad IPv4 address \"" + std::string(dotted) + "\"");
  return a;
}

std::string format_address(const Address& a) {
  bool mapped = a[10] == 0xff && a[11] == 0xff;
  for (int i = 0; i < 10; ++i) mapped = mapped && a[static_cast<std::size_t>(i)] == 0;
  char buf[48];
  if (mapped) {
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", a[12], a[13], a[14], a[15]);
    return buf;
  }
  std::string out;
  for (int i = 0; i < 16; i += 2) {
    std::snprintf(buf, sizeof buf, "%s%x", i ? ":" : "",
                  (a[static_cast<std::size_t>(i)] << 8) | a[static_cast<std::size_t>(i + 1)]);
    out += buf;
  }
  return out;
}

std::uint8_t protocol_number(std::string_view protocol) {
  if (protocol == "tcp") return 6;
  if (protocol == "udp") return 17;
  if (protocol == "icmp") return 1;
  return 0;
}

std::uint32_t priority_band(double exploitability) {
  if (exploitability >= 7.0) return 1;
  if (exploitability >= 4.0) return 2;
  return 3;
}

void append_unified2(std::vector<std::uint8_t>& out, const Unified2Event& e, std::uint32_t record_type) {
  out.reserve(out.size() + kUnified2RecordSize);
  put32(out, record_type);
  put32(out, static_cast<std::uint32_t>(kUnified2BodySize));
  put32(out, e.sensor_id);
  put32(out, e.event_id);
  put32(out, e.event_second);
  put32(out, e.event_microsecond);
  put32(out, e.signature_id);
  put32(out, e.generator_id);
  put32(out, e.signature_revision);
  put32(out, e.classification_id);
  put32(out, e.priority_id);
  out.insert(out.end(), e.ip_source.begin(), e.ip_source.end());
  out.insert(out.end(), e.ip_destination.begin(), e.ip_destination.end());
  put16(out, e.sport_itype);
  put16(out, e.dport_icode);
  out.push_back(e.protocol);
  out.push_back(e.impact_flag);
  out.push_back(e.impact);
  out.push_back(e.blocked);
  put32(out, e.mpls_label);
  put16(out, e.vlan_id);
  put16(out, e.padding);
}

std::vector<std::uint8_t> serialize_unified2(const Unified2Event& event, std::uint32_t record_type) {
  std::vector<std::uint8_t> out;
  append_unified2(out, event, record_type);
  return out;
}

Unified2Stream parse_unified2(std::span<const std::uint8_t> bytes, std::uint32_t record_type) {
  Unified2Stream out;
  std::size_t off = 0;
  while (off < bytes.size()) {
    if (bytes.size() - off < kUnified2HeaderSize)
      throw ParseError("offset " + std::to_string(off), "truncated record header");
    const auto type = read32(bytes.data() + off);
    const auto length = read32(bytes.data() + off + 4);
    if (bytes.size() - off - kUnified2HeaderSize < length)
      throw ParseError("offset " + std::to_string(off), "truncated record: declared " + std::to_string(length) +
                                                            " body bytes, " +
                                                            std::to_string(bytes.size() - off - kUnified2HeaderSize) +
                                                            " available");
    if (type != record_type) {
      out.warnings.push_back("skipped record of type " + std::to_string(type) + " at offset " + std::to_string(off));
    } else {
      if (length != kUnified2BodySize)
        throw ParseError("offset " + std::to_string(off),
                         "event record length " + std::to_string(length) + ", expected 84");
      out.events.push_back(decode_body(bytes.data() + off + kUnified2HeaderSize));
    }
    off += kUnified2HeaderSize + length;
  }
  return out;
}

Unified2Event parse_unified2_record(std::span<const std::uint8_t> bytes, std::uint32_t record_type) {
  auto stream = parse_unified2(bytes, record_type);
  if (stream.events.size() != 1 || !stream.warnings.empty())
    throw ParseError("offset 0", "expected exactly one event record");
  return stream.events.front();
}

std::string_view to_string(AlertLabel l) { return l == AlertLabel::Attack ? "attack" : "background"; }

std::pair<std::uint32_t, std::uint32_t> AlertClock::stamp(double t) const {
  const double s = std::max(t, 0.0) * time_unit_seconds;
  const double whole = std::floor(s);
  auto micro = static_cast<std::uint32_t>(std::floor((s - whole) * 1e6));
  if (micro > 999999) micro = 999999;
  const double sec = static_cast<double>(epoch) + whole;
  if (sec > 4294967295.0) throw Error("event time overflows 32-bit seconds");
  return {static_cast<std::uint32_t>(sec), micro};
}

std::vector<Unified2Event> emit_attack_alerts(const WireAction& action, const SensorPlacement& sensors,
                                              double p_detect, Rng& rng, const AlertClock& clock) {
  const auto sensor = sensors.sensor_index(action.link.id());
  if (!sensor) return {};
  if (!(rng.uniform() < p_detect)) return {};
  Unified2Event e;
  e.sensor_id = static_cast<std::uint32_t>(*sensor + 1);
  std::tie(e.event_second, e.event_microsecond) = clock.stamp(action.time);
  e.signature_id = signature_id(action.signature_key);
  e.generator_id = 1;
  e.signature_revision = 1;
  e.classification_id = action.classification;
  e.priority_id = priority_band(action.exploitability);
  e.ip_source = address_or_zero(action.src_address);
  e.ip_destination = address_or_zero(action.dst_address);
  e.sport_itype = static_cast<std::uint16_t>(49152 + rng.below(16384));
  e.dport_icode = action.port;
  e.protocol = protocol_number(action.protocol);
  return {e};
}

std::vector<Unified2Event> emit_background(double rate, double start, double duration, Rng& rng,
                                           const SensorPlacement& sensors, const TopologyGraph& topology,
                                           const AlertClock& clock) {
  if (rate < 0.0) throw Error("emit_background: negative rate");
  std::vector<Unified2Event> out;
  if (rate == 0.0 || duration <= 0.0 || sensors.links.empty()) return out;
  const auto count = rng.poisson(rate * duration * static_cast<double>(sensors.links.size()));
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto s = rng.below(sensors.links.size());
    const auto& link = sensors.links[s];
    const bool forward = rng.below(2) == 0;
    const auto& src = forward ? link.a : link.b;
    const auto& dst = forward ? link.b : link.a;
    Unified2Event e;
    e.sensor_id = static_cast<std::uint32_t>(s + 1);
    std::tie(e.event_second, e.event_microsecond) = clock.stamp(start + rng.uniform() * duration);
    e.signature_id = kBenignBase + static_cast<std::uint32_t>(rng.below(kBenignCount));
    e.generator_id = 1;
    e.signature_revision = 1 + static_cast<std::uint32_t>((e.signature_id - kBenignBase) % 3);
    e.classification_id = 6 + static_cast<std::uint32_t>((e.signature_id - kBenignBase) % 3);
    e.priority_id = 2 + static_cast<std::uint32_t>(rng.below(2));
    e.ip_source = address_or_zero(address_of(topology, src));
    e.ip_destination = address_or_zero(address_of(topology, dst));
    e.sport_itype = static_cast<std::uint16_t>(49152 + rng.below(16384));
    const auto& services = topology.node(dst).services;
    if (!services.empty()) {
      const auto& svc = services[rng.below(services.size())];
      e.dport_icode = svc.port;
      e.protocol = protocol_number(svc.protocol);
    } else {
      e.dport_icode = 0;
      e.protocol = 1;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace gridgame
