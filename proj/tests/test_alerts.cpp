#include <doctest.h>

#include <cmath>
#include <vector>

#include "gridgame/alerts.hpp"
#include "gridgame/error.hpp"
#include "gridgame/signature.hpp"
#include "support.hpp"

using namespace gridgame;

namespace {

Unified2Event golden_event() {
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
  return e;
}

std::vector<std::uint8_t> golden_bytes() {
  std::vector<std::uint8_t> b = {
      0x00, 0x00, 0x00, 0x69, 0x00, 0x00, 0x00, 0x54,  // type 105, length 84
      0x00, 0x00, 0x00, 0x07,                          // sensor
      0x00, 0x00, 0x00, 0x03,                          // event id
      0x65, 0x53, 0xF1, 0x00,                          // second
      0x00, 0x07, 0xA1, 0x20,                          // microsecond
      0x00, 0x12, 0xD6, 0x87,                          // signature
      0x00, 0x00, 0x00, 0x01,                          // generator
      0x00, 0x00, 0x00, 0x02,                          // revision
      0x00, 0x00, 0x00, 0x02,                          // classification
      0x00, 0x00, 0x00, 0x01,                          // priority
  };
  const std::uint8_t src[16] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff, 10, 0, 0, 1};
  const std::uint8_t dst[16] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff, 192, 168, 1, 20};
  b.insert(b.end(), src, src + 16);
  b.insert(b.end(), dst, dst + 16);
  const std::uint8_t tail[] = {0xC0, 0x00, 0x01, 0xF6, 0x06, 0x00, 0x00, 0x01,
                               0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
  b.insert(b.end(), tail, tail + sizeof tail);
  return b;
}

Unified2Event random_event(Rng& rng) {
  auto u32 = [&] { return static_cast<std::uint32_t>(rng.next()); };
  auto u16 = [&] { return static_cast<std::uint16_t>(rng.next()); };
  auto u8 = [&] { return static_cast<std::uint8_t>(rng.next()); };
  Unified2Event e;
  e.sensor_id = u32();
  e.event_id = u32();
  e.event_second = u32();
  e.event_microsecond = u32();
  e.signature_id = u32();
  e.generator_id = u32();
  e.signature_revision = u32();
  e.classification_id = u32();
  e.priority_id = u32();
  for (auto& x : e.ip_source) x = u8();
  for (auto& x : e.ip_destination) x = u8();
  e.sport_itype = u16();
  e.dport_icode = u16();
  e.protocol = u8();
  e.impact_flag = u8();
  e.impact = u8();
  e.blocked = u8();
  e.mpls_label = u32();
  e.vlan_id = u16();
  e.padding = u16();
  return e;
}

WireAction wire_on(const Link& link) {
  WireAction w;
  w.signature_key = "CVE-2017-0144";
  w.exploitability = 8.6;
  w.classification = 2;
  w.link = link;
  w.src_address = "10.0.0.1";
  w.dst_address = "10.0.0.2";
  w.protocol = "tcp";
  w.port = 445;
  w.time = 1.25;
  return w;
}

}  // namespace

TEST_SUITE("alert_stream") {
  TEST_CASE("golden record bytes") {
    const auto bytes = serialize_unified2(golden_event());
    CHECK(bytes.size() == 92);
    CHECK(bytes == golden_bytes());
    CHECK(parse_unified2_record(golden_bytes()) == golden_event());
  }

  TEST_CASE("truncated record names its offset") {
    auto bytes = golden_bytes();
    bytes.pop_back();
    try {
      parse_unified2(bytes);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.path() == "offset 0");
    }
    auto two = golden_bytes();
    const auto more = golden_bytes();
    two.insert(two.end(), more.begin(), more.begin() + 50);
    try {
      parse_unified2(two);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.path() == "offset 92");
    }
  }

  TEST_CASE("streams and foreign record types") {
    std::vector<std::uint8_t> bytes;
    Rng rng(3);
    std::vector<Unified2Event> want;
    for (int i = 0; i < 3; ++i) {
      want.push_back(random_event(rng));
      append_unified2(bytes, want.back());
    }
    auto parsed = parse_unified2(bytes);
    CHECK(parsed.events == want);
    CHECK(parsed.warnings.empty());

    append_unified2(bytes, golden_event(), 7);
    append_unified2(bytes, golden_event());
    parsed = parse_unified2(bytes);
    CHECK(parsed.events.size() == 4);
    REQUIRE(parsed.warnings.size() == 1);
    CHECK(parsed.warnings[0].find("type 7") != std::string::npos);
    CHECK(parse_unified2(std::vector<std::uint8_t>{}).events.empty());
  }

  TEST_CASE("round trips") {
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
      const auto e = random_event(rng);
      const auto bytes = serialize_unified2(e);
      REQUIRE(bytes.size() == kUnified2RecordSize);
      CHECK(parse_unified2_record(bytes) == e);
    }
  }

  TEST_CASE("addresses") {
    const auto a = ipv4_mapped("192.168.1.20");
    CHECK(a[10] == 0xff);
    CHECK(a[15] == 20);
    CHECK(format_address(a) == "192.168.1.20");
    Address v6{};
    v6[0] = 0x20;
    v6[1] = 0x01;
    v6[15] = 1;
    CHECK(format_address(v6) == "2001:0:0:0:0:0:0:1");
    for (const char* bad : {"1.2.3", "1.2.3.256", "a.b.c.d", "1.2.3.4.5", ""}) CHECK_THROWS_AS(ipv4_mapped(bad), Error);
  }

  TEST_CASE("clock") {
    const AlertClock clock;
    CHECK(clock.stamp(0.0) == std::pair<std::uint32_t, std::uint32_t>{1700000000u, 0u});
    CHECK(clock.stamp(1.5) == std::pair<std::uint32_t, std::uint32_t>{1700005400u, 0u});
    const AlertClock seconds{1000, 1.0};
    CHECK(seconds.stamp(2.25) == std::pair<std::uint32_t, std::uint32_t>{1002u, 250000u});
  }

  TEST_CASE("attack alerts follow sensor coverage") {
    const Link covered("a", "b");
    SensorPlacement sensors;
    sensors.links = {Link("x", "y"), covered};
    sensors.scores = {2.0, 1.0};
    Rng rng(1);
    const auto hit = emit_attack_alerts(wire_on(covered), sensors, 1.0, rng, {});
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].sensor_id == 2);
    CHECK(hit[0].signature_id == signature_id("CVE-2017-0144"));
    CHECK(hit[0].priority_id == 1);
    CHECK(hit[0].protocol == 6);
    CHECK(hit[0].dport_icode == 445);
    CHECK(hit[0].sport_itype >= 49152);
    CHECK(hit[0].event_second == 1700004500u);
    CHECK(format_address(hit[0].ip_source) == "10.0.0.1");
    CHECK(emit_attack_alerts(wire_on(Link("p", "q")), sensors, 1.0, rng, {}).empty());
    CHECK(emit_attack_alerts(wire_on(covered), sensors, 0.0, rng, {}).empty());

    Rng quiet(5);
    const auto before = quiet;
    emit_attack_alerts(wire_on(Link("p", "q")), sensors, 1.0, quiet, {});
    CHECK(quiet.next() == Rng(before).next());
  }

  TEST_CASE("detection frequency matches p") {
    SensorPlacement sensors;
    sensors.links = {Link("a", "b")};
    sensors.scores = {1.0};
    Rng rng(12);
    const int n = 20000;
    const double p = 0.3;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += static_cast<int>(emit_attack_alerts(wire_on(sensors.links[0]), sensors, p, rng, {}).size());
    CHECK(std::abs(hits - n * p) < 3.0 * std::sqrt(n * p * (1 - p)));
  }

  TEST_CASE("signature ids") {
    CHECK(signature_id("CVE-2017-0144") == signature_id("CVE-2017-0144"));
    CHECK(signature_id("CVE-2017-0144") != signature_id("CVE-2017-0145"));
    CHECK(signature_id("") == 2166136261u % 0x80000000u);
    for (const char* id : {"CVE-2014-0160", "cred:admin", "remote denial of service"}) {
      CHECK(signature_id(id) <= 0x7fffffffu);
      CHECK_FALSE(is_benign_signature(signature_id(id)));
    }
    CHECK(is_benign_signature(kBenignBase));
    CHECK(is_benign_signature(kBenignBase + 31));
    CHECK_FALSE(is_benign_signature(kBenignBase + 32));
  }

  TEST_CASE("background noise") {
    const auto t = test::topology_of({test::host("a", 3, 1.0), test::host("b", 3, 1.0), test::host("c", 3, 1.0)},
                                     {{"a", "b"}, {"b", "c"}}, {"a"});
    SensorPlacement sensors;
    sensors.links = t.edges;
    sensors.scores = {1.0, 1.0};
    Rng rng(4);
    CHECK(emit_background(0.0, 0.0, 10.0, rng, sensors, t, {}).empty());
    CHECK(emit_background(1.0, 0.0, 10.0, rng, {}, t, {}).empty());
    CHECK_THROWS_AS(emit_background(-1.0, 0.0, 1.0, rng, sensors, t, {}), Error);

    const double rate = 0.5;
    const double duration = 40.0;
    const int trials = 400;
    double total = 0.0;
    const AlertClock clock;
    for (int i = 0; i < trials; ++i) {
      const auto events = emit_background(rate, 10.0, duration, rng, sensors, t, clock);
      total += static_cast<double>(events.size());
      for (const auto& e : events) {
        CHECK(is_benign_signature(e.signature_id));
        CHECK(e.sensor_id >= 1);
        CHECK(e.sensor_id <= 2);
        CHECK(e.event_second >= clock.stamp(10.0).first);
        CHECK(e.event_second <= clock.stamp(10.0 + duration).first);
      }
    }
    const double mean = rate * duration * 2.0;
    CHECK(std::abs(total / trials - mean) < 3.0 * std::sqrt(mean / trials));
  }
}
