#include <doctest.h>

#include <sstream>

#include "coinclab/errors.hpp"
#include "coinclab/event_io.hpp"
#include "coinclab/spdc_sim.hpp"

using namespace coinclab;

namespace {

DetectedEvent event(std::uint64_t id, Stripe stripe, std::uint16_t x, std::uint16_t y, double toa,
                    std::optional<OriginTag> origin = std::nullopt, std::optional<std::uint64_t> pair = std::nullopt) {
  DetectedEvent e;
  e.event_id = id;
  e.stripe = stripe;
  e.x_pix = x;
  e.y_pix = y;
  e.toa = toa;
  e.origin = origin;
  e.pair_id = pair;
  return e;
}

EventFile parse(const std::string& text) {
  std::istringstream in(text);
  return read_events(in, DetectorConfig{});
}

}  // namespace

TEST_CASE("events file: exact format") {
  const std::vector<DetectedEvent> events = {
      event(0, Stripe::Herald, 128, 61, 1.5625, OriginTag::SourcePair, 0),
      event(3, Stripe::Signal, 7, 175, 12345.0, OriginTag::DarkCount),
      event(6, Stripe::Herald, 255, 79, 20.3125, OriginTag::Thermal),
  };
  std::ostringstream out;
  write_events(out, events, 0);
  CHECK(out.str() ==
        "event_id,stripe,x_pix,y_pix,toa_ns,tot,origin,pair_id\n"
        "0,H,128,61,1.5625,0,P,0\n"
        "3,S,7,175,12345.0000,0,D,\n"
        "6,H,255,79,20.3125,0,T,\n");
}

TEST_CASE("events file: untagged events leave the truth columns empty") {
  const std::vector<DetectedEvent> events = {event(0, Stripe::Herald, 128, 61, 1.5625),
                                             event(1, Stripe::Signal, 7, 175, 3.125)};
  std::ostringstream out;
  write_events(out, events, 0);
  CHECK(out.str() ==
        "event_id,stripe,x_pix,y_pix,toa_ns,tot,origin,pair_id\n0,H,128,61,1.5625,0,,\n1,S,7,175,3.1250,0,,\n");
  const auto f = parse(out.str());
  CHECK_FALSE(f.has_truth);
  CHECK(f.events.size() == 2);

  const std::vector<DetectedEvent> mixed = {event(0, Stripe::Herald, 1, 61, 1.0, OriginTag::Thermal),
                                            event(1, Stripe::Signal, 1, 175, 2.0)};
  std::ostringstream sink;
  CHECK_THROWS_AS(write_events(sink, mixed, 0), DomainError);
}

TEST_CASE("events file: round trip recomputes wavelengths and sorts") {
  const DetectorConfig d;
  std::vector<DetectedEvent> events = {
      event(9, Stripe::Signal, 40, 180, 50.0, OriginTag::Thermal),
      event(4, Stripe::Herald, 100, 70, 3.125, OriginTag::SourcePair, 1),
      event(5, Stripe::Signal, 101, 171, 3.125, OriginTag::SourcePair, 1),
  };
  std::ostringstream out;
  write_events(out, events, 0);
  const auto f = parse(out.str());
  CHECK(f.has_truth);
  REQUIRE(f.events.size() == 3);
  CHECK(f.events[0].event_id == 4);
  CHECK(f.events[1].event_id == 5);
  CHECK(f.events[2].event_id == 9);
  CHECK(f.events[0].measured_wavelength == pixel_to_wavelength(d, Stripe::Herald, 100));
  CHECK(f.events[1].pair_id == 1u);
  CHECK(f.events[2].origin == OriginTag::Thermal);
  CHECK_FALSE(f.events[2].pair_id.has_value());
}

TEST_CASE("events file: optional columns and column order") {
  const auto f = parse("toa_ns,event_id,stripe,y_pix,x_pix\n2.0,1,S,170,5\n1.0,0,H,60,3\n");
  CHECK_FALSE(f.has_truth);
  REQUIRE(f.events.size() == 2);
  CHECK(f.events[0].event_id == 0);
  CHECK(f.events[0].x_pix == 3);
  CHECK_FALSE(f.events[0].origin.has_value());
}

TEST_CASE("events file: errors name line and column") {
  CHECK_THROWS_WITH_AS(parse(""), "no events", IoError);
  CHECK_THROWS_WITH_AS(parse(std::string(kEventsHeader) + "\n"), "no events", IoError);

  const auto schema_error = [](const std::string& text) -> std::pair<std::size_t, std::string> {
    try {
      parse(text);
    } catch (const SchemaError& e) {
      return {e.line(), e.column()};
    }
    return {0, ""};
  };
  const std::string h = std::string(kEventsHeader) + "\n";
  CHECK(schema_error("event_id,stripe,x_pix,toa_ns\n1,H,2,3\n") == std::pair<std::size_t, std::string>{1, "y_pix"});
  CHECK(schema_error(h + "0,H,1,61,1.0,0,T,\n1,X,1,61,1.0,0,T,\n") == std::pair<std::size_t, std::string>{3, "stripe"});
  CHECK(schema_error(h + "0,H,999,61,1.0,0,T,\n") == std::pair<std::size_t, std::string>{2, "x_pix"});
  CHECK(schema_error(h + "0,H,1,61,soon,0,T,\n") == std::pair<std::size_t, std::string>{2, "toa_ns"});
  CHECK(schema_error(h + "0,H,1,61,1.0,0,Q,\n") == std::pair<std::size_t, std::string>{2, "origin"});
  CHECK(schema_error(h + "0,H,1,61,1.0,0,P,\n") == std::pair<std::size_t, std::string>{2, "pair_id"});
  CHECK(schema_error(h + "0,H,1,61,1.0,0,T,4\n") == std::pair<std::size_t, std::string>{2, "pair_id"});
  CHECK(schema_error(h + "-1,H,1,61,1.0,0,T,\n") == std::pair<std::size_t, std::string>{2, "event_id"});
  CHECK(schema_error(h + "0,H,1,61,1.0\n").first == 2);
  CHECK(schema_error(h + "0,H,1,61,1.0,0,,\n1,H,1,61,2.0,0,T,\n") == std::pair<std::size_t, std::string>{3, "origin"});
  CHECK(schema_error(h + "0,H,1,61,1.0,0,T,\n1,H,1,61,2.0,0,,\n") == std::pair<std::size_t, std::string>{3, "origin"});
  CHECK(schema_error(h + "0,H,1,61,1.0,0,,7\n") == std::pair<std::size_t, std::string>{2, "pair_id"});
  CHECK_THROWS_AS(read_events_file("/nonexistent/events.csv", DetectorConfig{}), IoError);
}

TEST_CASE("toa formatting") {
  CHECK(format_toa(1.5625) == "1.5625");
  CHECK(format_toa(3.0) == "3.0000");
  CHECK(format_toa(1234567.890625) == "1234567.8906");
  CHECK(normalize_toa(1234567.890625) == 1234567.8906);
  CHECK(normalize_toa(normalize_toa(0.1 + 0.2)) == normalize_toa(0.1 + 0.2));
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_fixed(2.0, 2) == "2.00");
}

TEST_CASE("pairs file round trip") {
  std::vector<PairRecord> pairs(2);
  pairs[0] = {4, 5, -3.125, 405.012345, PairClass::TrueCoincidence};
  pairs[1] = {8, 13, 150.0, 404.5, std::nullopt};
  std::ostringstream out;
  write_pairs(out, pairs);
  CHECK(out.str() ==
        "herald_id,signal_id,delta_t_ns,lambda_p_nm,class\n"
        "4,5,-3.1250,405.012345,TC\n"
        "8,13,150.0000,404.500000,\n");
  std::istringstream in(out.str());
  const auto back = read_pairs(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].pair_class == PairClass::TrueCoincidence);
  CHECK_FALSE(back[1].pair_class.has_value());
  CHECK(back[0].delta_t == -3.125);
}
