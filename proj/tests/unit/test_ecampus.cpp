#include <doctest.h>

#include "cosm/adaptation/middleware.hpp"
#include "cosm/ecampus/ecampus.hpp"
#include "cosm/error.hpp"
#include "gen.hpp"

using namespace cosm;
using namespace cosm::ecampus;

namespace {

struct Runtime {
  explicit Runtime(const Thresholds& t = {}) : fx(build_fixture(t)), mw(fx.doc, fx.factories, fx.entities) {}
  Fixture fx;
  adaptation::Middleware mw;

  std::optional<LocationSource> source() const { return active_location_source(*mw.graph().node("LocationManager")); }
  std::size_t location_layers_active() const {
    std::size_t n = 0;
    for (const auto& l : mw.graph().node("LocationManager")->layers) n += l.active ? 1 : 0;
    return n;
  }
  Value send(const std::string& target, const std::string& selector) {
    kernel::Message m{selector, {}, std::nullopt};
    return kernel::send_message(mw.app(), target, m);
  }
  double energy() const { return std::get<double>(mw.graph().node("LocationManager")->local_state.at("energy")); }
};

Feature scored(double s) { return {"f", "n", 0, 0, s}; }

}  // namespace

TEST_CASE("fixture contents") {
  const auto fx = build_fixture();
  CHECK(fx.doc.components.size() == 3);
  std::size_t layers = 0;
  for (const auto& c : fx.doc.components) layers += c.layers.size();
  CHECK(layers == 5);
  CHECK(fx.doc.component("MapView")->kind == adl::ComponentKind::base);
  CHECK(fx.doc.configuration.initial_activations ==
        std::vector<adl::Activation>{{"LocationManager", "gps"}, {"FeatureFilter", "full"}});
  std::set<std::string> entities;
  for (const auto& [e, _] : fx.entities) entities.insert(e);
  CHECK(entities == std::set<std::string>{"BatteryLevel", "Speed", "SleepMode", "Bandwidth"});
  CHECK(thresholds_of(fx.doc).high == 70);
  CHECK(thresholds_of(fx.doc).low == 30);
  for (const auto& l : fx.doc.component("LocationManager")->layers) CHECK(l.exclusive == "location");
}

TEST_CASE("battery bands") {
  const Thresholds t;
  CHECK(band_for(100, t) == BatteryBand::high);
  CHECK(band_for(70, t) == BatteryBand::high);
  CHECK(band_for(69.9, t) == BatteryBand::mid);
  CHECK(band_for(30, t) == BatteryBand::mid);
  CHECK(band_for(29.9, t) == BatteryBand::low);
  CHECK(band_for(0, t) == BatteryBand::low);
}

TEST_CASE("battery ladder walks gps, wifi, cell") {
  Runtime rt;
  CHECK(rt.source() == LocationSource::gps);
  std::vector<LocationSource> seen{*rt.source()};
  for (double b : {100.0, 50.0, 10.0}) {
    rt.mw.step("BatteryLevel", b, 0);
    CHECK(rt.location_layers_active() == 1);
    REQUIRE(rt.source());
    if (seen.back() != *rt.source()) seen.push_back(*rt.source());
  }
  CHECK(seen == std::vector<LocationSource>{LocationSource::gps, LocationSource::wifi, LocationSource::cell});
  CHECK(rt.mw.graph().node("FeatureFilter")->layer("reduced")->active);
  CHECK_FALSE(rt.mw.graph().node("FeatureFilter")->layer("full")->active);
  CHECK(rt.send("FeatureFilter", "filterFeatures") == Value{kLowBatteryMinScore});
  CHECK(rt.send("MapView", "locationFix") == Value{std::string("cell")});
}

TEST_CASE("one location layer stays active under random battery walks") {
  gen::Rng rng(3);
  for (int round = 0; round < 20; ++round) {
    Runtime rt;
    for (int i = 0; i < 40; ++i) {
      const double b = static_cast<double>(gen::below(rng, 101));
      rt.mw.step("BatteryLevel", b, i);
      REQUIRE(rt.location_layers_active() == 1);
      const auto band = band_for(b, {});
      const auto expect = band == BatteryBand::high ? LocationSource::gps
                          : band == BatteryBand::mid ? LocationSource::wifi
                                                     : LocationSource::cell;
      REQUIRE(rt.source() == expect);
    }
  }
}

TEST_CASE("low battery keeps features scored 0.7 to 1") {
  const std::vector<Feature> in{scored(0.5), scored(0.8), scored(1.0)};
  CHECK(filter_features(in, BatteryBand::low) == std::vector<Feature>{scored(0.8), scored(1.0)});
  CHECK(filter_features(in, BatteryBand::high) == in);
  CHECK(filter_features(in, BatteryBand::mid) == in);
  CHECK(filter_features({}, BatteryBand::low).empty());
  CHECK(filter_features({scored(0.7), scored(0.69)}, BatteryBand::low) == std::vector<Feature>{scored(0.7)});
}

TEST_CASE("score filter bounds over random catalogs") {
  gen::Rng rng(21);
  for (int round = 0; round < 500; ++round) {
    std::vector<Feature> in;
    for (std::size_t i = 0, n = gen::below(rng, 12); i < n; ++i) in.push_back(scored(static_cast<double>(gen::below(rng, 101)) / 100.0));
    const auto out = filter_features(in, BatteryBand::low);
    for (const auto& f : out) REQUIRE((f.score >= 0.7 && f.score <= 1.0));
    const auto kept = std::count_if(in.begin(), in.end(), [](const Feature& f) { return f.score >= 0.7; });
    REQUIRE(static_cast<std::ptrdiff_t>(out.size()) == kept);
  }
}

TEST_CASE("feature catalog") {
  const auto all = load_feature_catalog(std::string(COSM_DATA_DIR) + "/features.tsv");
  REQUIRE(all.size() == 7);
  CHECK(all[0] == Feature{"f1", "Library", 10, 20, 0.95});
  std::set<std::string> low;
  for (const auto& f : filter_features(all, BatteryBand::low)) low.insert(f.id);
  CHECK(low == std::set<std::string>{"f1", "f3", "f4", "f6"});
  for (const char* bad : {"f1 Library 1 2 1.5", "f1 Library 1 2", "f1 Library 1 2 0.5 extra", "f1 Library x 2 0.5"}) {
    try {
      parse_feature_catalog(bad);
      FAIL("accepted a bad catalog row");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse_error);
    }
  }
  CHECK(parse_feature_catalog("# nothing\n\n").empty());
}

TEST_CASE("location sources trade accuracy for energy") {
  const auto gps = profile_of(LocationSource::gps), wifi = profile_of(LocationSource::wifi),
             cell = profile_of(LocationSource::cell);
  CHECK(gps.accuracy < wifi.accuracy);
  CHECK(wifi.accuracy < cell.accuracy);
  CHECK(gps.energy_cost_units > wifi.energy_cost_units);
  CHECK(wifi.energy_cost_units > cell.energy_cost_units);

  DeviceState d;
  d.x = 3;
  d.y = 4;
  const auto fix = location_fix(LocationSource::gps, d);
  REQUIRE(fix);
  CHECK(fix->source == LocationSource::gps);
  CHECK(fix->x == 3);
  CHECK(fix->energy_cost_units == gps.energy_cost_units);
  d.sleeping = true;
  CHECK_FALSE(location_fix(LocationSource::cell, d));
  try {
    location_fix(std::nullopt, d);
    FAIL("fix without a source");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_active_location_layer);
  }
  CHECK(parse_location_source("wifi") == LocationSource::wifi);
  CHECK_FALSE(parse_location_source("lte"));
}

TEST_CASE("sleep suspends location updates") {
  Runtime rt;
  rt.send("MapView", "locationFix");
  const double awake = rt.energy();
  CHECK(awake == profile_of(LocationSource::gps).energy_cost_units);
  rt.mw.step("SleepMode", true, 1);
  for (int i = 0; i < 10; ++i) CHECK(rt.send("MapView", "locationFix") == Value{false});
  CHECK(rt.energy() == awake);
  rt.mw.step("BatteryLevel", 50.0, 2);
  rt.send("MapView", "locationFix");
  CHECK(rt.energy() == awake);
  rt.mw.step("SleepMode", false, 3);
  rt.send("MapView", "locationFix");
  CHECK(rt.energy() == awake + profile_of(LocationSource::wifi).energy_cost_units);
  CHECK(rt.mw.internals_for("locationPolicy", "LocationManager").at("mode") == Value{std::string("awake")});
}

TEST_CASE("speed stretches the update interval") {
  const SpeedPolicy p;
  CHECK(proactive_update_interval(0, p) == 1000);
  CHECK(proactive_update_interval(9.9, p) == 1000);
  CHECK(proactive_update_interval(20, p) == 2000);
  CHECK(proactive_update_interval(35, p) == 3000);

  Runtime rt;
  CHECK(rt.send("MapView", "updateInterval") == Value{1000.0});
  rt.mw.step("Speed", 20.0, 0);
  CHECK(rt.send("MapView", "updateInterval") == Value{2000.0});
  rt.mw.step("Speed", 3.0, 1);
  CHECK(rt.send("MapView", "updateInterval") == Value{1000.0});
}

TEST_CASE("thresholds can be overridden") {
  Runtime rt({80, 40});
  CHECK(thresholds_of(rt.fx.doc).high == 80);
  rt.mw.step("BatteryLevel", 75.0, 0);
  CHECK(rt.source() == LocationSource::wifi);
  rt.mw.step("BatteryLevel", 35.0, 1);
  CHECK(rt.source() == LocationSource::cell);

  auto doc = build_fixture().doc;
  apply_thresholds(doc, {60, 20});
  CHECK(adl::parse_adl(fixture_adl({60, 20})) == doc);
  try {
    apply_thresholds(doc, {20, 20});
    FAIL("accepted high <= low");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
  }
}

TEST_CASE("shipped fixture file matches the generator") {
  CHECK(adl::load_adl(std::string(COSM_DATA_DIR) + "/ecampus.xml") == build_fixture().doc);
}
