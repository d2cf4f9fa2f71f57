#include "cosm/ecampus/ecampus.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cosm/error.hpp"

namespace cosm::ecampus {

BatteryBand band_for(double battery, const Thresholds& t) {
  if (battery >= t.high) return BatteryBand::high;
  if (battery < t.low) return BatteryBand::low;
  return BatteryBand::mid;
}

std::vector<Feature> filter_features(const std::vector<Feature>& features, BatteryBand band) {
  if (band != BatteryBand::low) return features;
  std::vector<Feature> out;
  for (const auto& f : features)
    if (f.score >= kLowBatteryMinScore && f.score <= 1.0) out.push_back(f);
  return out;
}

std::vector<Feature> parse_feature_catalog(std::string_view text) {
  std::vector<Feature> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    Feature f;
    if (!(row >> f.id)) continue;
    std::string extra;
    if (!(row >> f.name >> f.x >> f.y >> f.score) || (row >> extra))
      throw Error(ErrorCode::parse_error, "feature catalog line " + std::to_string(lineno) + ": expected id name x y score");
    if (f.score < 0 || f.score > 1)
      throw Error(ErrorCode::parse_error, "feature catalog line " + std::to_string(lineno) + ": score outside [0, 1]");
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Feature> load_feature_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_feature_catalog(ss.str());
}

std::string_view to_string(LocationSource s) {
  switch (s) {
    case LocationSource::gps: return "gps";
    case LocationSource::wifi: return "wifi";
    case LocationSource::cell: return "cell";
  }
  return "gps";
}

std::optional<LocationSource> parse_location_source(std::string_view name) {
  if (name == "gps") return LocationSource::gps;
  if (name == "wifi") return LocationSource::wifi;
  if (name == "cell") return LocationSource::cell;
  return std::nullopt;
}

SourceProfile profile_of(LocationSource s) {
  switch (s) {
    case LocationSource::gps: return {5, 10};
    case LocationSource::wifi: return {25, 4};
    case LocationSource::cell: return {150, 1};
  }
  return {5, 10};
}

std::optional<LocationFix> location_fix(std::optional<LocationSource> active, const DeviceState& device) {
  if (!active) throw Error(ErrorCode::no_active_location_layer, "no location layer is active");
  if (device.sleeping) return std::nullopt;
  const auto p = profile_of(*active);
  return LocationFix{device.x, device.y, p.accuracy, *active, p.energy_cost_units};
}

std::optional<LocationSource> active_location_source(const kernel::CocaComponent& location_manager) {
  std::optional<LocationSource> found;
  int n = 0;
  for (const auto& l : location_manager.layers) {
    if (!l.active) continue;
    if (auto s = parse_location_source(l.id)) {
      found = s;
      ++n;
    }
  }
  return n == 1 ? found : std::nullopt;
}

double proactive_update_interval(double speed, const SpeedPolicy& p) {
  return p.base_interval_ms * std::max(1.0, std::floor(speed / p.speed_threshold));
}

std::string fixture_adl(const Thresholds& t) {
  const std::string hi = to_literal(t.high);
  const std::string lo = to_literal(t.low);
  const std::string raw = R"(<coca-adl version="1">
  <components>
    <component id="MapView" kind="base">
      <protocol>
        <selector name="locationFix"/>
        <selector name="updateInterval" required="false"/>
      </protocol>
      <static>
        <selector name="render"/>
        <selector name="showFeatures"/>
      </static>
    </component>
    <component id="LocationManager" kind="context-oriented">
      <static>
        <selector name="BatteryLevelWillChange"/>
        <selector name="SpeedWillChange"/>
        <selector name="SpeedDidChange"/>
        <selector name="SleepModeWillChange"/>
        <selector name="SleepModeDidChange"/>
        <selector name="suspendUpdates"/>
        <selector name="resumeUpdates"/>
        <selector name="updateInterval"/>
      </static>
      <layer id="gps" policy="locationPolicy" exclusive="location">
        <handles selector="locationFix"/>
        <handles selector="BatteryLevelDidChange"/>
      </layer>
      <layer id="wifi" policy="locationPolicy" exclusive="location">
        <handles selector="locationFix"/>
        <handles selector="BatteryLevelDidChange"/>
      </layer>
      <layer id="cell" policy="locationPolicy" exclusive="location">
        <handles selector="locationFix"/>
        <handles selector="BatteryLevelDidChange"/>
      </layer>
      <observes entity="BatteryLevel"/>
      <observes entity="Speed"/>
      <observes entity="SleepMode"/>
    </component>
    <component id="FeatureFilter" kind="context-oriented">
      <protocol>
        <selector name="locationFix"/>
      </protocol>
      <static>
        <selector name="BatteryLevelWillChange"/>
        <selector name="BatteryLevelDidChange"/>
      </static>
      <layer id="full" policy="filterPolicy" exclusive="detail">
        <handles selector="filterFeatures"/>
      </layer>
      <layer id="reduced" policy="filterPolicy" exclusive="detail">
        <handles selector="filterFeatures"/>
      </layer>
      <observes entity="BatteryLevel"/>
    </component>
  </components>
  <connectors>
    <connector id="mapLocation" from="MapView" to="LocationManager" type="delegate"/>
    <connector id="filterLocation" from="FeatureFilter" to="LocationManager" type="delegate"/>
    <connector id="mapFeatures" from="MapView" to="FeatureFilter" type="message"/>
  </connectors>
  <configuration>
    <activate component="LocationManager" layer="gps"/>
    <activate component="FeatureFilter" layer="full"/>
    <property name="maxComponents" value="8"/>
    <property name="batteryHigh" value="HI"/>
    <property name="batteryLow" value="LO"/>
    <property name="speedThreshold" value="10"/>
    <property name="baseInterval" value="1000"/>
  </configuration>
  <policies>
    <policy id="locationPolicy" suit="location" style="exclusive:location">
      <internal name="mode" type="string" initial="awake"/>
      <external name="battery" entity="BatteryLevel"/>
      <external name="sleeping" entity="SleepMode"/>
      <rule trigger="BatteryLevelDidChange">
        <condition>battery &gt;= HI</condition>
        <action>
          <activate component="LocationManager" layer="gps"/>
        </action>
        <else>
          <evaluate-policy id="locationLadder"/>
        </else>
      </rule>
      <rule trigger="SleepModeDidChange">
        <condition>sleeping == true and mode == "awake"</condition>
        <action>
          <set-internal name="mode" value="asleep"/>
          <invoke component="LocationManager" selector="suspendUpdates"/>
        </action>
      </rule>
      <rule trigger="SleepModeDidChange">
        <condition>sleeping == false and mode == "asleep"</condition>
        <action>
          <set-internal name="mode" value="awake"/>
          <invoke component="LocationManager" selector="resumeUpdates"/>
        </action>
      </rule>
      <goal property="component-count" op="&lt;=" value="8"/>
      <goal property="memory-units" op="&lt;=" value="64"/>
    </policy>
    <policy id="locationLadder" suit="location" style="exclusive:location">
      <external name="battery" entity="BatteryLevel"/>
      <rule>
        <condition>battery &gt;= LO</condition>
        <action>
          <activate component="LocationManager" layer="wifi"/>
        </action>
        <else>
          <activate component="LocationManager" layer="cell"/>
        </else>
      </rule>
    </policy>
    <policy id="filterPolicy" suit="features" style="exclusive:detail">
      <external name="battery" entity="BatteryLevel"/>
      <rule trigger="BatteryLevelDidChange">
        <condition>battery &lt; LO</condition>
        <action>
          <activate component="FeatureFilter" layer="reduced"/>
        </action>
        <else>
          <activate component="FeatureFilter" layer="full"/>
        </else>
      </rule>
    </policy>
  </policies>
</coca-adl>
)";
  std::string xml;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.compare(i, 2, "HI") == 0) {
      xml += hi;
      ++i;
    } else if (raw.compare(i, 2, "LO") == 0) {
      xml += lo;
      ++i;
    } else {
      xml += raw[i];
    }
  }
  return adl::serialize_adl(adl::parse_adl(xml));
}

namespace {

using kernel::LocalState;
using kernel::Message;

double number_or(const LocalState& s, std::string_view key, double fallback) {
  auto it = s.find(key);
  return it != s.end() && std::holds_alternative<double>(it->second) ? std::get<double>(it->second) : fallback;
}

double number_property(const adl::Document& doc, std::string_view name, double fallback) {
  const Value* v = doc.configuration.property(name);
  return v && std::holds_alternative<double>(*v) ? std::get<double>(*v) : fallback;
}

double new_value(const Message& m) {
  return m.arguments.size() >= 2 && std::holds_alternative<double>(m.arguments[1]) ? std::get<double>(m.arguments[1])
                                                                                   : 0.0;
}

void set(kernel::CocaComponent& c, std::string_view selector, kernel::HandlerFn fn) {
  if (auto it = c.static_handlers.find(selector); it != c.static_handlers.end()) it->second.fn = fn;
  for (auto& l : c.layers)
    if (auto it = l.handlers.find(selector); it != l.handlers.end()) it->second.fn = fn;
}

void set_in_layer(kernel::CocaComponent& c, std::string_view layer, std::string_view selector, kernel::HandlerFn fn) {
  if (auto* l = c.layer(layer))
    if (auto it = l->handlers.find(selector); it != l->handlers.end()) it->second.fn = std::move(fn);
}

kernel::CocaComponent location_manager(const adl::ComponentDecl& decl, SpeedPolicy speed) {
  auto c = kernel::make_declared_component(decl);
  c.local_state = {{"energy", 0.0}, {"fixes", 0.0}, {"suspended", false}, {"interval", speed.base_interval_ms}};
  for (auto source : {LocationSource::gps, LocationSource::wifi, LocationSource::cell}) {
    set_in_layer(c, to_string(source), "locationFix", [source](LocalState& s, const Message&) -> Value {
      if (std::get<bool>(s["suspended"])) return false;
      s["energy"] = number_or(s, "energy", 0) + profile_of(source).energy_cost_units;
      s["fixes"] = number_or(s, "fixes", 0) + 1;
      return std::string(to_string(source));
    });
    set_in_layer(c, to_string(source), "BatteryLevelDidChange", [source](LocalState& s, const Message& m) -> Value {
      s["battery"] = new_value(m);
      return std::string(to_string(source));
    });
  }
  set(c, "BatteryLevelWillChange", [](LocalState& s, const Message& m) -> Value {
    s["pendingBattery"] = new_value(m);
    return true;
  });
  set(c, "SpeedWillChange", [speed](LocalState& s, const Message& m) -> Value {
    s["interval"] = proactive_update_interval(new_value(m), speed);
    return s["interval"];
  });
  set(c, "SpeedDidChange", [](LocalState& s, const Message&) -> Value { return s["interval"]; });
  set(c, "updateInterval", [](LocalState& s, const Message&) -> Value { return s["interval"]; });
  set(c, "SleepModeWillChange", [](LocalState&, const Message&) -> Value { return true; });
  set(c, "SleepModeDidChange", [](LocalState&, const Message&) -> Value { return true; });
  set(c, "suspendUpdates", [](LocalState& s, const Message&) -> Value {
    s["suspended"] = true;
    return true;
  });
  set(c, "resumeUpdates", [](LocalState& s, const Message&) -> Value {
    s["suspended"] = false;
    return true;
  });
  return c;
}

kernel::CocaComponent feature_filter(const adl::ComponentDecl& decl) {
  auto c = kernel::make_declared_component(decl);
  set_in_layer(c, "full", "filterFeatures", [](LocalState&, const Message&) -> Value { return 0.0; });
  set_in_layer(c, "reduced", "filterFeatures",
               [](LocalState&, const Message&) -> Value { return kLowBatteryMinScore; });
  set(c, "BatteryLevelWillChange", [](LocalState& s, const Message& m) -> Value {
    s["pendingBattery"] = new_value(m);
    return true;
  });
  set(c, "BatteryLevelDidChange", [](LocalState& s, const Message& m) -> Value {
    s["battery"] = new_value(m);
    return true;
  });
  return c;
}

kernel::CocaComponent wifi_locator() {
  kernel::CocaComponent c;
  c.id = "WifiLocator";
  c.kind = adl::ComponentKind::context_oriented;
  c.local_state = {{"energy", 0.0}};
  c.static_handlers.emplace("locationFix", kernel::Handler{[](LocalState& s, const Message&) -> Value {
                              s["energy"] = number_or(s, "energy", 0) + profile_of(LocationSource::wifi).energy_cost_units;
                              return std::string("wifi");
                            }});
  return c;
}

kernel::CocaComponent offline_maps() {
  kernel::CocaComponent c;
  c.id = "OfflineMaps";
  c.kind = adl::ComponentKind::context_oriented;
  c.observes = {"Bandwidth"};
  c.static_handlers.emplace("render", kernel::Handler{[](LocalState&, const Message&) -> Value {
                              return std::string("offline");
                            }});
  c.static_handlers.emplace("BandwidthWillChange",
                            kernel::Handler{[](LocalState&, const Message&) -> Value { return true; }});
  c.static_handlers.emplace("BandwidthDidChange", kernel::Handler{[](LocalState& s, const Message& m) -> Value {
                              s["bandwidth"] = new_value(m);
                              return true;
                            }});
  return c;
}

}  // namespace

kernel::FactoryRegistry fixture_factories(const adl::Document& doc) {
  kernel::FactoryRegistry reg;
  const SpeedPolicy speed{number_property(doc, "baseInterval", 1000), number_property(doc, "speedThreshold", 10)};
  for (const auto& decl : doc.components) {
    if (decl.id == "LocationManager")
      reg.register_factory(decl.id, [decl, speed] { return location_manager(decl, speed); });
    else if (decl.id == "FeatureFilter")
      reg.register_factory(decl.id, [decl] { return feature_filter(decl); });
    else if (decl.kind == adl::ComponentKind::base)
      reg.register_factory(decl.id, [decl] { return kernel::make_declared_component(decl); });
  }
  if (!reg.contains("WifiLocator")) reg.register_factory("WifiLocator", wifi_locator);
  if (!reg.contains("OfflineMaps")) reg.register_factory("OfflineMaps", offline_maps);
  return reg;
}

adaptation::EntitySeed fixture_entities(const adl::Document& doc) {
  adaptation::EntitySeed seed{
      {"BatteryLevel", 100.0}, {"Speed", 0.0}, {"SleepMode", false}, {"Bandwidth", 100.0}};
  std::set<std::string> known{"BatteryLevel", "Speed", "SleepMode", "Bandwidth"};
  auto mention = [&](const std::string& e) {
    if (known.insert(e).second) seed.emplace_back(e, 0.0);
  };
  for (const auto& c : doc.components)
    for (const auto& e : c.observes) mention(e);
  for (const auto& p : doc.policies)
    for (const auto& x : p.externals) mention(x.entity);
  return seed;
}

Fixture fixture_from(adl::Document doc) {
  auto factories = fixture_factories(doc);
  auto entities = fixture_entities(doc);
  return Fixture{std::move(doc), std::move(factories), std::move(entities)};
}

Fixture build_fixture(const Thresholds& t) { return fixture_from(adl::parse_adl(fixture_adl(t))); }

Thresholds thresholds_of(const adl::Document& doc) {
  return {number_property(doc, "batteryHigh", Thresholds{}.high), number_property(doc, "batteryLow", Thresholds{}.low)};
}

namespace {

void rewrite(policy::BoolExpr& e, const std::set<std::string>& vars, double old_hi, double old_lo, const Thresholds& t) {
  if (e.kind == policy::BoolExpr::Kind::compare) {
    if (!vars.contains(e.var) || !std::holds_alternative<double>(e.literal)) return;
    const double v = std::get<double>(e.literal);
    if (v == old_hi) e.literal = t.high;
    else if (v == old_lo) e.literal = t.low;
    return;
  }
  for (auto& op : e.operands) rewrite(op, vars, old_hi, old_lo, t);
}

}  // namespace

void apply_thresholds(adl::Document& doc, const Thresholds& t) {
  if (!(t.high > t.low)) throw Error(ErrorCode::parse_error, "battery thresholds need high > low");
  const Thresholds old = thresholds_of(doc);
  for (auto& p : doc.policies) {
    std::set<std::string> vars;
    for (const auto& x : p.externals)
      if (x.entity == "BatteryLevel") vars.insert(x.name);
    for (auto& r : p.rules) rewrite(r.condition, vars, old.high, old.low, t);
  }
  doc.configuration.set_property("batteryHigh", t.high);
  doc.configuration.set_property("batteryLow", t.low);
}

}  // namespace cosm::ecampus
