#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cosm/adaptation/middleware.hpp"
#include "cosm/adl/document.hpp"
#include "cosm/kernel/component.hpp"

namespace cosm::ecampus {

/// Battery thresholds of the location ladder: high when battery >= high,
/// low when battery < low, mid in between.
struct Thresholds {
  double high = 70;
  double low = 30;
};

enum class BatteryBand { high, mid, low };

BatteryBand band_for(double battery, const Thresholds& t);

struct Feature {
  std::string id;
  std::string name;
  double x = 0;
  double y = 0;
  double score = 0;
  friend bool operator==(const Feature&, const Feature&) = default;
};

inline constexpr double kLowBatteryMinScore = 0.7;

/// Low battery keeps features scored in [0.7, 1]; other bands keep all.
std::vector<Feature> filter_features(const std::vector<Feature>& features, BatteryBand band);

/// Whitespace-separated `id name x y score` rows, `#` comments. Scores
/// outside [0, 1] are rejected with Error{parse_error}.
std::vector<Feature> parse_feature_catalog(std::string_view text);
std::vector<Feature> load_feature_catalog(const std::filesystem::path& path);

enum class LocationSource { gps, wifi, cell };

std::string_view to_string(LocationSource s);
std::optional<LocationSource> parse_location_source(std::string_view name);

struct SourceProfile {
  double accuracy;
  int energy_cost_units;
};

/// gps is the most accurate and most expensive, cell the reverse.
SourceProfile profile_of(LocationSource s);

struct DeviceState {
  double battery = 100;
  bool sleeping = false;
  double speed = 0;
  double x = 0;
  double y = 0;
};

struct LocationFix {
  double x = 0;
  double y = 0;
  double accuracy = 0;
  LocationSource source = LocationSource::gps;
  int energy_cost_units = 0;
};

/// A fix from the active source; nothing while sleeping. Throws
/// Error{no_active_location_layer} when no source is active.
std::optional<LocationFix> location_fix(std::optional<LocationSource> active, const DeviceState& device);

/// The active location layer of a LocationManager instance, if exactly one.
std::optional<LocationSource> active_location_source(const kernel::CocaComponent& location_manager);

struct SpeedPolicy {
  double base_interval_ms = 1000;
  double speed_threshold = 10;
};

/// base x max(1, floor(speed / threshold)).
double proactive_update_interval(double speed, const SpeedPolicy& p);

struct Fixture {
  adl::Document doc;
  kernel::FactoryRegistry factories;
  adaptation::EntitySeed entities;
};

/// The fixture's COCA-ADL text (the shipped data/ecampus.xml uses defaults).
std::string fixture_adl(const Thresholds& t = {});

/// Factories for MapView, LocationManager and FeatureFilter plus the
/// loadable-later WifiLocator and OfflineMaps; declarative fallbacks for any
/// other base component in `doc`.
kernel::FactoryRegistry fixture_factories(const adl::Document& doc);

/// BatteryLevel=100, Speed=0, SleepMode=false, Bandwidth=100, plus 0 for
/// any other entity the document mentions.
adaptation::EntitySeed fixture_entities(const adl::Document& doc);

Fixture build_fixture(const Thresholds& t = {});
Fixture fixture_from(adl::Document doc);

/// Thresholds recorded in the configuration (batteryHigh / batteryLow).
Thresholds thresholds_of(const adl::Document& doc);

/// Rewrites BatteryLevel comparisons that use the recorded thresholds and
/// updates the recorded values. Throws Error{parse_error} unless high > low.
void apply_thresholds(adl::Document& doc, const Thresholds& t);

}  // namespace cosm::ecampus
