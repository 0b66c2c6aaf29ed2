#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mobcity/city_map.hpp"

namespace mobcity {

enum class Mode : int { Walking = 0, Pmv, Bus };
const char* mode_name(Mode m);
Mode parse_mode(const std::string& name);

/// Tiles traversed per 15-second step, by mode.
inline constexpr double kModeSpeed[3] = {1.0, 2.0, 5.0};
inline constexpr double kMinutesPerStep = 0.25;

struct TransportConfig {
  double money_walking = 0.0;
  double money_pmv = 1.0;
  double money_bus = 3.0;
  double bus_board_penalty_steps = 2.0;  ///< stands in for waiting at the stop
};

/// One contiguous stretch of a route done with a single mode.
struct RouteLeg {
  Mode mode = Mode::Walking;
  std::vector<int> tiles;  ///< traversed tiles including both endpoints
  double steps = 0.0;      ///< time cost of this leg in simulation steps
};

struct RouteOption {
  Mode mode = Mode::Walking;  ///< fastest-mode class this option belongs to
  double time_steps = 0.0;
  double money_cost = 0.0;
  std::vector<RouteLeg> legs;
  bool uses_vehicle = false;  ///< true when a PMV/bus leg is actually ridden

  double time_minutes() const { return time_steps * kMinutesPerStep; }
  std::vector<int> path() const;
};

/// The three mode networks over one city map. Immutable after build; route
/// queries are pure and may run concurrently (the solution cache is locked).
class TransitGraphs {
 public:
  static TransitGraphs build(const CityMap& map, TransportConfig cfg = {});

  const CityMap& map() const { return *map_; }
  const TransportConfig& config() const { return cfg_; }

  /// Up to three route options between venue entrances, sorted by time
  /// ascending. PMV/bus options appear only when their optimal path actually
  /// rides the vehicle. Throws when the venues are mutually unreachable.
  std::vector<RouteOption> route_options(const std::string& from_venue,
                                         const std::string& to_venue) const;

  /// Minimum time over the mode's network union (walking network alone for
  /// Mode::Walking). Throws when unreachable.
  double travel_time_steps(const std::string& from_venue, const std::string& to_venue,
                           Mode mode) const;
  double travel_minutes(const std::string& from_venue, const std::string& to_venue,
                        Mode mode) const;
  /// Minimum travel minutes over all modes.
  double fastest_minutes(const std::string& from_venue, const std::string& to_venue) const;

  /// Optimal route over the mode's network union, with per-leg tile paths.
  RouteOption best_route(const std::string& from_venue, const std::string& to_venue,
                         Mode mode) const;

  int pmv_station_count() const { return pmv_station_count_; }
  int bus_station_count() const { return bus_station_count_; }
  int bus_leg_count() const { return static_cast<int>(bus_legs_.size()); }

 private:
  struct BusLeg {
    int from_tile = 0;
    int to_tile = 0;
    std::vector<int> path;  ///< highway tiles from from_tile to to_tile
    double steps = 0.0;
  };

  struct SourceSolution {
    std::vector<double> dist;      ///< per state, layer-major
    std::vector<int> parent;       ///< predecessor state, -1 at source
    std::vector<int> parent_leg;   ///< bus leg index used to enter, else -1
  };

  const SourceSolution& solve(int src_tile, Mode mode) const;
  RouteOption extract(const SourceSolution& sol, int src_tile, int dst_tile,
                      Mode mode) const;
  int entrance(const std::string& venue_id) const;

  const CityMap* map_ = nullptr;
  TransportConfig cfg_;
  int n_ = 0;
  std::vector<std::vector<int>> legs_from_;  ///< tile -> bus leg indices
  std::vector<BusLeg> bus_legs_;
  int pmv_station_count_ = 0;
  int bus_station_count_ = 0;

  mutable std::unique_ptr<std::mutex> cache_mu_ = std::make_unique<std::mutex>();
  mutable std::map<std::pair<int, int>, std::shared_ptr<SourceSolution>> cache_;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const std::vector<RouteOption>>>
      route_cache_;
};

}  // namespace mobcity
