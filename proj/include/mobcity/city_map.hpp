#pragma once

#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mobcity {

enum class VenueCategory : int {
  ResidentialRoom = 0,
  Office,
  Canteen,
  Restaurant,
  ConvenienceStore,
  Cafe,
  Park,
  Hospital,
  Store,
  Stadium,
  Entertainment,
  Sports,
};

const char* venue_category_name(VenueCategory c);
VenueCategory parse_venue_category(const std::string& name);

enum class Weather : int { Sunny = 0, Cloudy, Rainy };
const char* weather_name(Weather w);
Weather parse_weather(const std::string& name);

/// One 25 m grid cell with its layer markers.
struct Tile {
  bool walkable = false;
  bool highway = false;
  bool zebra = false;
  bool pmv_station = false;
  bool bus_station = false;
  char building = '.';  ///< building index character, '.' when outside buildings
};

struct Venue {
  std::string id;
  VenueCategory category = VenueCategory::ResidentialRoom;
  char building = '.';
  std::vector<int> tiles;  ///< tile indices, first tile acts as the entrance
  int open_start = 0;      ///< minutes of day
  int open_close = 1440;
};

/// True iff the venue is open for the whole planned stay.
bool venue_open(const Venue& v, double t_arrive_min_of_day, double duration_min);

struct CityMap {
  int width = 0;
  int height = 0;
  std::vector<Tile> tiles;  ///< row-major, top row first
  std::map<char, std::vector<std::string>> buildings;  ///< building char -> venue ids
  std::map<std::string, Venue> venues;
  std::vector<std::vector<int>> bus_routes;  ///< ordered bus-station tile indices

  int index(int x, int y) const { return y * width + x; }
  const Tile& at(int x, int y) const { return tiles[index(x, y)]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  std::pair<int, int> coords(int idx) const { return {idx % width, idx / width}; }

  const Venue& venue(const std::string& id) const;
  /// Venue ids of one category, sorted ascending.
  std::vector<std::string> venues_of_category(VenueCategory c) const;
  /// Category of the venue whose footprint contains the tile, if any.
  const Venue* venue_at_tile(int tile_index) const;
};

/// Parse and validate a map document. Throws std::runtime_error on malformed
/// input, venues outside their building footprint, disconnected venues, or
/// stations unreachable on foot.
CityMap load_map(std::istream& in);
CityMap load_map_file(const std::string& path);

struct EnvironmentEntry {
  int start_min = 0;
  Weather weather = Weather::Sunny;
  double temperature_c = 15.0;
};

struct EnvironmentState {
  int day_of_week = 1;  ///< 0 = Sunday ... 6 = Saturday
  std::vector<EnvironmentEntry> schedule;  ///< start minutes strictly increasing
};

/// Weather and temperature in effect at minute t (entry with largest start <= t).
std::pair<Weather, double> environment_at(const EnvironmentState& env, double t_min_of_day);

}  // namespace mobcity
