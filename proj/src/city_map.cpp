#include "mobcity/city_map.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace mobcity {

namespace {

constexpr const char* kCategoryNames[] = {
    "residential-room", "office", "canteen",       "restaurant",
    "convenience-store", "cafe",  "park",          "hospital",
    "store",            "stadium", "entertainment", "sports",
};
constexpr int kCategoryCount = 12;

constexpr const char* kWeatherNames[] = {"sunny", "cloudy", "rainy"};

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("map: " + msg); }

}  // namespace

const char* venue_category_name(VenueCategory c) {
  return kCategoryNames[static_cast<int>(c)];
}

VenueCategory parse_venue_category(const std::string& name) {
  for (int i = 0; i < kCategoryCount; ++i) {
    if (name == kCategoryNames[i]) return static_cast<VenueCategory>(i);
  }
  fail("unknown venue category '" + name + "'");
}

const char* weather_name(Weather w) { return kWeatherNames[static_cast<int>(w)]; }

Weather parse_weather(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (name == kWeatherNames[i]) return static_cast<Weather>(i);
  }
  throw std::runtime_error("unknown weather '" + name + "'");
}

bool venue_open(const Venue& v, double t_arrive_min_of_day, double duration_min) {
  return t_arrive_min_of_day >= v.open_start &&
         t_arrive_min_of_day + duration_min <= v.open_close;
}

const Venue& CityMap::venue(const std::string& id) const {
  auto it = venues.find(id);
  if (it == venues.end()) fail("unknown venue '" + id + "'");
  return it->second;
}

std::vector<std::string> CityMap::venues_of_category(VenueCategory c) const {
  std::vector<std::string> out;
  for (const auto& [id, v] : venues) {
    if (v.category == c) out.push_back(id);
  }
  return out;
}

const Venue* CityMap::venue_at_tile(int tile_index) const {
  for (const auto& [id, v] : venues) {
    if (std::find(v.tiles.begin(), v.tiles.end(), tile_index) != v.tiles.end()) {
      return &v;
    }
  }
  return nullptr;
}

namespace {

std::vector<std::string> read_grid(std::istream& in, int width, int height,
                                   const std::string& layer) {
  std::vector<std::string> rows;
  std::string line;
  while (static_cast<int>(rows.size()) < height && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;  // rows may legitimately start with '#'
    if (static_cast<int>(line.size()) != width) {
      fail("layer '" + layer + "' row has width " + std::to_string(line.size()) +
           ", expected " + std::to_string(width));
    }
    rows.push_back(line);
  }
  if (static_cast<int>(rows.size()) != height) {
    fail("layer '" + layer + "' truncated");
  }
  return rows;
}

std::vector<int> parse_tile_list(const std::string& text, const CityMap& map) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    auto comma = item.find(',');
    if (comma == std::string::npos) fail("bad tile coordinate '" + item + "'");
    int x = std::stoi(item.substr(0, comma));
    int y = std::stoi(item.substr(comma + 1));
    if (!map.in_bounds(x, y)) fail("tile coordinate out of bounds '" + item + "'");
    out.push_back(map.index(x, y));
  }
  return out;
}

/// Component labels over walkable tiles via BFS, -1 for non-walkable.
std::vector<int> walkable_components(const CityMap& map) {
  std::vector<int> comp(map.tiles.size(), -1);
  int next = 0;
  for (int start = 0; start < static_cast<int>(map.tiles.size()); ++start) {
    if (!map.tiles[start].walkable || comp[start] >= 0) continue;
    comp[start] = next;
    std::queue<int> q;
    q.push(start);
    while (!q.empty()) {
      int cur = q.front();
      q.pop();
      auto [x, y] = map.coords(cur);
      const int dx[] = {1, -1, 0, 0};
      const int dy[] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        int nx = x + dx[d], ny = y + dy[d];
        if (!map.in_bounds(nx, ny)) continue;
        int ni = map.index(nx, ny);
        if (map.tiles[ni].walkable && comp[ni] < 0) {
          comp[ni] = next;
          q.push(ni);
        }
      }
    }
    ++next;
  }
  return comp;
}

void validate(CityMap& map) {
  if (map.venues.empty()) fail("no venues declared");
  for (const auto& [id, v] : map.venues) {
    if (v.tiles.empty()) fail("venue '" + id + "' has no tiles");
    if (v.open_start < 0 || v.open_start >= v.open_close || v.open_close > 1440) {
      fail("venue '" + id + "' has invalid opening window");
    }
    for (int t : v.tiles) {
      if (map.tiles[t].building != v.building) {
        fail("venue '" + id + "' has a tile outside its building footprint");
      }
      if (!map.tiles[t].walkable) {
        fail("venue '" + id + "' has a non-walkable tile");
      }
    }
    map.buildings[v.building].push_back(id);
  }
  for (auto& [b, ids] : map.buildings) std::sort(ids.begin(), ids.end());

  auto comp = walkable_components(map);

  // All walkable tiles of one building must form a single component.
  std::map<char, int> building_comp;
  for (size_t i = 0; i < map.tiles.size(); ++i) {
    const Tile& t = map.tiles[i];
    if (t.building == '.' || !t.walkable) continue;
    auto [it, fresh] = building_comp.emplace(t.building, comp[i]);
    if (!fresh && it->second != comp[i]) {
      fail(std::string("building '") + t.building + "' interior is disconnected");
    }
  }

  // Every venue must be reachable on foot from every other venue.
  int venue_comp = -1;
  for (const auto& [id, v] : map.venues) {
    int c = comp[v.tiles.front()];
    if (venue_comp < 0) venue_comp = c;
    if (c != venue_comp) fail("venue '" + id + "' is unreachable from other venues");
  }

  // Stations must be reachable on foot.
  for (size_t i = 0; i < map.tiles.size(); ++i) {
    const Tile& t = map.tiles[i];
    if (!(t.pmv_station || t.bus_station)) continue;
    if (!t.walkable || comp[i] != venue_comp) {
      auto [x, y] = map.coords(static_cast<int>(i));
      fail("station at " + std::to_string(x) + "," + std::to_string(y) +
           " is not reachable on foot");
    }
  }

  for (const auto& route : map.bus_routes) {
    if (route.size() < 2) fail("bus route needs at least two stations");
    for (int t : route) {
      if (!map.tiles[t].bus_station) fail("bus route references a non-station tile");
    }
  }
}

}  // namespace

CityMap load_map(std::istream& in) {
  CityMap map;
  std::string line;
  std::vector<std::pair<std::string, std::vector<std::string>>> grids;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw == "map") {
      ss >> map.width >> map.height;
      if (map.width <= 0 || map.height <= 0) fail("invalid grid dimensions");
      map.tiles.assign(static_cast<size_t>(map.width) * map.height, Tile{});
    } else if (kw == "layer") {
      if (map.tiles.empty()) fail("'layer' before 'map' header");
      std::string name;
      ss >> name;
      grids.emplace_back(name, read_grid(in, map.width, map.height, name));
    } else if (kw == "venue") {
      if (map.tiles.empty()) fail("'venue' before 'map' header");
      Venue v;
      std::string cat, building, tiles;
      ss >> v.id >> cat >> building >> v.open_start >> v.open_close >> tiles;
      if (ss.fail() || building.size() != 1) fail("malformed venue line: " + line);
      v.category = parse_venue_category(cat);
      v.building = building[0];
      v.tiles = parse_tile_list(tiles, map);
      if (!map.venues.emplace(v.id, v).second) fail("duplicate venue id '" + v.id + "'");
    } else if (kw == "busroute") {
      std::vector<int> route;
      std::string tok;
      while (ss >> tok) {
        auto comma = tok.find(',');
        if (comma == std::string::npos) fail("bad bus station coordinate '" + tok + "'");
        int x = std::stoi(tok.substr(0, comma));
        int y = std::stoi(tok.substr(comma + 1));
        if (!map.in_bounds(x, y)) fail("bus station out of bounds '" + tok + "'");
        route.push_back(map.index(x, y));
      }
      map.bus_routes.push_back(std::move(route));
    } else {
      fail("unknown directive '" + kw + "'");
    }
  }
  if (map.tiles.empty()) fail("missing 'map' header");

  for (const auto& [name, rows] : grids) {
    for (int y = 0; y < map.height; ++y) {
      for (int x = 0; x < map.width; ++x) {
        char c = rows[y][x];
        Tile& t = map.tiles[map.index(x, y)];
        if (name == "building") {
          if (c != '.' && !std::isalnum(static_cast<unsigned char>(c))) {
            fail("invalid building index character");
          }
          t.building = c;
        } else {
          bool set = (c == '#');
          if (!set && c != '.') fail("layer '" + name + "' uses characters other than '#'/'.'");
          if (name == "walkable") t.walkable = set;
          else if (name == "highway") t.highway = set;
          else if (name == "zebra") t.zebra = set;
          else if (name == "pmv") t.pmv_station = set;
          else if (name == "bus") t.bus_station = set;
          else fail("unknown layer '" + name + "'");
        }
      }
    }
  }

  validate(map);
  return map;
}

CityMap load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  return load_map(in);
}

std::pair<Weather, double> environment_at(const EnvironmentState& env, double t_min_of_day) {
  if (env.schedule.empty()) {
    throw std::invalid_argument("environment_at: empty schedule");
  }
  const EnvironmentEntry* best = &env.schedule.front();
  for (const auto& e : env.schedule) {
    if (e.start_min <= t_min_of_day) best = &e;
  }
  return {best->weather, best->temperature_c};
}

}  // namespace mobcity
