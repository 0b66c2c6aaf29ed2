#include "mobcity/transport.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace mobcity {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr const char* kModeNames[] = {"walking", "pmv", "bus"};
}  // namespace

const char* mode_name(Mode m) { return kModeNames[static_cast<int>(m)]; }

Mode parse_mode(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (name == kModeNames[i]) return static_cast<Mode>(i);
  }
  throw std::runtime_error("unknown transport mode '" + name + "'");
}

std::vector<int> RouteOption::path() const {
  std::vector<int> out;
  for (const auto& leg : legs) {
    for (int t : leg.tiles) {
      if (out.empty() || out.back() != t) out.push_back(t);
    }
  }
  return out;
}

TransitGraphs TransitGraphs::build(const CityMap& map, TransportConfig cfg) {
  TransitGraphs g;
  g.map_ = &map;
  g.cfg_ = cfg;
  g.n_ = static_cast<int>(map.tiles.size());
  g.legs_from_.assign(g.n_, {});
  for (const Tile& t : map.tiles) {
    if (t.pmv_station) ++g.pmv_station_count_;
    if (t.bus_station) ++g.bus_station_count_;
  }

  // BFS along highway tiles between consecutive route stations, deterministic
  // via fixed neighbor order and first-visit parents.
  auto highway_path = [&](int from, int to) {
    std::vector<int> parent(g.n_, -2);
    std::queue<int> q;
    parent[from] = -1;
    q.push(from);
    while (!q.empty()) {
      int cur = q.front();
      q.pop();
      if (cur == to) break;
      auto [x, y] = map.coords(cur);
      const int dx[] = {1, -1, 0, 0};
      const int dy[] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        int nx = x + dx[d], ny = y + dy[d];
        if (!map.in_bounds(nx, ny)) continue;
        int ni = map.index(nx, ny);
        if (map.tiles[ni].highway && parent[ni] == -2) {
          parent[ni] = cur;
          q.push(ni);
        }
      }
    }
    if (parent[to] == -2) {
      throw std::runtime_error("transport: bus route segment has no highway path");
    }
    std::vector<int> path;
    for (int cur = to; cur != -1; cur = parent[cur]) path.push_back(cur);
    std::reverse(path.begin(), path.end());
    return path;
  };

  for (const auto& route : map.bus_routes) {
    for (size_t i = 0; i + 1 < route.size(); ++i) {
      BusLeg leg;
      leg.from_tile = route[i];
      leg.to_tile = route[i + 1];
      leg.path = highway_path(leg.from_tile, leg.to_tile);
      leg.steps = static_cast<double>(leg.path.size() - 1) / kModeSpeed[2];
      g.legs_from_[leg.from_tile].push_back(static_cast<int>(g.bus_legs_.size()));
      g.bus_legs_.push_back(std::move(leg));
    }
  }
  return g;
}

int TransitGraphs::entrance(const std::string& venue_id) const {
  return map_->venue(venue_id).tiles.front();
}

const TransitGraphs::SourceSolution& TransitGraphs::solve(int src_tile, Mode mode) const {
  std::pair<int, int> key{static_cast<int>(mode), src_tile};
  {
    std::lock_guard lock(*cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }

  const CityMap& map = *map_;
  auto sol = std::make_shared<SourceSolution>();
  int states = 2 * n_;  // layer 0 = on foot, layer 1 = riding
  sol->dist.assign(states, kInf);
  sol->parent.assign(states, -1);
  sol->parent_leg.assign(states, -1);

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  sol->dist[src_tile] = 0.0;
  pq.emplace(0.0, src_tile);

  auto relax = [&](int state, double d, int from, int leg) {
    if (d < sol->dist[state]) {
      sol->dist[state] = d;
      sol->parent[state] = from;
      sol->parent_leg[state] = leg;
      pq.emplace(d, state);
    }
  };

  const int dx[] = {1, -1, 0, 0};
  const int dy[] = {0, 0, 1, -1};
  while (!pq.empty()) {
    auto [d, state] = pq.top();
    pq.pop();
    if (d > sol->dist[state]) continue;
    int layer = state / n_;
    int tile = state % n_;
    auto [x, y] = map.coords(tile);
    const Tile& t = map.tiles[tile];
    if (layer == 0) {
      for (int k = 0; k < 4; ++k) {
        int nx = x + dx[k], ny = y + dy[k];
        if (!map.in_bounds(nx, ny)) continue;
        int ni = map.index(nx, ny);
        if (map.tiles[ni].walkable) relax(ni, d + 1.0, state, -1);
      }
      if (mode == Mode::Pmv && t.pmv_station) relax(n_ + tile, d, state, -1);
      if (mode == Mode::Bus && t.bus_station) {
        relax(n_ + tile, d + cfg_.bus_board_penalty_steps, state, -1);
      }
    } else if (mode == Mode::Pmv) {
      for (int k = 0; k < 4; ++k) {
        int nx = x + dx[k], ny = y + dy[k];
        if (!map.in_bounds(nx, ny)) continue;
        int ni = map.index(nx, ny);
        if (map.tiles[ni].highway) relax(n_ + ni, d + 1.0 / kModeSpeed[1], state, -1);
      }
      if (t.pmv_station) relax(tile, d, state, -1);
    } else if (mode == Mode::Bus) {
      for (int leg_id : legs_from_[tile]) {
        const BusLeg& leg = bus_legs_[leg_id];
        relax(n_ + leg.to_tile, d + leg.steps, state, leg_id);
      }
      if (t.bus_station) relax(tile, d, state, -1);
    }
  }

  std::lock_guard lock(*cache_mu_);
  auto [it, ignored] = cache_.emplace(key, sol);
  return *it->second;
}

RouteOption TransitGraphs::extract(const SourceSolution& sol, int src_tile, int dst_tile,
                                   Mode mode) const {
  if (sol.dist[dst_tile] == kInf) {
    throw std::runtime_error("transport: destination unreachable");
  }
  RouteOption opt;
  opt.mode = mode;
  opt.time_steps = sol.dist[dst_tile];

  std::vector<int> chain;  // states from source to destination
  for (int s = dst_tile; s != -1; s = sol.parent[s]) chain.push_back(s);
  std::reverse(chain.begin(), chain.end());

  auto leg_for = [&](Mode m) -> RouteLeg& {
    if (opt.legs.empty() || opt.legs.back().mode != m) {
      opt.legs.push_back(RouteLeg{m, {}, 0.0});
    }
    return opt.legs.back();
  };

  for (size_t i = 0; i + 1 < chain.size(); ++i) {
    int a = chain[i], b = chain[i + 1];
    int la = a / n_, lb = b / n_;
    int ta = a % n_, tb = b % n_;
    int leg_id = sol.parent_leg[b];
    if (leg_id >= 0) {
      const BusLeg& bus = bus_legs_[leg_id];
      RouteLeg& leg = leg_for(Mode::Bus);
      for (int t : bus.path) {
        if (leg.tiles.empty() || leg.tiles.back() != t) leg.tiles.push_back(t);
      }
      leg.steps += bus.steps;
      opt.uses_vehicle = true;
    } else if (la == 0 && lb == 0) {
      RouteLeg& leg = leg_for(Mode::Walking);
      if (leg.tiles.empty()) leg.tiles.push_back(ta);
      leg.tiles.push_back(tb);
      leg.steps += 1.0;
    } else if (la == 1 && lb == 1) {
      RouteLeg& leg = leg_for(Mode::Pmv);
      if (leg.tiles.empty()) leg.tiles.push_back(ta);
      leg.tiles.push_back(tb);
      leg.steps += 1.0 / kModeSpeed[1];
      opt.uses_vehicle = true;
    } else if (la == 0 && lb == 1 && mode == Mode::Bus) {
      // boarding wait is charged to the upcoming bus leg
      RouteLeg& leg = leg_for(Mode::Bus);
      if (leg.tiles.empty()) leg.tiles.push_back(tb);
      leg.steps += cfg_.bus_board_penalty_steps;
    }
    // PMV board/alight transitions are free and add no tiles.
  }

  if (mode == Mode::Pmv && opt.uses_vehicle) opt.money_cost = cfg_.money_pmv;
  if (mode == Mode::Bus && opt.uses_vehicle) opt.money_cost = cfg_.money_bus;
  if (mode == Mode::Walking) opt.money_cost = cfg_.money_walking;
  if (opt.legs.empty() && src_tile != dst_tile) {
    opt.legs.push_back(RouteLeg{Mode::Walking, {src_tile}, 0.0});
  }
  return opt;
}

std::vector<RouteOption> TransitGraphs::route_options(const std::string& from_venue,
                                                      const std::string& to_venue) const {
  int s = entrance(from_venue);
  int t = entrance(to_venue);
  std::vector<RouteOption> out;
  if (s == t) {
    RouteOption stay;
    stay.mode = Mode::Walking;
    out.push_back(stay);
    return out;
  }
  {
    std::lock_guard<std::mutex> lock(*cache_mu_);
    auto it = route_cache_.find({s, t});
    if (it != route_cache_.end()) return *it->second;
  }
  out.push_back(extract(solve(s, Mode::Walking), s, t, Mode::Walking));
  for (Mode m : {Mode::Pmv, Mode::Bus}) {
    RouteOption opt = extract(solve(s, m), s, t, m);
    if (opt.uses_vehicle) out.push_back(std::move(opt));
  }
  std::stable_sort(out.begin(), out.end(), [](const RouteOption& a, const RouteOption& b) {
    if (a.time_steps != b.time_steps) return a.time_steps < b.time_steps;
    return static_cast<int>(a.mode) < static_cast<int>(b.mode);
  });
  {
    std::lock_guard<std::mutex> lock(*cache_mu_);
    route_cache_.emplace(std::make_pair(s, t),
                         std::make_shared<const std::vector<RouteOption>>(out));
  }
  return out;
}

double TransitGraphs::travel_time_steps(const std::string& from_venue,
                                        const std::string& to_venue, Mode mode) const {
  int s = entrance(from_venue);
  int t = entrance(to_venue);
  if (s == t) return 0.0;
  double d = solve(s, mode).dist[t];
  if (d == kInf) throw std::runtime_error("transport: destination unreachable");
  return d;
}

double TransitGraphs::travel_minutes(const std::string& from_venue,
                                     const std::string& to_venue, Mode mode) const {
  return travel_time_steps(from_venue, to_venue, mode) * kMinutesPerStep;
}

double TransitGraphs::fastest_minutes(const std::string& from_venue,
                                      const std::string& to_venue) const {
  double best = kInf;
  for (Mode m : {Mode::Walking, Mode::Pmv, Mode::Bus}) {
    best = std::min(best, travel_minutes(from_venue, to_venue, m));
  }
  return best;
}

RouteOption TransitGraphs::best_route(const std::string& from_venue,
                                      const std::string& to_venue, Mode mode) const {
  int s = entrance(from_venue);
  int t = entrance(to_venue);
  if (s == t) {
    RouteOption stay;
    stay.mode = mode;
    return stay;
  }
  return extract(solve(s, mode), s, t, mode);
}

}  // namespace mobcity
