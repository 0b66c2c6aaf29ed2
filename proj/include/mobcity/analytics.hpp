#pragma once

#include <map>
#include <string>
#include <vector>

#include "mobcity/city_map.hpp"
#include "mobcity/needs.hpp"
#include "mobcity/persona.hpp"
#include "mobcity/telemetry.hpp"

namespace mobcity {

/// Read-optimized view over a flat event list: events grouped per agent and
/// kept in timestamp order. Throws if any agent's timestamps decrease.
class EventLogView {
 public:
  explicit EventLogView(const std::vector<EventRecord>& events);

  const std::vector<const EventRecord*>& agent_events(int agent) const;
  std::vector<int> agents() const;
  size_t size() const { return total_; }

 private:
  std::map<int, std::vector<const EventRecord*>> by_agent_;
  size_t total_ = 0;
};

struct InterpolatedState {
  double x = -1.0;
  double y = -1.0;
  NeedVector needs{};
};

/// Reconstruct one agent's state at absolute minute t: position linear along
/// recorded waypoints, needs componentwise linear between surrounding
/// snapshots; exact at event timestamps. Throws when t falls outside the
/// agent's [first, last] event range.
InterpolatedState interpolate(const EventLogView& log, int agent, double t_abs);

/// Time-bucketed occupancy counts, one column per venue category plus a
/// trailing "transit" pseudo-category. Each row sums to the population.
struct OccupancyTable {
  int bucket_minutes = 30;
  std::vector<double> bucket_start;           ///< absolute minutes
  std::vector<std::string> categories;        ///< column labels
  std::vector<std::vector<int>> counts;       ///< [bucket][category]
};

OccupancyTable venue_heatmap(const EventLogView& log, const CityMap& map, int day,
                             int bucket_minutes = 30);

/// Row-normalized percentage table; every row sums to 100 within 0.1.
struct PercentTable {
  std::string row_label;                    ///< what the rows key on
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<double>> values;  ///< percents, [row][col]
};

/// Share of each agent category's logged time spent per activity class
/// (work, meals, exercise, leisure, errands, rest, travel).
PercentTable activity_distribution(const EventLogView& log, const std::vector<Persona>& personas);

/// Share of each agent category's travel time spent per transport mode.
PercentTable transport_shares(const EventLogView& log, const std::vector<Persona>& personas);

/// Per-group mean need curves for one day at 15-minute resolution (96 points).
struct NeedsTimeseries {
  std::vector<double> minute_of_day;  ///< 0, 15, ..., 1425
  /// group label -> per-need sampled mean curve
  std::map<std::string, std::array<std::vector<double>, kNeedCount>> groups;
};

NeedsTimeseries needs_timeseries(const EventLogView& log, const std::vector<Persona>& personas,
                                 int day);

std::string to_csv(const OccupancyTable& table);
std::string to_csv(const PercentTable& table);
std::string to_csv(const NeedsTimeseries& series);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mobcity
