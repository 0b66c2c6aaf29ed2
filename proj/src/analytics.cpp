#include "mobcity/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mobcity {

EventLogView::EventLogView(const std::vector<EventRecord>& events) {
  for (const EventRecord& e : events) {
    auto& list = by_agent_[e.agent];
    if (!list.empty() && e.t < list.back()->t) {
      throw std::runtime_error("event log corrupt: decreasing timestamps for agent " +
                               std::to_string(e.agent));
    }
    list.push_back(&e);
    ++total_;
  }
}

const std::vector<const EventRecord*>& EventLogView::agent_events(int agent) const {
  auto it = by_agent_.find(agent);
  if (it == by_agent_.end()) throw std::runtime_error("no events for agent " + std::to_string(agent));
  return it->second;
}

std::vector<int> EventLogView::agents() const {
  std::vector<int> out;
  out.reserve(by_agent_.size());
  for (const auto& [id, _] : by_agent_) out.push_back(id);
  return out;
}

namespace {

bool carries_needs(const EventRecord& e) {
  return e.kind == EventKind::ActionCompleted || e.kind == EventKind::DayStart ||
         e.kind == EventKind::DayEnd;
}

double lerp(double a, double b, double f) { return a + (b - a) * f; }

}  // namespace

InterpolatedState interpolate(const EventLogView& log, int agent, double t_abs) {
  const auto& events = log.agent_events(agent);
  if (t_abs < events.front()->t || t_abs > events.back()->t) {
    throw std::out_of_range("interpolation time outside agent's event range");
  }
  InterpolatedState out;

  const EventRecord* prev_pos = nullptr;
  const EventRecord* next_pos = nullptr;
  const EventRecord* prev_needs = nullptr;
  const EventRecord* next_needs = nullptr;
  for (const EventRecord* e : events) {
    if (e->kind == EventKind::Moved) {
      if (e->t <= t_abs) prev_pos = e;
      else if (!next_pos) next_pos = e;
    }
    if (carries_needs(*e)) {
      if (e->t <= t_abs) prev_needs = e;
      else if (!next_needs) next_needs = e;
    }
  }

  if (prev_pos && next_pos && next_pos->t > prev_pos->t) {
    double f = (t_abs - prev_pos->t) / (next_pos->t - prev_pos->t);
    out.x = lerp(prev_pos->x, next_pos->x, f);
    out.y = lerp(prev_pos->y, next_pos->y, f);
  } else if (prev_pos) {
    out.x = prev_pos->x;
    out.y = prev_pos->y;
  } else if (next_pos) {
    out.x = next_pos->x;
    out.y = next_pos->y;
  }

  if (prev_needs && next_needs && next_needs->t > prev_needs->t) {
    double f = (t_abs - prev_needs->t) / (next_needs->t - prev_needs->t);
    for (int i = 0; i < kNeedCount; ++i) {
      out.needs[i] = lerp(prev_needs->needs[i], next_needs->needs[i], f);
    }
  } else if (prev_needs) {
    out.needs = prev_needs->needs;
  } else if (next_needs) {
    out.needs = next_needs->needs;
  }
  return out;
}

namespace {

/// Per-agent index of action stays and movement instants for occupancy lookup.
struct AgentTimeline {
  std::vector<const EventRecord*> actions;  ///< sorted by completion time
  std::vector<double> moved_times;          ///< sorted
};

AgentTimeline build_timeline(const std::vector<const EventRecord*>& events) {
  AgentTimeline tl;
  for (const EventRecord* e : events) {
    if (e->kind == EventKind::ActionCompleted) tl.actions.push_back(e);
    else if (e->kind == EventKind::Moved) tl.moved_times.push_back(e->t);
  }
  return tl;
}

/// Venue the agent occupies at instant s, or empty string while traveling.
std::string venue_at(const AgentTimeline& tl, double s) {
  if (tl.actions.empty()) return {};
  auto it = std::lower_bound(tl.actions.begin(), tl.actions.end(), s,
                             [](const EventRecord* e, double t) { return e->t < t; });
  if (it != tl.actions.end() && (*it)->t_start <= s) return (*it)->venue;
  if (it == tl.actions.begin()) return tl.actions.front()->venue;
  const EventRecord* prev = *(it - 1);
  // Traveling iff the agent has departed since finishing the last action.
  auto moved = std::upper_bound(tl.moved_times.begin(), tl.moved_times.end(), prev->t);
  if (moved != tl.moved_times.end() && *moved <= s) return {};
  return prev->venue;
}

}  // namespace

OccupancyTable venue_heatmap(const EventLogView& log, const CityMap& map, int day,
                             int bucket_minutes) {
  if (bucket_minutes <= 0 || 1440 % bucket_minutes != 0) {
    throw std::invalid_argument("bucket width must divide 1440");
  }
  OccupancyTable table;
  table.bucket_minutes = bucket_minutes;
  constexpr int kCategoryCount = 12;
  for (int c = 0; c < kCategoryCount; ++c) {
    table.categories.push_back(venue_category_name(static_cast<VenueCategory>(c)));
  }
  table.categories.push_back("transit");

  std::vector<std::pair<int, AgentTimeline>> timelines;
  for (int agent : log.agents()) {
    timelines.emplace_back(agent, build_timeline(log.agent_events(agent)));
  }

  int buckets = 1440 / bucket_minutes;
  for (int b = 0; b < buckets; ++b) {
    double s = day * 1440.0 + b * bucket_minutes;
    table.bucket_start.push_back(s);
    std::vector<int> row(table.categories.size(), 0);
    for (const auto& [agent, tl] : timelines) {
      std::string venue = venue_at(tl, s);
      if (venue.empty()) {
        ++row[kCategoryCount];
      } else {
        ++row[static_cast<int>(map.venue(venue).category)];
      }
    }
    table.counts.push_back(std::move(row));
  }
  return table;
}

namespace {

std::map<int, const Persona*> persona_index(const std::vector<Persona>& personas) {
  std::map<int, const Persona*> out;
  for (const Persona& p : personas) out[p.id] = &p;
  return out;
}

PercentTable normalize_rows(const std::string& row_label, const std::vector<std::string>& cols,
                            const std::map<std::string, std::vector<double>>& totals) {
  PercentTable table;
  table.row_label = row_label;
  table.cols = cols;
  for (const auto& [row, values] : totals) {
    double sum = 0.0;
    for (double v : values) sum += v;
    if (sum <= 0.0) continue;
    table.rows.push_back(row);
    std::vector<double> pct;
    pct.reserve(values.size());
    for (double v : values) pct.push_back(100.0 * v / sum);
    table.values.push_back(std::move(pct));
  }
  return table;
}

}  // namespace

PercentTable activity_distribution(const EventLogView& log,
                                   const std::vector<Persona>& personas) {
  std::vector<std::string> cols = {"work",    "meals", "exercise", "leisure",
                                   "errands", "rest",  "travel"};
  auto col_of = [&cols](const std::string& cls) {
    auto it = std::find(cols.begin(), cols.end(), cls);
    if (it == cols.end()) {
      cols.push_back(cls);
      return cols.size() - 1;
    }
    return static_cast<size_t>(it - cols.begin());
  };

  auto by_id = persona_index(personas);
  std::map<std::string, std::vector<double>> totals;
  for (int agent : log.agents()) {
    auto it = by_id.find(agent);
    if (it == by_id.end()) continue;
    std::string row = std::to_string(it->second->category_code);
    auto& acc = totals[row];
    const auto& events = log.agent_events(agent);
    for (size_t i = 0; i < events.size(); ++i) {
      const EventRecord& e = *events[i];
      size_t col = cols.size();
      double dt = 0.0;
      if (e.kind == EventKind::ActionCompleted) {
        col = col_of(e.activity_class);
        dt = e.t - e.t_start;
      } else if (e.kind == EventKind::Moved && i + 1 < events.size() &&
                 events[i + 1]->kind == EventKind::Moved) {
        col = col_of("travel");
        dt = events[i + 1]->t - e.t;
      }
      if (dt <= 0.0) continue;
      if (acc.size() < cols.size()) acc.resize(cols.size(), 0.0);
      acc[col] += dt;
    }
  }
  for (auto& [_, acc] : totals) acc.resize(cols.size(), 0.0);
  return normalize_rows("category", cols, totals);
}

PercentTable transport_shares(const EventLogView& log, const std::vector<Persona>& personas) {
  std::vector<std::string> cols = {mode_name(Mode::Walking), mode_name(Mode::Pmv),
                                   mode_name(Mode::Bus)};
  auto by_id = persona_index(personas);
  std::map<std::string, std::vector<double>> totals;
  for (int agent : log.agents()) {
    auto it = by_id.find(agent);
    if (it == by_id.end()) continue;
    auto& acc = totals[std::to_string(it->second->category_code)];
    acc.resize(cols.size(), 0.0);
    const auto& events = log.agent_events(agent);
    for (size_t i = 0; i + 1 < events.size(); ++i) {
      if (events[i]->kind != EventKind::Moved || events[i + 1]->kind != EventKind::Moved) continue;
      double dt = events[i + 1]->t - events[i]->t;
      if (dt > 0.0) acc[static_cast<int>(events[i]->mode)] += dt;
    }
  }
  return normalize_rows("category", cols, totals);
}

namespace {

std::string employment_label(const Persona& p) {
  switch (p.employment()) {
    case 1: return "employed";
    case 2: return "part-time";
    default: return "unemployed";
  }
}

}  // namespace

NeedsTimeseries needs_timeseries(const EventLogView& log, const std::vector<Persona>& personas,
                                 int day) {
  NeedsTimeseries series;
  auto by_id = persona_index(personas);
  std::map<std::string, std::vector<int>> members;
  for (int agent : log.agents()) {
    auto it = by_id.find(agent);
    if (it != by_id.end()) members[employment_label(*it->second)].push_back(agent);
  }
  for (auto& [group, _] : members) {
    for (int n = 0; n < kNeedCount; ++n) series.groups[group][n].reserve(96);
  }
  for (int i = 0; i < 96; ++i) {
    double minute = i * 15.0;
    series.minute_of_day.push_back(minute);
    double s = day * 1440.0 + minute;
    for (auto& [group, agents] : members) {
      NeedVector mean{};
      for (int agent : agents) {
        const auto& events = log.agent_events(agent);
        double clamped = std::clamp(s, events.front()->t, events.back()->t);
        NeedVector v = interpolate(log, agent, clamped).needs;
        for (int n = 0; n < kNeedCount; ++n) mean[n] += v[n];
      }
      for (int n = 0; n < kNeedCount; ++n) {
        series.groups[group][n].push_back(mean[n] / agents.size());
      }
    }
  }
  return series;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_csv(const OccupancyTable& table) {
  std::ostringstream os;
  os << "bucket_start";
  for (const std::string& c : table.categories) os << ',' << c;
  os << '\n';
  for (size_t b = 0; b < table.counts.size(); ++b) {
    os << fmt(table.bucket_start[b]);
    for (int v : table.counts[b]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

std::string to_csv(const PercentTable& table) {
  std::ostringstream os;
  os << table.row_label;
  for (const std::string& c : table.cols) os << ',' << c;
  os << '\n';
  for (size_t r = 0; r < table.rows.size(); ++r) {
    os << table.rows[r];
    for (double v : table.values[r]) os << ',' << fmt(v);
    os << '\n';
  }
  return os.str();
}

std::string to_csv(const NeedsTimeseries& series) {
  std::ostringstream os;
  os << "minute";
  for (const auto& [group, _] : series.groups) {
    for (int n = 0; n < kNeedCount; ++n) os << ',' << group << '.' << need_name(n);
  }
  os << '\n';
  for (size_t i = 0; i < series.minute_of_day.size(); ++i) {
    os << fmt(series.minute_of_day[i]);
    for (const auto& [_, curves] : series.groups) {
      for (int n = 0; n < kNeedCount; ++n) os << ',' << fmt(curves[n][i]);
    }
    os << '\n';
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
}

}  // namespace mobcity
