#pragma once

#include <string>
#include <vector>

#include "mobcity/city_map.hpp"
#include "mobcity/needs.hpp"

namespace mobcity {

/// Closed-open minute-of-day interval [start, end).
struct TimeWindow {
  int start = 0;
  int end = 1440;
};

/// A performable voluntary activity from the catalog.
struct ActionSpec {
  std::string id;
  std::string name;
  VenueCategory category = VenueCategory::ResidentialRoom;
  int duration_min = 30;                 ///< 30..180 for voluntary actions
  std::vector<TimeWindow> windows;       ///< empty means any time of day
  NeedArray contribution{};              ///< per-need effect, may be negative
  std::vector<double> features;          ///< trait-affinity vector in [0,1]^D
  double money_cost = 0.0;
  std::string activity_class = "leisure";  ///< work/meals/exercise/leisure/errands/rest
};

/// True when minute-of-day t falls inside one of the action's semantic windows.
bool in_semantic_window(const ActionSpec& action, double t_min_of_day);

class ActionCatalog {
 public:
  static ActionCatalog load(const std::string& json_path);
  static ActionCatalog parse(const std::string& json_text);

  const std::vector<ActionSpec>& actions() const { return actions_; }
  const ActionSpec& by_id(const std::string& id) const;
  bool contains(const std::string& id) const;
  size_t size() const { return actions_.size(); }

 private:
  std::vector<ActionSpec> actions_;  ///< sorted by id
};

}  // namespace mobcity
