#include "mobcity/actions.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mobcity {

bool in_semantic_window(const ActionSpec& action, double t_min_of_day) {
  if (action.windows.empty()) return true;
  for (const TimeWindow& w : action.windows) {
    if (t_min_of_day >= w.start && t_min_of_day < w.end) return true;
  }
  return false;
}

ActionCatalog ActionCatalog::load(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open action catalog: " + json_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ActionCatalog ActionCatalog::parse(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text);
  ActionCatalog cat;
  for (const auto& item : doc.at("actions")) {
    ActionSpec a;
    a.id = item.at("id").get<std::string>();
    a.name = item.value("name", a.id);
    a.category = parse_venue_category(item.at("category").get<std::string>());
    a.duration_min = item.at("duration").get<int>();
    if (a.duration_min < 30 || a.duration_min > 180) {
      throw std::runtime_error("action '" + a.id + "' duration outside 30..180 minutes");
    }
    if (item.contains("windows")) {
      for (const auto& w : item["windows"]) {
        TimeWindow tw{w.at(0).get<int>(), w.at(1).get<int>()};
        if (tw.start < 0 || tw.end > 1440 || tw.start >= tw.end) {
          throw std::runtime_error("action '" + a.id + "' has an invalid time window");
        }
        a.windows.push_back(tw);
      }
    }
    if (item.contains("effects")) {
      for (const auto& [need, value] : item["effects"].items()) {
        bool found = false;
        for (int i = 0; i < kNeedCount; ++i) {
          if (need == need_name(i)) {
            a.contribution[i] = value.get<double>();
            found = true;
            break;
          }
        }
        if (!found) throw std::runtime_error("action '" + a.id + "' names unknown need '" + need + "'");
      }
    }
    a.features = item.at("features").get<std::vector<double>>();
    a.money_cost = item.value("money", 0.0);
    a.activity_class = item.value("class", "leisure");
    cat.actions_.push_back(std::move(a));
  }
  std::sort(cat.actions_.begin(), cat.actions_.end(),
            [](const ActionSpec& a, const ActionSpec& b) { return a.id < b.id; });
  for (size_t i = 1; i < cat.actions_.size(); ++i) {
    if (cat.actions_[i].id == cat.actions_[i - 1].id) {
      throw std::runtime_error("duplicate action id '" + cat.actions_[i].id + "'");
    }
  }
  return cat;
}

const ActionSpec& ActionCatalog::by_id(const std::string& id) const {
  auto it = std::lower_bound(actions_.begin(), actions_.end(), id,
                             [](const ActionSpec& a, const std::string& v) { return a.id < v; });
  if (it == actions_.end() || it->id != id) {
    throw std::runtime_error("unknown action id '" + id + "'");
  }
  return *it;
}

bool ActionCatalog::contains(const std::string& id) const {
  auto it = std::lower_bound(actions_.begin(), actions_.end(), id,
                             [](const ActionSpec& a, const std::string& v) { return a.id < v; });
  return it != actions_.end() && it->id == id;
}

}  // namespace mobcity
