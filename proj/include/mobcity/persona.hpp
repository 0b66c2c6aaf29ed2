#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mobcity/actions.hpp"
#include "mobcity/city_map.hpp"
#include "mobcity/needs.hpp"

#include "json.hpp"

namespace mobcity {

/// A mandatory calendar slot (work shift, sleep, appointment).
struct ObligationTask {
  int start = 0;         ///< minute of day
  int duration = 0;      ///< minutes, start + duration <= 1440
  std::string venue;     ///< venue id; empty means the agent's home
  std::string label;
  std::array<bool, 7> days{};  ///< day-of-week mask, 0 = Sunday
  NeedArray effect{};          ///< applied on completion, clipped
  std::string activity_class = "work";
};

/// Static agent profile; immutable once created.
struct Persona {
  int id = 0;
  std::string name;
  std::string gender;
  int age = 30;
  std::string job_category;
  std::string education;
  std::string financial_status;  ///< "comfortable" | "constrained"
  std::string family_status;     ///< "living-alone" | "cohabiting"
  int category_code = 100;       ///< XYZ digits: age band, employment, income
  std::vector<double> traits;    ///< x_hp in [0,1]^D
  std::vector<std::string> hobbies;
  NeedArray importance{};
  NeedArray decay_rates{};
  std::string home_venue;
  std::string work_venue;  ///< empty for unemployed
  std::vector<ObligationTask> calendar;

  int age_band() const { return category_code / 100; }
  int employment() const { return (category_code / 10) % 10; }  ///< 0 none, 1 full, 2 part
  int income_level() const { return category_code % 10; }       ///< 0 medium, 1 high
  bool employed() const { return employment() != 0; }
};

/// Knobs for profile derivation; the scale factors encode how demographics
/// shift decay and importance away from the baseline.
struct PersonaDefaults {
  double physiological_decay = 1.0 / 1440.0;
  double mid_decay = 1.0 / 2880.0;
  double high_decay = 1.0 / 5760.0;
  double living_alone_social_scale = 1.5;
  double constrained_financial_importance_scale = 1.5;
  double fullness_importance_scale = 1.4;
  double fullness_decay_scale = 2.0;  ///< hunger returns faster than fatigue
  // Core calendar slots, minutes of day. The work day is split around a
  // lunch break and ends at 17:00 so meals land at customary hours.
  int sleep_evening_start = 1380;
  int sleep_morning_end = 420;
  int work_start = 540;
  int lunch_break_start = 690;
  int lunch_break_end = 750;
  int work_end = 1020;
  int parttime_start = 540;
  int parttime_end = 780;
};

/// Derive age-band/employment/income digits into the XYZ category code.
int encode_category(int age, const std::string& employment, const std::string& income);

/// Build a persona from one survey-style record (JSON object with demographic
/// fields, traits and optional hobbies/home/work). Throws on missing fields or
/// out-of-range trait values.
Persona from_record(const nlohmann::json& record, const PersonaDefaults& defaults = {});

struct CategoryShare {
  int code = 100;
  double proportion = 0.0;
};

struct PopulationConfig {
  std::vector<CategoryShare> categories;
  std::vector<double> trait_mean;
  std::vector<double> trait_stddev;
  std::vector<std::string> hobby_pool;
  PersonaDefaults defaults;

  static PopulationConfig standard();
  static PopulationConfig load(const std::string& json_path);
  static PopulationConfig parse(const nlohmann::json& doc);
};

/// Deterministically synthesize n personas with category proportions matching
/// the config within 1/n, homes and workplaces assigned from the map.
std::vector<Persona> generate_population(int n, uint64_t seed, const PopulationConfig& config,
                                         const CityMap& map);

void to_json(nlohmann::json& j, const ObligationTask& t);
void from_json(const nlohmann::json& j, ObligationTask& t);
void to_json(nlohmann::json& j, const Persona& p);
void from_json(const nlohmann::json& j, Persona& p);

std::vector<Persona> load_population(const std::string& json_path);
void save_population(const std::vector<Persona>& personas, const std::string& json_path);

}  // namespace mobcity
