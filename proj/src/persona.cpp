#include "mobcity/persona.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mobcity {

namespace {

constexpr std::array<bool, 7> kAllDays = {true, true, true, true, true, true, true};
constexpr std::array<bool, 7> kWeekdays = {false, true, true, true, true, true, false};

NeedArray effect(std::initializer_list<std::pair<Need, double>> items) {
  NeedArray out{};
  for (auto [n, v] : items) out[static_cast<int>(n)] = v;
  return out;
}

std::vector<ObligationTask> default_calendar(const Persona& p, const PersonaDefaults& d) {
  std::vector<ObligationTask> cal;
  ObligationTask sleep_morning;
  sleep_morning.start = 0;
  sleep_morning.duration = d.sleep_morning_end;
  sleep_morning.venue = p.home_venue;
  sleep_morning.label = "sleep";
  sleep_morning.days = kAllDays;
  sleep_morning.effect = effect({{Need::Energy, 0.9}, {Need::Health, 0.2}});
  sleep_morning.activity_class = "rest";
  cal.push_back(sleep_morning);

  if (p.employment() == 1) {
    ObligationTask morning;
    morning.start = d.work_start;
    morning.duration = d.lunch_break_start - d.work_start;
    morning.venue = p.work_venue;
    morning.label = "work";
    morning.days = kWeekdays;
    morning.effect = effect({{Need::FinancialSecurity, 0.25}, {Need::StatusRecognition, 0.1}});
    cal.push_back(morning);

    ObligationTask afternoon = morning;
    afternoon.start = d.lunch_break_end;
    afternoon.duration = d.work_end - d.lunch_break_end;
    cal.push_back(afternoon);
  } else if (p.employment() == 2) {
    ObligationTask shift;
    shift.start = d.parttime_start;
    shift.duration = d.parttime_end - d.parttime_start;
    shift.venue = p.work_venue;
    shift.label = "work";
    shift.days = kWeekdays;
    shift.effect = effect({{Need::FinancialSecurity, 0.15}, {Need::StatusRecognition, 0.05}});
    cal.push_back(shift);
  }

  ObligationTask sleep_evening;
  sleep_evening.start = d.sleep_evening_start;
  sleep_evening.duration = 1440 - d.sleep_evening_start;
  sleep_evening.venue = p.home_venue;
  sleep_evening.label = "sleep";
  sleep_evening.days = kAllDays;
  sleep_evening.effect = effect({{Need::Energy, 0.1}});
  sleep_evening.activity_class = "rest";
  cal.push_back(sleep_evening);
  return cal;
}

}  // namespace

int encode_category(int age, const std::string& employment, const std::string& income) {
  int band = age < 45 ? 1 : (age < 65 ? 2 : 3);
  int emp;
  if (employment == "unemployed") emp = 0;
  else if (employment == "employed") emp = 1;
  else if (employment == "part-time") emp = 2;
  else throw std::runtime_error("unknown employment status '" + employment + "'");
  int inc;
  if (income == "medium") inc = 0;
  else if (income == "high") inc = 1;
  else throw std::runtime_error("unknown income level '" + income + "'");
  return band * 100 + emp * 10 + inc;
}

Persona from_record(const nlohmann::json& record, const PersonaDefaults& d) {
  Persona p;
  p.id = record.value("id", 0);
  p.name = record.value("name", "agent-" + std::to_string(p.id));
  p.gender = record.at("gender").get<std::string>();
  p.age = record.at("age").get<int>();
  p.job_category = record.value("job_category", "general");
  p.education = record.value("education", "secondary");
  p.financial_status = record.at("financial_status").get<std::string>();
  p.family_status = record.at("family_status").get<std::string>();
  p.category_code = encode_category(p.age, record.at("employment").get<std::string>(),
                                    record.at("income").get<std::string>());
  p.traits = record.at("traits").get<std::vector<double>>();
  if (p.traits.empty()) throw std::runtime_error("persona record has no traits");
  for (double t : p.traits) {
    if (t < 0.0 || t > 1.0 || !std::isfinite(t)) {
      throw std::runtime_error("persona trait outside [0,1]");
    }
  }
  if (record.contains("hobbies")) {
    p.hobbies = record["hobbies"].get<std::vector<std::string>>();
  }
  p.home_venue = record.value("home", "");
  p.work_venue = record.value("work", "");
  if (p.employed() && p.work_venue.empty()) {
    throw std::runtime_error("employed persona record lacks a work venue");
  }

  const size_t dim = p.traits.size();
  const double base[kNeedCount] = {
      d.physiological_decay * d.fullness_decay_scale,
      d.physiological_decay,                         // Fullness, Energy
      d.mid_decay,           d.mid_decay,            // Health, FinancialSecurity
      d.mid_decay,           d.mid_decay,            // Pleasure, SocialConnection
      d.high_decay,          d.high_decay,           // StatusRecognition, SelfGrowth
  };
  for (int i = 0; i < kNeedCount; ++i) {
    // Trait-coupled heterogeneity, +-20% around the baseline.
    p.decay_rates[i] = base[i] * (0.8 + 0.4 * p.traits[i % dim]);
    p.importance[i] = 1.0 + 0.5 * p.traits[(i + 3) % dim];
  }
  // Hunger outranks the other physiological pulls when both run low, which
  // keeps meal times anchored to customary hours.
  at(p.importance, Need::Fullness) *= d.fullness_importance_scale;
  if (p.family_status == "living-alone") {
    at(p.decay_rates, Need::SocialConnection) *= d.living_alone_social_scale;
  }
  if (p.income_level() == 0 && p.financial_status == "constrained") {
    at(p.importance, Need::FinancialSecurity) *= d.constrained_financial_importance_scale;
  }

  if (record.contains("calendar")) {
    p.calendar = record["calendar"].get<std::vector<ObligationTask>>();
  } else {
    p.calendar = default_calendar(p, d);
  }
  return p;
}

PopulationConfig PopulationConfig::standard() {
  PopulationConfig c;
  const int codes[] = {100, 110, 120, 210, 211, 220, 300, 310, 320};
  for (int code : codes) c.categories.push_back({code, 1.0 / 9.0});
  c.trait_mean.assign(10, 0.5);
  c.trait_stddev.assign(10, 0.2);
  c.hobby_pool = {"reading", "jogging", "cooking", "gardening", "photography",
                  "chess",   "cycling", "painting", "music",    "films"};
  return c;
}

PopulationConfig PopulationConfig::parse(const nlohmann::json& doc) {
  PopulationConfig c = standard();
  if (doc.contains("categories")) {
    c.categories.clear();
    for (const auto& item : doc["categories"]) {
      c.categories.push_back({item.at("code").get<int>(), item.at("proportion").get<double>()});
    }
  }
  if (doc.contains("traits")) {
    c.trait_mean = doc["traits"].at("mean").get<std::vector<double>>();
    c.trait_stddev = doc["traits"].at("stddev").get<std::vector<double>>();
  }
  if (doc.contains("hobbies")) c.hobby_pool = doc["hobbies"].get<std::vector<std::string>>();
  if (doc.contains("obligations")) {
    const auto& o = doc["obligations"];
    c.defaults.sleep_evening_start = o.value("sleep_start", c.defaults.sleep_evening_start);
    c.defaults.sleep_morning_end = o.value("sleep_end", c.defaults.sleep_morning_end);
    c.defaults.work_start = o.value("work_start", c.defaults.work_start);
    c.defaults.lunch_break_start = o.value("lunch_break_start", c.defaults.lunch_break_start);
    c.defaults.lunch_break_end = o.value("lunch_break_end", c.defaults.lunch_break_end);
    c.defaults.work_end = o.value("work_end", c.defaults.work_end);
    c.defaults.parttime_start = o.value("parttime_start", c.defaults.parttime_start);
    c.defaults.parttime_end = o.value("parttime_end", c.defaults.parttime_end);
  }
  return c;
}

PopulationConfig PopulationConfig::load(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open population config: " + json_path);
  nlohmann::json doc;
  in >> doc;
  return parse(doc);
}

std::vector<Persona> generate_population(int n, uint64_t seed, const PopulationConfig& config,
                                         const CityMap& map) {
  if (n < 1) throw std::invalid_argument("generate_population: n must be >= 1");
  double total = 0.0;
  for (const auto& c : config.categories) total += c.proportion;
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::runtime_error("category proportions must sum to 1");
  }
  if (config.trait_mean.size() != config.trait_stddev.size() || config.trait_mean.empty()) {
    throw std::runtime_error("trait mean/stddev dimensions mismatch");
  }

  // Largest-remainder allocation keeps every share within 1/n of its target.
  std::vector<int> counts(config.categories.size(), 0);
  std::vector<std::pair<double, size_t>> remainders;
  int assigned = 0;
  for (size_t i = 0; i < config.categories.size(); ++i) {
    double exact = config.categories[i].proportion * n;
    counts[i] = static_cast<int>(exact);
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; assigned < n; ++i, ++assigned) {
    ++counts[remainders[i % remainders.size()].second];
  }

  std::vector<int> codes;
  for (size_t i = 0; i < counts.size(); ++i) {
    codes.insert(codes.end(), counts[i], config.categories[i].code);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(codes.begin(), codes.end(), rng);

  auto homes = map.venues_of_category(VenueCategory::ResidentialRoom);
  auto offices = map.venues_of_category(VenueCategory::Office);
  std::vector<std::string> parttime_pool;
  for (VenueCategory c : {VenueCategory::Office, VenueCategory::Store,
                          VenueCategory::ConvenienceStore, VenueCategory::Cafe}) {
    auto v = map.venues_of_category(c);
    parttime_pool.insert(parttime_pool.end(), v.begin(), v.end());
  }
  if (homes.empty()) throw std::runtime_error("map has no residential venues");

  std::vector<Persona> out;
  out.reserve(n);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    int code = codes[i];
    int band = code / 100, emp = (code / 10) % 10, inc = code % 10;
    const int band_lo[] = {0, 25, 45, 65};
    const int band_hi[] = {0, 44, 64, 84};
    std::uniform_int_distribution<int> age_dist(band_lo[band], band_hi[band]);

    nlohmann::json rec;
    rec["id"] = i;
    rec["name"] = "agent-" + std::to_string(i);
    rec["gender"] = uni(rng) < 0.5 ? "female" : "male";
    rec["age"] = age_dist(rng);
    rec["employment"] = emp == 0 ? "unemployed" : (emp == 1 ? "employed" : "part-time");
    rec["income"] = inc == 0 ? "medium" : "high";
    rec["family_status"] = uni(rng) < 0.3 ? "living-alone" : "cohabiting";
    double constrained_share = inc == 0 ? 0.5 : 0.2;
    rec["financial_status"] = uni(rng) < constrained_share ? "constrained" : "comfortable";
    std::vector<double> traits(config.trait_mean.size());
    for (size_t k = 0; k < traits.size(); ++k) {
      std::normal_distribution<double> nd(config.trait_mean[k], config.trait_stddev[k]);
      traits[k] = std::clamp(nd(rng), 0.0, 1.0);
    }
    rec["traits"] = traits;
    std::vector<std::string> hobbies;
    if (!config.hobby_pool.empty()) {
      size_t a = static_cast<size_t>(uni(rng) * config.hobby_pool.size()) % config.hobby_pool.size();
      size_t b = static_cast<size_t>(uni(rng) * config.hobby_pool.size()) % config.hobby_pool.size();
      hobbies.push_back(config.hobby_pool[a]);
      if (b != a) hobbies.push_back(config.hobby_pool[b]);
    }
    rec["hobbies"] = hobbies;
    rec["home"] = homes[i % homes.size()];
    if (emp == 1) {
      rec["work"] = offices.empty() ? homes[i % homes.size()] : offices[i % offices.size()];
    } else if (emp == 2) {
      rec["work"] = parttime_pool.empty() ? homes[i % homes.size()]
                                          : parttime_pool[i % parttime_pool.size()];
    }
    out.push_back(from_record(rec, config.defaults));
  }
  return out;
}

void to_json(nlohmann::json& j, const ObligationTask& t) {
  j = nlohmann::json{{"start", t.start},       {"duration", t.duration},
                     {"venue", t.venue},       {"label", t.label},
                     {"days", t.days},         {"effect", t.effect},
                     {"class", t.activity_class}};
}

void from_json(const nlohmann::json& j, ObligationTask& t) {
  j.at("start").get_to(t.start);
  j.at("duration").get_to(t.duration);
  j.at("venue").get_to(t.venue);
  j.at("label").get_to(t.label);
  j.at("days").get_to(t.days);
  j.at("effect").get_to(t.effect);
  t.activity_class = j.value("class", "work");
  if (t.start < 0 || t.duration < 0 || t.start + t.duration > 1440) {
    throw std::runtime_error("obligation outside the day");
  }
}

void to_json(nlohmann::json& j, const Persona& p) {
  j = nlohmann::json{{"id", p.id},
                     {"name", p.name},
                     {"gender", p.gender},
                     {"age", p.age},
                     {"job_category", p.job_category},
                     {"education", p.education},
                     {"financial_status", p.financial_status},
                     {"family_status", p.family_status},
                     {"category", p.category_code},
                     {"traits", p.traits},
                     {"hobbies", p.hobbies},
                     {"importance", p.importance},
                     {"decay_rates", p.decay_rates},
                     {"home", p.home_venue},
                     {"work", p.work_venue},
                     {"calendar", p.calendar}};
}

void from_json(const nlohmann::json& j, Persona& p) {
  j.at("id").get_to(p.id);
  j.at("name").get_to(p.name);
  j.at("gender").get_to(p.gender);
  j.at("age").get_to(p.age);
  j.at("job_category").get_to(p.job_category);
  j.at("education").get_to(p.education);
  j.at("financial_status").get_to(p.financial_status);
  j.at("family_status").get_to(p.family_status);
  j.at("category").get_to(p.category_code);
  j.at("traits").get_to(p.traits);
  j.at("hobbies").get_to(p.hobbies);
  j.at("importance").get_to(p.importance);
  j.at("decay_rates").get_to(p.decay_rates);
  j.at("home").get_to(p.home_venue);
  j.at("work").get_to(p.work_venue);
  j.at("calendar").get_to(p.calendar);
}

std::vector<Persona> load_population(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open population file: " + json_path);
  nlohmann::json doc;
  in >> doc;
  return doc.at("personas").get<std::vector<Persona>>();
}

void save_population(const std::vector<Persona>& personas, const std::string& json_path) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["personas"] = personas;
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("cannot write population file: " + json_path);
  out << doc.dump(1) << "\n";
}

}  // namespace mobcity
