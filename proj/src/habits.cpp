#include "mobcity/habits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mobcity {

double delta_theta(double t_min_of_day, double midpoint_min) {
  constexpr double kDay = 1440.0;
  double d = std::fmod(t_min_of_day - midpoint_min, kDay);
  if (d < 0) d += kDay;
  double theta = d * (2.0 * std::numbers::pi / kDay);
  if (theta > std::numbers::pi) theta -= 2.0 * std::numbers::pi;
  return theta;
}

double k_from_halfwidth(double a) {
  if (a <= 0.0) {
    throw std::invalid_argument("k_from_halfwidth: half-width must be positive");
  }
  double r = 1.163 / a;
  return r * r;
}

double amplitude(double k, double mass) {
  if (k <= 0.0 || mass <= 0.0) {
    throw std::invalid_argument("amplitude: k and mass must be positive");
  }
  return 0.627 * mass * std::sqrt(k);
}

double pade_exp(double u) {
  double u2 = u * u;
  return (1.0 - u / 2.0 + u2 / 12.0) / (1.0 + u / 2.0 + u2 / 12.0);
}

double habit_intensity(const HabitRecord& rec, double now_abs_min) {
  if (now_abs_min < rec.last_reinforced_abs) {
    throw std::invalid_argument("habit_intensity: clock earlier than last reinforcement");
  }
  double elapsed = now_abs_min - rec.last_reinforced_abs;
  double forgetting = std::exp(-rec.forget_rate * elapsed);
  double theta = delta_theta(std::fmod(now_abs_min, 1440.0), rec.midpoint_min);
  double k = k_from_halfwidth(rec.half_width_rad);
  double u = k * theta * theta;
  // Rational approximation only in the focus zone around the peak.
  double gauss = std::abs(theta) <= rec.half_width_rad ? pade_exp(u) : std::exp(-u);
  return forgetting * amplitude(k, rec.mass) * gauss;
}

void reinforce(HabitStore& store, const std::string& action_id, double exec_midpoint_min,
               double exec_half_width_rad, double feedback, double now_abs_min,
               const HabitParams& params) {
  double hw = std::clamp(exec_half_width_rad, kMinHalfWidth, kMaxHalfWidth);
  auto it = store.find(action_id);
  if (it == store.end()) {
    double mass = params.learn_rate * feedback;
    if (mass <= 0.0) return;  // nothing to remember
    HabitRecord rec;
    rec.action_id = action_id;
    rec.midpoint_min = std::fmod(exec_midpoint_min, 1440.0);
    rec.last_reinforced_abs = now_abs_min;
    rec.half_width_rad = hw;
    rec.mass = mass;
    rec.forget_rate = params.forget_rate;
    store.emplace(action_id, rec);
    return;
  }
  HabitRecord& rec = it->second;
  rec.midpoint_min = std::fmod(exec_midpoint_min, 1440.0);
  rec.last_reinforced_abs = now_abs_min;
  rec.half_width_rad = hw;
  rec.mass += params.learn_rate * feedback;
}

void prune(HabitStore& store, double now_abs_min, double eps) {
  if (eps <= 0.0) {
    throw std::invalid_argument("prune: threshold must be positive");
  }
  for (auto it = store.begin(); it != store.end();) {
    const HabitRecord& rec = it->second;
    double elapsed = std::max(0.0, now_abs_min - rec.last_reinforced_abs);
    double peak = std::exp(-rec.forget_rate * elapsed) *
                  amplitude(k_from_halfwidth(rec.half_width_rad), rec.mass);
    if (peak < eps) {
      it = store.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<std::pair<std::string, double>> top_k_habits(const HabitStore& store,
                                                         double now_abs_min, int k) {
  std::vector<std::pair<std::string, double>> scored;
  scored.reserve(store.size());
  for (const auto& [id, rec] : store) {
    scored.emplace_back(id, habit_intensity(rec, now_abs_min));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(scored.size()) > k) scored.resize(k);
  return scored;
}

}  // namespace mobcity
