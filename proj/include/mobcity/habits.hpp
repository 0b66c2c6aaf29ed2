#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mobcity {

inline constexpr double kMinHalfWidth = 3.14159265358979323846 / 48.0;  // 30-minute action
inline constexpr double kMaxHalfWidth = 3.14159265358979323846 / 8.0;   // 3-hour action

/// One remembered routine: an action habitually done around a time of day.
struct HabitRecord {
  std::string action_id;
  double midpoint_min = 0.0;        ///< minute-of-day of the usual execution midpoint
  double last_reinforced_abs = 0.0; ///< absolute minute (across days) of last execution
  double half_width_rad = kMinHalfWidth;
  double mass = 0.0;                ///< accumulated strength S, > 0
  double forget_rate = 0.0;         ///< 1/minute
};

/// Deterministically ordered per-agent habit set, keyed by action id.
using HabitStore = std::map<std::string, HabitRecord>;

struct HabitParams {
  double learn_rate = 1.0;            ///< mass gained per unit feedback
  double forget_rate = 1.0 / 4320.0;  ///< 3-day scale
  double prune_threshold = 0.05;
};

/// Circular distance between a time of day and a habit midpoint, in [-pi, pi].
double delta_theta(double t_min_of_day, double midpoint_min);

/// Peak sharpness from the angular half-width: k = (1.163 / a)^2, chosen so
/// [-a, a] holds 90% of the Gaussian mass.
double k_from_halfwidth(double a);

/// Peak height keeping the curve area equal to the habit mass: 0.627 * S * sqrt(k).
double amplitude(double k, double mass);

/// Rational [2/2] approximation of exp(-u) for u >= 0, accurate near 0.
double pade_exp(double u);

/// Habit strength at an absolute time: forgetting factor times the circular
/// Gaussian around the usual time of day. The Gaussian exponential uses the
/// rational approximation inside the half-width focus zone and the true
/// exponential outside it.
double habit_intensity(const HabitRecord& rec, double now_abs_min);

/// Record an execution: shifts the midpoint, refreshes the forgetting clock,
/// and adds learn_rate * feedback to the mass (creating the record if absent).
void reinforce(HabitStore& store, const std::string& action_id, double exec_midpoint_min,
               double exec_half_width_rad, double feedback, double now_abs_min,
               const HabitParams& params);

/// Drop records whose decayed peak height has fallen below eps. Throws
/// std::invalid_argument for eps <= 0.
void prune(HabitStore& store, double now_abs_min, double eps);

/// Strongest k habits at the given time, ties broken by action id ascending.
std::vector<std::pair<std::string, double>> top_k_habits(const HabitStore& store,
                                                         double now_abs_min, int k);

}  // namespace mobcity
