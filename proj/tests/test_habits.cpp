#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mobcity/habits.hpp"

using namespace mobcity;

namespace {

constexpr double kPi = std::numbers::pi;

HabitRecord make_record(double midpoint, double half_width, double mass,
                        double forget_rate = 0.0, double last = 0.0) {
  HabitRecord rec;
  rec.action_id = "x";
  rec.midpoint_min = midpoint;
  rec.half_width_rad = half_width;
  rec.mass = mass;
  rec.forget_rate = forget_rate;
  rec.last_reinforced_abs = last;
  return rec;
}

/// Composite-Simpson quadrature of exp(-k t^2) over [lo, hi].
double gauss_integral(double k, double lo, double hi, int n = 4000) {
  auto f = [k](double t) { return std::exp(-k * t * t); };
  double h = (hi - lo) / n;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("delta_theta wraps the day circle into [-pi, pi]") {
  CHECK(delta_theta(480.0, 480.0) == doctest::Approx(0.0));
  CHECK(delta_theta(720.0, 0.0) == doctest::Approx(kPi));
  // One minute before the midpoint, across midnight.
  CHECK(delta_theta(1439.0, 0.0) == doctest::Approx(-2.0 * kPi / 1440.0));
  // 20 minutes after a late-evening midpoint, wrapping forward.
  CHECK(delta_theta(10.0, 1430.0) == doctest::Approx(20.0 * 2.0 * kPi / 1440.0));
  // The antipode maps to +pi from either side of the circle.
  CHECK(delta_theta(0.0, 720.0) == doctest::Approx(kPi).epsilon(1e-9));
}

TEST_CASE("sharpness from the half-width matches the frozen values") {
  // k = (1.163 / a)^2 evaluated by hand for both admissible extremes.
  CHECK(k_from_halfwidth(kPi / 8.0) == doctest::Approx(8.7716).epsilon(1e-4));
  CHECK(k_from_halfwidth(kPi / 48.0) == doctest::Approx(315.78).epsilon(1e-4));
  CHECK_THROWS_AS(k_from_halfwidth(0.0), std::invalid_argument);
}

TEST_CASE("amplitude matches the frozen value and is linear in the mass") {
  double k = k_from_halfwidth(kPi / 8.0);
  CHECK(amplitude(k, 1.0) == doctest::Approx(1.857).epsilon(1e-3));
  CHECK(amplitude(k, 2.5) == doctest::Approx(2.5 * amplitude(k, 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(amplitude(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(amplitude(k, 0.0), std::invalid_argument);
}

TEST_CASE("the focus zone holds 90% of the Gaussian mass for any half-width") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> width(kMinHalfWidth, kMaxHalfWidth);
  for (int trial = 0; trial < 50; ++trial) {
    double a = width(rng);
    double k = k_from_halfwidth(a);
    double inside = gauss_integral(k, -a, a);
    double total = std::sqrt(kPi / k);  // integral over the whole line
    CHECK(inside / total == doctest::Approx(0.9).epsilon(0.005 / 0.9));
  }
}

TEST_CASE("peak height times the focus-zone area recovers the mass within 2%") {
  for (double a : {kMinHalfWidth, 0.1, kMaxHalfWidth}) {
    for (double mass : {0.5, 1.0, 3.0}) {
      double k = k_from_halfwidth(a);
      double area = amplitude(k, mass) * gauss_integral(k, -a, a);
      CHECK(area == doctest::Approx(mass).epsilon(0.02));
    }
  }
}

TEST_CASE("the rational approximation stays within 1% over the focus zone") {
  CHECK(pade_exp(0.0) == doctest::Approx(1.0));
  // Inside the zone the exponent never exceeds k * a^2 = 1.163^2.
  double u_max = 1.163 * 1.163;
  double prev = 2.0;
  for (int i = 0; i <= 200; ++i) {
    double u = u_max * i / 200.0;
    double approx = pade_exp(u);
    CHECK(std::abs(approx - std::exp(-u)) / std::exp(-u) <= 0.01);
    CHECK(approx < prev);  // monotonically decreasing
    prev = approx;
  }
}

TEST_CASE("intensity at the midpoint equals the fresh amplitude") {
  HabitRecord rec = make_record(480.0, kPi / 8.0, 1.0);
  double k = k_from_halfwidth(kPi / 8.0);
  CHECK(habit_intensity(rec, 480.0) == doctest::Approx(amplitude(k, 1.0)).epsilon(1e-12));
}

TEST_CASE("intensity is symmetric around the midpoint and day-periodic without forgetting") {
  HabitRecord rec = make_record(720.0, 0.1, 2.0);
  CHECK(habit_intensity(rec, 660.0) == doctest::Approx(habit_intensity(rec, 780.0)));
  // Same time of day on a later day gives the same value when r = 0.
  CHECK(habit_intensity(rec, 720.0 + 3 * 1440.0) ==
        doctest::Approx(habit_intensity(rec, 720.0)));
}

TEST_CASE("forgetting follows the exponential curve") {
  double r = 1.0 / 4320.0;
  HabitRecord rec = make_record(600.0, kPi / 8.0, 1.0, r, 600.0);
  double fresh = habit_intensity(rec, 600.0);
  // One forgetting time constant later, at the same time of day.
  double later = habit_intensity(rec, 600.0 + 3 * 1440.0);
  CHECK(later == doctest::Approx(fresh * std::exp(-1.0)).epsilon(1e-9));
  // Half-life check: peak halves after ln(2)/r minutes.
  double half_life = std::log(2.0) / r;
  HabitRecord rec2 = make_record(0.0, kPi / 8.0, 1.0, r, 0.0);
  double t = half_life;
  double theta = delta_theta(std::fmod(t, 1440.0), 0.0);
  double k = k_from_halfwidth(rec2.half_width_rad);
  double shape = std::abs(theta) <= rec2.half_width_rad ? pade_exp(k * theta * theta)
                                                        : std::exp(-k * theta * theta);
  CHECK(habit_intensity(rec2, t) ==
        doctest::Approx(0.5 * amplitude(k, 1.0) * shape).epsilon(1e-9));
  CHECK_THROWS_AS(habit_intensity(rec, 0.0), std::invalid_argument);  // clock before reinforcement
}

TEST_CASE("outside the focus zone the true exponential is used") {
  HabitRecord rec = make_record(0.0, kPi / 48.0, 1.0);
  double k = k_from_halfwidth(rec.half_width_rad);
  double theta = delta_theta(240.0, 0.0);  // far outside the zone
  REQUIRE(std::abs(theta) > rec.half_width_rad);
  CHECK(habit_intensity(rec, 240.0) ==
        doctest::Approx(amplitude(k, 1.0) * std::exp(-k * theta * theta)).epsilon(1e-12));
}

TEST_CASE("reinforce accumulates mass and refreshes the record") {
  HabitStore store;
  HabitParams params;
  reinforce(store, "jog", 400.0, 0.2, 0.5, 1000.0, params);
  REQUIRE(store.count("jog") == 1);
  const HabitRecord& rec = store["jog"];
  CHECK(rec.mass == doctest::Approx(0.5));
  CHECK(rec.midpoint_min == doctest::Approx(400.0));
  CHECK(rec.half_width_rad == doctest::Approx(0.2));
  CHECK(rec.last_reinforced_abs == doctest::Approx(1000.0));

  reinforce(store, "jog", 1850.0, 1.0, 0.8, 2500.0, params);  // next day, wide execution
  CHECK(store["jog"].mass == doctest::Approx(1.3));
  CHECK(store["jog"].midpoint_min == doctest::Approx(410.0));            // wrapped mod 1440
  CHECK(store["jog"].half_width_rad == doctest::Approx(kMaxHalfWidth));  // clamped
  CHECK(store["jog"].last_reinforced_abs == doctest::Approx(2500.0));

  // Zero feedback neither creates nor strengthens.
  reinforce(store, "new", 100.0, 0.1, 0.0, 3000.0, params);
  CHECK(store.count("new") == 0);

  // Half-width clamps at the lower bound too.
  reinforce(store, "snack", 300.0, 1e-4, 1.0, 3000.0, params);
  CHECK(store["snack"].half_width_rad == doctest::Approx(kMinHalfWidth));
}

TEST_CASE("prune removes a habit exactly when its decayed peak falls below eps") {
  // A = 1.857, eps = 0.01 -> removal once exp(-0.001 * elapsed) < 0.01 / 1.857,
  // i.e. elapsed > ln(185.7) / 0.001 ~= 5224 minutes.
  HabitStore store;
  store["x"] = make_record(480.0, kPi / 8.0, 1.0, 0.001, 0.0);

  HabitStore keep = store;
  prune(keep, 5000.0, 0.01);
  CHECK(keep.count("x") == 1);

  HabitStore drop = store;
  prune(drop, 5400.0, 0.01);
  CHECK(drop.count("x") == 0);

  CHECK_THROWS_AS(prune(store, 100.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prune(store, 100.0, -1.0), std::invalid_argument);
}

TEST_CASE("top_k_habits ranks by current intensity with id tie-breaks") {
  HabitStore store;
  store["b"] = make_record(480.0, kPi / 8.0, 1.0);
  store["a"] = make_record(480.0, kPi / 8.0, 1.0);  // identical -> tie on intensity
  store["strong"] = make_record(480.0, kPi / 8.0, 5.0);
  store["far"] = make_record(1200.0, kPi / 48.0, 5.0);  // wrong time of day

  auto top = top_k_habits(store, 480.0, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].first == "strong");
  CHECK(top[1].first == "a");
  CHECK(top[2].first == "b");
  CHECK(top[1].second == doctest::Approx(top[2].second));

  CHECK(top_k_habits(store, 480.0, 10).size() == 4);
  CHECK(top_k_habits(HabitStore{}, 480.0, 3).empty());
}
