#pragma once

#include <vector>

#include "mobcity/actions.hpp"
#include "mobcity/city_map.hpp"
#include "mobcity/persona.hpp"

namespace mobcity {

/// The next mandatory task at or after minute t of the given weekday, with its
/// start expressed in minutes from today's midnight (>= 1440 when it falls on
/// a following day).
struct UpcomingObligation {
  const ObligationTask* task = nullptr;
  double start = 0.0;
};

/// Throws std::runtime_error when the calendar has no eligible task at all.
UpcomingObligation next_obligation(const std::vector<ObligationTask>& calendar,
                                   int day_of_week, double t_min);

/// Everything the admissibility check needs about one candidate action.
struct MaskInput {
  double t = 0.0;                    ///< current minute of day
  const ActionSpec* action = nullptr;
  const Venue* venue = nullptr;      ///< candidate venue
  double travel_to_venue_min = 0.0;  ///< from the current location
  double travel_to_obligation_min = 0.0;  ///< from the candidate venue
  double next_obligation_start = 0.0;     ///< minutes from today's midnight
};

/// Admissibility: semantically timely, venue open for the whole stay, and
/// finishable (travel included) before the next mandatory task.
bool mask(const MaskInput& in);

}  // namespace mobcity
