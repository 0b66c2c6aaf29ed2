#include "mobcity/obligations.hpp"

#include <stdexcept>

namespace mobcity {

UpcomingObligation next_obligation(const std::vector<ObligationTask>& calendar,
                                   int day_of_week, double t_min) {
  if (calendar.empty()) throw std::runtime_error("next_obligation: empty calendar");
  for (int offset = 0; offset < 8; ++offset) {
    int dow = (day_of_week + offset) % 7;
    const ObligationTask* best = nullptr;
    for (const ObligationTask& task : calendar) {
      if (!task.days[dow]) continue;
      double start = task.start + 1440.0 * offset;
      if (start < t_min) continue;
      if (!best || task.start < best->start) best = &task;
    }
    if (best) return {best, best->start + 1440.0 * offset};
  }
  throw std::runtime_error("next_obligation: no eligible task within a week");
}

bool mask(const MaskInput& in) {
  if (!in.action || !in.venue) throw std::invalid_argument("mask: incomplete input");
  if (!in_semantic_window(*in.action, in.t)) return false;
  double arrive = in.t + in.travel_to_venue_min;
  double duration = in.action->duration_min;
  if (!venue_open(*in.venue, arrive, duration)) return false;
  return arrive + duration + in.travel_to_obligation_min <= in.next_obligation_start;
}

}  // namespace mobcity
