#include "mobcity/decision.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mobcity {

namespace {

std::string clock_text(double minute_of_day) {
  int m = static_cast<int>(minute_of_day + 0.5) % 1440;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", m / 60, m % 60);
  return buf;
}

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

constexpr const char* kDayNames[] = {"Sunday",   "Monday", "Tuesday", "Wednesday",
                                     "Thursday", "Friday", "Saturday"};

}  // namespace

bool Candidate::mode_feasible(Mode m) const {
  for (const RouteOption& r : routes) {
    if (r.mode == m) return true;
  }
  return false;
}

double needs_score(const Persona& p, const NeedVector& level, const ActionSpec& action,
                   const ScoreParams& params) {
  double hp = score_hp(p.traits, action.features, params.cosine_weights);
  double imp = score_importance(p.importance, level, action.contribution, params.k_tanh);
  return hp * imp;
}

std::vector<std::pair<const ActionSpec*, double>> top_k_needs(const Persona& p,
                                                              const NeedVector& level,
                                                              const ActionCatalog& catalog,
                                                              int k,
                                                              const ScoreParams& params) {
  if (catalog.size() == 0) throw std::runtime_error("top_k_needs: empty catalog");
  if (k < 1) throw std::invalid_argument("top_k_needs: k must be >= 1");
  std::vector<std::pair<const ActionSpec*, double>> scored;
  scored.reserve(catalog.size());
  for (const ActionSpec& a : catalog.actions()) {
    scored.emplace_back(&a, needs_score(p, level, a, params));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first->id < b.first->id;
  });
  if (static_cast<int>(scored.size()) > k) scored.resize(k);
  return scored;
}

namespace {

/// Nearest admissible venue for an action, or nullopt when the mask rejects
/// every venue of the category.
std::optional<Candidate> make_candidate(const ActionSpec& action, CandidateSource source,
                                        double score, const MaskContext& ctx) {
  std::vector<std::string> venue_ids;
  if (action.category == VenueCategory::ResidentialRoom) {
    // At-home actions happen at the agent's own residence only.
    venue_ids.push_back(ctx.home_venue.empty() ? ctx.current_venue : ctx.home_venue);
  } else {
    venue_ids = ctx.map->venues_of_category(action.category);
  }

  const Venue* best_venue = nullptr;
  double best_travel = std::numeric_limits<double>::infinity();
  double best_next = 0.0;
  for (const std::string& vid : venue_ids) {
    const Venue& venue = ctx.map->venue(vid);
    double travel = ctx.graphs->fastest_minutes(ctx.current_venue, vid);
    double to_obl = ctx.graphs->fastest_minutes(vid, ctx.obligation_venue);
    MaskInput in;
    in.t = ctx.t;
    in.action = &action;
    in.venue = &venue;
    in.travel_to_venue_min = travel;
    in.travel_to_obligation_min = to_obl;
    in.next_obligation_start = ctx.next_obligation_start;
    if (!mask(in)) continue;
    if (travel < best_travel) {
      best_travel = travel;
      best_venue = &venue;
      best_next = to_obl;
    }
  }
  if (!best_venue) return std::nullopt;

  Candidate c;
  c.action = &action;
  c.venue_id = best_venue->id;
  c.source = source;
  c.score = score;
  c.travel_to_venue_min = best_travel;
  c.travel_to_obligation_min = best_next;
  c.routes = ctx.graphs->route_options(ctx.current_venue, best_venue->id);
  return c;
}

}  // namespace

std::vector<Candidate> assemble_candidates(const Persona& p, const NeedVector& level,
                                           const HabitStore& habits,
                                           const ActionCatalog& catalog, int k_needs,
                                           int k_habit, double now_abs_min,
                                           const MaskContext& ctx,
                                           const ScoreParams& params) {
  if (k_needs < 1 || k_habit < 1) {
    throw std::invalid_argument("assemble_candidates: k values must be >= 1");
  }
  std::vector<Candidate> out;
  auto seen = [&out](const std::string& id) {
    return std::any_of(out.begin(), out.end(),
                       [&](const Candidate& c) { return c.action->id == id; });
  };

  // Score only the actions whose semantic window covers the current time;
  // otherwise out-of-window actions crowd the top-k and every slot dies in
  // the mask, leaving the agent idle.
  std::vector<std::pair<const ActionSpec*, double>> scored;
  for (const ActionSpec& a : catalog.actions()) {
    if (!in_semantic_window(a, ctx.t)) continue;
    scored.emplace_back(&a, needs_score(p, level, a, params));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first->id < b.first->id;
  });
  if (static_cast<int>(scored.size()) > k_needs) scored.resize(k_needs);
  for (const auto& [action, score] : scored) {
    if (auto c = make_candidate(*action, CandidateSource::Needs, score, ctx)) {
      out.push_back(std::move(*c));
    }
  }
  for (const auto& [action_id, intensity] : top_k_habits(habits, now_abs_min, k_habit)) {
    if (!catalog.contains(action_id) || seen(action_id)) continue;
    const ActionSpec& action = catalog.by_id(action_id);
    if (auto c = make_candidate(action, CandidateSource::Habit, intensity, ctx)) {
      out.push_back(std::move(*c));
    }
  }
  for (size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
  return out;
}

std::string build_prompt(const DecisionRequest& req) {
  std::ostringstream os;
  os << "You are " << req.persona_summary << ".\n";
  os << "It is " << kDayNames[req.day_of_week] << " " << clock_text(req.local_time)
     << ". Weather: " << weather_name(req.weather) << ", "
     << one_decimal(req.temperature_c) << "C.\n";
  os << "Need levels:";
  for (int i = 0; i < kNeedCount; ++i) {
    os << " " << need_name(i) << " " << one_decimal(req.needs[i]);
  }
  os << "\nNext mandatory task at " << clock_text(req.next_obligation_start) << ".\n";
  os << "Pick one option and a transport mode.\n";
  for (const Candidate& c : req.candidates) {
    os << c.index << ": " << c.action->name << " at " << c.venue_id << " (score "
       << one_decimal(c.score) << "; modes:";
    for (const RouteOption& r : c.routes) {
      os << " " << static_cast<int>(r.mode) << "=" << mode_name(r.mode) << " "
         << one_decimal(r.time_minutes()) << "min";
    }
    os << ")\n";
  }
  os << "Answer with two integers: option index and mode index "
        "(0=walking 1=pmv 2=bus).\n";
  return os.str();
}

int token_estimate(const std::string& text) {
  int count = 0;
  bool in_token = false;
  for (char ch : text) {
    bool ws = std::isspace(static_cast<unsigned char>(ch));
    if (!ws && !in_token) ++count;
    in_token = !ws;
  }
  return count;
}

DecisionResponse parse_response(const std::string& text, const DecisionRequest& request) {
  std::vector<int> ints;
  for (size_t i = 0; i < text.size() && ints.size() < 2;) {
    if (std::isdigit(static_cast<unsigned char>(text[i]))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      ints.push_back(std::stoi(text.substr(i, j - i)));
      i = j;
    } else {
      ++i;
    }
  }
  if (ints.size() < 2) throw std::runtime_error("decision reply lacks two integers");
  int idx = ints[0];
  if (idx < 0 || idx >= static_cast<int>(request.candidates.size())) {
    throw std::runtime_error("decision reply index out of range");
  }
  if (ints[1] < 0 || ints[1] > 2) throw std::runtime_error("decision reply mode out of range");
  Mode mode = static_cast<Mode>(ints[1]);
  if (!request.candidates[idx].mode_feasible(mode)) {
    throw std::runtime_error("decision reply chose an infeasible mode");
  }
  return {idx, mode, false};
}

DecisionResponse MockDecisionBackend::decide_one(const DecisionRequest& req, uint64_t) {
  if (req.candidates.empty()) throw std::runtime_error("mock decide: no candidates");
  // Habit pull and needs utility live on different scales, and a habit formed
  // minutes ago would otherwise loop the same action. Gate habit candidates by
  // how unmet their target needs still are.
  auto effective = [&](const Candidate& c) {
    if (c.source == CandidateSource::Needs) return c.score;
    int dominant = 0;
    for (int i = 1; i < kNeedCount; ++i) {
      if (c.action->contribution[i] > c.action->contribution[dominant]) dominant = i;
    }
    double deficit = 1.0 - req.needs[dominant];
    if (deficit < 0.5) return 0.0;
    return std::min(c.score, 1.0) * deficit * 0.5;
  };
  const Candidate* best = &req.candidates.front();
  for (const Candidate& c : req.candidates) {
    if (effective(c) > effective(*best)) best = &c;
  }

  std::vector<const RouteOption*> options;
  for (const RouteOption& r : best->routes) options.push_back(&r);
  // Rain discourages riding a PMV whenever an alternative exists.
  if (req.weather == Weather::Rainy && options.size() > 1) {
    std::erase_if(options, [](const RouteOption* r) { return r->mode == Mode::Pmv; });
  }

  auto fastest = [&]() {
    const RouteOption* out = options.front();
    for (const RouteOption* r : options) {
      if (r->time_steps < out->time_steps) out = r;
    }
    return out;
  };
  auto by_mode = [&](Mode m) -> const RouteOption* {
    for (const RouteOption* r : options) {
      if (r->mode == m) return r;
    }
    return nullptr;
  };

  double slack = req.next_obligation_start -
                 (req.local_time + best->travel_to_venue_min + best->action->duration_min +
                  best->travel_to_obligation_min);
  const RouteOption* chosen;
  if (slack < 20.0) {
    chosen = fastest();
  } else {
    const RouteOption* walk = by_mode(Mode::Walking);
    const RouteOption* bus = by_mode(Mode::Bus);
    bool high_income = req.category_code % 10 == 1;
    if (high_income && walk && bus && bus->time_steps < walk->time_steps) {
      chosen = bus;
    } else {
      chosen = options.front();
      for (const RouteOption* r : options) {
        if (r->money_cost < chosen->money_cost) chosen = r;
      }
    }
  }
  return {best->index, chosen->mode, false};
}

std::vector<DecisionResponse> MockDecisionBackend::batch_decide(
    const std::vector<DecisionRequest>& requests) {
  std::vector<DecisionResponse> out;
  out.reserve(requests.size());
  for (const DecisionRequest& r : requests) out.push_back(decide_one(r, seed_));
  return out;
}

}  // namespace mobcity
