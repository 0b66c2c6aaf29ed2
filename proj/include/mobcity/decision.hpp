#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mobcity/actions.hpp"
#include "mobcity/city_map.hpp"
#include "mobcity/habits.hpp"
#include "mobcity/needs.hpp"
#include "mobcity/obligations.hpp"
#include "mobcity/persona.hpp"
#include "mobcity/transport.hpp"

namespace mobcity {

enum class CandidateSource : int { Needs = 0, Habit };

struct Candidate {
  int index = 0;
  const ActionSpec* action = nullptr;
  std::string venue_id;
  CandidateSource source = CandidateSource::Needs;
  double score = 0.0;
  std::vector<RouteOption> routes;        ///< options to the candidate venue
  double travel_to_venue_min = 0.0;       ///< fastest-mode bound
  double travel_to_obligation_min = 0.0;  ///< candidate venue -> obligation venue

  bool mode_feasible(Mode m) const;
};

struct DecisionRequest {
  int agent_id = 0;
  double local_time = 0.0;  ///< minute of day
  int day_of_week = 1;
  std::string persona_summary;
  int category_code = 100;
  NeedVector needs{};
  Weather weather = Weather::Sunny;
  double temperature_c = 15.0;
  double next_obligation_start = 0.0;
  std::vector<Candidate> candidates;
};

struct DecisionResponse {
  int candidate = 0;
  Mode mode = Mode::Walking;
  bool fallback_used = false;
};

struct ScoreParams {
  double k_tanh = 3.0;
  std::vector<double> cosine_weights;  ///< empty = all ones
};

/// Needs-driven score of one action for one agent: trait affinity times
/// importance-weighted fulfillment of unsatisfied needs.
double needs_score(const Persona& p, const NeedVector& level, const ActionSpec& action,
                   const ScoreParams& params = {});

/// Top-k catalog actions by needs score, ties broken by action id ascending.
std::vector<std::pair<const ActionSpec*, double>> top_k_needs(const Persona& p,
                                                              const NeedVector& level,
                                                              const ActionCatalog& catalog,
                                                              int k,
                                                              const ScoreParams& params = {});

/// Context the admissibility filter needs while assembling candidates.
struct MaskContext {
  const CityMap* map = nullptr;
  const TransitGraphs* graphs = nullptr;
  std::string current_venue;
  std::string home_venue;  ///< target for at-home actions
  double t = 0.0;          ///< minute of day
  double next_obligation_start = 0.0;
  std::string obligation_venue;
};

/// Merge top-k needs and habit candidates, filter by the obligation mask, pick
/// the nearest admissible venue per action, dedupe by action id (needs source
/// wins) and re-index from zero. An empty result signals an idle wait.
std::vector<Candidate> assemble_candidates(const Persona& p, const NeedVector& level,
                                           const HabitStore& habits,
                                           const ActionCatalog& catalog, int k_needs,
                                           int k_habit, double now_abs_min,
                                           const MaskContext& ctx,
                                           const ScoreParams& params = {});

/// Deterministic multiple-choice prompt; byte-identical for identical requests.
std::string build_prompt(const DecisionRequest& request);

/// Count of whitespace-delimited tokens, the budget guard for prompts.
int token_estimate(const std::string& text);

/// Extract (candidate index, mode) from a model reply. Throws
/// std::runtime_error when no integers are found, the index is out of range,
/// or the mode is infeasible for the chosen candidate.
DecisionResponse parse_response(const std::string& text, const DecisionRequest& request);

/// Order-preserving batched decision backend; entries may be served
/// concurrently but results match requests by position.
class DecisionBackend {
 public:
  virtual ~DecisionBackend() = default;
  virtual std::vector<DecisionResponse> batch_decide(
      const std::vector<DecisionRequest>& requests) = 0;
};

/// Deterministic stand-in policy: argmax candidate by score; fastest feasible
/// mode under obligation pressure, otherwise cheapest; avoids PMV in rain and
/// prefers a strictly faster bus for high-income agents.
class MockDecisionBackend : public DecisionBackend {
 public:
  explicit MockDecisionBackend(uint64_t seed = 0) : seed_(seed) {}
  std::vector<DecisionResponse> batch_decide(
      const std::vector<DecisionRequest>& requests) override;

  /// Policy for a single request; exposed for fallback use.
  static DecisionResponse decide_one(const DecisionRequest& request, uint64_t seed);

 private:
  uint64_t seed_;
};

}  // namespace mobcity
