#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mobcity/actions.hpp"
#include "mobcity/city_map.hpp"
#include "mobcity/decision.hpp"
#include "mobcity/habits.hpp"
#include "mobcity/needs.hpp"
#include "mobcity/persona.hpp"
#include "mobcity/social.hpp"
#include "mobcity/telemetry.hpp"
#include "mobcity/transport.hpp"

namespace mobcity {

struct SimConfig {
  int batch_size = 32;       ///< decision batch threshold B
  int conv_batch_size = 16;  ///< conversation batch threshold
  int k_needs = 5;
  int k_habit = 3;
  double k_tanh = 3.0;
  double idle_minutes = 15.0;  ///< wait when no candidate is admissible
  int start_day_of_week = 1;   ///< 0 = Sunday
  uint64_t seed = 0;
  HabitParams habit_params;
  TransportConfig transport;
  SocialParams social;
  std::vector<EnvironmentEntry> weather;  ///< empty = sunny 15C all day
};

/// Per-agent mutable simulation state; the scheduler is the single writer.
struct AgentRuntime {
  Persona persona;
  double theta = 0.0;  ///< local clock, minute of day (may overshoot 1440)
  NeedVector needs{};
  HabitStore habits;
  MemoryStore memory;
  std::string venue;
  int tile = 0;
  bool pending = false;       ///< a decision request is in flight
  double last_decay_abs = 0.0;
  double last_event_t = 0.0;  ///< keeps per-agent log timestamps nondecreasing
};

struct DaySummary {
  int day = 0;
  int day_of_week = 1;
  int decision_batches = 0;
  int decision_requests = 0;
  int fallback_decisions = 0;
  int conversation_batches = 0;
  int conversation_tasks = 0;
  long long prompt_tokens = 0;
  int voluntary_actions = 0;
  int mandatory_actions = 0;
  int movements = 0;
  double wall_seconds = 0.0;
};

/// Round-based asynchronous day loop. Agents are scanned in id order; requests
/// accumulate in a shared buffer dispatched when it reaches the batch size and
/// flushed at the end of every scan, so an agent's behaviour depends only on
/// its own snapshot and the batch size never changes outcomes. Buffered events
/// are emitted once per day, ordered by (timestamp, agent id).
class Simulation {
 public:
  Simulation(const CityMap& map, const TransitGraphs& graphs, const ActionCatalog& catalog,
             std::vector<Persona> personas, SimConfig config, DecisionBackend& decisions,
             CommBackend& comms, EventSink& sink);

  DaySummary run_day();
  std::vector<DaySummary> run(int days);

  int day() const { return day_; }
  int day_of_week() const { return day_of_week_; }
  const AgentRuntime& agent(int id) const;
  const std::map<int, AgentRuntime>& agents() const { return agents_; }
  const RelationshipMatrix& relationships() const { return relationships_; }

  /// Full mutable state (clocks, needs, habits, memories, relationships) as
  /// versioned JSON; a reloaded simulation continues identically.
  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

 private:
  struct PendingRequest {
    int agent_id = 0;
    DecisionRequest request;
  };

  void process_agent(AgentRuntime& a, DaySummary& summary);
  void execute_mandatory(AgentRuntime& a, const ObligationTask& task, double start_min,
                         const std::string& venue_id, DaySummary& summary);
  void apply_decision(const PendingRequest& pr, const DecisionResponse& response,
                      DaySummary& summary);
  void travel(AgentRuntime& a, const RouteOption& route, const std::string& dest_venue,
              DaySummary& summary);
  void complete_action(AgentRuntime& a, const std::string& action_id,
                       const std::string& activity_class, const NeedArray& effect,
                       double t_start_abs, double end_abs, bool mandatory,
                       double scheduled_start_abs);
  void dispatch_decisions(DaySummary& summary);
  void dispatch_conversations(DaySummary& summary);
  void decay_to(AgentRuntime& a, double abs_min);
  void emit(EventRecord e);
  double abs_now(const AgentRuntime& a) const { return day_ * 1440.0 + a.theta; }

  const CityMap* map_;
  const TransitGraphs* graphs_;
  const ActionCatalog* catalog_;
  SimConfig config_;
  DecisionBackend* decisions_;
  CommBackend* comms_;
  EventSink* sink_;

  std::map<int, AgentRuntime> agents_;
  RelationshipMatrix relationships_;
  int day_ = 0;
  int day_of_week_ = 1;

  std::vector<PendingRequest> decision_buffer_;
  std::vector<ConversationTask> conversation_buffer_;
  std::vector<Stay> fresh_stays_;
  std::map<std::string, std::vector<Stay>> stays_by_venue_;
  std::set<std::pair<int, int>> paired_today_;
  std::map<int, int> conversations_today_;
  std::vector<EventRecord> day_events_;
};

}  // namespace mobcity
