#include "mobcity/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "mobcity/obligations.hpp"

namespace mobcity {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kEps = 1e-9;
}  // namespace

Simulation::Simulation(const CityMap& map, const TransitGraphs& graphs,
                       const ActionCatalog& catalog, std::vector<Persona> personas,
                       SimConfig config, DecisionBackend& decisions, CommBackend& comms,
                       EventSink& sink)
    : map_(&map),
      graphs_(&graphs),
      catalog_(&catalog),
      config_(std::move(config)),
      decisions_(&decisions),
      comms_(&comms),
      sink_(&sink) {
  if (config_.batch_size < 1 || config_.conv_batch_size < 1) {
    throw std::invalid_argument("batch sizes must be positive");
  }
  if (config_.weather.empty()) config_.weather.push_back({0, Weather::Sunny, 15.0});
  day_of_week_ = config_.start_day_of_week;
  for (Persona& p : personas) {
    AgentRuntime a;
    a.persona = std::move(p);
    a.venue = a.persona.home_venue;
    a.tile = map_->venue(a.venue).tiles.front();
    // Seeded per-agent starting satisfaction so the first morning is not
    // uniform across the population.
    std::mt19937_64 rng(config_.seed ^ (0x9E3779B97F4A7C15ULL * (a.persona.id + 1)));
    std::uniform_real_distribution<double> level(0.55, 0.9);
    for (double& v : a.needs) v = level(rng);
    int id = a.persona.id;
    if (!agents_.emplace(id, std::move(a)).second) {
      throw std::invalid_argument("duplicate persona id " + std::to_string(id));
    }
  }
  if (auto* mock = dynamic_cast<MockCommBackend*>(comms_)) {
    mock->bind_stores([this](int id) -> const MemoryStore* {
      auto it = agents_.find(id);
      return it == agents_.end() ? nullptr : &it->second.memory;
    });
  }
}

const AgentRuntime& Simulation::agent(int id) const {
  auto it = agents_.find(id);
  if (it == agents_.end()) throw std::out_of_range("unknown agent " + std::to_string(id));
  return it->second;
}

void Simulation::decay_to(AgentRuntime& a, double abs_min) {
  if (abs_min <= a.last_decay_abs) return;
  a.needs = decay(a.needs, abs_min - a.last_decay_abs, a.persona.decay_rates);
  a.last_decay_abs = abs_min;
}

void Simulation::emit(EventRecord e) {
  AgentRuntime& a = agents_.at(e.agent);
  if (e.t < a.last_event_t) e.t = a.last_event_t;
  a.last_event_t = e.t;
  e.day = day_;
  day_events_.push_back(std::move(e));
}

void Simulation::travel(AgentRuntime& a, const RouteOption& route,
                        const std::string& dest_venue, DaySummary& summary) {
  if (!route.legs.empty()) {
    double t = abs_now(a);
    for (const RouteLeg& leg : route.legs) {
      if (leg.tiles.empty()) continue;
      auto [x, y] = map_->coords(leg.tiles.front());
      EventRecord e;
      e.agent = a.persona.id;
      e.t = t;
      e.kind = EventKind::Moved;
      e.x = x;
      e.y = y;
      e.mode = leg.mode;
      emit(std::move(e));
      ++summary.movements;
      t += leg.steps * kMinutesPerStep;
    }
    const RouteLeg& last = route.legs.back();
    if (!last.tiles.empty()) {
      auto [x, y] = map_->coords(last.tiles.back());
      EventRecord e;
      e.agent = a.persona.id;
      e.t = t;
      e.kind = EventKind::Moved;
      e.x = x;
      e.y = y;
      e.mode = last.mode;
      emit(std::move(e));
      ++summary.movements;
      a.tile = last.tiles.back();
    }
  }
  a.theta += route.time_minutes();
  a.venue = dest_venue;
}

void Simulation::complete_action(AgentRuntime& a, const std::string& action_id,
                                 const std::string& activity_class, const NeedArray& effect,
                                 double t_start_abs, double end_abs, bool mandatory,
                                 double scheduled_start_abs) {
  decay_to(a, end_abs);
  NeedVector before = a.needs;
  a.needs = apply_effect(a.needs, effect);
  double gain = 0.0;
  for (int i = 0; i < kNeedCount; ++i) gain += std::max(0.0, a.needs[i] - before[i]);
  double feedback = std::clamp(gain / kNeedCount * 4.0, 0.0, 1.0);

  if (!mandatory) {
    double duration = end_abs - t_start_abs;
    double midpoint = std::fmod((t_start_abs + end_abs) / 2.0, 1440.0);
    reinforce(a.habits, action_id, midpoint, kPi * duration / 1440.0, feedback, end_abs,
              config_.habit_params);
  }
  a.memory.add(end_abs, action_id + " at " + a.venue);

  EventRecord e;
  e.agent = a.persona.id;
  e.t = end_abs;
  e.kind = EventKind::ActionCompleted;
  e.action_id = action_id;
  e.venue = a.venue;
  e.t_start = t_start_abs;
  e.needs = a.needs;
  e.feedback = feedback;
  e.activity_class = activity_class;
  e.mandatory = mandatory;
  e.scheduled_start = scheduled_start_abs;
  emit(std::move(e));

  fresh_stays_.push_back(
      {a.persona.id, a.venue, t_start_abs, end_abs, activity_class != "rest"});
}

void Simulation::execute_mandatory(AgentRuntime& a, const ObligationTask& task,
                                   double start_min, const std::string& venue_id,
                                   DaySummary& summary) {
  if (a.venue != venue_id) {
    auto options = graphs_->route_options(a.venue, venue_id);
    travel(a, options.front(), venue_id, summary);  // options sorted fastest-first
  }
  double arrive_abs = abs_now(a);
  if (a.theta < start_min) a.theta = start_min;  // early arrival waits on site
  double end_min = a.theta + task.duration;
  a.theta = end_min;
  complete_action(a, "task:" + task.label, task.activity_class, task.effect, arrive_abs,
                  day_ * 1440.0 + end_min, true, day_ * 1440.0 + start_min);
  ++summary.mandatory_actions;
}

void Simulation::process_agent(AgentRuntime& a, DaySummary& summary) {
  decay_to(a, abs_now(a));
  UpcomingObligation ob = next_obligation(a.persona.calendar, day_of_week_, a.theta);
  std::string ob_venue = ob.task->venue.empty() ? a.persona.home_venue : ob.task->venue;
  double travel_bound = a.venue == ob_venue ? 0.0 : graphs_->fastest_minutes(a.venue, ob_venue);
  double depart = ob.start - travel_bound;
  if (a.theta + kEps >= depart) {
    execute_mandatory(a, *ob.task, ob.start, ob_venue, summary);
    return;
  }

  double social_level = at(a.needs, Need::SocialConnection);
  if (social_level < config_.social.social_threshold) {
    auto tasks = detect_virtual(a.persona.id, social_level, abs_now(a), relationships_,
                                paired_today_, config_.social);
    for (ConversationTask& t : tasks) conversation_buffer_.push_back(std::move(t));
  }

  MaskContext ctx;
  ctx.map = map_;
  ctx.graphs = graphs_;
  ctx.current_venue = a.venue;
  ctx.home_venue = a.persona.home_venue;
  ctx.t = a.theta;
  ctx.next_obligation_start = ob.start;
  ctx.obligation_venue = ob_venue;
  ScoreParams score{config_.k_tanh, {}};
  auto candidates = assemble_candidates(a.persona, a.needs, a.habits, *catalog_,
                                        config_.k_needs, config_.k_habit, abs_now(a), ctx, score);
  if (candidates.empty()) {
    a.theta = std::min(depart, a.theta + config_.idle_minutes);
    return;
  }

  PendingRequest pr;
  pr.agent_id = a.persona.id;
  DecisionRequest& req = pr.request;
  req.agent_id = a.persona.id;
  req.local_time = a.theta;
  req.day_of_week = day_of_week_;
  req.persona_summary = a.persona.name + ", " + std::to_string(a.persona.age) + ", " +
                        a.persona.job_category + ", " + a.persona.financial_status;
  req.category_code = a.persona.category_code;
  req.needs = a.needs;
  EnvironmentState env{day_of_week_, config_.weather};
  auto [weather, temperature] = environment_at(env, a.theta);
  req.weather = weather;
  req.temperature_c = temperature;
  req.next_obligation_start = ob.start;
  req.candidates = std::move(candidates);
  summary.prompt_tokens += token_estimate(build_prompt(req));
  decision_buffer_.push_back(std::move(pr));
  a.pending = true;
  ++summary.decision_requests;
  if (static_cast<int>(decision_buffer_.size()) >= config_.batch_size) {
    dispatch_decisions(summary);
  }
}

void Simulation::apply_decision(const PendingRequest& pr, const DecisionResponse& response,
                                DaySummary& summary) {
  AgentRuntime& a = agents_.at(pr.agent_id);
  a.pending = false;
  const Candidate& c = pr.request.candidates.at(response.candidate);
  const ActionSpec& act = *c.action;

  const RouteOption* route = nullptr;
  const RouteOption* fastest = &c.routes.front();
  for (const RouteOption& r : c.routes) {
    if (r.mode == response.mode) route = &r;
    if (r.time_steps < fastest->time_steps) fastest = &r;
  }
  // The mask used the fastest-mode bound; a slower chosen mode could make the
  // plan late or miss the opening window, so re-check and fall back.
  auto feasible = [&](const RouteOption& r) {
    double arrive = a.theta + r.time_minutes();
    return venue_open(map_->venue(c.venue_id), arrive, act.duration_min) &&
           arrive + act.duration_min + c.travel_to_obligation_min <=
               pr.request.next_obligation_start + kEps;
  };
  if (!route || !feasible(*route)) route = feasible(*fastest) ? fastest : nullptr;
  if (!route) {
    a.theta += config_.idle_minutes;
    return;
  }

  if (a.venue != c.venue_id) travel(a, *route, c.venue_id, summary);
  double arrive_abs = abs_now(a);
  a.theta += act.duration_min;
  complete_action(a, act.id, act.activity_class, act.contribution, arrive_abs,
                  arrive_abs + act.duration_min, false, -1.0);
  ++summary.voluntary_actions;
}

void Simulation::dispatch_decisions(DaySummary& summary) {
  if (decision_buffer_.empty()) return;
  std::vector<PendingRequest> batch;
  batch.swap(decision_buffer_);
  std::vector<DecisionRequest> requests;
  requests.reserve(batch.size());
  for (const PendingRequest& pr : batch) requests.push_back(pr.request);
  std::vector<DecisionResponse> responses = decisions_->batch_decide(requests);
  if (responses.size() != requests.size()) {
    throw std::runtime_error("decision backend returned a mismatched batch");
  }
  ++summary.decision_batches;
  for (size_t i = 0; i < batch.size(); ++i) {
    if (responses[i].fallback_used) ++summary.fallback_decisions;
    apply_decision(batch[i], responses[i], summary);
  }
}

void Simulation::dispatch_conversations(DaySummary& summary) {
  if (conversation_buffer_.empty()) return;
  std::vector<ConversationTask> batch;
  batch.swap(conversation_buffer_);
  for (ConversationTask& task : batch) {
    auto snapshot = [this](int id) {
      std::vector<std::pair<int, std::string>> out;
      for (const MemoryEntry& e : agents_.at(id).memory.entries()) {
        out.emplace_back(e.id, e.text);
      }
      return out;
    };
    task.memory_a = snapshot(task.agent_a);
    task.memory_b = snapshot(task.agent_b);
  }
  std::vector<ExchangeResult> results = comms_->batch_communicate(batch);
  if (results.size() != batch.size()) {
    throw std::runtime_error("comm backend returned a mismatched batch");
  }
  ++summary.conversation_batches;
  summary.conversation_tasks += static_cast<int>(batch.size());

  NeedArray boost{};
  at(boost, Need::SocialConnection) = config_.social.conversation_gain;
  for (size_t i = 0; i < batch.size(); ++i) {
    const ConversationTask& task = batch[i];
    AgentRuntime& aa = agents_.at(task.agent_a);
    AgentRuntime& ab = agents_.at(task.agent_b);
    double now = std::max({task.t, aa.last_event_t, ab.last_event_t});
    apply_exchange(aa.memory, ab.memory, relationships_, task, results[i], now);
    aa.needs = apply_effect(aa.needs, boost);
    ab.needs = apply_effect(ab.needs, boost);
    double dr = std::clamp(results[i].delta_r, -0.2, 0.2);
    for (auto [self, partner] : {std::pair{task.agent_a, task.agent_b},
                                 std::pair{task.agent_b, task.agent_a}}) {
      EventRecord e;
      e.agent = self;
      e.t = task.t;
      e.kind = EventKind::Conversation;
      e.partner = partner;
      e.delta_r = dr;
      e.face_to_face = task.face_to_face;
      e.venue = task.venue;
      emit(std::move(e));
    }
  }
}

DaySummary Simulation::run_day() {
  auto wall_start = std::chrono::steady_clock::now();
  DaySummary summary;
  summary.day = day_;
  summary.day_of_week = day_of_week_;
  day_events_.clear();
  fresh_stays_.clear();
  stays_by_venue_.clear();
  paired_today_.clear();
  conversations_today_.clear();

  for (auto& [id, a] : agents_) {
    decay_to(a, day_ * 1440.0);
    EventRecord e;
    e.agent = id;
    e.t = day_ * 1440.0;
    e.kind = EventKind::DayStart;
    e.needs = a.needs;
    emit(std::move(e));
  }

  int rounds_left = 2000000;
  while (true) {
    for (auto& [id, a] : agents_) {
      if (a.pending || a.theta >= 1440.0) continue;
      process_agent(a, summary);
    }
    dispatch_decisions(summary);  // end-of-scan flush keeps outcomes B-invariant

    std::stable_sort(fresh_stays_.begin(), fresh_stays_.end(), [](const Stay& a, const Stay& b) {
      if (a.agent != b.agent) return a.agent < b.agent;
      return a.start < b.start;
    });
    auto tasks = detect_face_to_face(fresh_stays_, stays_by_venue_, paired_today_,
                                     conversations_today_, config_.social);
    fresh_stays_.clear();
    // Every future stay starts at or after the slowest agent's clock, so
    // fully past entries can never overlap again; dropping them keeps venue
    // scans proportional to concurrent occupancy instead of the whole day.
    double min_theta = 1440.0;
    for (const auto& [id, a] : agents_) min_theta = std::min(min_theta, a.theta);
    double horizon = day_ * 1440.0 + min_theta;
    int cap = config_.social.face_to_face_cap_per_day;
    for (auto& [venue, stays] : stays_by_venue_) {
      std::erase_if(stays, [&](const Stay& s) {
        if (s.end <= horizon || !s.sociable) return true;
        auto it = conversations_today_.find(s.agent);
        return it != conversations_today_.end() && it->second >= cap;
      });
    }
    for (ConversationTask& t : tasks) conversation_buffer_.push_back(std::move(t));
    if (static_cast<int>(conversation_buffer_.size()) >= config_.conv_batch_size) {
      dispatch_conversations(summary);
    }

    bool done = true;
    for (const auto& [id, a] : agents_) {
      if (a.theta < 1440.0) {
        done = false;
        break;
      }
    }
    if (done) break;
    if (--rounds_left == 0) throw std::runtime_error("scheduler failed to make progress");
  }
  dispatch_conversations(summary);  // end-of-day flush

  double day_end_abs = (day_ + 1) * 1440.0;
  for (auto& [id, a] : agents_) {
    decay_to(a, day_end_abs);
    prune(a.habits, day_end_abs, config_.habit_params.prune_threshold);
    EventRecord e;
    e.agent = id;
    e.t = day_end_abs;
    e.kind = EventKind::DayEnd;
    e.needs = a.needs;
    emit(std::move(e));
  }

  std::stable_sort(day_events_.begin(), day_events_.end(),
                   [](const EventRecord& a, const EventRecord& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return a.agent < b.agent;
                   });
  for (const EventRecord& e : day_events_) sink_->log(e);
  sink_->flush();
  day_events_.clear();

  for (auto& [id, a] : agents_) {
    a.theta = std::max(0.0, a.theta - 1440.0);
    a.pending = false;
  }
  ++day_;
  day_of_week_ = (day_of_week_ + 1) % 7;

  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return summary;
}

std::vector<DaySummary> Simulation::run(int days) {
  if (days < 1) throw std::invalid_argument("run: days must be >= 1");
  std::vector<DaySummary> out;
  out.reserve(days);
  for (int i = 0; i < days; ++i) out.push_back(run_day());
  return out;
}

void Simulation::save_checkpoint(const std::string& path) const {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["day"] = day_;
  doc["day_of_week"] = day_of_week_;
  nlohmann::json rel = nlohmann::json::array();
  for (const auto& [pair, score] : relationships_.raw()) {
    rel.push_back({pair.first, pair.second, score});
  }
  doc["relationships"] = rel;
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& [id, a] : agents_) {
    nlohmann::json ja;
    ja["id"] = id;
    ja["theta"] = a.theta;
    ja["needs"] = a.needs;
    ja["last_decay_abs"] = a.last_decay_abs;
    ja["last_event_t"] = a.last_event_t;
    ja["venue"] = a.venue;
    ja["tile"] = a.tile;
    nlohmann::json habits = nlohmann::json::array();
    for (const auto& [action, rec] : a.habits) {
      habits.push_back({{"action", rec.action_id},
                        {"midpoint", rec.midpoint_min},
                        {"last_reinforced", rec.last_reinforced_abs},
                        {"half_width", rec.half_width_rad},
                        {"mass", rec.mass},
                        {"forget_rate", rec.forget_rate}});
    }
    ja["habits"] = habits;
    nlohmann::json entries = nlohmann::json::array();
    for (const MemoryEntry& e : a.memory.entries()) {
      entries.push_back({{"id", e.id},
                         {"t", e.t},
                         {"text", e.text},
                         {"tags", e.tags},
                         {"shared_with", e.shared_with}});
    }
    ja["memory"] = {{"next_id", a.memory.next_id()}, {"entries", entries}};
    agents.push_back(std::move(ja));
  }
  doc["agents"] = agents;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << doc.dump(2) << '\n';
}

void Simulation::load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.at("version").get<int>() != 1) throw std::runtime_error("unsupported checkpoint version");
  day_ = doc.at("day").get<int>();
  day_of_week_ = doc.at("day_of_week").get<int>();
  relationships_ = RelationshipMatrix();
  for (const auto& entry : doc.at("relationships")) {
    relationships_.set(entry.at(0).get<int>(), entry.at(1).get<int>(), entry.at(2).get<double>());
  }
  for (const auto& ja : doc.at("agents")) {
    auto it = agents_.find(ja.at("id").get<int>());
    if (it == agents_.end()) {
      throw std::runtime_error("checkpoint references an unknown agent");
    }
    AgentRuntime& a = it->second;
    a.theta = ja.at("theta").get<double>();
    a.needs = ja.at("needs").get<NeedVector>();
    a.last_decay_abs = ja.at("last_decay_abs").get<double>();
    a.last_event_t = ja.at("last_event_t").get<double>();
    a.venue = ja.at("venue").get<std::string>();
    a.tile = ja.at("tile").get<int>();
    a.pending = false;
    a.habits.clear();
    for (const auto& jh : ja.at("habits")) {
      HabitRecord rec;
      rec.action_id = jh.at("action").get<std::string>();
      rec.midpoint_min = jh.at("midpoint").get<double>();
      rec.last_reinforced_abs = jh.at("last_reinforced").get<double>();
      rec.half_width_rad = jh.at("half_width").get<double>();
      rec.mass = jh.at("mass").get<double>();
      rec.forget_rate = jh.at("forget_rate").get<double>();
      a.habits[rec.action_id] = rec;
    }
    a.memory = MemoryStore(a.memory.capacity());
    const auto& jm = ja.at("memory");
    for (const auto& je : jm.at("entries")) {
      int id = a.memory.add(je.at("t").get<double>(), je.at("text").get<std::string>(),
                            je.at("tags").get<std::vector<std::string>>());
      MemoryEntry* entry = a.memory.find(id);
      entry->shared_with = je.at("shared_with").get<std::set<int>>();
      entry->id = je.at("id").get<int>();
    }
    a.memory.restore_next_id(jm.at("next_id").get<int>());
  }
}

}  // namespace mobcity
