#include "mobcity/social.hpp"

#include <algorithm>
#include <cmath>

namespace mobcity {

int MemoryStore::add(double t, std::string text, std::vector<std::string> tags) {
  MemoryEntry e;
  e.id = next_id_++;
  e.t = t;
  e.text = std::move(text);
  e.tags = std::move(tags);
  entries_.push_back(std::move(e));
  while (entries_.size() > capacity_) entries_.pop_front();
  return entries_.back().id;
}

MemoryEntry* MemoryStore::find(int id) {
  for (auto& e : entries_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const MemoryEntry* MemoryStore::find(int id) const {
  return const_cast<MemoryStore*>(this)->find(id);
}

std::pair<int, int> RelationshipMatrix::key(int a, int b) {
  return {std::min(a, b), std::max(a, b)};
}

double RelationshipMatrix::get(int a, int b) const {
  auto it = scores_.find(key(a, b));
  return it == scores_.end() ? 0.0 : it->second;
}

void RelationshipMatrix::add(int a, int b, double delta) {
  double& s = scores_[key(a, b)];
  s = std::clamp(s + delta, 0.0, 1.0);
}

void RelationshipMatrix::ensure(int a, int b, double initial) {
  scores_.emplace(key(a, b), std::clamp(initial, 0.0, 1.0));
}

bool RelationshipMatrix::contains(int a, int b) const {
  return scores_.count(key(a, b)) > 0;
}

void RelationshipMatrix::set(int a, int b, double value) {
  scores_[key(a, b)] = std::clamp(value, 0.0, 1.0);
}

int RelationshipMatrix::best_partner(int agent) const {
  int best = -1;
  double best_score = -1.0;
  for (const auto& [pair, score] : scores_) {
    int other = -1;
    if (pair.first == agent) other = pair.second;
    else if (pair.second == agent) other = pair.first;
    else continue;
    if (score > best_score || (score == best_score && other < best)) {
      best_score = score;
      best = other;
    }
  }
  return best;
}

std::vector<ConversationTask> detect_face_to_face(
    const std::vector<Stay>& fresh, std::map<std::string, std::vector<Stay>>& stays_by_venue,
    std::set<std::pair<int, int>>& paired_today, std::map<int, int>& conversations_today,
    const SocialParams& params) {
  std::vector<ConversationTask> tasks;
  for (const Stay& stay : fresh) {
    // An agent already at its daily cap cannot start anything, so skip the
    // venue scan entirely; crowded venues would otherwise cost a full pass.
    if (stay.sociable &&
        conversations_today[stay.agent] < params.face_to_face_cap_per_day) {
      auto& list = stays_by_venue[stay.venue];
      // Entries that can never pair again (asleep or capped) only slow every
      // later scan of this venue down; drop them while we are here anyway.
      std::erase_if(list, [&](const Stay& s) {
        return !s.sociable ||
               conversations_today[s.agent] >= params.face_to_face_cap_per_day;
      });
      for (const Stay& other : list) {
        if (conversations_today[stay.agent] >= params.face_to_face_cap_per_day) break;
        if (other.agent == stay.agent) continue;
        double overlap_start = std::max(stay.start, other.start);
        double overlap_end = std::min(stay.end, other.end);
        if (overlap_start >= overlap_end) continue;
        if (conversations_today[other.agent] >= params.face_to_face_cap_per_day) continue;
        auto pair = std::minmax(stay.agent, other.agent);
        if (!paired_today.insert({pair.first, pair.second}).second) continue;
        ++conversations_today[stay.agent];
        ++conversations_today[other.agent];
        ConversationTask task;
        task.agent_a = pair.first;
        task.agent_b = pair.second;
        task.face_to_face = true;
        task.t = overlap_start;
        task.venue = stay.venue;
        tasks.push_back(std::move(task));
      }
    }
    stays_by_venue[stay.venue].push_back(stay);
  }
  return tasks;
}

std::vector<ConversationTask> detect_virtual(int agent, double social_level, double now_abs,
                                             const RelationshipMatrix& relationships,
                                             std::set<std::pair<int, int>>& paired_today,
                                             const SocialParams& params) {
  std::vector<ConversationTask> tasks;
  if (social_level >= params.social_threshold) return tasks;
  int partner = relationships.best_partner(agent);
  if (partner < 0) return tasks;
  auto pair = std::minmax(agent, partner);
  if (paired_today.count({pair.first, pair.second})) return tasks;
  paired_today.insert({pair.first, pair.second});
  ConversationTask task;
  task.agent_a = pair.first;
  task.agent_b = pair.second;
  task.face_to_face = false;
  task.t = now_abs;
  tasks.push_back(std::move(task));
  return tasks;
}

int apply_exchange(MemoryStore& store_a, MemoryStore& store_b, RelationshipMatrix& relationships,
                   const ConversationTask& task, const ExchangeResult& result, double now_abs) {
  int dropped = 0;
  double delta = std::clamp(result.delta_r, -0.2, 0.2);
  relationships.ensure(task.agent_a, task.agent_b, 0.0);
  relationships.add(task.agent_a, task.agent_b, delta);

  auto copy_entries = [&](const std::vector<int>& ids, MemoryStore& from, MemoryStore& to,
                          int receiver) {
    for (int id : ids) {
      MemoryEntry* src = from.find(id);
      if (!src) {
        ++dropped;
        continue;
      }
      src->shared_with.insert(receiver);
      to.add(now_abs, src->text, src->tags);
    }
  };
  copy_entries(result.to_a, store_b, store_a, task.agent_a);
  copy_entries(result.to_b, store_a, store_b, task.agent_b);
  return dropped;
}

std::vector<ExchangeResult> MockCommBackend::batch_communicate(
    const std::vector<ConversationTask>& tasks) {
  std::vector<ExchangeResult> out;
  out.reserve(tasks.size());
  for (const ConversationTask& task : tasks) {
    ExchangeResult r;
    r.delta_r = task.face_to_face ? params_.face_to_face_delta : params_.virtual_delta;
    auto pick_latest_unshared = [&](int owner, int partner) -> std::vector<int> {
      if (!resolve_store_) return {};
      const MemoryStore* store = resolve_store_(owner);
      if (!store) return {};
      const auto& entries = store->entries();
      for (auto e = entries.rbegin(); e != entries.rend(); ++e) {
        if (!e->shared_with.count(partner)) return {e->id};
      }
      return {};
    };
    r.to_a = pick_latest_unshared(task.agent_b, task.agent_a);
    r.to_b = pick_latest_unshared(task.agent_a, task.agent_b);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mobcity
