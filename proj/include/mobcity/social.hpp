#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mobcity {

struct MemoryEntry {
  int id = 0;
  double t = 0.0;  ///< absolute minute
  std::string text;
  std::vector<std::string> tags;
  std::set<int> shared_with;  ///< partner agent ids this entry was shared with
};

/// Capacity-capped per-agent memory ring; ids are unique and timestamps
/// nondecreasing within one store.
class MemoryStore {
 public:
  explicit MemoryStore(size_t capacity = 50) : capacity_(capacity) {}

  int add(double t, std::string text, std::vector<std::string> tags = {});
  const std::deque<MemoryEntry>& entries() const { return entries_; }
  MemoryEntry* find(int id);
  const MemoryEntry* find(int id) const;
  size_t size() const { return entries_.size(); }
  size_t capacity() const { return capacity_; }
  int next_id() const { return next_id_; }
  void restore_next_id(int id) { next_id_ = id; }

 private:
  size_t capacity_;
  int next_id_ = 0;
  std::deque<MemoryEntry> entries_;
};

/// Sparse symmetric social-affinity scores in [0,1].
class RelationshipMatrix {
 public:
  double get(int a, int b) const;
  /// Adds delta and clips to [0,1]; creates the pair at 0 first if absent.
  void add(int a, int b, double delta);
  /// Ensures the pair exists, initializing new relationships.
  void ensure(int a, int b, double initial);
  bool contains(int a, int b) const;
  /// Highest-affinity partner of an agent, ties broken by lowest id.
  int best_partner(int agent) const;  ///< -1 when the agent knows nobody
  const std::map<std::pair<int, int>, double>& raw() const { return scores_; }
  void set(int a, int b, double value);

 private:
  static std::pair<int, int> key(int a, int b);
  std::map<std::pair<int, int>, double> scores_;
};

struct ConversationTask {
  int agent_a = 0;
  int agent_b = 0;
  bool face_to_face = true;
  double t = 0.0;       ///< absolute minute the contact was detected
  std::string venue;    ///< empty for virtual contact
  std::vector<std::pair<int, std::string>> memory_a;  ///< (id, text) snapshots
  std::vector<std::pair<int, std::string>> memory_b;
};

/// Outcome of one conversation: memory ids b shares with a, ids a shares with
/// b, and the affinity delta.
struct ExchangeResult {
  std::vector<int> to_a;
  std::vector<int> to_b;
  double delta_r = 0.0;
};

/// One finished stay at a venue, the unit of co-location detection.
struct Stay {
  int agent = 0;
  std::string venue;
  double start = 0.0;
  double end = 0.0;
  bool sociable = true;  ///< false for sleep and similar
};

struct SocialParams {
  double social_threshold = 0.3;
  double face_to_face_delta = 0.05;
  double virtual_delta = 0.02;
  double initial_relationship = 0.1;
  double conversation_gain = 0.1;  ///< SocialConnection boost per conversation
  int face_to_face_cap_per_day = 3;
};

/// Face-to-face tasks between freshly committed stays and earlier ones at the
/// same venue. `paired_today` and `conversations_today` are updated in place;
/// detection order is deterministic (by agent id, then overlap start).
std::vector<ConversationTask> detect_face_to_face(
    const std::vector<Stay>& fresh, std::map<std::string, std::vector<Stay>>& stays_by_venue,
    std::set<std::pair<int, int>>& paired_today, std::map<int, int>& conversations_today,
    const SocialParams& params);

/// Virtual-contact task for a lonely agent, or nullptr-equivalent empty list.
std::vector<ConversationTask> detect_virtual(int agent, double social_level, double now_abs,
                                             const RelationshipMatrix& relationships,
                                             std::set<std::pair<int, int>>& paired_today,
                                             const SocialParams& params);

/// Copy the referenced entries across stores (new local ids on the receiving
/// side; unknown ids are dropped) and apply the clipped affinity delta.
/// Returns the number of dropped indices.
int apply_exchange(MemoryStore& store_a, MemoryStore& store_b, RelationshipMatrix& relationships,
                   const ConversationTask& task, const ExchangeResult& result, double now_abs);

class CommBackend {
 public:
  virtual ~CommBackend() = default;
  virtual std::vector<ExchangeResult> batch_communicate(
      const std::vector<ConversationTask>& tasks) = 0;
};

/// Deterministic stand-in: each side shares its most recent entry not yet
/// shared with the partner; fixed affinity deltas by contact kind.
class MockCommBackend : public CommBackend {
 public:
  explicit MockCommBackend(uint64_t seed = 0) : seed_(seed) {}
  MockCommBackend(uint64_t seed, const SocialParams& params) : seed_(seed), params_(params) {}
  std::vector<ExchangeResult> batch_communicate(
      const std::vector<ConversationTask>& tasks) override;

  /// Needs store access to honour the not-yet-shared rule; the scheduler wires
  /// this before dispatch.
  void bind_stores(std::function<const MemoryStore*(int)> resolver) {
    resolve_store_ = std::move(resolver);
  }

 private:
  uint64_t seed_;
  SocialParams params_;
  std::function<const MemoryStore*(int)> resolve_store_;
};

}  // namespace mobcity
