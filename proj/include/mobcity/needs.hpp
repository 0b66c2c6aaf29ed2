#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

namespace mobcity {

/// The eight need dimensions, ordered from physiological to self-actualization.
enum class Need : int {
  Fullness = 0,
  Energy,
  Health,
  FinancialSecurity,
  Pleasure,
  SocialConnection,
  StatusRecognition,
  SelfGrowth,
};

inline constexpr int kNeedCount = 8;

/// Fixed-size vector indexed by Need.
using NeedArray = std::array<double, kNeedCount>;

/// Dynamic per-agent satisfaction levels, each component kept in [0,1].
using NeedVector = NeedArray;

const char* need_name(Need n);
const char* need_name(int i);

inline double& at(NeedArray& a, Need n) { return a[static_cast<int>(n)]; }
inline double at(const NeedArray& a, Need n) { return a[static_cast<int>(n)]; }

/// Advance satisfaction levels by dt minutes of decay, clipped to [0,1].
/// Throws std::invalid_argument for negative dt.
NeedVector decay(const NeedVector& level, double dt_minutes, const NeedArray& rates);

/// Apply an action's need contribution, clipped to [0,1] componentwise.
NeedVector apply_effect(const NeedVector& level, const NeedArray& contribution);

/// Softmax over the eight components; output sums to 1.
NeedArray softmax(const NeedArray& v);

/// Weighted cosine similarity between trait vectors, mapped to [0,1].
/// Throws std::invalid_argument when a weighted vector has zero norm.
double score_hp(std::span<const double> x_hp, std::span<const double> x_act,
                std::span<const double> weights);

/// Uniform-weight overload.
double score_hp(std::span<const double> x_hp, std::span<const double> x_act);

/// Importance-weighted fulfillment of unsatisfied needs:
/// sum_i softmax(importance)_i * (1 - level_i) * tanh(k * relu(contribution_i)).
double score_importance(const NeedArray& importance, const NeedVector& level,
                        const NeedArray& contribution, double k_tanh);

}  // namespace mobcity
