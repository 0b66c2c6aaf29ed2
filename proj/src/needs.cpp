#include "mobcity/needs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mobcity {

namespace {
constexpr const char* kNeedNames[kNeedCount] = {
    "Fullness",         "Energy",           "Health",
    "FinancialSecurity", "Pleasure",        "SocialConnection",
    "StatusRecognition", "SelfGrowth",
};

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace

const char* need_name(Need n) { return kNeedNames[static_cast<int>(n)]; }
const char* need_name(int i) { return kNeedNames[i]; }

NeedVector decay(const NeedVector& level, double dt_minutes, const NeedArray& rates) {
  if (dt_minutes < 0.0) {
    throw std::invalid_argument("decay: negative time delta");
  }
  NeedVector out;
  for (int i = 0; i < kNeedCount; ++i) {
    out[i] = clip01(level[i] - dt_minutes * rates[i]);
  }
  return out;
}

NeedVector apply_effect(const NeedVector& level, const NeedArray& contribution) {
  NeedVector out;
  for (int i = 0; i < kNeedCount; ++i) {
    out[i] = clip01(level[i] + contribution[i]);
  }
  return out;
}

NeedArray softmax(const NeedArray& v) {
  double mx = *std::max_element(v.begin(), v.end());
  NeedArray e;
  double sum = 0.0;
  for (int i = 0; i < kNeedCount; ++i) {
    e[i] = std::exp(v[i] - mx);
    sum += e[i];
  }
  for (double& x : e) x /= sum;
  return e;
}

double score_hp(std::span<const double> x_hp, std::span<const double> x_act,
                std::span<const double> weights) {
  if (x_hp.size() != x_act.size()) {
    throw std::invalid_argument("score_hp: vector dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < x_hp.size(); ++i) {
    double w = weights.empty() ? 1.0 : weights[i];
    double a = w * x_hp[i];
    double b = w * x_act[i];
    dot += a * b;
    na += a * a;
    nb += b * b;
  }
  if (na <= 0.0 || nb <= 0.0) {
    throw std::invalid_argument("score_hp: zero-norm weighted vector");
  }
  double cosine = dot / (std::sqrt(na) * std::sqrt(nb));
  return 0.5 * (1.0 + std::clamp(cosine, -1.0, 1.0));
}

double score_hp(std::span<const double> x_hp, std::span<const double> x_act) {
  return score_hp(x_hp, x_act, {});
}

double score_importance(const NeedArray& importance, const NeedVector& level,
                        const NeedArray& contribution, double k_tanh) {
  if (k_tanh <= 0.0) {
    throw std::invalid_argument("score_importance: k_tanh must be positive");
  }
  NeedArray w = softmax(importance);
  double sum = 0.0;
  for (int i = 0; i < kNeedCount; ++i) {
    double gain = std::max(contribution[i], 0.0);
    sum += w[i] * (1.0 - level[i]) * std::tanh(k_tanh * gain);
  }
  return sum;
}

}  // namespace mobcity
