#ifndef GPCOV_CONTROL_HPP
#define GPCOV_CONTROL_HPP

// Agent motion: normalized gradient descent with a fixed step until the
// cell-cost standard deviation plateaus, then Adam. Every displacement is
// capped at v_max and the result projected onto the domain rectangle.

#include <cmath>
#include <deque>

#include "gpcov/common.hpp"

namespace gpcov {

enum class Phase { NormalizedGD, Adam };

template <typename Scalar> struct OptimizerSettings {
  Scalar eta = Scalar(5);
  Scalar eta_adam = Scalar(2);
  Scalar v_max = Scalar(10);
  int window = 10; // plateau window k
  Scalar plateau_threshold = Scalar(0.02);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar adam_epsilon = Scalar(1e-8);

  void validate() const {
    if (!(eta > 0) || !(eta_adam > 0) || !(v_max > 0))
      throw ConfigError("step sizes and v_max must be positive");
    if (window < 1)
      throw ConfigError("plateau window must be at least 1");
    if (!(plateau_threshold > 0))
      throw ConfigError("plateau threshold must be positive");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1) || !(adam_epsilon > 0))
      throw ConfigError("invalid Adam constants");
  }
};

template <typename Scalar> struct OptimizerState {
  OptimizerSettings<Scalar> settings;
  Phase phase = Phase::NormalizedGD;
  Vector2<Scalar> adam_m = Vector2<Scalar>::Zero();
  Vector2<Scalar> adam_v = Vector2<Scalar>::Zero();
  int adam_t = 0;
  /// Most recent cell-cost std values, oldest first, at most window + 1.
  std::deque<Scalar> sigma_history;
};

/// Mean relative change of the last `window` std increments is at most the
/// threshold. Increments from a std below 1e-12 count as zero change.
template <typename Scalar> bool plateau_detected(const OptimizerState<Scalar> &state) {
  const int k = state.settings.window;
  if (static_cast<int>(state.sigma_history.size()) < k + 1)
    return false;
  const auto first = state.sigma_history.end() - (k + 1);
  Scalar sum = Scalar(0);
  for (auto it = first; it + 1 != state.sigma_history.end(); ++it) {
    const Scalar base = std::abs(*it);
    if (base < Scalar(1e-12))
      continue;
    sum += std::abs(*(it + 1) - *it) / base;
  }
  return sum / static_cast<Scalar>(k) <= state.settings.plateau_threshold;
}

/// Records a new std value and switches to Adam once a plateau shows up.
/// The switch is one-way.
template <typename Scalar> OptimizerState<Scalar> observe_sigma(OptimizerState<Scalar> state, Scalar sigma) {
  state.sigma_history.push_back(sigma);
  while (static_cast<int>(state.sigma_history.size()) > state.settings.window + 1)
    state.sigma_history.pop_front();
  if (state.phase == Phase::NormalizedGD && plateau_detected(state))
    state.phase = Phase::Adam;
  return state;
}

template <typename Scalar> struct StepResult {
  Point2<Scalar> position;
  OptimizerState<Scalar> state;
};

template <typename Scalar>
StepResult<Scalar> step(const Point2<Scalar> &position, const Vector2<Scalar> &gradient,
                        const OptimizerState<Scalar> &state, const Box<Scalar> &bounds) {
  if (!gradient.allFinite())
    throw std::domain_error("control step: non-finite gradient");
  const OptimizerSettings<Scalar> &s = state.settings;
  StepResult<Scalar> out{position, state};

  Vector2<Scalar> displacement = Vector2<Scalar>::Zero();
  if (state.phase == Phase::NormalizedGD) {
    const Scalar norm = gradient.norm();
    if (norm >= Scalar(1e-12))
      displacement = -s.eta * gradient / norm;
  } else {
    OptimizerState<Scalar> &next = out.state;
    next.adam_t += 1;
    next.adam_m = s.beta1 * state.adam_m + (Scalar(1) - s.beta1) * gradient;
    next.adam_v = s.beta2 * state.adam_v + (Scalar(1) - s.beta2) * gradient.cwiseAbs2();
    const Vector2<Scalar> m_hat = next.adam_m / (Scalar(1) - std::pow(s.beta1, next.adam_t));
    const Vector2<Scalar> v_hat = next.adam_v / (Scalar(1) - std::pow(s.beta2, next.adam_t));
    displacement = -s.eta_adam * m_hat.cwiseQuotient(
                                     (v_hat.cwiseSqrt().array() + s.adam_epsilon).matrix());
  }

  const Scalar length = displacement.norm();
  if (length > s.v_max)
    displacement *= s.v_max / length;
  out.position = bounds.clamp(position + displacement);
  return out;
}

} // namespace gpcov

#endif // GPCOV_CONTROL_HPP
