#ifndef CTBN_SAMPLER_HPP_
#define CTBN_SAMPLER_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ctbn/model.hpp"
#include "ctbn/rng.hpp"
#include "ctbn/trajectory.hpp"

namespace ctbn {

// When to stop a simulated path: at a time horizon, after a number of
// transitions, or at whichever comes first when both are set.
struct StopRule {
  std::optional<double> max_time;
  std::optional<std::int64_t> max_transitions;

  static StopRule at_time(double t) { return {t, std::nullopt}; }
  static StopRule at_transitions(std::int64_t n) { return {std::nullopt, n}; }
};

namespace detail {

inline void check_stop_rule(const StopRule& stop) {
  if (!stop.max_time && !stop.max_transitions) {
    throw std::invalid_argument("sample_trajectory: stop rule sets neither max_time "
                                "nor max_transitions");
  }
  if (stop.max_time && (!(*stop.max_time > 0.0) || !std::isfinite(*stop.max_time))) {
    throw std::invalid_argument("sample_trajectory: max_time must be positive and finite");
  }
  if (stop.max_transitions && *stop.max_transitions < 1) {
    throw std::invalid_argument("sample_trajectory: max_transitions must be >= 1");
  }
}

// Initial state: factored form draws each component independently in id
// order; joint form spends a single draw on the full vector.
inline JointState draw_initial_state(const CtbnModel& model, SampleRng& rng) {
  const InitialDistribution& init = model.initial();
  if (init.factored) {
    JointState s(model.component_count());
    for (int k = 0; k < model.component_count(); ++k) {
      const Vector& f = (*init.factored)[k];
      s[k] = rng.categorical({f.data(), static_cast<size_t>(f.size())}, f.sum());
    }
    return s;
  }
  if (init.joint) {
    const Vector& p = *init.joint;
    int idx = rng.categorical({p.data(), static_cast<size_t>(p.size())}, p.sum());
    return model.state_space().decode(idx);
  }
  throw std::logic_error("sample_trajectory: model has no initial distribution");
}

}  // namespace detail

// Exact stochastic simulation of the CTBN at scale ratio `epsilon`.  In state
// a the holding time is Exponential with the total exit rate; the jumping
// component is drawn proportionally to per-component exit rates and its new
// local state proportionally to the local transition rates.  Rates come
// straight from the conditional tables evaluated at the current state, so the
// joint generator is never materialized and the cost per step is linear in
// the number of components.
//
// The draw sequence is fixed (initial state, then per step: holding time,
// component, target state) and every draw maps raw SampleRng bits through
// fixed arithmetic, so a given (model, epsilon, seed, stop) reproduces the
// identical path on any platform.
//
// A state with zero total exit rate is absorbing: the path simply stays
// there until the horizon (or, under a pure transition cap, ends at the
// moment it got stuck).
inline Trajectory sample_trajectory(const CtbnModel& model, double epsilon,
                                    std::uint64_t seed, const StopRule& stop) {
  detail::check_stop_rule(stop);
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("sample_trajectory: epsilon must be positive and finite");
  }
  const int m = model.component_count();
  if (m == 0) throw std::invalid_argument("sample_trajectory: empty model");

  std::vector<double> mult(m);
  for (int k = 0; k < m; ++k) mult[k] = model.rate_multiplier(k + 1, epsilon);

  SampleRng rng(seed);

  Trajectory traj;
  traj.component_ids.resize(m);
  traj.cardinalities.resize(m);
  for (int k = 0; k < m; ++k) {
    traj.component_ids[k] = k + 1;
    traj.cardinalities[k] = model.components()[k].cardinality;
  }

  JointState state = detail::draw_initial_state(model, rng);
  double t = 0.0;
  traj.states.push_back(state);
  traj.times.push_back(0.0);

  const double max_time = stop.max_time.value_or(std::numeric_limits<double>::infinity());
  const std::int64_t max_transitions =
      stop.max_transitions.value_or(std::numeric_limits<std::int64_t>::max());

  std::vector<double> exit(m);             // per-component exit rate, scaled
  std::vector<double> exit_raw(m);         // same, before the 1/eps scaling
  std::vector<double> local_rates;         // scratch for the target draw
  std::int64_t transitions = 0;
  while (transitions < max_transitions) {
    double total = 0.0;
    for (int k = 0; k < m; ++k) {
      const Matrix& q = model.table_at(k + 1, state);
      double r = 0.0;
      for (int x = 0; x < traj.cardinalities[k]; ++x) {
        if (x != state[k]) r += q(state[k], x);
      }
      exit_raw[k] = r;
      exit[k] = r * mult[k];
      total += exit[k];
    }
    if (!(total > 0.0)) {
      // Absorbing state: hold to the horizon if there is one, else end here.
      t = std::isfinite(max_time) ? max_time : t;
      break;
    }

    const double holding = rng.exponential(total);
    if (t + holding >= max_time) {
      // The clock would fire beyond the horizon; the final sojourn is
      // right-censored there.
      t = max_time;
      break;
    }
    t += holding;

    const int k = rng.categorical(exit, total);
    const Matrix& q = model.table_at(k + 1, state);
    local_rates.assign(traj.cardinalities[k], 0.0);
    for (int x = 0; x < traj.cardinalities[k]; ++x) {
      if (x != state[k]) local_rates[x] = q(state[k], x);
    }
    state[k] = rng.categorical(local_rates, exit_raw[k]);

    traj.states.push_back(state);
    traj.times.push_back(t);
    ++transitions;
  }
  // Every exit leaves t at the end of the observation window: the horizon
  // when the clock ran out, or the last jump under a pure transition cap.
  traj.horizon = t;
  return traj;
}

// Convenience form using the model's own epsilon.
inline Trajectory sample_trajectory(const CtbnModel& model, std::uint64_t seed,
                                    const StopRule& stop) {
  return sample_trajectory(model, model.epsilon(), seed, stop);
}

}  // namespace ctbn

#endif  // CTBN_SAMPLER_HPP_
