#ifndef CTBN_DYNAMICS_HPP_
#define CTBN_DYNAMICS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/ctmc.hpp"
#include "ctbn/model.hpp"
#include "ctbn/rate_matrix.hpp"
#include "ctbn/state_space.hpp"

// Bridges the factored model and dense CTMC land: amalgamation of the
// conditional rate matrices into the joint generator, its fast/slow
// decomposition, and the conditional generator of the fast subsystem with the
// slow components held fixed.

namespace ctbn {

// Joint state spaces above this many states are refused by the dense
// amalgamation routines; callers that need more should stay in factored form
// (the sampler does).
inline constexpr StateIndex kDenseStateCap = StateIndex{1} << 20;

namespace detail {

inline void require_dense(const StateSpace& space, const char* who,
                          StateIndex max_states) {
  if (space.size() > max_states) {
    throw std::length_error(std::string(who) + ": joint space has " +
                            std::to_string(space.size()) + " states, cap is " +
                            std::to_string(max_states));
  }
  if (space.component_count() == 0) {
    throw std::invalid_argument(std::string(who) + ": empty model");
  }
}

}  // namespace detail

// Joint generator of the whole process at scale ratio `epsilon`.  Because a
// transition changes exactly one component, entry (a,b) for a != b is that
// component's conditional rate under the parents' values in a (times 1/eps
// for a fast component), and zero when a and b differ in more than one
// coordinate.  The diagonal makes every row sum to zero.
inline Matrix amalgamate(const CtbnModel& model, double epsilon,
                         StateIndex max_states = kDenseStateCap) {
  const StateSpace& space = model.state_space();
  detail::require_dense(space, "amalgamate", max_states);
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("amalgamate: epsilon must be positive and finite");
  }
  const int m = model.component_count();
  std::vector<double> mult(m);
  for (int k = 0; k < m; ++k) mult[k] = model.rate_multiplier(k + 1, epsilon);

  const StateIndex n = space.size();
  Matrix q = Matrix::Zero(n, n);
  JointState a(m, 0);
  for (StateIndex ia = 0; ia < n; ++ia) {
    double exit = 0.0;
    for (int k = 0; k < m; ++k) {
      const Matrix& local = model.table_at(k + 1, a);
      const StateIndex stride = space.stride(k);
      for (int x = 0; x < model.components()[k].cardinality; ++x) {
        if (x == a[k]) continue;
        const double rate = mult[k] * local(a[k], x);
        if (rate == 0.0) continue;
        q(ia, ia + (x - a[k]) * stride) = rate;
        exit += rate;
      }
    }
    q(ia, ia) = -exit;
    space.next(a);
  }
  return q;
}

// Convenience form using the model's own epsilon.
inline Matrix amalgamate(const CtbnModel& model) {
  return amalgamate(model, model.epsilon());
}

// Decomposition Q = (1/epsilon) * q_fast + q_slow: q_fast amalgamates the
// fast components' stored (epsilon-independent) matrices, q_slow the slow
// ones.  Both summands are valid generators in their own right.
struct FastSlowSplit {
  Matrix q_fast;
  Matrix q_slow;
};

inline FastSlowSplit split_fast_slow(const CtbnModel& model,
                                     StateIndex max_states = kDenseStateCap) {
  const StateSpace& space = model.state_space();
  detail::require_dense(space, "split_fast_slow", max_states);
  const int m = model.component_count();
  const StateIndex n = space.size();
  FastSlowSplit split{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  JointState a(m, 0);
  for (StateIndex ia = 0; ia < n; ++ia) {
    double exit_fast = 0.0, exit_slow = 0.0;
    for (int k = 0; k < m; ++k) {
      const bool fast = model.components()[k].scale == Scale::fast;
      Matrix& q = fast ? split.q_fast : split.q_slow;
      double& exit = fast ? exit_fast : exit_slow;
      const Matrix& local = model.table_at(k + 1, a);
      const StateIndex stride = space.stride(k);
      for (int x = 0; x < model.components()[k].cardinality; ++x) {
        if (x == a[k]) continue;
        const double rate = local(a[k], x);
        if (rate == 0.0) continue;
        q(ia, ia + (x - a[k]) * stride) = rate;
        exit += rate;
      }
    }
    split.q_fast(ia, ia) = -exit_fast;
    split.q_slow(ia, ia) = -exit_slow;
    space.next(a);
  }
  return split;
}

// Generator of the fast subsystem with the slow components clamped to
// `slow_values` (values for the slow components in ascending id order).  The
// state space is the product of the fast components, again in ascending id
// order, and rates are taken in stored, epsilon-independent form: the
// wall-clock fast generator is this matrix times 1/epsilon, but conditional
// equilibria and ergodicity do not care about the scale.
inline Matrix conditional_fast_generator(const CtbnModel& model,
                                         std::span<const int> slow_values) {
  const std::vector<int>& fast_ids = model.fast_ids();
  if (fast_ids.empty()) {
    throw std::invalid_argument("conditional_fast_generator: model has no fast components");
  }
  std::vector<int> fast_cards;
  fast_cards.reserve(fast_ids.size());
  for (int id : fast_ids) fast_cards.push_back(model.component(id).cardinality);
  StateSpace fast_space(fast_cards);
  detail::require_dense(fast_space, "conditional_fast_generator", kDenseStateCap);

  const StateIndex n = fast_space.size();
  Matrix q = Matrix::Zero(n, n);
  JointState fast_state(fast_ids.size(), 0);
  for (StateIndex ia = 0; ia < n; ++ia) {
    JointState full = compose_fast_slow(model, fast_state, slow_values);
    double exit = 0.0;
    for (size_t k = 0; k < fast_ids.size(); ++k) {
      const Matrix& local = model.table_at(fast_ids[k], full);
      const StateIndex stride = fast_space.stride(static_cast<int>(k));
      for (int x = 0; x < fast_cards[k]; ++x) {
        if (x == fast_state[k]) continue;
        const double rate = local(fast_state[k], x);
        if (rate == 0.0) continue;
        q(ia, ia + (x - fast_state[k]) * stride) = rate;
        exit += rate;
      }
    }
    q(ia, ia) = -exit;
    fast_space.next(fast_state);
  }
  return q;
}

// Marginal of a joint distribution onto the coordinates at `keep` (0-based
// positions into `space`, strictly ascending), summing out the others.  The
// result is indexed by the kept coordinates' own product space, in the same
// relative order.
inline Vector marginalize(const Vector& p, const StateSpace& space,
                          std::span<const int> keep) {
  if (p.size() != space.size()) {
    throw std::invalid_argument("marginalize: distribution does not match the space");
  }
  std::vector<int> kept_cards;
  for (size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= space.component_count() ||
        (k > 0 && keep[k] <= keep[k - 1])) {
      throw std::invalid_argument("marginalize: positions must be strictly ascending "
                                  "and inside the space");
    }
    kept_cards.push_back(space.cardinality(keep[k]));
  }
  StateSpace sub(kept_cards);
  Vector out = Vector::Zero(sub.size());
  JointState s(space.component_count(), 0);
  JointState proj(keep.size(), 0);
  for (StateIndex i = 0; i < space.size(); ++i) {
    for (size_t k = 0; k < keep.size(); ++k) proj[k] = s[keep[k]];
    out(sub.encode(proj)) += p(i);
    space.next(s);
  }
  return out;
}

}  // namespace ctbn

#endif  // CTBN_DYNAMICS_HPP_
