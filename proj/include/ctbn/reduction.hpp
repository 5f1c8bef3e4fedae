#ifndef CTBN_REDUCTION_HPP_
#define CTBN_REDUCTION_HPP_

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/closure.hpp"
#include "ctbn/ctmc.hpp"
#include "ctbn/dynamics.hpp"
#include "ctbn/model.hpp"

// Time-scale reduction.  When the fast components relax much quicker than
// the slow ones move, the slow process approaches an autonomous CTBN over
// the slow components alone, whose conditional rates are the original slow
// rates averaged over the conditional equilibrium of the fast components.
// This header computes those equilibria and effective rates, assembles the
// reduced model, and provides a dense projection-based integrator of the
// limiting dynamics as an independent cross-check.

namespace ctbn {

namespace detail {

// Product space over the listed components (ascending ids).
inline StateSpace subset_space(const CtbnModel& model, std::span<const int> ids) {
  std::vector<int> cards;
  cards.reserve(ids.size());
  for (int id : ids) cards.push_back(model.component(id).cardinality);
  return StateSpace(cards);
}

inline std::string describe_assignment(std::span<const int> ids,
                                       std::span<const int> values) {
  std::string out = "(";
  for (size_t k = 0; k < ids.size(); ++k) {
    if (k) out += ", ";
    out += "x" + std::to_string(ids[k]) + "=" + std::to_string(values[k]);
  }
  out += ")";
  return out;
}

}  // namespace detail

// Standing requirement for the reduction to make sense: for every assignment
// of the slow components, the conditional fast process must be ergodic, so
// that it has a unique equilibrium to average over.  Failures are reported
// as data, one message per offending slow assignment.
struct AssumptionReport {
  bool ok = true;
  std::vector<std::string> failures;
};

inline AssumptionReport check_assumption(const CtbnModel& model) {
  AssumptionReport report;
  if (model.fast_ids().empty()) return report;  // vacuous
  StateSpace slow_sp = detail::subset_space(model, model.slow_ids());
  JointState slow(slow_sp.component_count(), 0);
  for (StateIndex i = 0; i < slow_sp.size(); ++i) {
    Matrix g = conditional_fast_generator(model, slow);
    auto comps = strongly_connected_components(g);
    if (comps.size() != 1) {
      report.ok = false;
      report.failures.push_back(
          "conditional fast process is not ergodic for slow assignment " +
          detail::describe_assignment(model.slow_ids(), slow) + ": " +
          std::to_string(comps.size()) + " communicating classes");
    }
    slow_sp.next(slow);
  }
  return report;
}

// Equilibrium distribution of the fast components in `fast_set` with the
// slow components in last_slow_ancestors(fast_set) clamped to
// `conditioner_values` (same ascending order).  `fast_set` must be closed
// under fast parents; components outside the set and its conditioners are
// provably irrelevant to the result and are never read.
inline Vector conditional_equilibrium(const CtbnModel& model,
                                      std::span<const int> fast_set_in,
                                      std::span<const int> conditioner_values) {
  std::vector<int> fast_set(fast_set_in.begin(), fast_set_in.end());
  std::sort(fast_set.begin(), fast_set.end());
  fast_set.erase(std::unique(fast_set.begin(), fast_set.end()), fast_set.end());
  if (fast_upward_closure(model, fast_set) != fast_set) {
    throw std::invalid_argument(
        "conditional_equilibrium: fast set is not closed under fast parents");
  }
  std::vector<int> conditioners = last_slow_ancestors(model, fast_set);
  if (conditioner_values.size() != conditioners.size()) {
    throw std::invalid_argument("conditional_equilibrium: expected " +
                                std::to_string(conditioners.size()) +
                                " conditioner values");
  }

  StateSpace sub = detail::subset_space(model, fast_set);
  // Template full state: conditioners clamped, everything else immaterial.
  JointState full(model.component_count(), 0);
  for (size_t k = 0; k < conditioners.size(); ++k) {
    full[conditioners[k] - 1] = conditioner_values[k];
  }

  const StateIndex n = sub.size();
  Matrix g = Matrix::Zero(n, n);
  JointState local(sub.component_count(), 0);
  for (StateIndex ia = 0; ia < n; ++ia) {
    for (size_t k = 0; k < fast_set.size(); ++k) full[fast_set[k] - 1] = local[k];
    double exit = 0.0;
    for (size_t k = 0; k < fast_set.size(); ++k) {
      const Matrix& q = model.table_at(fast_set[k], full);
      const StateIndex stride = sub.stride(static_cast<int>(k));
      for (int x = 0; x < sub.cardinality(static_cast<int>(k)); ++x) {
        if (x == local[k]) continue;
        const double rate = q(local[k], x);
        if (rate == 0.0) continue;
        g(ia, ia + (x - local[k]) * stride) = rate;
        exit += rate;
      }
    }
    g(ia, ia) = -exit;
    sub.next(local);
  }

  if (!is_ergodic(g)) {
    throw std::runtime_error(
        "conditional_equilibrium: conditional fast process over {" +
        detail::join_ints(fast_set) + "} is not ergodic for slow assignment " +
        detail::describe_assignment(conditioners, conditioner_values));
  }
  return stationary_distribution(g);
}

// The same equilibrium tabulated over every conditioner assignment.
struct ConditionalEquilibrium {
  std::vector<int> fast_set;       // ascending fast ids, fast-upward closed
  std::vector<int> conditioners;   // ascending slow ids
  std::map<std::vector<int>, Vector> table;  // conditioner assignment -> pi
};

inline ConditionalEquilibrium conditional_equilibrium_table(const CtbnModel& model,
                                                            std::span<const int> fast_set) {
  ConditionalEquilibrium out;
  out.fast_set.assign(fast_set.begin(), fast_set.end());
  out.conditioners = last_slow_ancestors(model, fast_set);
  StateSpace cond_sp = detail::subset_space(model, out.conditioners);
  JointState values(cond_sp.component_count(), 0);
  for (StateIndex i = 0; i < cond_sp.size(); ++i) {
    out.table[values] = conditional_equilibrium(model, fast_set, values);
    cond_sp.next(values);
  }
  return out;
}

// Parents of slow component `i` in the reduced model: its slow parents plus
// the last slow ancestors of its fast parents.  Influence that used to flow
// through fast components is rerouted to the slow components steering them.
// A slow -> fast -> slow cycle can route i's influence back to itself; that
// dependence lives in the rows of the effective rate matrix, not in the
// parent set, so i itself is never listed.
inline std::vector<int> reduced_parents(const CtbnModel& model, int i) {
  const ComponentSpec& c = model.component(i);
  if (c.scale != Scale::slow) {
    throw std::invalid_argument("reduced_parents: component " + std::to_string(i) +
                                " is fast");
  }
  std::set<int> out;
  std::vector<int> fast_par;
  for (int p : c.parents) {
    if (model.component(p).scale == Scale::slow) {
      out.insert(p);
    } else {
      fast_par.push_back(p);
    }
  }
  if (!fast_par.empty()) {
    for (int p : last_slow_ancestors(model, fast_par)) out.insert(p);
  }
  out.erase(i);
  return {out.begin(), out.end()};
}

// Effective conditional rate table of slow component `i`, keyed by
// assignments of reduced_parents(i): the original conditional matrices
// averaged over the equilibrium of the fast-upward closure of i's fast
// parents.  Each table entry is a convex combination of rate matrices (when
// i steers its own fast parents, a row-wise one), hence itself a rate matrix.
inline std::map<std::vector<int>, Matrix> effective_conditional_rates(
    const CtbnModel& model, int i) {
  const ComponentSpec& c = model.component(i);
  if (c.scale != Scale::slow) {
    throw std::invalid_argument("effective_conditional_rates: component " +
                                std::to_string(i) + " is fast");
  }
  std::vector<int> fast_par;
  for (int p : c.parents) {
    if (model.component(p).scale == Scale::fast) fast_par.push_back(p);
  }
  if (fast_par.empty()) return c.rate_table;  // nothing to average over

  const std::vector<int> closure = fast_upward_closure(model, fast_par);
  const std::vector<int> spar = last_slow_ancestors(model, closure);
  const std::vector<int> rpar = reduced_parents(model, i);
  StateSpace closure_sp = detail::subset_space(model, closure);
  StateSpace rpar_sp = detail::subset_space(model, rpar);

  // Where each equilibrium conditioner's value comes from.  When i is its
  // own last slow ancestor (a slow -> fast -> slow cycle), the clamped value
  // of X_i along the trajectory is the transition's from-state, so that
  // conditioner reads the matrix row instead of the table key.
  constexpr int kFromRow = -1;
  std::vector<int> spar_src;
  bool self_conditioned = false;
  for (int id : spar) {
    if (id == i) {
      spar_src.push_back(kFromRow);
      self_conditioned = true;
    } else {
      spar_src.push_back(static_cast<int>(
          std::lower_bound(rpar.begin(), rpar.end(), id) - rpar.begin()));
    }
  }
  struct ParentSource {
    bool from_closure;
    int pos;  // index into the closure state or the reduced-parent assignment
  };
  std::vector<ParentSource> sources;
  for (int p : c.parents) {
    if (model.component(p).scale == Scale::fast) {
      int pos = static_cast<int>(
          std::lower_bound(closure.begin(), closure.end(), p) - closure.begin());
      sources.push_back({true, pos});
    } else {
      int pos = static_cast<int>(
          std::lower_bound(rpar.begin(), rpar.end(), p) - rpar.begin());
      sources.push_back({false, pos});
    }
  }

  // Equilibria depend only on the sPar coordinates; cache per sPar value.
  std::map<std::vector<int>, Vector> pi_cache;
  std::map<std::vector<int>, Matrix> out;
  JointState alpha(rpar_sp.component_count(), 0);
  std::vector<int> spar_values(spar.size());
  std::vector<int> parent_assignment(c.parents.size());
  const int row_blocks = self_conditioned ? c.cardinality : 1;
  for (StateIndex a = 0; a < rpar_sp.size(); ++a) {
    Matrix avg = Matrix::Zero(c.cardinality, c.cardinality);
    for (int row = 0; row < row_blocks; ++row) {
      for (size_t k = 0; k < spar.size(); ++k) {
        spar_values[k] = spar_src[k] == kFromRow ? row : alpha[spar_src[k]];
      }
      auto it = pi_cache.find(spar_values);
      if (it == pi_cache.end()) {
        it = pi_cache.emplace(spar_values,
                              conditional_equilibrium(model, closure, spar_values))
                 .first;
      }
      const Vector& pi = it->second;

      JointState zeta(closure_sp.component_count(), 0);
      for (StateIndex z = 0; z < closure_sp.size(); ++z) {
        for (size_t k = 0; k < sources.size(); ++k) {
          parent_assignment[k] =
              sources[k].from_closure ? zeta[sources[k].pos] : alpha[sources[k].pos];
        }
        const Matrix& q = c.rate_table.at(parent_assignment);
        if (self_conditioned) {
          avg.row(row) += pi(z) * q.row(row);
        } else {
          avg += pi(z) * q;
        }
        closure_sp.next(zeta);
      }
    }
    out[alpha] = std::move(avg);
    rpar_sp.next(alpha);
  }
  return out;
}

// The reduced model: slow components only, renumbered 1..|I_slow| in
// ascending original-id order, with reduced parent sets, effective rate
// tables, and the initial distribution marginalized onto the slow
// components.  The scale ratio is gone along with the fast components.
struct ReducedCtbn {
  CtbnModel model;
  std::vector<int> slow_ids;  // new id k+1 <-> slow_ids[k] in the original
};

inline ReducedCtbn reduce_ctbn(const CtbnModel& model) {
  AssumptionReport report = check_assumption(model);
  if (!report.ok) {
    std::string msg = "reduce_ctbn: conditional fast process not ergodic";
    for (const std::string& f : report.failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  const std::vector<int>& slow = model.slow_ids();
  if (slow.empty()) {
    throw std::invalid_argument("reduce_ctbn: model has no slow components");
  }
  std::vector<int> new_id(model.component_count() + 1, 0);
  for (size_t k = 0; k < slow.size(); ++k) new_id[slow[k]] = static_cast<int>(k) + 1;

  std::vector<ComponentSpec> specs;
  for (int id : slow) {
    ComponentSpec c;
    c.id = new_id[id];
    c.cardinality = model.component(id).cardinality;
    c.scale = Scale::slow;
    for (int p : reduced_parents(model, id)) c.parents.push_back(new_id[p]);
    // Ascending original ids map monotonically to ascending new ids, so the
    // table keys keep their meaning under renumbering.
    c.rate_table = effective_conditional_rates(model, id);
    specs.push_back(std::move(c));
  }

  InitialDistribution initial;
  const InitialDistribution& orig = model.initial();
  if (orig.factored) {
    std::vector<Vector> factors;
    for (int id : slow) factors.push_back((*orig.factored)[id - 1]);
    initial = InitialDistribution::make_factored(std::move(factors));
  } else if (orig.joint) {
    std::vector<int> positions;
    for (int id : slow) positions.push_back(id - 1);
    initial = InitialDistribution::make_joint(
        marginalize(*orig.joint, model.state_space(), positions));
  }

  return ReducedCtbn{CtbnModel(std::move(specs), std::move(initial), 1.0),
                     std::vector<int>(slow.begin(), slow.end())};
}

// Effective joint generator over the slow product space, computed directly:
// for each slow assignment alpha, the slow-transition rates are averaged
// over the equilibrium of the *entire* fast subsystem given alpha.  This
// deliberately does not share code with reduce_ctbn (which averages per
// fast-upward closure); agreement of the two routes is a strong correctness
// check.
inline Matrix effective_joint_generator(const CtbnModel& model) {
  if (model.fast_ids().empty()) return amalgamate(model, 1.0);
  AssumptionReport report = check_assumption(model);
  if (!report.ok) {
    std::string msg = "effective_joint_generator: conditional fast process not ergodic";
    for (const std::string& f : report.failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  const Matrix q_slow = split_fast_slow(model).q_slow;
  StateSpace slow_sp = detail::subset_space(model, model.slow_ids());
  StateSpace fast_sp = detail::subset_space(model, model.fast_ids());
  const StateSpace& joint = model.state_space();

  const StateIndex ns = slow_sp.size();
  Matrix out = Matrix::Zero(ns, ns);
  JointState alpha(slow_sp.component_count(), 0);
  for (StateIndex a = 0; a < ns; ++a) {
    Vector pi = stationary_distribution(conditional_fast_generator(model, alpha));
    JointState beta(slow_sp.component_count(), 0);
    for (StateIndex b = 0; b < ns; ++b) {
      double sum = 0.0;
      JointState zeta(fast_sp.component_count(), 0);
      for (StateIndex z = 0; z < fast_sp.size(); ++z) {
        const StateIndex row = joint.encode(compose_fast_slow(model, zeta, alpha));
        const StateIndex col = joint.encode(compose_fast_slow(model, zeta, beta));
        sum += pi(z) * q_slow(row, col);
        fast_sp.next(zeta);
      }
      out(a, b) = sum;
      slow_sp.next(beta);
    }
    slow_sp.next(alpha);
  }
  return out;
}

// Projection onto fast-equilibrated distributions: entry (a,b) is the
// conditional fast equilibrium probability of b's fast coordinates given b's
// slow coordinates, when a and b share those slow coordinates, and zero
// otherwise.  G is idempotent, and applying G^T to any distribution yields
// the product of its slow marginal with the conditional fast equilibria.
inline Matrix projection_matrix(const CtbnModel& model) {
  const StateSpace& joint = model.state_space();
  const StateIndex n = joint.size();
  if (model.fast_ids().empty()) return Matrix::Identity(n, n);
  AssumptionReport report = check_assumption(model);
  if (!report.ok) {
    std::string msg = "projection_matrix: conditional fast process not ergodic";
    for (const std::string& f : report.failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  StateSpace slow_sp = detail::subset_space(model, model.slow_ids());
  StateSpace fast_sp = detail::subset_space(model, model.fast_ids());

  Matrix g = Matrix::Zero(n, n);
  JointState alpha(slow_sp.component_count(), 0);
  for (StateIndex a = 0; a < slow_sp.size(); ++a) {
    Vector pi = stationary_distribution(conditional_fast_generator(model, alpha));
    std::vector<StateIndex> rows(fast_sp.size());
    JointState zeta(fast_sp.component_count(), 0);
    for (StateIndex z = 0; z < fast_sp.size(); ++z) {
      rows[z] = joint.encode(compose_fast_slow(model, zeta, alpha));
      fast_sp.next(zeta);
    }
    for (StateIndex za = 0; za < fast_sp.size(); ++za) {
      for (StateIndex zb = 0; zb < fast_sp.size(); ++zb) {
        g(rows[za], rows[zb]) = pi(zb);
      }
    }
    slow_sp.next(alpha);
  }
  return g;
}

// Limiting (scale ratio -> 0) evolution of the full-state distribution:
// integrates dp/dt = G^T (Q_slow)^T p from the projection of p0.  When p0 is
// not already fast-equilibrated the true dynamics passes through a brief
// initial transient that the limit skips; `projected_initial` flags that
// case and `projection_gap` records the L1 distance moved.
struct LimitingSolution {
  Vector p;
  bool projected_initial = false;
  double projection_gap = 0.0;
};

inline LimitingSolution limiting_solve(const CtbnModel& model, const Vector& p0,
                                       double t) {
  const StateSpace& joint = model.state_space();
  if (p0.size() != joint.size()) {
    throw std::invalid_argument("limiting_solve: distribution does not match the model");
  }
  if (!(t >= 0.0) || !std::isfinite(t) || !p0.allFinite()) {
    throw std::invalid_argument("limiting_solve: inputs must be finite, t >= 0");
  }
  const Matrix g = projection_matrix(model);
  Vector p_init = g.transpose() * p0;
  LimitingSolution out;
  out.projection_gap = (p_init - p0).lpNorm<1>();
  out.projected_initial = out.projection_gap > 1e-9;
  if (t == 0.0) {
    out.p = p0;
    return out;
  }
  const Matrix q_slow = split_fast_slow(model).q_slow;
  const Matrix a = g.transpose() * q_slow.transpose();
  // Dense matrix exponential; a deliberately different integration route
  // from solve_master's uniformization, which keeps cross-checks honest.
  out.p = (t * a).exp() * p_init;
  return out;
}

}  // namespace ctbn

#endif  // CTBN_REDUCTION_HPP_
