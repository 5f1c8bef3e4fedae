#ifndef CTBN_MODEL_HPP_
#define CTBN_MODEL_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ctbn/rate_matrix.hpp"
#include "ctbn/state_space.hpp"

namespace ctbn {

enum class Scale { slow, fast };

inline const char* to_string(Scale s) { return s == Scale::fast ? "fast" : "slow"; }

// One component of a multi-component Markov process: a local state space plus
// a conditional rate matrix per assignment of its parents.  Parent ids are
// kept in ascending order and rate-table keys are parent assignments in that
// same order, so a table lookup is deterministic.
struct ComponentSpec {
  int id = 0;  // 1-based
  int cardinality = 0;
  std::vector<int> parents;
  Scale scale = Scale::slow;
  std::map<std::vector<int>, Matrix> rate_table;
};

// Initial distribution over the joint state, either as one joint vector or as
// an independent per-component product.  Factored form is expanded on demand.
struct InitialDistribution {
  std::optional<Vector> joint;
  std::optional<std::vector<Vector>> factored;

  static InitialDistribution make_joint(Vector p) {
    InitialDistribution d;
    d.joint = std::move(p);
    return d;
  }
  static InitialDistribution make_factored(std::vector<Vector> factors) {
    InitialDistribution d;
    d.factored = std::move(factors);
    return d;
  }
  // Independent uniform over each component.
  static InitialDistribution make_uniform(const std::vector<int>& cardinalities) {
    std::vector<Vector> f;
    f.reserve(cardinalities.size());
    for (int c : cardinalities) f.push_back(Vector::Constant(c, 1.0 / c));
    return make_factored(std::move(f));
  }
};

// A continuous-time Bayesian network: a directed (possibly cyclic) graph over
// components, conditional rate matrices, an initial distribution, and the
// fast/slow scale ratio epsilon.  Instances are immutable after construction
// and safe to share across threads; the constructor precomputes the joint
// state space and per-component lookup tables where the specs allow it.
// Structural problems never throw here -- validate() reports them as data.
class CtbnModel {
 public:
  CtbnModel() = default;

  CtbnModel(std::vector<ComponentSpec> components, InitialDistribution initial,
            double epsilon = 1.0)
      : components_(std::move(components)),
        initial_(std::move(initial)),
        epsilon_(epsilon) {
    compile();
  }

  int component_count() const { return static_cast<int>(components_.size()); }
  const std::vector<ComponentSpec>& components() const { return components_; }
  const ComponentSpec& component(int id) const {
    check_id(id);
    return components_[id - 1];
  }
  double epsilon() const { return epsilon_; }
  const InitialDistribution& initial() const { return initial_; }

  // Joint space over all components, in id order.  Only meaningful when every
  // cardinality is >= 1; the default-constructed fallback is the empty space.
  const StateSpace& state_space() const { return space_; }

  const std::vector<int>& fast_ids() const { return fast_ids_; }
  const std::vector<int>& slow_ids() const { return slow_ids_; }

  // True when component `id` had consistent parents and a complete rate table
  // at construction, so the table accessors below may be used.
  bool tables_ready(int id) const {
    check_id(id);
    return compiled_[id - 1].ready;
  }

  // Product space over the parents of `id`, ascending id order.
  const StateSpace& parent_space(int id) const { return checked(id).parent_space; }

  // Conditional rate matrix for one parent assignment (ascending parent order).
  const Matrix& table(int id, std::span<const int> parent_assignment) const {
    const Compiled& c = checked(id);
    return *c.tables[c.parent_space.encode(parent_assignment)];
  }

  // Conditional rate matrix in effect when the whole process is in `state`.
  const Matrix& table_at(int id, std::span<const int> state) const {
    const Compiled& c = checked(id);
    StateIndex key = 0;
    for (size_t k = 0; k < c.parent_positions.size(); ++k) {
      key = key * c.parent_space.cardinality(static_cast<int>(k)) +
            state[c.parent_positions[k]];
    }
    return *c.tables[key];
  }

  // Rate multiplier of component `id` at scale ratio `epsilon`: slow
  // components are unscaled, fast ones carry 1/epsilon.
  double rate_multiplier(int id, double epsilon) const {
    return component(id).scale == Scale::slow ? 1.0 : 1.0 / epsilon;
  }

 private:
  struct Compiled {
    bool ready = false;
    StateSpace parent_space;
    std::vector<const Matrix*> tables;   // indexed by encoded parent assignment
    std::vector<int> parent_positions;   // 0-based positions of parents
  };

  void check_id(int id) const {
    if (id < 1 || id > component_count()) {
      throw std::out_of_range("CtbnModel: component id " + std::to_string(id) +
                              " outside [1, " + std::to_string(component_count()) + "]");
    }
  }

  const Compiled& checked(int id) const {
    check_id(id);
    const Compiled& c = compiled_[id - 1];
    if (!c.ready) {
      throw std::logic_error("CtbnModel: component " + std::to_string(id) +
                             " has no usable rate table; run validate()");
    }
    return c;
  }

  void compile() {
    const int m = component_count();
    compiled_.assign(m, Compiled{});

    bool cards_ok = m > 0;
    std::vector<int> cards(m);
    for (int k = 0; k < m; ++k) {
      cards[k] = components_[k].cardinality;
      if (cards[k] < 1) cards_ok = false;
    }
    if (cards_ok) {
      try {
        space_ = StateSpace(cards);
      } catch (const std::overflow_error&) {
        cards_ok = false;
      }
    }
    if (!cards_ok) space_ = StateSpace();

    fast_ids_.clear();
    slow_ids_.clear();
    for (int k = 0; k < m; ++k) {
      (components_[k].scale == Scale::fast ? fast_ids_ : slow_ids_).push_back(k + 1);
    }

    for (int k = 0; k < m; ++k) {
      const ComponentSpec& c = components_[k];
      Compiled& out = compiled_[k];
      if (!cards_ok || c.cardinality < 1) continue;
      if (!std::is_sorted(c.parents.begin(), c.parents.end()) ||
          std::adjacent_find(c.parents.begin(), c.parents.end()) != c.parents.end()) {
        continue;
      }
      std::vector<int> parent_cards;
      std::vector<int> positions;
      bool parents_ok = true;
      for (int p : c.parents) {
        if (p < 1 || p > m || p == c.id) {
          parents_ok = false;
          break;
        }
        parent_cards.push_back(components_[p - 1].cardinality);
        positions.push_back(p - 1);
      }
      if (!parents_ok) continue;

      StateSpace pspace(parent_cards);
      if (static_cast<StateIndex>(c.rate_table.size()) != pspace.size()) continue;
      std::vector<const Matrix*> tables(pspace.size(), nullptr);
      bool table_ok = true;
      JointState assignment(parent_cards.size(), 0);
      for (StateIndex i = 0; i < pspace.size(); ++i) {
        auto it = c.rate_table.find(assignment);
        if (it == c.rate_table.end() || it->second.rows() != c.cardinality ||
            it->second.cols() != c.cardinality) {
          table_ok = false;
          break;
        }
        tables[i] = &it->second;
        pspace.next(assignment);
      }
      if (!table_ok) continue;

      out.ready = true;
      out.parent_space = std::move(pspace);
      out.tables = std::move(tables);
      out.parent_positions = std::move(positions);
    }
  }

  std::vector<ComponentSpec> components_;
  InitialDistribution initial_;
  double epsilon_ = 1.0;

  StateSpace space_;
  std::vector<int> fast_ids_;
  std::vector<int> slow_ids_;
  std::vector<Compiled> compiled_;
};

// ---------------------------------------------------------------------------
// Restriction operators

// Sub-vector of `state` at the parents of component `id`, ascending id order.
inline std::vector<int> restrict_to_parents(const CtbnModel& model, int id,
                                            std::span<const int> state) {
  const ComponentSpec& c = model.component(id);
  std::vector<int> out;
  out.reserve(c.parents.size());
  for (int p : c.parents) out.push_back(state[p - 1]);
  return out;
}

struct FastSlowParts {
  std::vector<int> fast;
  std::vector<int> slow;
};

// Splits a joint state into its fast and slow coordinates (each in ascending
// component-id order).  Concatenating the parts under fast_ids()/slow_ids()
// reconstructs the state.
inline FastSlowParts restrict_fast_slow(const CtbnModel& model,
                                        std::span<const int> state) {
  FastSlowParts parts;
  parts.fast.reserve(model.fast_ids().size());
  parts.slow.reserve(model.slow_ids().size());
  for (int id : model.fast_ids()) parts.fast.push_back(state[id - 1]);
  for (int id : model.slow_ids()) parts.slow.push_back(state[id - 1]);
  return parts;
}

// Inverse of restrict_fast_slow: interleaves fast and slow coordinate blocks
// back into a full joint state.
inline JointState compose_fast_slow(const CtbnModel& model,
                                    std::span<const int> fast,
                                    std::span<const int> slow) {
  if (fast.size() != model.fast_ids().size() || slow.size() != model.slow_ids().size()) {
    throw std::invalid_argument("compose_fast_slow: block sizes do not match the model");
  }
  JointState state(model.component_count(), 0);
  for (size_t k = 0; k < fast.size(); ++k) state[model.fast_ids()[k] - 1] = fast[k];
  for (size_t k = 0; k < slow.size(); ++k) state[model.slow_ids()[k] - 1] = slow[k];
  return state;
}

inline StateIndex encode_state(const CtbnModel& model, std::span<const int> state) {
  return model.state_space().encode(state);
}

inline JointState decode_state(const CtbnModel& model, StateIndex index) {
  return model.state_space().decode(index);
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline std::string join_ints(std::span<const int> v, const char* sep = ",") {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << sep;
    os << v[i];
  }
  return os.str();
}

// True when no fast component has a fast parent.
inline bool fast_components_segregated(const CtbnModel& model) {
  for (int id : model.fast_ids()) {
    for (int p : model.component(id).parents) {
      if (p >= 1 && p <= model.component_count() &&
          model.component(p).scale == Scale::fast) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

// Checks every model invariant and returns one human-readable message per
// violation; an empty list means the model is well-formed.  Never throws:
// violations are data, not exceptions.
inline std::vector<std::string> validate(const CtbnModel& model) {
  std::vector<std::string> out;
  const int m = model.component_count();
  if (m == 0) {
    out.push_back("model has no components");
    return out;
  }

  for (int k = 0; k < m; ++k) {
    const ComponentSpec& c = model.components()[k];
    const std::string where = "component " + std::to_string(k + 1);
    if (c.id != k + 1) {
      out.push_back(where + ": id " + std::to_string(c.id) + " out of order, expected " +
                    std::to_string(k + 1));
    }
    if (c.cardinality < 2) {
      out.push_back(where + ": cardinality " + std::to_string(c.cardinality) +
                    " is below 2");
    }
    if (!std::is_sorted(c.parents.begin(), c.parents.end()) ||
        std::adjacent_find(c.parents.begin(), c.parents.end()) != c.parents.end()) {
      out.push_back(where + ": parents [" + detail::join_ints(c.parents) +
                    "] must be strictly ascending component ids");
    }
    for (int p : c.parents) {
      if (p < 1 || p > m) {
        out.push_back(where + ": parent id " + std::to_string(p) + " outside [1, " +
                      std::to_string(m) + "]");
      } else if (p == c.id) {
        out.push_back(where + ": component is its own parent");
      }
    }
    if (!model.tables_ready(k + 1)) {
      // Distinguish the common cause: wrong number of table entries.
      out.push_back(where + ": rate_table does not cover the parent product space " +
                    "exactly once (or a parent reference is unusable)");
      continue;
    }
    const StateSpace& pspace = model.parent_space(k + 1);
    JointState assignment(pspace.component_count(), 0);
    for (StateIndex i = 0; i < pspace.size(); ++i) {
      const Matrix& q = model.table(k + 1, assignment);
      for (const std::string& v : rate_matrix_violations(q)) {
        out.push_back(where + ", rate_table[" + detail::join_ints(assignment) + "]: " + v);
      }
      pspace.next(assignment);
    }
  }

  if (!(model.epsilon() > 0) || !std::isfinite(model.epsilon())) {
    out.push_back("epsilon must be positive and finite");
  }

  const InitialDistribution& init = model.initial();
  if (init.joint.has_value() == init.factored.has_value()) {
    out.push_back("initial distribution must be exactly one of joint or factored");
  } else if (init.joint) {
    if (model.state_space().size() != init.joint->size()) {
      out.push_back("joint initial distribution has " + std::to_string(init.joint->size()) +
                    " entries, state space has " + std::to_string(model.state_space().size()));
    } else {
      for (const std::string& v : distribution_violations(*init.joint)) {
        out.push_back("initial distribution: " + v);
      }
    }
  } else {
    if (static_cast<int>(init.factored->size()) != m) {
      out.push_back("factored initial distribution has " +
                    std::to_string(init.factored->size()) + " factors, expected " +
                    std::to_string(m));
    } else {
      for (int k = 0; k < m; ++k) {
        const Vector& f = (*init.factored)[k];
        if (f.size() != model.components()[k].cardinality) {
          out.push_back("initial factor for component " + std::to_string(k + 1) +
                        " has wrong length");
          continue;
        }
        for (const std::string& v : distribution_violations(f)) {
          out.push_back("initial factor for component " + std::to_string(k + 1) + ": " + v);
        }
      }
    }
  }
  return out;
}

// Joint initial distribution over the full state space, expanding the
// factored form when necessary.
inline Vector expand_initial(const CtbnModel& model) {
  const StateSpace& space = model.state_space();
  if (model.initial().joint) return *model.initial().joint;
  if (!model.initial().factored) {
    throw std::logic_error("expand_initial: model has no initial distribution");
  }
  const auto& factors = *model.initial().factored;
  Vector p(space.size());
  JointState s(space.component_count(), 0);
  for (StateIndex i = 0; i < space.size(); ++i) {
    double prob = 1.0;
    for (int k = 0; k < space.component_count(); ++k) prob *= factors[k](s[k]);
    p(i) = prob;
    space.next(s);
  }
  return p;
}

}  // namespace ctbn

#endif  // CTBN_MODEL_HPP_
