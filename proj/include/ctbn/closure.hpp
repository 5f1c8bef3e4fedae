#ifndef CTBN_CLOSURE_HPP_
#define CTBN_CLOSURE_HPP_

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/dynamics.hpp"
#include "ctbn/model.hpp"

// Ancestral-closure machinery on the component graph.  A set J is upward
// closed when it contains the parents of each of its members; the closure of
// J is the minimal upward closed superset.  The fast-upward closure only
// chases parents that are themselves fast, and the last slow ancestors of J
// are the slow components feeding directly into that fast closure -- the
// frontier where slow influence enters.

namespace ctbn {

namespace detail {

inline std::vector<int> checked_id_set(const CtbnModel& model, std::span<const int> j,
                                       const char* who) {
  if (j.empty()) {
    throw std::invalid_argument(std::string(who) + ": component set is empty");
  }
  std::set<int> uniq;
  for (int id : j) {
    if (id < 1 || id > model.component_count()) {
      throw std::out_of_range(std::string(who) + ": component id " + std::to_string(id) +
                              " outside [1, " + std::to_string(model.component_count()) + "]");
    }
    uniq.insert(id);
  }
  return {uniq.begin(), uniq.end()};
}

}  // namespace detail

// Minimal upward closed superset of J: the fixed point of repeatedly adding
// every member's parents.
inline std::vector<int> upward_closure(const CtbnModel& model, std::span<const int> j) {
  std::vector<int> members = detail::checked_id_set(model, j, "upward_closure");
  std::set<int> closed(members.begin(), members.end());
  std::vector<int> frontier = members;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int id : frontier) {
      for (int p : model.component(id).parents) {
        if (closed.insert(p).second) next.push_back(p);
      }
    }
    frontier = std::move(next);
  }
  return {closed.begin(), closed.end()};
}

// Closure of J under fast parents only: slow parents are not chased, and J
// itself must consist of fast components.
inline std::vector<int> fast_upward_closure(const CtbnModel& model,
                                            std::span<const int> j) {
  std::vector<int> members = detail::checked_id_set(model, j, "fast_upward_closure");
  for (int id : members) {
    if (model.component(id).scale != Scale::fast) {
      throw std::invalid_argument("fast_upward_closure: component " + std::to_string(id) +
                                  " is slow");
    }
  }
  std::set<int> closed(members.begin(), members.end());
  std::vector<int> frontier = members;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int id : frontier) {
      for (int p : model.component(id).parents) {
        if (model.component(p).scale == Scale::fast && closed.insert(p).second) {
          next.push_back(p);
        }
      }
    }
    frontier = std::move(next);
  }
  return {closed.begin(), closed.end()};
}

// Slow components that are parents of some member of the fast-upward closure
// of J: the points where the slow process steers the fast subsystem.
inline std::vector<int> last_slow_ancestors(const CtbnModel& model,
                                            std::span<const int> j) {
  std::vector<int> closure = fast_upward_closure(model, j);
  std::set<int> slow;
  for (int id : closure) {
    for (int p : model.component(id).parents) {
      if (model.component(p).scale == Scale::slow) slow.insert(p);
    }
  }
  return {slow.begin(), slow.end()};
}

// The sub-CTBN spanned by an upward closed J: components renumbered 1..|J|
// in ascending original-id order, original rate tables, initial distribution
// marginalized onto J.  Because J is closed, every parent a member needs is
// in J too and the sub-process is autonomous -- its law coincides with the
// marginal of the full process.
struct SubCtbn {
  CtbnModel model;
  std::vector<int> original_ids;  // new id k+1 <-> original_ids[k]
};

inline SubCtbn sub_ctbn(const CtbnModel& model, std::span<const int> j) {
  std::vector<int> members = detail::checked_id_set(model, j, "sub_ctbn");
  for (int id : members) {
    for (int p : model.component(id).parents) {
      if (!std::binary_search(members.begin(), members.end(), p)) {
        throw std::invalid_argument("sub_ctbn: set is not upward closed; parent " +
                                    std::to_string(p) + " of component " +
                                    std::to_string(id) + " is missing");
      }
    }
  }
  std::vector<int> new_id(model.component_count() + 1, 0);
  for (size_t k = 0; k < members.size(); ++k) new_id[members[k]] = static_cast<int>(k) + 1;

  std::vector<ComponentSpec> specs;
  specs.reserve(members.size());
  for (int id : members) {
    ComponentSpec c = model.component(id);
    c.id = new_id[id];
    for (int& p : c.parents) p = new_id[p];
    // Renumbering is monotone, so parent order and table keys survive as-is.
    specs.push_back(std::move(c));
  }

  InitialDistribution initial;
  const InitialDistribution& orig = model.initial();
  if (orig.factored) {
    std::vector<Vector> factors;
    for (int id : members) factors.push_back((*orig.factored)[id - 1]);
    initial = InitialDistribution::make_factored(std::move(factors));
  } else if (orig.joint) {
    std::vector<int> positions;
    for (int id : members) positions.push_back(id - 1);
    initial = InitialDistribution::make_joint(
        marginalize(*orig.joint, model.state_space(), positions));
  }

  return SubCtbn{CtbnModel(std::move(specs), std::move(initial), model.epsilon()),
                 std::move(members)};
}

}  // namespace ctbn

#endif  // CTBN_CLOSURE_HPP_
