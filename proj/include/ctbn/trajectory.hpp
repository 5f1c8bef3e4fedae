#ifndef CTBN_TRAJECTORY_HPP_
#define CTBN_TRAJECTORY_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/state_space.hpp"

namespace ctbn {

// A piecewise-constant sample path.  Segment k occupies states[k] from
// times[k] until times[k+1] (the last segment until `horizon`).  The path
// knows which components its coordinates belong to, so a restriction to a
// subset of components is still self-describing.
struct Trajectory {
  std::vector<int> component_ids;    // 1-based ids, ascending
  std::vector<int> cardinalities;    // local state counts, same order
  std::vector<JointState> states;    // visited joint states
  std::vector<double> times;         // entry times; times[0] == 0
  double horizon = 0.0;              // end of the observation window

  std::int64_t transition_count() const {
    return static_cast<std::int64_t>(states.size()) - 1;
  }

  // Position of a component id within this trajectory's coordinates.
  int position_of(int component_id) const {
    auto it = std::lower_bound(component_ids.begin(), component_ids.end(), component_id);
    if (it == component_ids.end() || *it != component_id) {
      throw std::out_of_range("Trajectory: component " + std::to_string(component_id) +
                              " is not observed in this path");
    }
    return static_cast<int>(it - component_ids.begin());
  }
};

// Checks the structural invariants of a path; returns violation messages
// (empty means well-formed).  The single-coordinate-change rule is optional
// because restricted paths may hide intermediate jumps.
inline std::vector<std::string> trajectory_violations(const Trajectory& traj,
                                                      bool require_single_change = false) {
  std::vector<std::string> out;
  if (traj.states.size() != traj.times.size()) {
    out.push_back("states and times have different lengths");
    return out;
  }
  if (traj.states.empty()) {
    out.push_back("path has no segments");
    return out;
  }
  if (traj.times.front() != 0.0) out.push_back("first entry time is not 0");
  for (size_t k = 0; k + 1 < traj.times.size(); ++k) {
    if (!(traj.times[k] < traj.times[k + 1])) {
      out.push_back("entry times not strictly increasing at segment " + std::to_string(k + 1));
      break;
    }
  }
  if (traj.horizon < traj.times.back()) out.push_back("horizon precedes the last entry time");
  for (const JointState& s : traj.states) {
    if (s.size() != traj.component_ids.size()) {
      out.push_back("a segment state has the wrong number of coordinates");
      break;
    }
  }
  for (size_t k = 0; k + 1 < traj.states.size(); ++k) {
    int changed = 0;
    for (size_t c = 0; c < traj.states[k].size(); ++c) {
      if (traj.states[k][c] != traj.states[k + 1][c]) ++changed;
    }
    if (changed == 0) {
      out.push_back("consecutive segments " + std::to_string(k) + "," +
                    std::to_string(k + 1) + " have equal states");
    } else if (require_single_change && changed > 1) {
      out.push_back("segments " + std::to_string(k) + "," + std::to_string(k + 1) +
                    " differ in " + std::to_string(changed) + " coordinates");
    }
  }
  return out;
}

// Projects a path onto a subset of its components (ids in ascending order),
// merging consecutive segments whose projections coincide.  The merged path
// may hide jumps of discarded components, so consecutive states can differ
// in more than one retained coordinate only if the original did -- never by
// the merge itself.
inline Trajectory restrict_trajectory(const Trajectory& traj,
                                      std::span<const int> component_ids) {
  if (component_ids.empty()) {
    throw std::invalid_argument("restrict_trajectory: component set is empty");
  }
  std::vector<int> positions;
  Trajectory out;
  for (size_t k = 0; k < component_ids.size(); ++k) {
    if (k > 0 && component_ids[k] <= component_ids[k - 1]) {
      throw std::invalid_argument("restrict_trajectory: ids must be strictly ascending");
    }
    int pos = traj.position_of(component_ids[k]);
    positions.push_back(pos);
    out.component_ids.push_back(component_ids[k]);
    out.cardinalities.push_back(traj.cardinalities[pos]);
  }
  out.horizon = traj.horizon;
  for (size_t k = 0; k < traj.states.size(); ++k) {
    JointState proj(positions.size());
    for (size_t c = 0; c < positions.size(); ++c) proj[c] = traj.states[k][positions[c]];
    if (!out.states.empty() && out.states.back() == proj) continue;
    out.states.push_back(std::move(proj));
    out.times.push_back(traj.times[k]);
  }
  return out;
}

// State space spanned by the trajectory's coordinates.
inline StateSpace trajectory_space(const Trajectory& traj) {
  return StateSpace(traj.cardinalities);
}

// CSV export with columns entry_time, x_<id>, ...  One row per segment.
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "entry_time";
  for (int id : traj.component_ids) os << ",x_" << id;
  os << "\n";
  char buf[32];
  for (size_t k = 0; k < traj.states.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", traj.times[k]);
    os << buf;
    for (int v : traj.states[k]) os << "," << v;
    os << "\n";
  }
}

}  // namespace ctbn

#endif  // CTBN_TRAJECTORY_HPP_
