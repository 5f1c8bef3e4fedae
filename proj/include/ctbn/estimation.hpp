#ifndef CTBN_ESTIMATION_HPP_
#define CTBN_ESTIMATION_HPP_

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/rate_matrix.hpp"
#include "ctbn/trajectory.hpp"

// Maximum-likelihood rate estimation from observed paths.  For a Markov jump
// process the likelihood factors over states, and the sufficient statistics
// are the time spent in each state and the number of each transition; the
// MLE of a rate is simply counts over residence time.  Here both are kept
// per assignment of a set of conditioning components, which turns the same
// machinery into an estimator of conditional rate matrices.

namespace ctbn {

// Residence times and transition counts for one target component, bucketed
// by the values of the conditioning components.  Cells exist only for
// conditioner assignments the path actually visited.  Stats from different
// paths of the same shape may be merged; merging is associative and
// commutative, so multi-path estimation parallelizes.
struct SufficientStats {
  int target = 0;                      // component id, as named in the path
  int target_cardinality = 0;
  std::vector<int> conditioners;       // ascending component ids

  struct Cell {
    Vector residence;  // time in each target state under this assignment
    Matrix counts;     // observed target transitions under this assignment
  };
  std::map<std::vector<int>, Cell> cells;

  Cell& cell(const std::vector<int>& assignment) {
    auto it = cells.find(assignment);
    if (it == cells.end()) {
      it = cells.emplace(assignment,
                         Cell{Vector::Zero(target_cardinality),
                              Matrix::Zero(target_cardinality, target_cardinality)})
               .first;
    }
    return it->second;
  }

  void merge(const SufficientStats& other) {
    if (other.target != target || other.target_cardinality != target_cardinality ||
        other.conditioners != conditioners) {
      throw std::invalid_argument("SufficientStats::merge: incompatible shapes");
    }
    for (const auto& [assignment, c] : other.cells) {
      Cell& mine = cell(assignment);
      mine.residence += c.residence;
      mine.counts += c.counts;
    }
  }

  double total_residence() const {
    double t = 0.0;
    for (const auto& [assignment, c] : cells) t += c.residence.sum();
    return t;
  }
};

// Accumulates sufficient statistics for `target` conditional on the listed
// components, all of which must be observed in the path.  Residence
// intervals split whenever a conditioner changes (each observed jump starts
// a new segment, so this is automatic), a transition is booked under the
// conditioner assignment in force just before it, and the final segment is
// right-censored: it contributes residence but no count.
inline SufficientStats collect_stats(const Trajectory& traj, int target,
                                     std::span<const int> conditioners) {
  SufficientStats stats;
  stats.target = target;
  const int target_pos = traj.position_of(target);
  stats.target_cardinality = traj.cardinalities[target_pos];
  std::vector<int> cond_pos;
  for (size_t k = 0; k < conditioners.size(); ++k) {
    if (conditioners[k] == target) {
      throw std::invalid_argument("collect_stats: target cannot condition on itself");
    }
    if (k > 0 && conditioners[k] <= conditioners[k - 1]) {
      throw std::invalid_argument("collect_stats: conditioners must be strictly ascending");
    }
    cond_pos.push_back(traj.position_of(conditioners[k]));
    stats.conditioners.push_back(conditioners[k]);
  }

  std::vector<int> assignment(cond_pos.size());
  const size_t n = traj.states.size();
  for (size_t k = 0; k < n; ++k) {
    const JointState& s = traj.states[k];
    for (size_t c = 0; c < cond_pos.size(); ++c) assignment[c] = s[cond_pos[c]];
    const double end = (k + 1 < n) ? traj.times[k + 1] : traj.horizon;
    SufficientStats::Cell& cell = stats.cell(assignment);
    cell.residence(s[target_pos]) += end - traj.times[k];
    if (k + 1 < n) {
      const int to = traj.states[k + 1][target_pos];
      if (to != s[target_pos]) cell.counts(s[target_pos], to) += 1.0;
    }
  }
  return stats;
}

// Estimated conditional rate matrices with attached standard errors.  A cell
// with zero residence in some source state carries NaN in that row: the data
// say nothing there, and pretending the rate is zero would be a lie.  The
// standard error of a defined rate is rate/sqrt(count) (exponential-
// likelihood Fisher information), NaN when no transition was seen.
struct RateEstimates {
  int target = 0;
  int target_cardinality = 0;
  std::vector<int> conditioners;

  struct Cell {
    Matrix rates;      // MLE; NaN where undefined
    Matrix stderrs;    // rate / sqrt(count); NaN where count = 0
    Matrix counts;
    Vector residence;
  };
  std::map<std::vector<int>, Cell> cells;
};

inline RateEstimates mle_rates(const SufficientStats& stats) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  RateEstimates est;
  est.target = stats.target;
  est.target_cardinality = stats.target_cardinality;
  est.conditioners = stats.conditioners;
  const int n = stats.target_cardinality;
  for (const auto& [assignment, c] : stats.cells) {
    RateEstimates::Cell out;
    out.counts = c.counts;
    out.residence = c.residence;
    out.rates = Matrix::Constant(n, n, nan);
    out.stderrs = Matrix::Constant(n, n, nan);
    for (int a = 0; a < n; ++a) {
      if (!(c.residence(a) > 0.0)) continue;  // unvisited source: undefined row
      double exit = 0.0;
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        const double rate = c.counts(a, b) / c.residence(a);
        out.rates(a, b) = rate;
        exit += rate;
        if (c.counts(a, b) > 0.0) {
          out.stderrs(a, b) = rate / std::sqrt(c.counts(a, b));
        }
      }
      out.rates(a, a) = -exit;
    }
    est.cells[assignment] = std::move(out);
  }
  return est;
}

// CSV export: one row per defined or undefined off-diagonal cell entry.
// The assignment column joins conditioner values with ';' (empty when
// conditioning on nothing).
inline void write_estimates_csv(const RateEstimates& est, std::ostream& os) {
  os << "assignment,from,to,rate,stderr,count,residence\n";
  char buf[128];
  for (const auto& [assignment, c] : est.cells) {
    std::string key;
    for (size_t k = 0; k < assignment.size(); ++k) {
      if (k) key += ';';
      key += std::to_string(assignment[k]);
    }
    for (int a = 0; a < est.target_cardinality; ++a) {
      for (int b = 0; b < est.target_cardinality; ++b) {
        if (a == b) continue;
        os << key << "," << a << "," << b << ",";
        if (std::isnan(c.rates(a, b))) {
          os << "undefined,undefined";
        } else {
          std::snprintf(buf, sizeof(buf), "%.17g,", c.rates(a, b));
          os << buf;
          if (std::isnan(c.stderrs(a, b))) {
            os << "undefined";
          } else {
            std::snprintf(buf, sizeof(buf), "%.17g", c.stderrs(a, b));
            os << buf;
          }
        }
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", c.counts(a, b),
                      c.residence(a));
        os << buf;
      }
    }
  }
}

// Flattens a multi-component path into a single pseudo-component whose value
// is the encoded joint state.  Estimating that component's rates with no
// conditioners yields the joint generator of the observed sub-process.
inline Trajectory flatten_trajectory(const Trajectory& traj) {
  StateSpace space = trajectory_space(traj);
  if (space.size() > (StateIndex{1} << 20)) {
    throw std::length_error("flatten_trajectory: product space too large");
  }
  Trajectory flat;
  flat.component_ids = {1};
  flat.cardinalities = {static_cast<int>(space.size())};
  flat.times = traj.times;
  flat.horizon = traj.horizon;
  flat.states.reserve(traj.states.size());
  for (const JointState& s : traj.states) {
    flat.states.push_back({static_cast<int>(space.encode(s))});
  }
  return flat;
}

// Joint-generator estimate over the path's product space, with the same
// undefined-cell conventions as mle_rates.
struct GeneratorEstimate {
  Matrix rates;
  Matrix stderrs;
  Matrix counts;
  Vector residence;
};

inline GeneratorEstimate estimate_generator(const Trajectory& traj) {
  Trajectory flat = flatten_trajectory(traj);
  RateEstimates est = mle_rates(collect_stats(flat, 1, {}));
  const RateEstimates::Cell& c = est.cells.at({});
  return GeneratorEstimate{c.rates, c.stderrs, c.counts, c.residence};
}

// Probes whether the observed sub-process looks Markovian: rates re-estimated
// conditionally on the previous observed joint state should agree with the
// unconditional estimates up to sampling noise.  A genuine hidden influence
// shows up as a systematic deviation.  Cells with fewer than `min_count`
// transitions in a stratum stay out of the deviation maximum -- their noise
// would swamp the signal.
struct MarkovianityReport {
  double max_relative_deviation = 0.0;
  int cells_compared = 0;
  int strata = 0;

  struct Row {
    std::vector<int> previous;    // preceding observed joint state
    std::vector<int> assignment;  // conditioner values
    int from = 0, to = 0;
    double base_rate = 0.0;       // unstratified estimate
    double stratified_rate = 0.0;
    double relative_deviation = 0.0;
    double count = 0.0;           // transitions behind the stratified rate
  };
  std::vector<Row> rows;
};

inline MarkovianityReport markovianity_probe(const Trajectory& traj, int target,
                                             std::span<const int> conditioners,
                                             double min_count = 20) {
  // Work on the observed sub-process over target plus conditioners.
  std::set<int> observed(conditioners.begin(), conditioners.end());
  observed.insert(target);
  std::vector<int> observed_ids(observed.begin(), observed.end());
  Trajectory sub = restrict_trajectory(traj, observed_ids);

  const RateEstimates base = mle_rates(collect_stats(sub, target, conditioners));

  // Stratify by the previous sub-state: segment k >= 1 is booked under
  // states[k-1].  The first segment has no predecessor and is skipped.
  std::map<JointState, SufficientStats> strata;
  const int target_pos = sub.position_of(target);
  std::vector<int> cond_pos;
  for (int id : conditioners) cond_pos.push_back(sub.position_of(id));
  const size_t n = sub.states.size();
  std::vector<int> assignment(cond_pos.size());
  for (size_t k = 1; k < n; ++k) {
    const JointState& prev = sub.states[k - 1];
    const JointState& s = sub.states[k];
    auto it = strata.find(prev);
    if (it == strata.end()) {
      SufficientStats fresh;
      fresh.target = target;
      fresh.target_cardinality = sub.cardinalities[target_pos];
      fresh.conditioners.assign(conditioners.begin(), conditioners.end());
      it = strata.emplace(prev, std::move(fresh)).first;
    }
    for (size_t c = 0; c < cond_pos.size(); ++c) assignment[c] = s[cond_pos[c]];
    const double end = (k + 1 < n) ? sub.times[k + 1] : sub.horizon;
    SufficientStats::Cell& cell = it->second.cell(assignment);
    cell.residence(s[target_pos]) += end - sub.times[k];
    if (k + 1 < n) {
      const int to = sub.states[k + 1][target_pos];
      if (to != s[target_pos]) cell.counts(s[target_pos], to) += 1.0;
    }
  }

  MarkovianityReport report;
  report.strata = static_cast<int>(strata.size());
  for (const auto& [prev, stats] : strata) {
    RateEstimates strat = mle_rates(stats);
    for (const auto& [assignment_key, cell] : strat.cells) {
      auto base_it = base.cells.find(assignment_key);
      if (base_it == base.cells.end()) continue;
      for (int a = 0; a < strat.target_cardinality; ++a) {
        for (int b = 0; b < strat.target_cardinality; ++b) {
          if (a == b || cell.counts(a, b) < min_count) continue;
          const double base_rate = base_it->second.rates(a, b);
          const double strat_rate = cell.rates(a, b);
          if (std::isnan(base_rate) || std::isnan(strat_rate) || !(base_rate > 0.0)) {
            continue;
          }
          MarkovianityReport::Row row;
          row.previous = prev;
          row.assignment = assignment_key;
          row.from = a;
          row.to = b;
          row.base_rate = base_rate;
          row.stratified_rate = strat_rate;
          row.relative_deviation = std::abs(strat_rate - base_rate) / base_rate;
          row.count = cell.counts(a, b);
          report.max_relative_deviation =
              std::max(report.max_relative_deviation, row.relative_deviation);
          ++report.cells_compared;
          report.rows.push_back(std::move(row));
        }
      }
    }
  }
  return report;
}

}  // namespace ctbn

#endif  // CTBN_ESTIMATION_HPP_
