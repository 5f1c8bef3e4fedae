#ifndef CTBN_EXPERIMENTS_HPP_
#define CTBN_EXPERIMENTS_HPP_

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctbn/ctmc.hpp"
#include "ctbn/dynamics.hpp"
#include "ctbn/estimation.hpp"
#include "ctbn/model_io.hpp"
#include "ctbn/reduction.hpp"
#include "ctbn/sampler.hpp"
#include "ctbn/trajectory.hpp"

// Named, reproducible experiments: each takes a config, runs a fixed
// pipeline, writes CSV tables plus a JSON summary into the output directory,
// and returns the summary.  Everything is deterministic given (model,
// epsilon list, seed list, stop rule): rerunning a config reproduces the
// output files byte for byte.

namespace ctbn {

struct ExperimentConfig {
  std::string name;                    // ex51 | ex52_table1 | convergence
  std::string model_ref;               // model file path or built-in name
  std::string models_dir;              // where built-in models live
  std::vector<double> epsilons;        // empty -> per-experiment default
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  StopRule stop;                       // neither field set -> per-experiment default
  std::vector<double> times = {0.5, 1.0, 2.0};  // evaluation times (convergence)
  std::string out_dir = ".";
  double tolerance = 0.05;             // relative tolerance echoed into reports
};

struct ExperimentReport {
  std::string name;
  std::vector<std::string> files;      // paths written
  nlohmann::json summary;
};

namespace detail {

inline std::string fmt(double x) {
  if (std::isnan(x)) return "undefined";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& body,
                            ExperimentReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  os << body;
  report.files.push_back(path);
}

inline StopRule resolved_stop(const ExperimentConfig& config, StopRule fallback) {
  if (config.stop.max_time || config.stop.max_transitions) return config.stop;
  return fallback;
}

inline nlohmann::json config_echo(const ExperimentConfig& config, const StopRule& stop,
                                  const std::vector<double>& epsilons,
                                  const std::string& model_ref) {
  nlohmann::json j;
  j["model"] = model_ref;
  j["epsilons"] = epsilons;
  j["seeds"] = config.seeds;
  if (stop.max_time) j["max_time"] = *stop.max_time;
  if (stop.max_transitions) j["max_transitions"] = *stop.max_transitions;
  j["tolerance"] = config.tolerance;
  return j;
}

}  // namespace detail

// Analytic effective generator of the slow sub-process side by side with
// maximum-likelihood estimates from simulated paths.  With an empty epsilon
// list only the analytic matrix is computed and written.  One path per
// (epsilon, seed); the default stop rule is a time horizon of 50000.
inline ExperimentReport run_ex51(const ExperimentConfig& config) {
  ExperimentReport report;
  report.name = "ex51";
  std::filesystem::create_directories(config.out_dir);
  const std::string base = (std::filesystem::path(config.out_dir) / "ex51_").string();

  const std::string ref = config.model_ref.empty() ? "ex51" : config.model_ref;
  CtbnModel model = resolve_model(ref, config.models_dir);
  const StopRule stop = detail::resolved_stop(config, StopRule::at_time(50000.0));
  const std::vector<int>& slow = model.slow_ids();

  const Matrix analytic = effective_joint_generator(model);
  {
    std::ostringstream csv;
    for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
      for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
        if (j) csv << ",";
        csv << detail::fmt(analytic(i, j));
      }
      csv << "\n";
    }
    detail::write_text_file(base + "effective.csv", csv.str(), report);
  }

  std::ostringstream csv;
  csv << "epsilon,seed,from,to,analytic,estimate,relative_error\n";
  nlohmann::json runs = nlohmann::json::array();
  for (double eps : config.epsilons) {
    for (std::uint64_t seed : config.seeds) {
      Trajectory traj = sample_trajectory(model, eps, seed, stop);
      Trajectory slow_path = restrict_trajectory(traj, slow);
      GeneratorEstimate est = estimate_generator(slow_path);
      double max_rel = 0.0;
      for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
        for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
          if (i == j) continue;
          const double a = analytic(i, j);
          const double e = est.rates(i, j);
          double rel = std::numeric_limits<double>::quiet_NaN();
          if (!std::isnan(e)) {
            if (a > 0.0) {
              rel = std::abs(e - a) / a;
              max_rel = std::max(max_rel, rel);
            } else {
              rel = (e == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
            }
          }
          csv << detail::fmt(eps) << "," << seed << "," << i << "," << j << ","
              << detail::fmt(a) << "," << detail::fmt(e) << "," << detail::fmt(rel)
              << "\n";
        }
      }
      nlohmann::json run;
      run["epsilon"] = eps;
      run["seed"] = seed;
      run["transitions"] = traj.transition_count();
      run["slow_transitions"] = slow_path.transition_count();
      run["max_relative_error"] = max_rel;
      runs.push_back(std::move(run));
    }
  }
  detail::write_text_file(base + "rates.csv", csv.str(), report);

  report.summary["experiment"] = report.name;
  report.summary["config"] = detail::config_echo(config, stop, config.epsilons, ref);
  report.summary["runs"] = std::move(runs);
  detail::write_text_file(base + "summary.json", report.summary.dump(2) + "\n", report);
  return report;
}

// The epsilon sweep of the effective X5 rates: for each epsilon, paths are
// simulated per seed and the sufficient statistics pooled across seeds, then
// the 0->1 rate of X5 is estimated conditional on X1 alone and conditional
// on (X1, X2, X6).  The output table carries the analytic limit as its last
// row.  Default budget is 10^6 transitions per (epsilon, seed); pass a stop
// rule to raise it.
inline ExperimentReport run_ex52_table1(const ExperimentConfig& config) {
  ExperimentReport report;
  report.name = "ex52_table1";
  std::filesystem::create_directories(config.out_dir);
  const std::string base = (std::filesystem::path(config.out_dir) / "ex52_").string();

  const std::string ref = config.model_ref.empty() ? "ex52" : config.model_ref;
  CtbnModel model = resolve_model(ref, config.models_dir);
  const StopRule stop =
      detail::resolved_stop(config, StopRule::at_transitions(1000000));
  std::vector<double> epsilons = config.epsilons;
  if (epsilons.empty()) epsilons = {1.0, 0.5, 0.25, 0.1, 0.05, 0.025};
  const std::vector<int>& slow = model.slow_ids();

  // Analytic limits of the X5 rates from the reduced model: X5 keeps only
  // X1 as parent there.
  ReducedCtbn reduced = reduce_ctbn(model);
  const int x5 = static_cast<int>(
      std::lower_bound(reduced.slow_ids.begin(), reduced.slow_ids.end(), 5) -
      reduced.slow_ids.begin() + 1);
  const double limit0 = reduced.model.table(x5, std::vector<int>{0})(0, 1);
  const double limit1 = reduced.model.table(x5, std::vector<int>{1})(0, 1);

  std::ostringstream table;
  table << "epsilon,q51_01_cond0,q51_01_cond1\n";
  std::ostringstream cells;
  cells << "epsilon,x1,x2,x6,rate,stderr,count\n";
  nlohmann::json sweep = nlohmann::json::array();
  for (double eps : epsilons) {
    SufficientStats by_x1, by_all;
    bool first = true;
    std::int64_t transitions = 0;
    for (std::uint64_t seed : config.seeds) {
      Trajectory traj = sample_trajectory(model, eps, seed, stop);
      transitions += traj.transition_count();
      Trajectory slow_path = restrict_trajectory(traj, slow);
      SufficientStats s1 = collect_stats(slow_path, 5, std::vector<int>{1});
      SufficientStats s3 = collect_stats(slow_path, 5, std::vector<int>{1, 2, 6});
      if (first) {
        by_x1 = std::move(s1);
        by_all = std::move(s3);
        first = false;
      } else {
        by_x1.merge(s1);
        by_all.merge(s3);
      }
    }
    RateEstimates est1 = mle_rates(by_x1);
    RateEstimates est3 = mle_rates(by_all);
    const double q0 = est1.cells.count({0}) ? est1.cells.at({0}).rates(0, 1)
                                            : std::numeric_limits<double>::quiet_NaN();
    const double q1 = est1.cells.count({1}) ? est1.cells.at({1}).rates(0, 1)
                                            : std::numeric_limits<double>::quiet_NaN();
    table << detail::fmt(eps) << "," << detail::fmt(q0) << "," << detail::fmt(q1)
          << "\n";
    for (int x1 = 0; x1 <= 1; ++x1) {
      for (int x2 = 0; x2 <= 1; ++x2) {
        for (int x6 = 0; x6 <= 1; ++x6) {
          const std::vector<int> key = {x1, x2, x6};
          cells << detail::fmt(eps) << "," << x1 << "," << x2 << "," << x6 << ",";
          if (est3.cells.count(key)) {
            const auto& c = est3.cells.at(key);
            cells << detail::fmt(c.rates(0, 1)) << "," << detail::fmt(c.stderrs(0, 1))
                  << "," << detail::fmt(c.counts(0, 1));
          } else {
            cells << "undefined,undefined,0";
          }
          cells << "\n";
        }
      }
    }
    nlohmann::json row;
    row["epsilon"] = eps;
    row["transitions"] = transitions;
    row["q51_01_cond0"] = q0;
    row["q51_01_cond1"] = q1;
    sweep.push_back(std::move(row));
  }
  table << "limit," << detail::fmt(limit0) << "," << detail::fmt(limit1) << "\n";
  detail::write_text_file(base + "table1.csv", table.str(), report);
  detail::write_text_file(base + "cells.csv", cells.str(), report);

  report.summary["experiment"] = report.name;
  report.summary["config"] = detail::config_echo(config, stop, epsilons, ref);
  report.summary["limit"] = {limit0, limit1};
  report.summary["sweep"] = std::move(sweep);
  detail::write_text_file(base + "summary.json", report.summary.dump(2) + "\n", report);
  return report;
}

// Full versus reduced master equation: integrates the joint master equation
// at each epsilon, marginalizes onto the slow components, and compares with
// the solution of the effective slow master equation at the configured
// times.  The L1 gap should shrink as epsilon does.
inline ExperimentReport run_convergence(const ExperimentConfig& config) {
  ExperimentReport report;
  report.name = "convergence";
  std::filesystem::create_directories(config.out_dir);
  const std::string base =
      (std::filesystem::path(config.out_dir) / "convergence_").string();

  const std::string ref = config.model_ref.empty() ? "ex41" : config.model_ref;
  CtbnModel model = resolve_model(ref, config.models_dir);
  std::vector<double> epsilons = config.epsilons;
  if (epsilons.empty()) epsilons = {0.1, 0.01};

  const StateSpace& space = model.state_space();
  std::vector<int> slow_pos;
  for (int id : model.slow_ids()) slow_pos.push_back(id - 1);
  const Vector p0 = expand_initial(model);
  const Vector p0_slow = marginalize(p0, space, slow_pos);
  const Matrix q_eff = effective_joint_generator(model);

  std::ostringstream csv;
  csv << "epsilon,t,l1_error\n";
  nlohmann::json rows = nlohmann::json::array();
  for (double eps : epsilons) {
    const Matrix q_full = amalgamate(model, eps);
    for (double t : config.times) {
      const Vector full_slow =
          marginalize(solve_master(q_full, p0, t), space, slow_pos);
      const Vector red = solve_master(q_eff, p0_slow, t);
      const double err = (full_slow - red).lpNorm<1>();
      csv << detail::fmt(eps) << "," << detail::fmt(t) << "," << detail::fmt(err)
          << "\n";
      nlohmann::json row;
      row["epsilon"] = eps;
      row["t"] = t;
      row["l1_error"] = err;
      rows.push_back(std::move(row));
    }
  }
  detail::write_text_file(base + "errors.csv", csv.str(), report);

  report.summary["experiment"] = report.name;
  report.summary["config"] = detail::config_echo(config, StopRule{}, epsilons, ref);
  report.summary["rows"] = std::move(rows);
  detail::write_text_file(base + "summary.json", report.summary.dump(2) + "\n", report);
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.name == "ex51") return run_ex51(config);
  if (config.name == "ex52_table1") return run_ex52_table1(config);
  if (config.name == "convergence") return run_convergence(config);
  throw std::invalid_argument("unknown experiment '" + config.name +
                              "'; known: ex51, ex52_table1, convergence");
}

}  // namespace ctbn

#endif  // CTBN_EXPERIMENTS_HPP_
