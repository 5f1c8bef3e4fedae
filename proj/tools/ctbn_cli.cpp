// Command-line front end: model validation, dense analysis, simulation,
// estimation, reduction, closure queries, and the named experiments, all on
// the JSON model format.  Exit codes: 0 success, 2 model parse/validation
// failure, 1 runtime error.

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctbn/ctbn.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct ModelNotUsable {};  // thrown after the problem has been printed

std::string models_dir_or_default(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CTBN_MODELS_DIR")) return env;
#ifdef CTBN_DEFAULT_MODELS_DIR
  return CTBN_DEFAULT_MODELS_DIR;
#else
  return "";
#endif
}

// Loads and validates; prints problems and throws ModelNotUsable on failure
// so callers can map it to the validation exit code.
ctbn::CtbnModel load_checked(const std::string& ref, const std::string& models_dir) {
  ctbn::CtbnModel model;
  try {
    model = ctbn::resolve_model(ref, models_dir_or_default(models_dir));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    throw ModelNotUsable{};
  }
  std::vector<std::string> problems = ctbn::validate(model);
  if (!problems.empty()) {
    for (const std::string& p : problems) std::cerr << "invalid model: " << p << "\n";
    throw ModelNotUsable{};
  }
  return model;
}

void write_matrix_csv(const ctbn::Matrix& m, std::ostream& os) {
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      os << (j ? "," : "") << buf;
    }
    os << "\n";
  }
}

void write_distribution_csv(const ctbn::Vector& p, const ctbn::StateSpace& space,
                            std::ostream& os) {
  for (int k = 0; k < space.component_count(); ++k) os << "x_" << (k + 1) << ",";
  os << "probability\n";
  char buf[40];
  ctbn::JointState s(space.component_count(), 0);
  for (ctbn::StateIndex i = 0; i < space.size(); ++i) {
    for (int v : s) os << v << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", p(i));
    os << buf << "\n";
    space.next(s);
  }
}

// Writes to the --out target, or stdout when none was given.
void emit(const std::string& out, const std::string& body) {
  if (out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write '" + out + "'");
  os << body;
}

ctbn::StopRule stop_from_flags(std::optional<double> max_time,
                               std::optional<std::int64_t> max_transitions) {
  ctbn::StopRule stop;
  stop.max_time = max_time;
  stop.max_transitions = max_transitions;
  return stop;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-time Bayesian network toolkit"};
  app.require_subcommand(1);

  std::string model_ref, models_dir, out;
  app.add_option("--models-dir", models_dir,
                 "directory with built-in models (also $CTBN_MODELS_DIR)");

  std::optional<double> epsilon_flag;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> seeds;
  std::optional<double> max_time;
  std::optional<std::int64_t> max_transitions;
  double t = 1.0;
  double tolerance = 0.05;

  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_ref, "model file path or built-in name")->required();
    cmd->add_option("--models-dir", models_dir,
                    "directory with built-in models (also $CTBN_MODELS_DIR)");
    cmd->add_option("--out", out, "output file (default: stdout)");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a model file");
  add_model(validate);

  CLI::App* amalgamate = app.add_subcommand("amalgamate", "print the joint generator");
  add_model(amalgamate);
  amalgamate->add_option("--epsilon", epsilon_flag, "scale ratio (default: model's)");

  CLI::App* solve = app.add_subcommand("solve", "integrate the master equation");
  add_model(solve);
  solve->add_option("--epsilon", epsilon_flag, "scale ratio (default: model's)");
  solve->add_option("--t", t, "time to integrate to")->required();

  CLI::App* stationary = app.add_subcommand("stationary", "stationary distribution");
  add_model(stationary);
  stationary->add_option("--epsilon", epsilon_flag, "scale ratio (default: model's)");

  CLI::App* simulate = app.add_subcommand("simulate", "sample a trajectory");
  add_model(simulate);
  simulate->add_option("--epsilon", epsilon_flag, "scale ratio (default: model's)");
  simulate->add_option("--seed", seeds, "RNG seed (default: 1)");
  simulate->add_option("--max-time", max_time, "stop at this time horizon");
  simulate->add_option("--max-transitions", max_transitions, "stop after this many jumps");

  int target = 0;
  std::vector<int> conditioners;
  bool slow_only = false;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "simulate, then estimate conditional rates by maximum likelihood");
  add_model(estimate);
  estimate->add_option("--epsilon", epsilon_flag, "scale ratio (default: model's)");
  estimate->add_option("--seed", seeds, "RNG seeds; statistics pool across them");
  estimate->add_option("--max-time", max_time, "stop at this time horizon");
  estimate->add_option("--max-transitions", max_transitions, "stop after this many jumps");
  estimate->add_option("--target", target, "component whose rates to estimate")->required();
  estimate->add_option("--conditioner", conditioners, "condition on this component (repeatable)");
  estimate->add_flag("--slow-only", slow_only, "observe only the slow components");

  CLI::App* reduce = app.add_subcommand("reduce", "construct the reduced slow model");
  add_model(reduce);

  std::vector<int> up_set, fast_up_set, spar_set;
  CLI::App* closure = app.add_subcommand("closure", "ancestral closure queries");
  add_model(closure);
  closure->add_option("--up", up_set, "upward closure of these components");
  closure->add_option("--fast-up", fast_up_set, "fast-upward closure of these components");
  closure->add_option("--slow-ancestors", spar_set, "last slow ancestors of these components");

  std::string experiment_name;
  CLI::App* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("name", experiment_name, "ex51 | ex52_table1 | convergence")
      ->required();
  experiment->add_option("--model", model_ref, "model file or built-in (default: per experiment)");
  experiment->add_option("--models-dir", models_dir,
                         "directory with built-in models (also $CTBN_MODELS_DIR)");
  experiment->add_option("--out", out, "output directory (default: .)");
  experiment->add_option("--epsilon", epsilons, "scale ratio (repeatable)");
  experiment->add_option("--seed", seeds, "RNG seed (repeatable; default 1 2 3)");
  experiment->add_option("--max-time", max_time, "override the stop rule: time horizon");
  experiment->add_option("--max-transitions", max_transitions,
                         "override the stop rule: transition cap");
  experiment->add_option("--tolerance", tolerance, "relative tolerance echoed in reports");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      try {
        load_checked(model_ref, models_dir);
      } catch (const ModelNotUsable&) {
        return kExitValidation;
      }
      std::cout << "ok\n";
      return kExitOk;
    }

    if (experiment->parsed()) {
      ctbn::ExperimentConfig config;
      config.name = experiment_name;
      config.model_ref = model_ref;
      config.models_dir = models_dir_or_default(models_dir);
      config.epsilons = epsilons;
      if (!seeds.empty()) config.seeds = seeds;
      config.stop = stop_from_flags(max_time, max_transitions);
      if (!out.empty()) config.out_dir = out;
      config.tolerance = tolerance;
      ctbn::ExperimentReport report = ctbn::run_experiment(config);
      for (const std::string& f : report.files) std::cout << f << "\n";
      return kExitOk;
    }

    ctbn::CtbnModel model;
    try {
      model = load_checked(model_ref, models_dir);
    } catch (const ModelNotUsable&) {
      return kExitValidation;
    }
    const double eps = epsilon_flag.value_or(model.epsilon());

    if (amalgamate->parsed()) {
      std::ostringstream body;
      write_matrix_csv(ctbn::amalgamate(model, eps), body);
      emit(out, body.str());
    } else if (solve->parsed()) {
      ctbn::Vector p = ctbn::solve_master(ctbn::amalgamate(model, eps),
                                          ctbn::expand_initial(model), t);
      std::ostringstream body;
      write_distribution_csv(p, model.state_space(), body);
      emit(out, body.str());
    } else if (stationary->parsed()) {
      ctbn::Vector pi = ctbn::stationary_distribution(ctbn::amalgamate(model, eps));
      std::ostringstream body;
      write_distribution_csv(pi, model.state_space(), body);
      emit(out, body.str());
    } else if (simulate->parsed()) {
      ctbn::StopRule stop = stop_from_flags(max_time, max_transitions);
      std::uint64_t seed = seeds.empty() ? 1 : seeds.front();
      ctbn::Trajectory traj = ctbn::sample_trajectory(model, eps, seed, stop);
      std::ostringstream body;
      ctbn::write_trajectory_csv(traj, body);
      emit(out, body.str());
    } else if (estimate->parsed()) {
      ctbn::StopRule stop = stop_from_flags(max_time, max_transitions);
      if (seeds.empty()) seeds.push_back(1);
      std::optional<ctbn::SufficientStats> stats;
      for (std::uint64_t seed : seeds) {
        ctbn::Trajectory traj = ctbn::sample_trajectory(model, eps, seed, stop);
        if (slow_only) traj = ctbn::restrict_trajectory(traj, model.slow_ids());
        ctbn::SufficientStats s = ctbn::collect_stats(traj, target, conditioners);
        if (stats) {
          stats->merge(s);
        } else {
          stats = std::move(s);
        }
      }
      std::ostringstream body;
      ctbn::write_estimates_csv(ctbn::mle_rates(*stats), body);
      emit(out, body.str());
    } else if (reduce->parsed()) {
      ctbn::ReducedCtbn reduced = ctbn::reduce_ctbn(model);
      if (out.empty()) {
        std::cout << ctbn::model_to_json(reduced.model).dump(2) << "\n";
      } else {
        ctbn::save_model(reduced.model, out);
        std::cout << out << "\n";
      }
    } else if (closure->parsed()) {
      std::vector<int> result;
      if (!up_set.empty()) {
        result = ctbn::upward_closure(model, up_set);
      } else if (!fast_up_set.empty()) {
        result = ctbn::fast_upward_closure(model, fast_up_set);
      } else if (!spar_set.empty()) {
        result = ctbn::last_slow_ancestors(model, spar_set);
      } else {
        std::cerr << "error: closure needs one of --up, --fast-up, --slow-ancestors\n";
        return kExitValidation;
      }
      std::ostringstream body;
      body << ctbn::detail::join_ints(result) << "\n";
      emit(out, body.str());
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
