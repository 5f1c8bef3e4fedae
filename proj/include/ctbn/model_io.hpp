#ifndef CTBN_MODEL_IO_HPP_
#define CTBN_MODEL_IO_HPP_

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ctbn/model.hpp"

namespace ctbn {

// Model files are JSON documents of the form
//
//   {
//     "epsilon": 0.05,
//     "components": [
//       {"id": 1, "cardinality": 2, "parents": [], "scale": "slow",
//        "rate_table": {"": [[-1, 1], [2, -2]]}},
//       {"id": 2, "cardinality": 2, "parents": [1], "scale": "fast",
//        "rate_table": {"0": [[-2, 2], [3, -3]],
//                       "1": [[-3, 3], [2, -2]]}}
//     ],
//     "initial": {"factored": [[0.5, 0.5], [0.5, 0.5]]}
//   }
//
// Rate-table keys are comma-joined parent assignments in ascending parent-id
// order ("" for a parentless component); values are row-major rate rows.
// "initial" holds either "joint" (one vector over the full state space) or
// "factored" (one vector per component).  Parse errors throw
// std::runtime_error; semantic problems are left for validate().

inline constexpr const char* kModelFormatErrorPrefix = "model file: ";

namespace detail {

inline std::vector<int> parse_assignment_key(const std::string& key) {
  std::vector<int> out;
  if (key.empty()) return out;
  std::istringstream is(key);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    try {
      size_t pos = 0;
      int v = std::stoi(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::runtime_error(std::string(kModelFormatErrorPrefix) +
                               "bad rate_table key '" + key + "'");
    }
  }
  return out;
}

inline std::string assignment_key(std::span<const int> assignment) {
  return join_ints(assignment);
}

inline Matrix parse_matrix(const nlohmann::json& rows, const std::string& where) {
  if (!rows.is_array() || rows.empty()) {
    throw std::runtime_error(std::string(kModelFormatErrorPrefix) + where +
                             ": expected an array of rate rows");
  }
  const size_t n = rows.size();
  Matrix q(n, n);
  for (size_t i = 0; i < n; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != n) {
      throw std::runtime_error(std::string(kModelFormatErrorPrefix) + where + ": row " +
                               std::to_string(i) + " does not have " +
                               std::to_string(n) + " entries");
    }
    for (size_t j = 0; j < n; ++j) {
      if (!row[j].is_number()) {
        throw std::runtime_error(std::string(kModelFormatErrorPrefix) + where +
                                 ": non-numeric rate");
      }
      q(i, j) = row[j].get<double>();
    }
  }
  return q;
}

inline Vector parse_vector(const nlohmann::json& arr, const std::string& where) {
  if (!arr.is_array()) {
    throw std::runtime_error(std::string(kModelFormatErrorPrefix) + where +
                             ": expected an array");
  }
  Vector v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw std::runtime_error(std::string(kModelFormatErrorPrefix) + where +
                               ": non-numeric entry");
    }
    v(i) = arr[i].get<double>();
  }
  return v;
}

}  // namespace detail

inline CtbnModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("components") || !j["components"].is_array()) {
    throw std::runtime_error(std::string(kModelFormatErrorPrefix) +
                             "missing 'components' array");
  }
  std::vector<ComponentSpec> components;
  for (const auto& jc : j["components"]) {
    ComponentSpec c;
    if (!jc.contains("id") || !jc.contains("cardinality") || !jc.contains("rate_table")) {
      throw std::runtime_error(std::string(kModelFormatErrorPrefix) +
                               "component needs id, cardinality and rate_table");
    }
    c.id = jc["id"].get<int>();
    c.cardinality = jc["cardinality"].get<int>();
    if (jc.contains("parents")) {
      for (const auto& p : jc["parents"]) c.parents.push_back(p.get<int>());
    }
    std::string scale = jc.value("scale", std::string("slow"));
    if (scale == "fast") {
      c.scale = Scale::fast;
    } else if (scale == "slow") {
      c.scale = Scale::slow;
    } else {
      throw std::runtime_error(std::string(kModelFormatErrorPrefix) + "component " +
                               std::to_string(c.id) + ": scale '" + scale +
                               "' is neither 'slow' nor 'fast'");
    }
    const std::string where = "component " + std::to_string(c.id);
    for (const auto& [key, rows] : jc["rate_table"].items()) {
      c.rate_table[detail::parse_assignment_key(key)] =
          detail::parse_matrix(rows, where + " rate_table[" + key + "]");
    }
    components.push_back(std::move(c));
  }

  InitialDistribution initial;
  if (j.contains("initial")) {
    const auto& ji = j["initial"];
    if (ji.contains("joint")) {
      initial = InitialDistribution::make_joint(detail::parse_vector(ji["joint"], "initial.joint"));
    } else if (ji.contains("factored")) {
      std::vector<Vector> factors;
      if (!ji["factored"].is_array()) {
        throw std::runtime_error(std::string(kModelFormatErrorPrefix) +
                                 "initial.factored must be an array of arrays");
      }
      for (const auto& f : ji["factored"]) {
        factors.push_back(detail::parse_vector(f, "initial.factored"));
      }
      initial = InitialDistribution::make_factored(std::move(factors));
    } else {
      throw std::runtime_error(std::string(kModelFormatErrorPrefix) +
                               "initial needs 'joint' or 'factored'");
    }
  } else {
    std::vector<int> cards;
    for (const auto& c : components) cards.push_back(std::max(c.cardinality, 1));
    initial = InitialDistribution::make_uniform(cards);
  }

  double epsilon = j.value("epsilon", 1.0);
  return CtbnModel(std::move(components), std::move(initial), epsilon);
}

inline nlohmann::json model_to_json(const CtbnModel& model) {
  nlohmann::json j;
  j["epsilon"] = model.epsilon();
  j["components"] = nlohmann::json::array();
  for (const ComponentSpec& c : model.components()) {
    nlohmann::json jc;
    jc["id"] = c.id;
    jc["cardinality"] = c.cardinality;
    jc["parents"] = c.parents;
    jc["scale"] = to_string(c.scale);
    nlohmann::json table = nlohmann::json::object();
    for (const auto& [assignment, q] : c.rate_table) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index i = 0; i < q.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < q.cols(); ++k) row.push_back(q(i, k));
        rows.push_back(std::move(row));
      }
      table[detail::assignment_key(assignment)] = std::move(rows);
    }
    jc["rate_table"] = std::move(table);
    j["components"].push_back(std::move(jc));
  }
  const InitialDistribution& init = model.initial();
  if (init.joint) {
    j["initial"]["joint"] = std::vector<double>(init.joint->begin(), init.joint->end());
  } else if (init.factored) {
    nlohmann::json factors = nlohmann::json::array();
    for (const Vector& f : *init.factored) {
      factors.push_back(std::vector<double>(f.begin(), f.end()));
    }
    j["initial"]["factored"] = std::move(factors);
  }
  return j;
}

inline CtbnModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open model file '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string(kModelFormatErrorPrefix) + path + ": " + e.what());
  }
  return model_from_json(j);
}

inline void save_model(const CtbnModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write model file '" + path + "'");
  }
  out << model_to_json(model).dump(2) << "\n";
}

inline const std::set<std::string>& builtin_model_names() {
  static const std::set<std::string> names = {"ex31", "ex41", "ex42", "ex43",
                                              "ex44", "ex51", "ex52"};
  return names;
}

// Resolves `ref` to a model: an existing file path wins, otherwise a built-in
// model name is looked up under `models_dir` (or $CTBN_MODELS_DIR when unset).
inline CtbnModel resolve_model(const std::string& ref, std::string models_dir = "") {
  namespace fs = std::filesystem;
  if (fs::exists(ref)) return load_model(ref);
  if (builtin_model_names().count(ref)) {
    if (models_dir.empty()) {
      if (const char* env = std::getenv("CTBN_MODELS_DIR")) models_dir = env;
    }
    fs::path p = fs::path(models_dir) / (ref + ".json");
    if (fs::exists(p)) return load_model(p.string());
    throw std::runtime_error("built-in model '" + ref + "' not found under '" +
                             models_dir + "'");
  }
  throw std::runtime_error("no such model file or built-in model: '" + ref + "'");
}

}  // namespace ctbn

#endif  // CTBN_MODEL_IO_HPP_
