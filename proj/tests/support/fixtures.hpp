#ifndef CTBN_TESTS_SUPPORT_FIXTURES_HPP_
#define CTBN_TESTS_SUPPORT_FIXTURES_HPP_

#include <initializer_list>
#include <string>
#include <vector>

#include "ctbn/ctbn.hpp"

// Hand-built fixture models and independent numerical oracles.  The fixtures
// deliberately repeat the content of the shipped model files in code, so the
// files can be checked against an independent transcription, and reduction
// tests can perturb copies freely.

namespace ctbn_test {

using namespace ctbn;

inline Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline ComponentSpec component(int id, int cardinality, std::vector<int> parents,
                               Scale scale,
                               std::map<std::vector<int>, Matrix> table) {
  ComponentSpec c;
  c.id = id;
  c.cardinality = cardinality;
  c.parents = std::move(parents);
  c.scale = scale;
  c.rate_table = std::move(table);
  return c;
}

inline InitialDistribution uniform_initial(int components) {
  return InitialDistribution::make_uniform(std::vector<int>(components, 2));
}

// Two-component system: fast root driving one slow reader.
inline CtbnModel fixture_ex31(double epsilon = 0.1) {
  return CtbnModel(
      {component(1, 2, {}, Scale::fast, {{{}, make_matrix({{-1, 1}, {2, -2}})}}),
       component(2, 2, {1}, Scale::slow,
                 {{{0}, make_matrix({{-2, 2}, {3, -3}})},
                  {{1}, make_matrix({{-3, 3}, {2, -2}})}})},
      uniform_initial(2), epsilon);
}

// Three-component chain with the middle component fast.
inline CtbnModel fixture_ex51(double epsilon = 0.05) {
  return CtbnModel(
      {component(1, 2, {}, Scale::slow, {{{}, make_matrix({{-1, 1}, {2, -2}})}}),
       component(2, 2, {1}, Scale::fast,
                 {{{0}, make_matrix({{-2, 2}, {3, -3}})},
                  {{1}, make_matrix({{-3, 3}, {2, -2}})}}),
       component(3, 2, {2}, Scale::slow,
                 {{{0}, make_matrix({{-3, 3}, {4, -4}})},
                  {{1}, make_matrix({{-5, 5}, {6, -6}})}})},
      uniform_initial(3), epsilon);
}

inline CtbnModel fixture_ex41() { return fixture_ex51(0.1); }

// Six components, two interacting fast components in the middle.
inline CtbnModel fixture_ex52(double epsilon = 0.05) {
  return CtbnModel(
      {component(1, 2, {}, Scale::slow, {{{}, make_matrix({{-1, 1}, {2, -2}})}}),
       component(2, 2, {}, Scale::slow, {{{}, make_matrix({{-2, 2}, {1, -1}})}}),
       component(3, 2, {1}, Scale::fast,
                 {{{0}, make_matrix({{-2, 2}, {3, -3}})},
                  {{1}, make_matrix({{-3, 3}, {2, -2}})}}),
       component(4, 2, {2, 3}, Scale::fast,
                 {{{0, 0}, make_matrix({{-3, 3}, {4, -4}})},
                  {{0, 1}, make_matrix({{-1, 1}, {2, -2}})},
                  {{1, 0}, make_matrix({{-4, 4}, {3, -3}})},
                  {{1, 1}, make_matrix({{-2, 2}, {1, -1}})}}),
       component(5, 2, {3}, Scale::slow,
                 {{{0}, make_matrix({{-1, 1}, {3, -3}})},
                  {{1}, make_matrix({{-3, 3}, {1, -1}})}}),
       component(6, 2, {4}, Scale::slow,
                 {{{0}, make_matrix({{-1, 1}, {4, -4}})},
                  {{1}, make_matrix({{-4, 4}, {1, -1}})}})},
      uniform_initial(6), epsilon);
}

inline CtbnModel fixture_ex44(double epsilon = 1.0) { return fixture_ex52(epsilon); }

// Six components with segregated fast components (no fast-fast edges).
inline CtbnModel fixture_ex42(double epsilon = 0.1) {
  std::map<std::vector<int>, Matrix> q5;
  for (int x1 = 0; x1 < 2; ++x1) {
    for (int x3 = 0; x3 < 2; ++x3) {
      for (int x4 = 0; x4 < 2; ++x4) {
        const double r = 1.0 + x1 + 2 * x3 + x4;
        const double s = 2.0 + 2 * x1 + x3 + x4;
        q5[{x1, x3, x4}] = make_matrix({{-r, r}, {s, -s}});
      }
    }
  }
  return CtbnModel(
      {component(1, 2, {}, Scale::slow, {{{}, make_matrix({{-1, 1}, {2, -2}})}}),
       component(2, 2, {}, Scale::slow, {{{}, make_matrix({{-2, 2}, {1, -1}})}}),
       component(3, 2, {1}, Scale::fast,
                 {{{0}, make_matrix({{-2, 2}, {3, -3}})},
                  {{1}, make_matrix({{-3, 3}, {2, -2}})}}),
       component(4, 2, {1, 2}, Scale::fast,
                 {{{0, 0}, make_matrix({{-3, 3}, {4, -4}})},
                  {{0, 1}, make_matrix({{-1, 1}, {2, -2}})},
                  {{1, 0}, make_matrix({{-4, 4}, {3, -3}})},
                  {{1, 1}, make_matrix({{-2, 2}, {1, -1}})}}),
       component(5, 2, {1, 3, 4}, Scale::slow, std::move(q5)),
       component(6, 2, {3}, Scale::slow,
                 {{{0}, make_matrix({{-1, 1}, {4, -4}})},
                  {{1}, make_matrix({{-4, 4}, {1, -1}})}})},
      uniform_initial(6), epsilon);
}

// Five components; the two fast ones interact.
inline CtbnModel fixture_ex43(double epsilon = 0.1) {
  return CtbnModel(
      {component(1, 2, {}, Scale::slow, {{{}, make_matrix({{-1, 1}, {2, -2}})}}),
       component(2, 2, {}, Scale::slow, {{{}, make_matrix({{-2, 2}, {1, -1}})}}),
       component(3, 2, {1}, Scale::fast,
                 {{{0}, make_matrix({{-2, 2}, {3, -3}})},
                  {{1}, make_matrix({{-3, 3}, {2, -2}})}}),
       component(4, 2, {2, 3}, Scale::fast,
                 {{{0, 0}, make_matrix({{-3, 3}, {4, -4}})},
                  {{0, 1}, make_matrix({{-1, 1}, {2, -2}})},
                  {{1, 0}, make_matrix({{-4, 4}, {3, -3}})},
                  {{1, 1}, make_matrix({{-2, 2}, {1, -1}})}}),
       component(5, 2, {4}, Scale::slow,
                 {{{0}, make_matrix({{-1, 1}, {3, -3}})},
                  {{1}, make_matrix({{-3, 3}, {1, -1}})}})},
      uniform_initial(5), epsilon);
}

// Two independent binary components, handy for closed-form checks.
inline CtbnModel fixture_independent_pair() {
  return CtbnModel(
      {component(1, 2, {}, Scale::slow, {{{}, make_matrix({{-1, 1}, {2, -2}})}}),
       component(2, 2, {}, Scale::slow, {{{}, make_matrix({{-2, 2}, {1, -1}})}})},
      uniform_initial(2), 1.0);
}

// ---------------------------------------------------------------------------
// Random models for property tests.

struct RandomModelOptions {
  int max_components = 5;
  int max_cardinality = 3;
  double fast_prob = 0.4;       // 0 disables fast components
  bool ensure_slow = true;      // keep at least one slow component
  bool segregated = false;      // forbid fast-fast edges
  double edge_prob = 0.35;
  int max_parents = 3;
};

inline CtbnModel random_model(SampleRng& rng, const RandomModelOptions& opt = {}) {
  const int m = 2 + static_cast<int>(rng.uniform01() * (opt.max_components - 1));
  std::vector<int> cards(m);
  std::vector<Scale> scales(m);
  for (int k = 0; k < m; ++k) {
    cards[k] = 2 + static_cast<int>(rng.uniform01() * (opt.max_cardinality - 1));
    scales[k] = rng.uniform01() < opt.fast_prob ? Scale::fast : Scale::slow;
  }
  if (opt.ensure_slow) {
    bool any_slow = false;
    for (Scale s : scales) any_slow = any_slow || (s == Scale::slow);
    if (!any_slow) scales[m - 1] = Scale::slow;
  }

  std::vector<ComponentSpec> specs;
  for (int k = 0; k < m; ++k) {
    ComponentSpec c;
    c.id = k + 1;
    c.cardinality = cards[k];
    c.scale = scales[k];
    for (int p = 0; p < m; ++p) {
      if (p == k || static_cast<int>(c.parents.size()) >= opt.max_parents) continue;
      if (opt.segregated && scales[k] == Scale::fast && scales[p] == Scale::fast) continue;
      if (rng.uniform01() < opt.edge_prob) c.parents.push_back(p + 1);
    }
    std::vector<int> parent_cards;
    for (int p : c.parents) parent_cards.push_back(cards[p - 1]);
    StateSpace pspace(parent_cards);
    JointState assignment(parent_cards.size(), 0);
    for (StateIndex i = 0; i < pspace.size(); ++i) {
      Matrix q = Matrix::Zero(cards[k], cards[k]);
      for (int a = 0; a < cards[k]; ++a) {
        double exit = 0.0;
        for (int b = 0; b < cards[k]; ++b) {
          if (a == b) continue;
          q(a, b) = 0.2 + 2.3 * rng.uniform01();  // strictly positive: ergodic
          exit += q(a, b);
        }
        q(a, a) = -exit;
      }
      c.rate_table[assignment] = std::move(q);
      pspace.next(assignment);
    }
    specs.push_back(std::move(c));
  }

  std::vector<Vector> factors;
  for (int k = 0; k < m; ++k) {
    Vector f(cards[k]);
    for (int i = 0; i < cards[k]; ++i) f(i) = 0.1 + rng.uniform01();
    f /= f.sum();
    factors.push_back(std::move(f));
  }
  return CtbnModel(std::move(specs), InitialDistribution::make_factored(std::move(factors)),
                   1.0);
}

// ---------------------------------------------------------------------------
// Independent oracles.

// Stationary distribution through a dense kernel computation, bypassing the
// library's least-squares route.
inline Vector null_space_stationary(const Matrix& q) {
  Eigen::FullPivLU<Matrix> lu(q.transpose());
  lu.setThreshold(1e-9);
  Matrix kernel = lu.kernel();
  Vector pi = kernel.col(0);
  if (pi.sum() < 0) pi = -pi;
  return pi / pi.sum();
}

// Master-equation right-hand side assembled component by component, without
// ever forming the joint generator: probability flows in from states that
// differ in one coordinate and out at the total local exit rate.
inline Vector componentwise_rhs(const CtbnModel& model, double eps, const Vector& p) {
  const StateSpace& sp = model.state_space();
  Vector out(sp.size());
  JointState b(sp.component_count(), 0);
  for (StateIndex i = 0; i < sp.size(); ++i) {
    double inflow = 0.0, outflow = 0.0;
    for (int k = 0; k < sp.component_count(); ++k) {
      const double mult = model.rate_multiplier(k + 1, eps);
      const Matrix& qb = model.table_at(k + 1, b);
      JointState a = b;
      for (int x = 0; x < sp.cardinality(k); ++x) {
        if (x == b[k]) continue;
        outflow += mult * qb(b[k], x);
        a[k] = x;
        const Matrix& qa = model.table_at(k + 1, a);  // rates depend on the source
        inflow += mult * qa(x, b[k]) * p(sp.encode(a));
      }
    }
    out(i) = inflow - p(i) * outflow;
    sp.next(b);
  }
  return out;
}

// Upper 1% critical values of the chi-square distribution.
inline double chi_square_99(int df) {
  static const double table[] = {0.0,    6.635, 9.210, 11.345, 13.277,
                                 15.086, 16.812, 18.475, 20.090, 21.666};
  return table[df];
}

inline std::string models_dir() {
#ifdef CTBN_TEST_MODELS_DIR
  return CTBN_TEST_MODELS_DIR;
#else
  return "models";
#endif
}

}  // namespace ctbn_test

#endif  // CTBN_TESTS_SUPPORT_FIXTURES_HPP_
