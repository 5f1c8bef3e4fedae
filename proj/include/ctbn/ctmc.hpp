#ifndef CTBN_CTMC_HPP_
#define CTBN_CTMC_HPP_

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/rate_matrix.hpp"

// Dense continuous-time Markov chain routines on a single generator matrix.
// Everything here treats q as an honest rate matrix (off-diagonal rates,
// diagonal making rows sum to zero) and works with row-vector distributions
// stored as Eigen column vectors, i.e. the master equation reads
//
//   dp/dt = q^T p .

namespace ctbn {

// Propagates a distribution through exp(q^T t) by uniformization: with
// lambda >= max_i |q_ii| and P = I + q/lambda, the solution is a Poisson
// mixture  p(t) = sum_m  Pois(m; lambda t) (P^T)^m p0.  The series has only
// nonnegative terms, so there is none of the cancellation that plagues a
// truncated Taylor expansion of exp(q t) for stiff generators.  Long
// horizons are cut into segments with lambda t <= 64 so the Poisson weights
// stay well inside double range; the series in each segment is truncated
// once the remaining tail mass drops below `tail_tol`.
inline Vector solve_master(const Matrix& q, const Vector& p0, double t,
                           double tail_tol = 1e-13) {
  const Eigen::Index n = q.rows();
  if (q.cols() != n || p0.size() != n) {
    throw std::invalid_argument("solve_master: dimension mismatch");
  }
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("solve_master: time must be finite and >= 0");
  }
  if (t == 0.0) return p0;

  double lambda = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) lambda = std::max(lambda, -q(i, i));
  if (lambda == 0.0) return p0;  // absorbing everywhere: nothing moves

  // P^T acts on column distributions; build it once.
  const Matrix pt = Matrix::Identity(n, n) + q.transpose() / lambda;

  const double kMaxSegmentMass = 64.0;
  const int segments = std::max(1, static_cast<int>(std::ceil(lambda * t / kMaxSegmentMass)));
  const double dt = t / segments;
  const double a = lambda * dt;  // Poisson mean per segment

  Vector p = p0;
  for (int s = 0; s < segments; ++s) {
    Vector term = p;                 // (P^T)^m p, starting at m = 0
    Vector acc = std::exp(-a) * term;
    double weight = std::exp(-a);    // Pois(m; a)
    double mass = weight;            // accumulated Poisson mass
    // Generous hard cap: the Poisson tail beyond a + 40 sqrt(a) + 64 is far
    // below any tolerance we accept.
    const int max_terms = static_cast<int>(a + 40.0 * std::sqrt(a + 1.0) + 64.0);
    for (int m = 1; m <= max_terms && 1.0 - mass > tail_tol; ++m) {
      term = pt * term;
      weight *= a / m;
      mass += weight;
      acc.noalias() += weight * term;
    }
    // The truncated tail removes a little probability; renormalizing puts it
    // back without disturbing the shape by more than the tail mass itself.
    const double total = acc.sum();
    if (total > 0.0) acc /= total;
    p = std::move(acc);
  }
  return p;
}

// Strongly connected components of the directed graph on {0..n-1} with an
// edge i -> j wherever q(i,j) > 0.  Returns one sorted vertex list per
// component, ordered by smallest member.  Iterative Tarjan, so deep graphs
// do not overflow the stack.
inline std::vector<std::vector<int>> strongly_connected_components(const Matrix& q) {
  const int n = static_cast<int>(q.rows());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && q(i, j) > 0.0) adj[i].push_back(j);
    }
  }
  std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> comps;
  int next_index = 0;

  struct Frame {
    int v;
    size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < adj[f.v].size()) {
        int w = adj[f.v][f.edge++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          std::vector<int> comp;
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp.push_back(w);
          } while (w != f.v);
          std::sort(comp.begin(), comp.end());
          comps.push_back(std::move(comp));
        }
        int v = f.v;
        call.pop_back();
        if (!call.empty()) {
          low[call.back().v] = std::min(low[call.back().v], low[v]);
        }
      }
    }
  }
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return comps;
}

// A finite CTMC is ergodic iff its positive-rate digraph is strongly
// connected (irreducibility; aperiodicity is automatic in continuous time).
inline bool is_ergodic(const Matrix& q) {
  return strongly_connected_components(q).size() == 1;
}

// Stationary distribution of an ergodic generator: the unique probability
// vector with q^T pi = 0.  Solved as a least-squares system with an appended
// normalization row; for large matrices we fall back to power iteration on
// the uniformized transition kernel to avoid a dense factorization.
inline Vector stationary_distribution(const Matrix& q, double dense_limit = 1e4) {
  const Eigen::Index n = q.rows();
  if (q.cols() != n || n == 0) {
    throw std::invalid_argument("stationary_distribution: matrix must be square and nonempty");
  }
  {
    auto comps = strongly_connected_components(q);
    if (comps.size() != 1) {
      std::string msg = "stationary_distribution: chain is not ergodic (" +
                        std::to_string(comps.size()) + " communicating classes:";
      for (const auto& comp : comps) {
        msg += " {";
        for (size_t k = 0; k < comp.size(); ++k) {
          if (k) msg += ",";
          msg += std::to_string(comp[k]);
        }
        msg += "}";
      }
      msg += ")";
      throw std::runtime_error(msg);
    }
  }

  if (static_cast<double>(n) <= dense_limit) {
    // Stack q^T on top of the all-ones row and solve A pi = (0,...,0,1)^T in
    // the least-squares sense; for an ergodic generator the residual is zero
    // up to roundoff and the solution is the stationary law.
    Matrix a(n + 1, n);
    a.topRows(n) = q.transpose();
    a.row(n).setOnes();
    Vector b = Vector::Zero(n + 1);
    b(n) = 1.0;
    Vector pi = a.colPivHouseholderQr().solve(b);
    pi = pi.cwiseMax(0.0);  // clip roundoff-negative entries
    pi /= pi.sum();
    return pi;
  }

  // Power iteration on P^T = I + q^T/lambda, whose fixed points are exactly
  // the stationary distributions of q.
  double lambda = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) lambda = std::max(lambda, -q(i, i));
  if (lambda == 0.0) {
    throw std::runtime_error("stationary_distribution: zero generator");
  }
  const Matrix pt = Matrix::Identity(n, n) + q.transpose() / (1.05 * lambda);
  Vector pi = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < 200000; ++iter) {
    Vector nxt = pt * pi;
    nxt /= nxt.sum();
    const double delta = (nxt - pi).template lpNorm<1>();
    pi = std::move(nxt);
    if (delta < 1e-14) break;
  }
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return pi;
}

// Slowest relaxation rate of an ergodic generator: |Re lambda_2| where
// lambda_2 is the nonzero eigenvalue of q closest to the imaginary axis.
// Distance from equilibrium decays asymptotically like exp(-rate * t).
inline double equilibration_rate(const Matrix& q) {
  const Eigen::Index n = q.rows();
  if (q.cols() != n || n < 2) {
    throw std::invalid_argument("equilibration_rate: need a square matrix of size >= 2");
  }
  Eigen::EigenSolver<Matrix> es(q, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("equilibration_rate: eigendecomposition failed");
  }
  // One eigenvalue sits at zero (row sums vanish); drop the one nearest zero
  // and take the smallest |Re| among the rest.
  std::vector<double> re(n);
  for (Eigen::Index i = 0; i < n; ++i) re[i] = es.eigenvalues()(i).real();
  Eigen::Index zero_at = 0;
  double best = std::abs(re[0]);
  for (Eigen::Index i = 1; i < n; ++i) {
    if (std::abs(re[i]) < best) {
      best = std::abs(re[i]);
      zero_at = i;
    }
  }
  double rate = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == zero_at) continue;
    rate = std::min(rate, std::abs(re[i]));
  }
  return rate;
}

}  // namespace ctbn

#endif  // CTBN_CTMC_HPP_
