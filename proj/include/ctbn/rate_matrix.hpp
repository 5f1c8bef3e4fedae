#ifndef CTBN_RATE_MATRIX_HPP_
#define CTBN_RATE_MATRIX_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace ctbn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Default tolerances for the structural checks below.  Callers that need
// different slack (e.g. the experiment harness) pass their own.
inline constexpr double kRowSumTol = 1e-10;
inline constexpr double kDistributionSumTol = 1e-12;

// A rate (intensity) matrix has nonnegative off-diagonal entries and rows
// summing to zero.  Returns one message per violated condition; empty means
// the matrix qualifies as a CTMC generator.
inline std::vector<std::string> rate_matrix_violations(const Matrix& q,
                                                       double row_sum_tol = kRowSumTol) {
  std::vector<std::string> out;
  if (q.rows() != q.cols()) {
    out.push_back("matrix is " + std::to_string(q.rows()) + "x" +
                  std::to_string(q.cols()) + ", expected square");
    return out;
  }
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (!std::isfinite(q(i, j))) {
        out.push_back("entry (" + std::to_string(i) + "," + std::to_string(j) +
                      ") is not finite");
      } else if (i != j && q(i, j) < 0) {
        out.push_back("off-diagonal entry (" + std::to_string(i) + "," +
                      std::to_string(j) + ") = " + std::to_string(q(i, j)) +
                      " is negative");
      }
    }
    double row_sum = q.row(i).sum();
    if (std::abs(row_sum) > row_sum_tol) {
      out.push_back("row " + std::to_string(i) + " sums to " + std::to_string(row_sum) +
                    ", expected 0");
    }
  }
  return out;
}

inline bool is_rate_matrix(const Matrix& q, double row_sum_tol = kRowSumTol) {
  return rate_matrix_violations(q, row_sum_tol).empty();
}

inline std::vector<std::string> distribution_violations(
    const Vector& p, double sum_tol = kDistributionSumTol) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p(i)) || p(i) < 0) {
      out.push_back("entry " + std::to_string(i) + " = " + std::to_string(p(i)) +
                    " is not a probability");
    }
  }
  if (p.size() > 0 && std::abs(p.sum() - 1.0) > sum_tol) {
    out.push_back("entries sum to " + std::to_string(p.sum()) + ", expected 1");
  }
  return out;
}

inline bool is_distribution(const Vector& p, double sum_tol = kDistributionSumTol) {
  return p.size() > 0 && distribution_violations(p, sum_tol).empty();
}

// Overwrites the diagonal so every row sums to zero.
inline void set_generator_diagonal(Matrix& q) {
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    q(i, i) = 0.0;
    q(i, i) = -q.row(i).sum();
  }
}

}  // namespace ctbn

#endif  // CTBN_RATE_MATRIX_HPP_
