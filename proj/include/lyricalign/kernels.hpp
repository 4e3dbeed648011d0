#pragma once

// Data-parallel inner loops shared by the feature, factorization and warping
// stages. Every kernel has an OpenMP version in `kernels` and a plain serial
// version in `kernels::serial` with the same contract; the serial versions are
// the reference the tests and benchmarks compare against.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lyricalign::kernels {

/// Outcome of projecting one row onto the entropic-prior simplex.
enum class RowStatus { solved, zero_row, fallback };

struct RowProjectionStats {
  std::size_t zero_rows = 0;
  std::size_t fallback_rows = 0;
};

/// D(i,j) = ||x_i - x_j||^2 for the rows of `x`.
Eigen::MatrixXd pairwise_sq_distances(const Eigen::MatrixXd& x);

/// C(i,j) = ||x_i - y_j||^2. Requires equal column counts.
Eigen::MatrixXd cross_sq_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Accumulated DTW cost with steps (1,0), (0,1), (1,1):
/// D(i,j) = C(i,j) + min(D(i-1,j-1), D(i-1,j), D(i,j-1)).
/// The parallel version sweeps anti-diagonals.
Eigen::MatrixXd dtw_accumulate(const Eigen::MatrixXd& local_cost);

/// Projects every row of `b_tilde` onto the probability simplex under an
/// entropic sparsity prior with weight `sparsity`. Rows are independent.
/// `multipliers`, when given, holds one Lagrange multiplier per row: it seeds
/// the root search and receives the solved value (NaN when none was needed).
Eigen::MatrixXd entropic_rows(const Eigen::MatrixXd& b_tilde, double sparsity,
                              RowProjectionStats* stats = nullptr, std::vector<double>* multipliers = nullptr);

/// Single-row worker used by both versions of `entropic_rows`.
RowStatus entropic_row(std::span<const double> in, std::span<double> out, double sparsity,
                       double* multiplier = nullptr);

namespace serial {

Eigen::MatrixXd pairwise_sq_distances(const Eigen::MatrixXd& x);
Eigen::MatrixXd cross_sq_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);
Eigen::MatrixXd dtw_accumulate(const Eigen::MatrixXd& local_cost);
Eigen::MatrixXd entropic_rows(const Eigen::MatrixXd& b_tilde, double sparsity,
                              RowProjectionStats* stats = nullptr, std::vector<double>* multipliers = nullptr);

}  // namespace serial

}  // namespace lyricalign::kernels
