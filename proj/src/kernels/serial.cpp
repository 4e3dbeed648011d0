// Straightforward loop versions of the kernels. Kept as the reference the
// OpenMP versions are checked and benchmarked against.

#include <algorithm>
#include <limits>

#include "lyricalign/error.hpp"
#include "lyricalign/kernels.hpp"

namespace lyricalign::kernels::serial {

Eigen::MatrixXd pairwise_sq_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double diff = x(i, c) - x(j, c);
        acc += diff * diff;
      }
      d(i, j) = acc;
      d(j, i) = acc;
    }
  }
  return d;
}

Eigen::MatrixXd cross_sq_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  require(x.cols() == y.cols(), "cross_sq_distances: feature dimensions differ");
  Eigen::MatrixXd d(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      double acc = 0.0;
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double diff = x(i, c) - y(j, c);
        acc += diff * diff;
      }
      d(i, j) = acc;
    }
  }
  return d;
}

Eigen::MatrixXd dtw_accumulate(const Eigen::MatrixXd& c) {
  const Eigen::Index m = c.rows();
  const Eigen::Index n = c.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd d(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == 0 && j == 0) {
        d(i, j) = c(i, j);
        continue;
      }
      const double diag = (i > 0 && j > 0) ? d(i - 1, j - 1) : inf;
      const double up = i > 0 ? d(i - 1, j) : inf;
      const double left = j > 0 ? d(i, j - 1) : inf;
      d(i, j) = c(i, j) + std::min({diag, up, left});
    }
  }
  return d;
}

Eigen::MatrixXd entropic_rows(const Eigen::MatrixXd& b_tilde, double sparsity,
                              RowProjectionStats* stats, std::vector<double>* multipliers) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> in = b_tilde;
  if (multipliers) multipliers->resize(static_cast<std::size_t>(in.rows()), std::numeric_limits<double>::quiet_NaN());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(in.rows(), in.cols());
  RowProjectionStats local;
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    const auto status = entropic_row({in.row(i).data(), static_cast<std::size_t>(in.cols())},
                                     {out.row(i).data(), static_cast<std::size_t>(in.cols())},
                                     sparsity, multipliers ? &(*multipliers)[static_cast<std::size_t>(i)] : nullptr);
    if (status == RowStatus::zero_row) ++local.zero_rows;
    if (status == RowStatus::fallback) ++local.fallback_rows;
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace lyricalign::kernels::serial
