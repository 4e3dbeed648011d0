#include <algorithm>
#include <limits>

#include "lyricalign/error.hpp"
#include "lyricalign/kernels.hpp"

namespace lyricalign::kernels {

namespace {
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

Eigen::MatrixXd pairwise_sq_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const RowMatrix xr = x;
  Eigen::MatrixXd d(n, n);
  // Each row is written by exactly one thread; the diff form avoids the
  // cancellation of |a|^2 + |b|^2 - 2ab for near-identical frames.
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = xr.row(i).data();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double* xj = xr.row(j).data();
      double acc = 0.0;
      for (Eigen::Index c = 0; c < xr.cols(); ++c) {
        const double diff = xi[c] - xj[c];
        acc += diff * diff;
      }
      d(i, j) = acc;
    }
  }
  return d;
}

Eigen::MatrixXd cross_sq_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  require(x.cols() == y.cols(), "cross_sq_distances: feature dimensions differ");
  const RowMatrix xr = x;
  const RowMatrix yr = y;
  Eigen::MatrixXd d(x.rows(), y.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < xr.rows(); ++i) {
    const double* xi = xr.row(i).data();
    for (Eigen::Index j = 0; j < yr.rows(); ++j) {
      const double* yj = yr.row(j).data();
      double acc = 0.0;
      for (Eigen::Index c = 0; c < xr.cols(); ++c) {
        const double diff = xi[c] - yj[c];
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
  // Cells on anti-diagonal i + j = s depend only on diagonals s-1 and s-2.
  for (Eigen::Index s = 0; s < m + n - 1; ++s) {
    const Eigen::Index i_lo = std::max<Eigen::Index>(0, s - (n - 1));
    const Eigen::Index i_hi = std::min<Eigen::Index>(m - 1, s);
#pragma omp parallel for schedule(static) if (i_hi - i_lo > 256)
    for (Eigen::Index i = i_lo; i <= i_hi; ++i) {
      const Eigen::Index j = s - i;
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
  const RowMatrix in = b_tilde;
  if (multipliers) multipliers->resize(static_cast<std::size_t>(in.rows()), std::numeric_limits<double>::quiet_NaN());
  double* warm = multipliers ? multipliers->data() : nullptr;
  RowMatrix out(in.rows(), in.cols());
  const auto cols = static_cast<std::size_t>(in.cols());
  std::size_t zero_rows = 0;
  std::size_t fallback_rows = 0;
#pragma omp parallel for schedule(dynamic, 32) reduction(+ : zero_rows, fallback_rows)
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    const auto status = entropic_row({in.row(i).data(), cols}, {out.row(i).data(), cols}, sparsity,
                                     warm ? warm + i : nullptr);
    if (status == RowStatus::zero_row) ++zero_rows;
    if (status == RowStatus::fallback) ++fallback_rows;
  }
  if (stats) *stats = {zero_rows, fallback_rows};
  return out;
}

}  // namespace lyricalign::kernels
