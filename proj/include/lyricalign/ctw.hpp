#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace lyricalign::ctw {

/// Monotone alignment path, 0-based: step t pairs row a[t] of the first
/// sequence with row b[t] of the second.
struct WarpPath {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;

  std::size_t size() const { return a.size(); }
};

struct DtwResult {
  WarpPath path;
  double cost = 0.0;
  Eigen::MatrixXd accumulated;
};

/// Squared-Euclidean DTW over steps (1,0), (0,1), (1,1). Backtracking prefers
/// the diagonal, then (1,0).
DtwResult dtw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// DTW over a precomputed local cost matrix.
DtwResult dtw_from_cost(const Eigen::MatrixXd& local_cost);

/// Start/end/step conditions of a path for sequences of length m and n.
bool is_valid_path(const WarpPath& path, std::size_t m, std::size_t n);

/// Column-to-row map t -> ceil((t+1) * len / h) - 1 for t = 0..h-1.
std::vector<std::size_t> uniform_map(std::size_t len, std::size_t h);

/// Uniform warp to H = ceil(h_scale * max(M, N)) steps.
WarpPath utw_init(std::size_t m, std::size_t n, double h_scale = 1.1);

/// Rows of `x` picked by `index` (Q' X).
Eigen::MatrixXd warp_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& index);

struct ProjectionPair {
  Eigen::MatrixXd v_a;  // Z x L
  Eigen::MatrixXd v_b;  // Z x K
  Eigen::VectorXd correlations;      // kept, descending
  Eigen::VectorXd all_correlations;  // every positive generalized eigenvalue, descending
  double energy_kept = 0.0;
  Eigen::RowVectorXd mean_a;
  Eigen::RowVectorXd mean_b;

  Eigen::Index dims() const { return v_a.rows(); }
};

/// CCA of two equally long views via the block generalized eigenproblem.
/// Both views are centered; each covariance block gets ridge * trace / dim on
/// its diagonal. Keeps the leading directions whose cumulative correlation
/// mass reaches `energy`.
ProjectionPair cca(const Eigen::MatrixXd& a_bar, const Eigen::MatrixXd& b_bar, double energy = 0.95,
                   double ridge = 1e-6);

struct CtwConfig {
  double energy = 0.95;
  double h_scale = 1.1;
  double ridge = 1e-6;
  int max_cycles = 50;
  double tolerance = 1e-4;
};

struct CtwResult {
  WarpPath path;
  ProjectionPair projections;
  std::vector<double> j_trace;  // one entry per accepted cycle
  int cycles = 0;
  bool converged = false;
  bool stopped_on_increase = false;  // a cycle raised J and was discarded
  Eigen::MatrixXd accumulated;       // DTW cost of the accepted path
};

/// ||(A - mu_a) V_a' warped - (B - mu_b) V_b' warped||_F^2 along `path`.
double ctw_objective(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const WarpPath& path,
                     const ProjectionPair& projections);

/// Alternates CCA on the warped views with DTW on the projected sequences,
/// starting from the uniform warp.
CtwResult ctw_align(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const CtwConfig& config = {});

using LogicalMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Q[m, n] = 1 iff the path pairs m with n.
LogicalMatrix correspondence(const WarpPath& path, std::size_t m, std::size_t n);

/// SVG heat map of an accumulated-cost matrix with the path drawn on top.
void write_svg(const std::filesystem::path& file, const Eigen::MatrixXd& accumulated, const WarpPath& path);

}  // namespace lyricalign::ctw
