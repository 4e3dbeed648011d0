#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lyricalign/kernels.hpp"

namespace lyricalign::wsnmf {

enum class WInit {
  uniform,   // same range as B
  identity,  // starts every component as its own block; avoids the symmetric plateau
};

struct WsnmfConfig {
  int k = 0;
  double sparsity = 3e-3;
  double epsilon = 1e-9;
  int max_iterations = 5000;
  std::uint64_t seed = 0;
  double init_low = 1e-4;
  double init_high = 1.0;
  WInit w_init = WInit::uniform;
  double tolerance = 1e-8;  // relative objective change over `window` iterations
  int window = 10;
  bool wtbw_w_update = false;  // audit only: W <- W * (W'BW) / (...), needs N == K
  bool check_invariants = false;
};

struct Factorization {
  Eigen::MatrixXd b;  // N x K, rows on the simplex
  Eigen::MatrixXd w;  // K x K
  std::vector<double> objective_trace;  // ||S - BWB'||_F^2 after each iteration
  int iterations = 0;
  bool converged = false;
  kernels::RowProjectionStats projection;
};

/// K = L' + i.
int choose_k(std::size_t l_prime, int offset = 2);

Eigen::MatrixXd update_w(const Eigen::MatrixXd& s, const Eigen::MatrixXd& b, const Eigen::MatrixXd& w,
                         double epsilon, bool wtbw_numerator = false);

/// Unprojected B update; the result still needs `sparsify_rows`.
Eigen::MatrixXd update_b(const Eigen::MatrixXd& s, const Eigen::MatrixXd& b, const Eigen::MatrixXd& w,
                         double epsilon);

/// Row-wise entropic projection. `sparsity == 0` is plain row normalization.
Eigen::MatrixXd sparsify_rows(const Eigen::MatrixXd& b_tilde, double sparsity,
                              kernels::RowProjectionStats* stats = nullptr);

double objective(const Eigen::MatrixXd& s, const Eigen::MatrixXd& b, const Eigen::MatrixXd& w);

/// Seeded uniform B. W is drawn symmetric from the same range, or set to I.
void initialize(std::size_t n, const WsnmfConfig& config, Eigen::MatrixXd& b, Eigen::MatrixXd& w);

WInit parse_w_init(const std::string& name);
const char* w_init_name(WInit init);

Factorization factorize(const Eigen::MatrixXd& s, const WsnmfConfig& config);

/// Same loop from an explicit starting point.
Factorization factorize(const Eigen::MatrixXd& s, const WsnmfConfig& config, Eigen::MatrixXd b0,
                        Eigen::MatrixXd w0);

/// Writes b.csv, w.csv and objective.csv into `directory`.
void write_csv(const std::filesystem::path& directory, const Factorization& f);

}  // namespace lyricalign::wsnmf
