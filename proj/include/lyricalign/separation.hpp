#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lyricalign/audio.hpp"

namespace lyricalign::separation {

struct RpcaOptions {
  double lambda_scale = 1.0;  // effective lambda = lambda_scale / sqrt(max(T, F))
  double tolerance = 1e-7;    // on ||X - L - S||_F / ||X||_F
  int max_iterations = 500;
  double mu_growth = 1.5;
};

/// Low-rank plus sparse split of a magnitude spectrogram.
struct RpcaResult {
  Eigen::MatrixXd low_rank;  // accompaniment, clipped to >= 0
  Eigen::MatrixXd sparse;    // voice
  int iterations = 0;
  bool converged = false;
  double lambda = 0.0;
  /// ||L||_* + lambda ||X - L||_1 after every outer iteration, i.e. the
  /// objective at the feasible point the low-rank iterate defines.
  std::vector<double> objective_trace;
  std::vector<double> residual_trace;  // relative constraint violation
};

using BinaryMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Robust PCA, min ||L||_* + lambda ||S||_1 s.t. L + S = X, by inexact ALM.
RpcaResult rpca(const Eigen::MatrixXd& x, const RpcaOptions& options = {});

/// Singular value soft-thresholding: U max(Sigma - tau, 0) V^T.
Eigen::MatrixXd singular_value_shrink(const Eigen::MatrixXd& x, double tau, double* nuclear_norm = nullptr);

/// mask = 1 where |sparse| > gain * |low_rank|.
BinaryMask binary_mask(const RpcaResult& result, double gain = 1.0);

/// Multiplies complex bins by the mask; the mixture phase is kept.
audio::Spectrogram apply_mask(const audio::Spectrogram& spec, const BinaryMask& mask);

struct SeparationConfig {
  int sample_rate = 16000;
  int window_size = 1024;
  int hop_size = 256;
  RpcaOptions rpca;
  double mask_gain = 1.0;
  bool power_spectrogram = false;  // run RPCA on |X|^2 instead of |X|
};

/// STFT -> RPCA on the magnitude -> binary mask -> inverse STFT. The output
/// has the input's length (tail zero-padded). Clips shorter than one window
/// come back silent.
audio::AudioClip separate_voice(const audio::AudioClip& clip, const SeparationConfig& config = {});

}  // namespace lyricalign::separation
