#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "lyricalign/audio.hpp"
#include "lyricalign/vad.hpp"

namespace lyricalign::features {

struct MfccConfig {
  int window_size = 1024;  // 64 ms at 16 kHz
  int hop_size = 1024;
  int mel_bands = 40;
  double min_hz = 0.0;
  double max_hz = 8000.0;
  int coefficients = 13;
  int dropped_leading = 1;  // c0 is discarded, leaving 12 dimensions
  double log_floor = 1e-10;
};

/// MFCC rows for the frames listed in `timeline`.
struct FeatureMatrix {
  Eigen::MatrixXd vectors;  // N x (coefficients - dropped_leading)
  vad::FrameTimeline timeline;
};

// Delta is the heat-kernel matrix of the feature rows.
enum class SsmMode {
  heat_similarity,  // S = Delta, unit diagonal
  inverted_heat,    // S = (max Delta - Delta) / max Delta, a dissimilarity
};

struct SelfSimilarityMatrix {
  Eigen::MatrixXd s;
  double sigma = 0.0;
  SsmMode mode = SsmMode::heat_similarity;
};

/// 40-band HTK mel filterbank as a (bands x bins) matrix.
Eigen::MatrixXd mel_filterbank(int bands, int fft_size, int sample_rate, double min_hz, double max_hz);

/// Orthonormal DCT-II basis, (count x size).
Eigen::MatrixXd dct_matrix(int count, int size);

/// MFCCs of every frame in the clip; the timeline is the identity map.
FeatureMatrix mfcc(const audio::AudioClip& clip, const MfccConfig& config = {});

/// Keeps only the rows named by `timeline` (original indices into `all`).
FeatureMatrix select_frames(const FeatureMatrix& all, const vad::FrameTimeline& timeline);

/// exp(-||yi - yj||^2 / sigma).
double heat_kernel(std::span<const double> yi, std::span<const double> yj, double sigma);

/// Median of the strictly-upper-triangle entries of a squared-distance matrix.
double median_sigma(const Eigen::MatrixXd& sq_distances);

/// Builds S from feature rows. `sigma` empty means the median heuristic.
SelfSimilarityMatrix build_ssm(const Eigen::MatrixXd& vectors, std::optional<double> sigma = std::nullopt,
                               SsmMode mode = SsmMode::heat_similarity);

/// Writes an 8-bit binary PGM, 0 -> black, 1 -> white.
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image);

}  // namespace lyricalign::features
