#include "lyricalign/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

#include "lyricalign/error.hpp"
#include "lyricalign/kernels.hpp"

namespace lyricalign::features {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

Eigen::MatrixXd mel_filterbank(int bands, int fft_size, int sample_rate, double min_hz, double max_hz) {
  require(bands > 0 && fft_size > 0 && sample_rate > 0 && max_hz > min_hz, "mel_filterbank: invalid geometry");
  const int bins = fft_size / 2 + 1;
  std::vector<double> edges(static_cast<std::size_t>(bands + 2));
  const double mel_lo = hz_to_mel(min_hz);
  const double mel_hi = hz_to_mel(max_hz);
  for (int i = 0; i < bands + 2; ++i) edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (bands + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(bands, bins);
  for (int b = 0; b < bands; ++b) {
    const double lo = edges[b], center = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      if (f > lo && f < hi) fb(b, k) = f <= center ? (f - lo) / (center - lo) : (hi - f) / (hi - center);
    }
  }
  return fb;
}

Eigen::MatrixXd dct_matrix(int count, int size) {
  Eigen::MatrixXd d(count, size);
  for (int k = 0; k < count; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / size) : std::sqrt(2.0 / size);
    for (int n = 0; n < size; ++n) d(k, n) = scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * size));
  }
  return d;
}

FeatureMatrix mfcc(const audio::AudioClip& clip, const MfccConfig& config) {
  require(config.coefficients > config.dropped_leading && config.dropped_leading >= 0,
          "mfcc: no coefficients left after dropping");
  require(clip.samples.size() >= static_cast<std::size_t>(config.window_size), "mfcc: clip too short");
  const auto spec = audio::stft(clip, config.window_size, config.hop_size);
  const Eigen::MatrixXd power = spec.frames.cwiseAbs2();  // T x bins
  const Eigen::MatrixXd fb =
      mel_filterbank(config.mel_bands, config.window_size, clip.sample_rate, config.min_hz, config.max_hz);
  const Eigen::MatrixXd mel = power * fb.transpose();  // T x bands
  const Eigen::MatrixXd log_mel = (mel.array() + config.log_floor).log().matrix();
  const Eigen::MatrixXd dct = dct_matrix(config.coefficients, config.mel_bands);
  const Eigen::MatrixXd ceps = log_mel * dct.transpose();  // T x coefficients

  FeatureMatrix out;
  out.vectors = ceps.rightCols(config.coefficients - config.dropped_leading);
  const double hop_s = static_cast<double>(config.hop_size) / clip.sample_rate;
  const double window_s = static_cast<double>(config.window_size) / clip.sample_rate;
  out.timeline = vad::identity_timeline(static_cast<std::size_t>(ceps.rows()), hop_s, window_s);
  if (!out.vectors.allFinite()) fail(ErrorKind::numerical, "mfcc: non-finite coefficients");
  return out;
}

FeatureMatrix select_frames(const FeatureMatrix& all, const vad::FrameTimeline& timeline) {
  FeatureMatrix out;
  out.timeline = timeline;
  out.vectors.resize(static_cast<Eigen::Index>(timeline.size()), all.vectors.cols());
  for (std::size_t r = 0; r < timeline.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(timeline.kept[r].original_index);
    require(src < all.vectors.rows(), "select_frames: timeline refers past the last feature frame");
    out.vectors.row(static_cast<Eigen::Index>(r)) = all.vectors.row(src);
  }
  return out;
}

double heat_kernel(std::span<const double> yi, std::span<const double> yj, double sigma) {
  require(sigma > 0.0, "heat_kernel: sigma must be positive");
  require(yi.size() == yj.size(), "heat_kernel: vector lengths differ");
  double z = 0.0;
  for (std::size_t c = 0; c < yi.size(); ++c) {
    const double d = yi[c] - yj[c];
    z += d * d;
  }
  return std::exp(-z / sigma);
}

double median_sigma(const Eigen::MatrixXd& d) {
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(d.rows() * (d.rows() - 1) / 2));
  for (Eigen::Index j = 1; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) upper.push_back(d(i, j));
  if (upper.empty()) return 0.0;
  const auto mid = upper.begin() + static_cast<std::ptrdiff_t>(upper.size() / 2);
  std::nth_element(upper.begin(), mid, upper.end());
  if (upper.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(upper.begin(), mid);
  return 0.5 * (lo + hi);
}

SelfSimilarityMatrix build_ssm(const Eigen::MatrixXd& vectors, std::optional<double> sigma, SsmMode mode) {
  require(vectors.rows() >= 2, "build_ssm: need at least two frames");
  require(vectors.allFinite(), "build_ssm: features contain NaN or Inf");
  const Eigen::MatrixXd d = kernels::pairwise_sq_distances(vectors);
  SelfSimilarityMatrix out;
  out.mode = mode;
  out.sigma = sigma ? *sigma : median_sigma(d);
  if (!sigma && out.sigma <= 0.0)
    fail(ErrorKind::invalid_input, "build_ssm: median sigma is zero (frames are identical)");
  require(out.sigma > 0.0, "build_ssm: sigma must be positive");

  const Eigen::MatrixXd delta = (-d.array() / out.sigma).exp().matrix();
  if (mode == SsmMode::heat_similarity) {
    out.s = delta;
  } else {
    const double peak = delta.maxCoeff();
    out.s = ((peak - delta.array()) / peak).matrix();
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write PGM file: " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  const double lo = image.size() ? image.minCoeff() : 0.0;
  const double hi = image.size() ? image.maxCoeff() : 1.0;
  const double span = hi > lo ? hi - lo : 1.0;
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const auto v = static_cast<unsigned char>(std::lround(255.0 * (image(r, c) - lo) / span));
      out.put(static_cast<char>(v));
    }
  }
}

}  // namespace lyricalign::features
