#include "lyricalign/separation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lyricalign/error.hpp"

namespace lyricalign::separation {

namespace {

// Lower triangle of X'X (or XX' for wide X); the eigensolvers only read it.
Eigen::MatrixXd small_gram(const Eigen::MatrixXd& x) {
  const bool tall = x.rows() >= x.cols();
  const Eigen::Index n = tall ? x.cols() : x.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  if (tall) gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  else gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
  return gram;
}

double spectral_norm(const Eigen::MatrixXd& x) {
  if (x.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = small_gram(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

// Tall/wide matrices go through the eigendecomposition of the small Gram
// matrix; near-square ones through a full SVD.
Eigen::MatrixXd shrink_via_gram(const Eigen::MatrixXd& x, double tau, double* nuclear) {
  const bool tall = x.rows() >= x.cols();
  const Eigen::MatrixXd gram = small_gram(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  std::vector<Eigen::Index> keep;
  double sum = 0.0;
  for (Eigen::Index i = lambda.size() - 1; i >= 0; --i) {
    const double sigma = std::sqrt(std::max(0.0, lambda(i)));
    if (sigma <= tau) break;
    keep.push_back(i);
    sum += sigma - tau;
  }
  if (nuclear) *nuclear = sum;
  if (keep.empty()) return Eigen::MatrixXd::Zero(x.rows(), x.cols());
  Eigen::MatrixXd v(gram.rows(), static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd scale(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    v.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]);
    const double sigma = std::sqrt(lambda(keep[c]));
    scale(static_cast<Eigen::Index>(c)) = (sigma - tau) / sigma;
  }
  if (tall) return (x * v) * scale.asDiagonal() * v.transpose();
  return v * scale.asDiagonal() * (v.transpose() * x);
}

}  // namespace

Eigen::MatrixXd singular_value_shrink(const Eigen::MatrixXd& x, double tau, double* nuclear_norm) {
  const Eigen::Index lo = std::min(x.rows(), x.cols());
  const Eigen::Index hi = std::max(x.rows(), x.cols());
  if (lo == 0) {
    if (nuclear_norm) *nuclear_norm = 0.0;
    return x;
  }
  if (hi >= 2 * lo) return shrink_via_gram(x, tau, nuclear_norm);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
  if (nuclear_norm) *nuclear_norm = shrunk.sum();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

RpcaResult rpca(const Eigen::MatrixXd& x, const RpcaOptions& options) {
  require(options.lambda_scale > 0.0, "rpca: lambda_scale must be positive");
  require(options.mu_growth > 1.0, "rpca: mu_growth must exceed 1");
  require(x.allFinite(), "rpca: input contains NaN or Inf");
  require((x.array() >= 0.0).all(), "rpca: input must be non-negative");

  RpcaResult result;
  result.low_rank = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  result.sparse = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  const double lambda = options.lambda_scale / std::sqrt(static_cast<double>(std::max(x.rows(), x.cols())));
  result.lambda = lambda;

  const double x_norm = x.norm();
  const double norm_two = spectral_norm(x);
  if (x_norm == 0.0 || norm_two == 0.0) {
    result.converged = true;
    return result;
  }

  Eigen::MatrixXd y = x / std::max(norm_two, x.cwiseAbs().maxCoeff() / lambda);
  double mu = 1.25 / norm_two;
  const double mu_bar = mu * 1e7;
  Eigen::MatrixXd& l = result.low_rank;
  Eigen::MatrixXd& s = result.sparse;

  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::MatrixXd t = x - l + y / mu;
    const double shrink = lambda / mu;
    s = (t.array() - shrink).max(0.0) + (t.array() + shrink).min(0.0);

    double nuclear = 0.0;
    l = singular_value_shrink(x - s + y / mu, 1.0 / mu, &nuclear);

    const Eigen::MatrixXd z = x - l - s;
    y += mu * z;
    mu = std::min(mu * options.mu_growth, mu_bar);

    const double residual = z.norm() / x_norm;
    result.residual_trace.push_back(residual);
    result.objective_trace.push_back(nuclear + lambda * (x - l).cwiseAbs().sum());
    result.iterations = it;
    if (!std::isfinite(residual)) fail(ErrorKind::numerical, "rpca: iteration diverged");
    if (residual < options.tolerance) {
      result.converged = true;
      break;
    }
  }

  // Clip the accompaniment to the valid magnitude range and hand the
  // difference to the sparse part so L + S is unchanged.
  const Eigen::MatrixXd clipped = l.cwiseMax(0.0);
  s += l - clipped;
  l = clipped;
  return result;
}

BinaryMask binary_mask(const RpcaResult& result, double gain) {
  require(result.low_rank.rows() == result.sparse.rows() && result.low_rank.cols() == result.sparse.cols(),
          "binary_mask: low-rank and sparse shapes differ");
  require(gain > 0.0, "binary_mask: gain must be positive");
  return (result.sparse.cwiseAbs().array() > gain * result.low_rank.cwiseAbs().array()).cast<std::uint8_t>();
}

audio::Spectrogram apply_mask(const audio::Spectrogram& spec, const BinaryMask& mask) {
  require(mask.rows() == spec.frames.rows() && mask.cols() == spec.frames.cols(),
          "apply_mask: mask shape does not match spectrogram");
  audio::Spectrogram out = spec;
  out.frames = spec.frames.array() * mask.cast<double>().array().cast<std::complex<double>>();
  return out;
}

audio::AudioClip separate_voice(const audio::AudioClip& clip, const SeparationConfig& config) {
  require(clip.sample_rate == config.sample_rate, "separate_voice: clip must be resampled to the configured rate");
  audio::AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.size(), 0.0);
  if (clip.samples.size() < static_cast<std::size_t>(config.window_size)) return out;

  const auto spec = audio::stft(clip, config.window_size, config.hop_size);
  Eigen::MatrixXd mag = audio::magnitude(spec);
  if (config.power_spectrogram) mag = mag.array().square();
  const auto decomposition = rpca(mag, config.rpca);
  const auto mask = binary_mask(decomposition, config.mask_gain);
  const auto voice = audio::istft(apply_mask(spec, mask));
  const std::size_t n = std::min(voice.samples.size(), out.samples.size());
  std::copy_n(voice.samples.begin(), n, out.samples.begin());
  return out;
}

}  // namespace lyricalign::separation
