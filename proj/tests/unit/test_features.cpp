#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lyricalign/error.hpp"
#include "lyricalign/features.hpp"
#include "test_util.hpp"

namespace lyricalign {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

TEST(Mel, TrianglesPeakAtTheirCentres) {
  const auto fb = features::mel_filterbank(40, 1024, 16000, 0.0, 8000.0);
  ASSERT_EQ(fb.rows(), 40);
  ASSERT_EQ(fb.cols(), 513);
  EXPECT_GE(fb.minCoeff(), 0.0);
  EXPECT_LE(fb.maxCoeff(), 1.0 + 1e-12);
  const double step = hz_to_mel(8000.0) / 41.0;
  for (int b = 0; b < 40; ++b) {
    Eigen::Index peak;
    fb.row(b).maxCoeff(&peak);
    const double centre_hz = 700.0 * (std::pow(10.0, step * (b + 1) / 2595.0) - 1.0);
    EXPECT_NEAR(static_cast<double>(peak) * 16000.0 / 1024.0, centre_hz, 16000.0 / 1024.0) << b;
  }
}

TEST(Mel, CentresIncrease) {
  const auto fb = features::mel_filterbank(40, 1024, 16000, 0.0, 8000.0);
  Eigen::Index prev = -1;
  for (int b = 0; b < 40; ++b) {
    Eigen::Index peak;
    fb.row(b).maxCoeff(&peak);
    EXPECT_GE(peak, prev);
    prev = peak;
  }
}

TEST(Dct, RowsAreOrthonormal) {
  const auto d = features::dct_matrix(40, 40);
  EXPECT_LT((d * d.transpose() - Eigen::MatrixXd::Identity(40, 40)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mfcc, ShapeAndTimeline) {
  audio::AudioClip c;
  c.sample_rate = 16000;
  c.samples.resize(16000);
  for (std::size_t i = 0; i < c.samples.size(); ++i)
    c.samples[i] = 0.2 * std::sin(2.0 * std::numbers::pi * 300.0 * static_cast<double>(i) / 16000.0);
  const auto f = features::mfcc(c);
  EXPECT_EQ(f.vectors.rows(), 15);  // floor((16000 - 1024) / 1024) + 1
  EXPECT_EQ(f.vectors.cols(), 12);
  EXPECT_DOUBLE_EQ(f.timeline.hop_s, 0.064);
  EXPECT_DOUBLE_EQ(f.timeline.onset(3), 3 * 0.064);
}

TEST(Mfcc, GainOnlyMovesTheDroppedCoefficient) {
  // A gain is an additive constant on log-mel, which DCT-II puts in c0 only.
  audio::AudioClip c;
  c.sample_rate = 16000;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.1);  // broadband, so no band sits at the log floor
  c.samples.resize(8192);
  for (auto& s : c.samples) s = noise(rng);
  auto loud = c;
  for (auto& s : loud.samples) s *= 3.0;
  const auto a = features::mfcc(c), b = features::mfcc(loud);
  EXPECT_LT((a.vectors - b.vectors).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SelectFrames, PicksNamedRows) {
  features::FeatureMatrix all;
  all.vectors = testing::random_matrix(6, 3, 1);
  all.timeline = vad::identity_timeline(6, 0.064, 0.064);
  vad::FrameTimeline t;
  t.hop_s = t.window_s = 0.064;
  t.kept = {{1, 0.064}, {4, 0.256}};
  const auto sel = features::select_frames(all, t);
  ASSERT_EQ(sel.vectors.rows(), 2);
  EXPECT_EQ(sel.vectors.row(1), all.vectors.row(4));
  t.kept.push_back({9, 0.576});
  EXPECT_THROW(features::select_frames(all, t), Error);
}

TEST(Ssm, HeatKernelAndMedianSigma) {
  const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
  EXPECT_DOUBLE_EQ(features::heat_kernel(a, b, 25.0), std::exp(-1.0));
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 4, 1, 0, 9, 4, 9, 0;
  EXPECT_DOUBLE_EQ(features::median_sigma(d), 4.0);
}

TEST(Ssm, HeatSimilarityProperties) {
  const auto y = testing::gaussian_matrix(30, 12, 4);
  const auto s = features::build_ssm(y);
  EXPECT_GT(s.sigma, 0.0);
  EXPECT_LT((s.s - s.s.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  for (int i = 0; i < 30; ++i) EXPECT_DOUBLE_EQ(s.s(i, i), 1.0);
  EXPECT_GE(s.s.minCoeff(), 0.0);
  EXPECT_LE(s.s.maxCoeff(), 1.0);
  EXPECT_NEAR(s.s(2, 7), std::exp(-(y.row(2) - y.row(7)).squaredNorm() / s.sigma), 1e-12);
}

TEST(Ssm, LiteralModeHasZeroDiagonal) {
  const auto y = testing::gaussian_matrix(10, 4, 5);
  const auto s = features::build_ssm(y, std::nullopt, features::SsmMode::inverted_heat);
  for (int i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(s.s(i, i), 0.0);
  EXPECT_GE(s.s.minCoeff(), 0.0);
  EXPECT_LE(s.s.maxCoeff(), 1.0);
}

TEST(Ssm, IdenticalFramesAreRejected) {
  EXPECT_THROW(features::build_ssm(Eigen::MatrixXd::Ones(5, 3)), Error);
  EXPECT_THROW(features::build_ssm(Eigen::MatrixXd::Ones(1, 3)), Error);
}

TEST(Pgm, WritesBinaryHeader) {
  const auto path = std::filesystem::temp_directory_path() / "lyricalign_test.pgm";
  Eigen::MatrixXd img(2, 3);
  img << 0, 0.5, 1, 1, 0, 0;
  features::write_pgm(path, img);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int w, h, maxv;
  in >> magic >> w >> h >> maxv;
  in.get();
  std::vector<unsigned char> px(6);
  in.read(reinterpret_cast<char*>(px.data()), 6);
  std::filesystem::remove(path);
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, 3);
  EXPECT_EQ(h, 2);
  EXPECT_EQ(px[0], 0);
  EXPECT_EQ(px[2], 255);
}

}  // namespace
}  // namespace lyricalign
