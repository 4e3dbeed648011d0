#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyricalign/ctw.hpp"
#include "lyricalign/features.hpp"
#include "lyricalign/metrics.hpp"
#include "lyricalign/separation.hpp"
#include "lyricalign/text.hpp"
#include "lyricalign/vad.hpp"
#include "lyricalign/wsnmf.hpp"

namespace lyricalign::pipeline {

struct PipelineConfig {
  text::Language language = text::Language::kr;
  std::string dictionary_path;
  text::OovPolicy oov = text::OovPolicy::skip;

  bool separate = true;
  separation::SeparationConfig separation;
  double vad_theta = vad::kDefaultTheta;
  int vad_order = 7;

  features::MfccConfig mfcc;
  features::SsmMode ssm_mode = features::SsmMode::heat_similarity;
  std::optional<double> sigma;

  int k_offset = 2;
  double sparsity = 3e-3;
  double epsilon = 1e-9;
  int max_iterations = 5000;
  std::uint64_t seed = 0;
  wsnmf::WInit w_init = wsnmf::WInit::uniform;
  bool wtbw_w_update = false;

  ctw::CtwConfig ctw;
};

nlohmann::json to_json(const PipelineConfig& config);

/// Overlays the keys present in `j` on `base`. Unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Everything before the factorization: gated features, the SSM and the lyric
/// matrix. Expensive, and independent of K and the CCA energy.
struct PreparedSong {
  features::FeatureMatrix frames;  // voiced frames only
  features::SelfSimilarityMatrix ssm;
  text::VowelSequence sequence;
  text::VowelSequenceMatrix lyrics;
  text::Language language = text::Language::kr;
  std::size_t l_prime = 0;
  double duration_s = 0.0;
  nlohmann::json report = nlohmann::json::object();
};

struct AlignmentOutput {
  metrics::AnnotationSet prediction;
  ctw::WarpPath path;
  Eigen::MatrixXd accumulated;
  nlohmann::json report = nlohmann::json::object();
};

text::VowelSequence lyrics_to_vowels(const std::string& lyrics, const PipelineConfig& config,
                                     const text::PronouncingDictionary* dictionary);

/// Front end from already-gated feature frames.
PreparedSong prepare_features(features::FeatureMatrix frames, const std::string& lyrics,
                              const PipelineConfig& config, const text::PronouncingDictionary* dictionary,
                              double duration_s);

/// Front end from audio: separation, VAD, MFCC, gating, SSM and lyrics.
PreparedSong prepare_audio(const audio::AudioClip& clip, const std::string& lyrics, const PipelineConfig& config,
                           const text::PronouncingDictionary* dictionary);

/// Factorization, warping and timestamp extraction.
AlignmentOutput align_prepared(const PreparedSong& song, const PipelineConfig& config);

/// Reads WAV and lyrics files and runs the whole chain.
AlignmentOutput align(const std::filesystem::path& audio_path, const std::filesystem::path& lyrics_path,
                      const PipelineConfig& config);

/// Unit timestamps from a warp between lyric rows and kept frames. Korean
/// reports syllables; English merges each word's vowels.
metrics::AnnotationSet timestamps_from_path(const ctw::WarpPath& path, const text::VowelSequence& sequence,
                                            const vad::FrameTimeline& timeline, text::Language language);

struct OracleResult {
  double accuracy = 0.0;  // percent at tau
  double mad = 0.0;
  std::size_t units = 0;
  metrics::AnnotationSet reference;
  metrics::AnnotationSet prediction;
};

/// Aligns lyric classes against perfect per-frame class labels. Units wholly
/// inside [start, end) form the lyrics; every voiced frame in the window is
/// labeled, including frames of units cut by the window edges.
OracleResult vowel_oracle_align(const metrics::AnnotationSet& truth, const text::VowelClassTable& table,
                                double start, double end, double frame_s = 0.064, double tau = 1.0);

struct CutStudy {
  double mean_accuracy = 0.0;
  double mean_mad = 0.0;
  std::vector<OracleResult> cuts;
};

/// Averages the oracle over random windows of `length` seconds holding at
/// least `min_units` complete units.
CutStudy random_cut_study(const metrics::AnnotationSet& truth, const text::VowelClassTable& table, double duration,
                          std::size_t cuts = 20, double length = 10.0, std::size_t min_units = 5,
                          std::uint64_t seed = 0, double tau = 1.0);

struct ValidationSong {
  PreparedSong prepared;
  metrics::AnnotationSet truth;
};

struct GridRow {
  int k_offset = 0;
  double energy = 0.0;
  bool valid = true;
  int max_k = 0;  // largest K over the songs
  double accuracy = 0.0;
};

struct GridResult {
  std::vector<GridRow> rows;
  std::size_t best = 0;
};

/// Exhaustive search over K offsets and CCA energies, scored by SA at `tau`.
/// Rows whose K falls below 1 for some song are marked invalid. Ties go to
/// the smaller K offset, then the smaller energy.
GridResult grid_search(const std::vector<ValidationSong>& songs, const PipelineConfig& base,
                       const std::vector<int>& offsets = {-2, -1, 0, 1, 2, 3, 4},
                       const std::vector<double>& energies = {0.72, 0.88, 0.95, 0.99, 1.00}, double tau = 1.0);

std::string grid_csv(const GridResult& grid);

}  // namespace lyricalign::pipeline
