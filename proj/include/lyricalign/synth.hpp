#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lyricalign/audio.hpp"
#include "lyricalign/metrics.hpp"
#include "lyricalign/text.hpp"
#include "lyricalign/vad.hpp"

namespace lyricalign::synth {

struct SynthSpec {
  text::Language language = text::Language::kr;
  std::size_t units = 80;
  std::size_t classes = 5;  // distinct vowel classes, all of which appear
  double min_duration = 0.25;
  double max_duration = 0.55;
  double gap_probability = 0.12;  // chance of a rest after a unit
  double min_gap = 0.2;
  double max_gap = 0.6;
  std::size_t units_per_line = 8;
  double lead_in = 1.0;
  double tail = 1.0;
  double frame_s = 0.064;
  std::size_t dimensions = 12;
  double noise = 0.1;  // feature noise, relative to unit prototype spread
  std::uint64_t seed = 1;
};

struct SyntheticSong {
  std::vector<std::string> labels;  // one class label per unit
  metrics::AnnotationSet truth;     // carries vowel labels
  std::string lyrics;
  std::string dictionary;  // CMU-format entries for the English words used
  double duration = 0.0;
  Eigen::MatrixXd prototypes;       // class prototype per row, rows follow the table order
  Eigen::MatrixXd features;         // voiced frames only
  vad::FrameTimeline timeline;      // true voiced frames
};

/// Unit schedule, lyrics and planted-prototype features. Deterministic in the seed.
SyntheticSong generate(const SynthSpec& spec);

/// Per-class formant frequencies (Hz) used by the renderer.
struct Formants {
  double f1, f2, f3;
};
Formants vowel_formants(std::string_view label);

struct RenderSpec {
  int sample_rate = 16000;
  double voice_amplitude = 0.3;
  double accompaniment_amplitude = 0.04;
  double min_f0 = 170.0;
  double max_f0 = 260.0;
  std::uint64_t seed = 7;
};

/// Harmonic tones shaped by the vowel's formants, over a mild repeating
/// accompaniment pattern.
audio::AudioClip render(const SyntheticSong& song, const RenderSpec& spec = {});

/// Isolated voice track without accompaniment, for calibration and tests.
audio::AudioClip render_voice(const SyntheticSong& song, const RenderSpec& spec = {});

/// Threshold that best separates voiced from unvoiced 32 ms frames of `voice`
/// against the song's truth, searched on a grid around `start`.
double calibrate_theta(const audio::AudioClip& voice, const SyntheticSong& song, double start = 1.88);

/// True VAD frames for the song on the 32 ms grid.
std::vector<bool> truth_vad_frames(const SyntheticSong& song, std::size_t frame_count,
                                   double frame_duration = vad::kFrameDuration);

}  // namespace lyricalign::synth
