#pragma once

#include <cstddef>
#include <vector>

#include "lyricalign/audio.hpp"

namespace lyricalign::vad {

inline constexpr double kDefaultTheta = 1.88;
inline constexpr double kFrameDuration = 0.032;
inline constexpr double kEnergyFloor = 1e-12;

/// Per-frame voice activity over non-overlapping 32 ms frames.
struct VadDecision {
  std::vector<bool> active;
  double frame_duration = kFrameDuration;
  double threshold = kDefaultTheta;

  std::size_t active_count() const;
};

struct TimelineEntry {
  std::size_t original_index = 0;  // feature-frame index in the full recording
  double onset_s = 0.0;
};

/// Maps retained feature frames back to original time.
struct FrameTimeline {
  std::vector<TimelineEntry> kept;
  double hop_s = 0.0;
  double window_s = 0.0;

  std::size_t size() const { return kept.size(); }
  double onset(std::size_t kept_index) const { return kept[kept_index].onset_s; }
  double offset(std::size_t kept_index) const { return kept[kept_index].onset_s + hop_s; }
};

struct Segment {
  double onset_s = 0.0;
  double offset_s = 0.0;
};

/// Natural log of frame energy (sum of squares) plus the 1e-12 floor.
std::vector<double> frame_log_energy(const audio::AudioClip& voice, double frame_duration = kFrameDuration);

/// Active iff log(energy + 1e-12) > theta.
VadDecision detect(const audio::AudioClip& voice, double theta = kDefaultTheta,
                   double frame_duration = kFrameDuration);

/// One majority-vote pass over a centered window of `order` frames. Windows
/// shrink at the edges; ties count as active.
VadDecision majority_pass(const VadDecision& decision, int order = 7);

/// Repeats `majority_pass` until the sequence stops changing, so the result
/// is a fixed point of the filter.
VadDecision smooth(const VadDecision& decision, int order = 7);

/// Keeps feature frames whose center falls in an active VAD frame. Throws
/// Error(no_voice) when nothing survives.
FrameTimeline build_timeline(const VadDecision& decision, std::size_t feature_frames,
                             double feature_hop_s, double feature_window_s);

FrameTimeline identity_timeline(std::size_t frames, double hop_s, double window_s);

std::vector<Segment> active_segments(const VadDecision& decision);

/// Rasterizes segments onto a frame grid: a frame is active when its center
/// lies inside some segment.
std::vector<bool> frames_from_segments(const std::vector<Segment>& segments, std::size_t frame_count,
                                       double frame_duration = kFrameDuration);

}  // namespace lyricalign::vad
