#include "lyricalign/vad.hpp"

#include <algorithm>
#include <cmath>

#include "lyricalign/error.hpp"

namespace lyricalign::vad {

std::size_t VadDecision::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

std::vector<double> frame_log_energy(const audio::AudioClip& voice, double frame_duration) {
  require(!voice.samples.empty(), "vad: empty clip");
  require(voice.sample_rate > 0 && frame_duration > 0.0, "vad: invalid frame geometry");
  const auto frame_len = static_cast<std::size_t>(std::lround(frame_duration * voice.sample_rate));
  require(frame_len > 0, "vad: frame shorter than one sample");
  const std::size_t frames = (voice.samples.size() + frame_len - 1) / frame_len;
  std::vector<double> out(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t begin = f * frame_len;
    const std::size_t end = std::min(begin + frame_len, voice.samples.size());
    double energy = 0.0;
    for (std::size_t i = begin; i < end; ++i) energy += voice.samples[i] * voice.samples[i];
    out[f] = std::log(energy + kEnergyFloor);
  }
  return out;
}

VadDecision detect(const audio::AudioClip& voice, double theta, double frame_duration) {
  const auto energy = frame_log_energy(voice, frame_duration);
  VadDecision d;
  d.frame_duration = frame_duration;
  d.threshold = theta;
  d.active.resize(energy.size());
  for (std::size_t f = 0; f < energy.size(); ++f) d.active[f] = energy[f] > theta;
  return d;
}

VadDecision majority_pass(const VadDecision& decision, int order) {
  require(order >= 1, "vad: filter order must be positive");
  const auto n = static_cast<std::ptrdiff_t>(decision.active.size());
  const std::ptrdiff_t half = order / 2;
  VadDecision out = decision;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    std::ptrdiff_t votes = 0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) votes += decision.active[static_cast<std::size_t>(j)] ? 1 : 0;
    const std::ptrdiff_t total = hi - lo + 1;
    out.active[static_cast<std::size_t>(i)] = 2 * votes >= total;
  }
  return out;
}

VadDecision smooth(const VadDecision& decision, int order) {
  VadDecision current = decision;
  for (std::size_t pass = 0; pass <= decision.active.size(); ++pass) {
    VadDecision next = majority_pass(current, order);
    if (next.active == current.active) return next;
    current = std::move(next);
  }
  return current;
}

FrameTimeline build_timeline(const VadDecision& decision, std::size_t feature_frames, double feature_hop_s,
                             double feature_window_s) {
  require(feature_hop_s > 0.0 && feature_window_s > 0.0, "vad: invalid feature frame geometry");
  FrameTimeline timeline;
  timeline.hop_s = feature_hop_s;
  timeline.window_s = feature_window_s;
  for (std::size_t j = 0; j < feature_frames; ++j) {
    const double center = static_cast<double>(j) * feature_hop_s + 0.5 * feature_window_s;
    const auto vad_index = static_cast<std::size_t>(std::floor(center / decision.frame_duration));
    if (vad_index < decision.active.size() && decision.active[vad_index])
      timeline.kept.push_back({j, static_cast<double>(j) * feature_hop_s});
  }
  if (timeline.kept.empty()) fail(ErrorKind::no_voice, "no voice detected");
  return timeline;
}

FrameTimeline identity_timeline(std::size_t frames, double hop_s, double window_s) {
  FrameTimeline timeline;
  timeline.hop_s = hop_s;
  timeline.window_s = window_s;
  timeline.kept.reserve(frames);
  for (std::size_t j = 0; j < frames; ++j) timeline.kept.push_back({j, static_cast<double>(j) * hop_s});
  return timeline;
}

std::vector<Segment> active_segments(const VadDecision& decision) {
  std::vector<Segment> out;
  const std::size_t n = decision.active.size();
  std::size_t f = 0;
  while (f < n) {
    if (!decision.active[f]) {
      ++f;
      continue;
    }
    const std::size_t start = f;
    while (f < n && decision.active[f]) ++f;
    out.push_back({static_cast<double>(start) * decision.frame_duration, static_cast<double>(f) * decision.frame_duration});
  }
  return out;
}

std::vector<bool> frames_from_segments(const std::vector<Segment>& segments, std::size_t frame_count,
                                       double frame_duration) {
  std::vector<bool> out(frame_count, false);
  for (const auto& seg : segments) {
    for (std::size_t f = 0; f < frame_count; ++f) {
      const double center = (static_cast<double>(f) + 0.5) * frame_duration;
      if (center >= seg.onset_s && center < seg.offset_s) out[f] = true;
    }
  }
  return out;
}

}  // namespace lyricalign::vad
