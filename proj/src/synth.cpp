#include "lyricalign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "lyricalign/error.hpp"

namespace lyricalign::synth {

namespace {

// One representative medial per Korean class, and a consonant pool for initials.
const std::map<std::string, int, std::less<>> kKoreanMedial = {
    {"a", 0}, {"e", 5}, {"i", 20}, {"o", 8}, {"u", 13}, {"ʌ", 4}, {"ɯ", 18}};
constexpr int kInitials[] = {0, 2, 3, 5, 6, 7, 9, 11, 12, 18};

struct EnglishWord {
  const char* label;
  const char* word;
  const char* phones;
};
constexpr EnglishWord kEnglishWords[] = {
    {"ɔ", "OFF", "AO1 F"},   {"ɑ", "FAR", "F AA1 R"},    {"i", "SHE", "SH IY1"},     {"u", "YOU", "Y UW1"},
    {"ɛ", "RED", "R EH1 D"}, {"ɪ", "PIG", "P IH1 G"},    {"ʊ", "SHOULD", "SH UH1 D"}, {"ʌ", "BUT", "B AH1 T"},
    {"ə", "A", "AH0"},       {"æ", "AT", "AE1 T"},       {"eɪ", "DAY", "D EY1"},     {"aɪ", "MY", "M AY1"},
    {"oʊ", "LOW", "L OW1"},  {"aʊ", "NOW", "N AW1"},     {"ɔɪ", "BOY", "B OY1"}};

const EnglishWord& english_word(std::string_view label) {
  for (const auto& w : kEnglishWords)
    if (label == w.label) return w;
  fail(ErrorKind::invalid_input, "synth: no English word for class " + std::string(label));
}

std::string korean_syllable(std::string_view label, std::mt19937_64& rng) {
  const auto it = kKoreanMedial.find(label);
  require(it != kKoreanMedial.end(), "synth: unknown Korean class " + std::string(label));
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kInitials) - 1);
  const int initial = kInitials[pick(rng)];
  return text::encode_utf8(static_cast<char32_t>(0xAC00 + (initial * 21 + it->second) * 28));
}

double raised_cosine_gain(double t, double length, double ramp) {
  const double r = std::min(ramp, 0.5 * length);
  if (r <= 0.0) return 1.0;
  if (t < r) return 0.5 - 0.5 * std::cos(std::numbers::pi * t / r);
  if (t > length - r) return 0.5 - 0.5 * std::cos(std::numbers::pi * (length - t) / r);
  return 1.0;
}

}  // namespace

SyntheticSong generate(const SynthSpec& spec) {
  const auto& table = text::VowelClassTable::for_language(spec.language);
  require(spec.classes >= 1 && spec.classes <= table.size(), "synth: class count must be in 1..L");
  require(spec.units >= spec.classes, "synth: need at least one unit per class");
  require(spec.min_duration > 0.0 && spec.max_duration >= spec.min_duration, "synth: invalid unit durations");
  require(spec.frame_s > 0.0 && spec.dimensions >= 1 && spec.noise >= 0.0, "synth: invalid feature settings");
  require(spec.units_per_line >= 1, "synth: units_per_line must be positive");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);

  std::vector<std::size_t> pool(table.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(spec.classes);

  std::vector<std::size_t> cls(spec.units);
  std::uniform_int_distribution<std::size_t> pick(0, spec.classes - 1);
  for (std::size_t u = 0; u < spec.units; ++u) {
    cls[u] = pool[pick(rng)];
    // Immediate repeats are allowed but made less likely.
    if (u > 0 && cls[u] == cls[u - 1] && spec.classes > 1 && unit01(rng) < 0.7) cls[u] = pool[pick(rng)];
  }
  std::vector<std::size_t> slots(spec.units);
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  std::shuffle(slots.begin(), slots.end(), rng);
  for (std::size_t c = 0; c < spec.classes; ++c) cls[slots[c]] = pool[c];

  SyntheticSong song;
  std::ostringstream lyrics;
  std::map<std::string, std::string> dict_entries;
  double t = spec.lead_in;
  for (std::size_t u = 0; u < spec.units; ++u) {
    const std::string& label = table.classes()[cls[u]];
    const std::size_t line = u / spec.units_per_line;
    const bool line_start = u % spec.units_per_line == 0;
    const bool line_end = (u + 1) % spec.units_per_line == 0 || u + 1 == spec.units;

    metrics::AnnotatedUnit unit;
    unit.vowel = label;
    unit.line_index = line;
    if (spec.language == text::Language::kr) {
      unit.kind = text::UnitKind::syllable;
      unit.text = korean_syllable(label, rng);
      if (!line_start && u % 2 == 0) lyrics << ' ';
    } else {
      const auto& w = english_word(label);
      unit.kind = text::UnitKind::word;
      unit.text = w.word;
      dict_entries[w.word] = w.phones;
      if (!line_start) lyrics << ' ';
    }
    lyrics << unit.text;
    if (line_end) lyrics << '\n';

    const double dur = spec.min_duration + (spec.max_duration - spec.min_duration) * unit01(rng);
    unit.onset_s = t;
    unit.offset_s = t + dur;
    t = unit.offset_s;
    const double rest_probability = line_end ? 0.5 : spec.gap_probability;
    if (unit01(rng) < rest_probability) t += spec.min_gap + (spec.max_gap - spec.min_gap) * unit01(rng);

    song.labels.push_back(label);
    song.truth.units.push_back(std::move(unit));
  }
  song.duration = t + spec.tail;
  song.lyrics = lyrics.str();
  for (const auto& [word, phones] : dict_entries) song.dictionary += word + "  " + phones + "\n";

  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(spec.dimensions);
  song.prototypes.resize(static_cast<Eigen::Index>(table.size()), d);
  for (Eigen::Index r = 0; r < song.prototypes.rows(); ++r)
    for (Eigen::Index c = 0; c < d; ++c) song.prototypes(r, c) = gauss(rng);

  song.timeline.hop_s = spec.frame_s;
  song.timeline.window_s = spec.frame_s;
  std::vector<Eigen::RowVectorXd> rows;
  std::size_t unit = 0;
  for (std::size_t j = 0;; ++j) {
    const double start = static_cast<double>(j) * spec.frame_s;
    const double center = start + 0.5 * spec.frame_s;
    if (center >= song.duration) break;
    while (unit < song.truth.units.size() && song.truth.units[unit].offset_s <= center) ++unit;
    if (unit >= song.truth.units.size() || song.truth.units[unit].onset_s > center) continue;
    Eigen::RowVectorXd row = song.prototypes.row(static_cast<Eigen::Index>(cls[unit]));
    for (Eigen::Index c = 0; c < d; ++c) row(c) += spec.noise * gauss(rng);
    rows.push_back(std::move(row));
    song.timeline.kept.push_back({j, start});
  }
  song.features.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r) song.features.row(static_cast<Eigen::Index>(r)) = rows[r];
  return song;
}

Formants vowel_formants(std::string_view label) {
  static const std::map<std::string, Formants, std::less<>> table = {
      {"a", {800, 1250, 2600}},  {"e", {480, 1950, 2650}}, {"i", {290, 2300, 3000}}, {"o", {420, 820, 2500}},
      {"u", {310, 750, 2300}},   {"ʌ", {620, 1150, 2550}}, {"ɯ", {330, 1450, 2450}}, {"ɔ", {570, 840, 2410}},
      {"ɑ", {730, 1090, 2440}},  {"ɛ", {530, 1840, 2480}}, {"ɪ", {390, 1990, 2550}}, {"ʊ", {440, 1020, 2240}},
      {"ə", {500, 1500, 2500}},  {"æ", {660, 1720, 2410}}, {"eɪ", {450, 2050, 2600}}, {"aɪ", {750, 1500, 2500}},
      {"oʊ", {460, 900, 2400}},  {"aʊ", {720, 1000, 2400}}, {"ɔɪ", {550, 1400, 2450}}};
  const auto it = table.find(label);
  require(it != table.end(), "synth: no formants for class " + std::string(label));
  return it->second;
}

audio::AudioClip render_voice(const SyntheticSong& song, const RenderSpec& spec) {
  require(spec.sample_rate > 0 && spec.max_f0 >= spec.min_f0 && spec.min_f0 > 0.0, "render: invalid settings");
  audio::AudioClip clip;
  clip.sample_rate = spec.sample_rate;
  const double sr = spec.sample_rate;
  clip.samples.assign(static_cast<std::size_t>(std::ceil(song.duration * sr)), 0.0);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> f0_dist(spec.min_f0, spec.max_f0);
  const double nyquist_guard = 0.45 * sr;

  for (const auto& unit : song.truth.units) {
    const Formants f = vowel_formants(unit.vowel);
    const double f0 = f0_dist(rng);
    std::vector<double> amps;
    double norm = 0.0;
    for (int h = 1; h * f0 < std::min(7000.0, nyquist_guard); ++h) {
      const double fh = h * f0;
      const auto peak = [fh](double center, double bw) {
        return std::exp(-0.5 * (fh - center) * (fh - center) / (bw * bw));
      };
      const double a = peak(f.f1, 90.0) + 0.6 * peak(f.f2, 130.0) + 0.25 * peak(f.f3, 180.0) + 0.01;
      amps.push_back(a);
      norm += a;
    }
    for (auto& a : amps) a /= norm;
    const auto first = static_cast<std::size_t>(std::lround(unit.onset_s * sr));
    const auto last = std::min(clip.samples.size(), static_cast<std::size_t>(std::lround(unit.offset_s * sr)));
    const double length = static_cast<double>(last - first) / sr;
    for (std::size_t n = first; n < last; ++n) {
      const double t = static_cast<double>(n - first) / sr;
      double v = 0.0;
      for (std::size_t h = 0; h < amps.size(); ++h)
        v += amps[h] * std::sin(2.0 * std::numbers::pi * f0 * static_cast<double>(h + 1) * t);
      clip.samples[n] += 2.0 * spec.voice_amplitude * v * raised_cosine_gain(t, length, 0.015);
    }
  }
  return clip;
}

audio::AudioClip render(const SyntheticSong& song, const RenderSpec& spec) {
  audio::AudioClip clip = render_voice(song, spec);
  // A four-beat figure of decaying low tones, repeated for the whole song.
  constexpr double kRoots[] = {110.0, 146.83, 164.81, 130.81};
  constexpr double kBeat = 0.5;
  const double sr = spec.sample_rate;
  for (std::size_t n = 0; n < clip.samples.size(); ++n) {
    const double t = static_cast<double>(n) / sr;
    const auto beat = static_cast<std::size_t>(t / kBeat);
    const double local = t - static_cast<double>(beat) * kBeat;
    const double root = kRoots[beat % std::size(kRoots)];
    const double env = std::exp(-local / 0.25) * raised_cosine_gain(local, kBeat, 0.01);
    double v = 0.0;
    for (int h = 1; h <= 3; ++h) v += std::sin(2.0 * std::numbers::pi * root * h * t) / h;
    clip.samples[n] += spec.accompaniment_amplitude * env * v;
  }
  double peak = 0.0;
  for (const double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.99)
    for (auto& s : clip.samples) s *= 0.99 / peak;
  return clip;
}

std::vector<bool> truth_vad_frames(const SyntheticSong& song, std::size_t frame_count, double frame_duration) {
  std::vector<vad::Segment> segments;
  for (const auto& u : song.truth.units) segments.push_back({u.onset_s, u.offset_s});
  return vad::frames_from_segments(segments, frame_count, frame_duration);
}

double calibrate_theta(const audio::AudioClip& voice, const SyntheticSong& song, double start) {
  const auto energy = vad::frame_log_energy(voice);
  const auto truth = truth_vad_frames(song, energy.size());
  double best_theta = start;
  double best_f1 = -1.0;
  for (int step = -60; step <= 60; ++step) {
    const double theta = start + 0.05 * step;
    std::vector<bool> pred(energy.size());
    for (std::size_t f = 0; f < energy.size(); ++f) pred[f] = energy[f] > theta;
    const double f1 = metrics::vad_scores(truth, pred, 1.0).f1;
    if (f1 > best_f1 + 1e-12 ||
        (std::abs(f1 - best_f1) <= 1e-12 && std::abs(theta - start) < std::abs(best_theta - start))) {
      best_f1 = f1;
      best_theta = theta;
    }
  }
  return best_theta;
}

}  // namespace lyricalign::synth
