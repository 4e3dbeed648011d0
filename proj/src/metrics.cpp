#include "lyricalign/metrics.hpp"

#include <cmath>
#include <numeric>

#include "lyricalign/error.hpp"

namespace lyricalign::metrics {

std::vector<double> AnnotationSet::onsets() const {
  std::vector<double> out;
  out.reserve(units.size());
  for (const auto& u : units) out.push_back(u.onset_s);
  return out;
}

void validate(const AnnotationSet& set) {
  for (std::size_t i = 0; i < set.units.size(); ++i) {
    const auto& u = set.units[i];
    require(std::isfinite(u.onset_s) && std::isfinite(u.offset_s), "annotation times must be finite");
    require(u.offset_s >= u.onset_s, "annotation unit " + std::to_string(i) + " ends before it starts");
    if (i > 0) require(u.onset_s >= set.units[i - 1].onset_s, "annotation onsets must be non-decreasing");
  }
}

double unit_accuracy(const std::vector<double>& reference, const std::vector<double>& predicted, double tau) {
  require(reference.size() == predicted.size(), "accuracy: reference and prediction differ in unit count");
  require(!reference.empty(), "accuracy: no units");
  require(tau > 0.0, "accuracy: tau must be positive");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (std::abs(reference[i] - predicted[i]) < tau) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(reference.size());
}

double unit_accuracy(const AnnotationSet& reference, const AnnotationSet& predicted, double tau) {
  return unit_accuracy(reference.onsets(), predicted.onsets(), tau);
}

double dataset_accuracy(const std::vector<double>& per_song) {
  require(!per_song.empty(), "accuracy: no songs");
  return std::accumulate(per_song.begin(), per_song.end(), 0.0) / static_cast<double>(per_song.size());
}

double accuracy_std(const std::vector<double>& per_song) {
  require(per_song.size() >= 2, "accuracy std: needs at least two songs");
  const double mean = dataset_accuracy(per_song);
  double ss = 0.0;
  for (const double v : per_song) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(per_song.size() - 1));
}

double song_mad(const std::vector<double>& reference, const std::vector<double>& predicted) {
  require(reference.size() == predicted.size(), "mad: reference and prediction differ in unit count");
  require(!reference.empty(), "mad: no units");
  double total = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) total += std::abs(predicted[i] - reference[i]);
  return total / static_cast<double>(reference.size());
}

double mad(const std::vector<AnnotationSet>& references, const std::vector<AnnotationSet>& predictions) {
  require(references.size() == predictions.size(), "mad: song counts differ");
  std::vector<double> per_song;
  per_song.reserve(references.size());
  for (std::size_t s = 0; s < references.size(); ++s)
    per_song.push_back(song_mad(references[s].onsets(), predictions[s].onsets()));
  return dataset_accuracy(per_song);
}

double f_measure(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  return denom > 0.0 ? (1.0 + b2) * precision * recall / denom : 0.0;
}

VadScores vad_scores(const std::vector<bool>& reference, const std::vector<bool>& predicted, double beta) {
  require(reference.size() == predicted.size(), "vad scores: frame sequences differ in length");
  require(beta > 0.0, "vad scores: beta must be positive");
  VadScores s;
  s.beta = beta;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (predicted[i] && reference[i]) ++s.tp;
    else if (predicted[i]) ++s.fp;
    else if (reference[i]) ++s.fn;
    else ++s.tn;
  }
  const auto pct = [](std::size_t num, std::size_t den) {
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  s.precision_undefined = s.tp + s.fp == 0;
  s.recall_undefined = s.tp + s.fn == 0;
  s.precision = s.precision_undefined ? 0.0 : pct(s.tp, s.tp + s.fp);
  s.recall = s.recall_undefined ? 0.0 : pct(s.tp, s.tp + s.fn);
  s.f_undefined = s.precision + s.recall == 0.0;
  s.f1 = f_measure(s.precision, s.recall, 1.0);
  s.f_beta = f_measure(s.precision, s.recall, beta);
  return s;
}

std::vector<double> default_tau_grid() {
  std::vector<double> taus;
  for (int k = 1; k <= 20; ++k) taus.push_back(k / 10.0);
  return taus;
}

std::vector<double> accuracy_curve(const std::vector<double>& reference, const std::vector<double>& predicted,
                                   const std::vector<double>& taus) {
  std::vector<double> out;
  out.reserve(taus.size());
  for (const double tau : taus) out.push_back(unit_accuracy(reference, predicted, tau));
  return out;
}

}  // namespace lyricalign::metrics
