#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lyricalign/text.hpp"

namespace lyricalign::metrics {

struct AnnotatedUnit {
  text::UnitKind kind = text::UnitKind::syllable;
  std::string text;
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::size_t line_index = 0;
  std::string vowel;  // optional class label, used by the vowel oracle
};

struct AnnotationSet {
  std::string song_id;
  std::vector<AnnotatedUnit> units;

  std::vector<double> onsets() const;
};

/// Throws invalid_input on decreasing onsets or offset < onset.
void validate(const AnnotationSet& set);

/// Percentage of units with |t - t_hat| < tau (strict).
double unit_accuracy(const std::vector<double>& reference, const std::vector<double>& predicted, double tau);
double unit_accuracy(const AnnotationSet& reference, const AnnotationSet& predicted, double tau);

/// Unweighted mean over songs.
double dataset_accuracy(const std::vector<double>& per_song);

/// Sample standard deviation with a (songs - 1) denominator.
double accuracy_std(const std::vector<double>& per_song);

/// Mean absolute onset error of one song, in seconds.
double song_mad(const std::vector<double>& reference, const std::vector<double>& predicted);

/// Per-song MAD averaged over songs.
double mad(const std::vector<AnnotationSet>& references, const std::vector<AnnotationSet>& predictions);

struct VadScores {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
  double f_beta = 0.0;
  double beta = 2.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f_undefined = false;
};

/// F_beta from precision and recall given in percent; 0 when both are 0.
double f_measure(double precision, double recall, double beta = 1.0);

VadScores vad_scores(const std::vector<bool>& reference, const std::vector<bool>& predicted, double beta = 2.0);

/// 0.1, 0.2, ..., 2.0 built from integer steps.
std::vector<double> default_tau_grid();

std::vector<double> accuracy_curve(const std::vector<double>& reference, const std::vector<double>& predicted,
                                   const std::vector<double>& taus);

}  // namespace lyricalign::metrics
