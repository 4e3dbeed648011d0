// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lyricalign/ctw.hpp"
#include "lyricalign/lambert.hpp"
#include "lyricalign/metrics.hpp"
#include "lyricalign/pipeline.hpp"
#include "lyricalign/separation.hpp"
#include "lyricalign/synth.hpp"
#include "lyricalign/text.hpp"
#include "lyricalign/wsnmf.hpp"
#include "test_util.hpp"

using namespace lyricalign;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. DTW against exhaustive enumeration of monotone paths.
Outcome dtw_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 8);
  int mismatches = 0;
  for (int pair = 0; pair < 200; ++pair) {
    const int m = len(rng), n = len(rng);
    const auto x = testing::gaussian_matrix(m, 3, rng());
    const auto y = testing::gaussian_matrix(n, 3, rng());
    Eigen::MatrixXd c(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = (x.row(i) - y.row(j)).squaredNorm();

    // Forward enumeration sums each path in the same order as the recursion,
    // so the minimum must match bit for bit.
    double best = std::numeric_limits<double>::infinity();
    std::function<void(int, int, double)> walk = [&](int i, int j, double acc) {
      acc += c(i, j);
      if (i == m - 1 && j == n - 1) {
        best = std::min(best, acc);
        return;
      }
      if (i + 1 < m && j + 1 < n) walk(i + 1, j + 1, acc);
      if (i + 1 < m) walk(i + 1, j, acc);
      if (j + 1 < n) walk(i, j + 1, acc);
    };
    walk(0, 0, 0.0);
    const auto r = ctw::dtw_from_cost(c);
    if (r.cost != best || !ctw::is_valid_path(r.path, m, n)) ++mismatches;
    const auto direct = ctw::dtw(x, y);
    if (std::abs(direct.cost - best) > 1e-12 * std::max(1.0, best)) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0, fmt("200 pairs, %d mismatches, %.2f s", mismatches, secs)};
}

// 2. Planted three-block recovery by WS-NMF.
Outcome wsnmf_planted() {
  const auto t0 = std::chrono::steady_clock::now();
  Eigen::MatrixXd s(60, 60);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) s(i, j) = i == j ? 1.0 : (i / 20 == j / 20 ? 0.9 : 0.1);

  const auto accuracy = [](const Eigen::MatrixXd& b) {
    std::vector<int> perm{0, 1, 2};
    int best = 0;
    do {
      int hits = 0;
      for (int i = 0; i < 60; ++i) {
        Eigen::Index arg;
        b.row(i).maxCoeff(&arg);
        hits += perm[static_cast<std::size_t>(arg)] == i / 20;
      }
      best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / 60.0;
  };

  double mean_acc = 0.0;
  double worst_increase = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    wsnmf::WsnmfConfig cfg;
    cfg.k = 3;
    cfg.seed = seed;
    cfg.sparsity = 3e-3;
    mean_acc += accuracy(wsnmf::factorize(s, cfg).b) / 10.0;
    cfg.sparsity = 0.0;
    const auto plain = wsnmf::factorize(s, cfg);
    for (std::size_t i = 1; i < plain.objective_trace.size(); ++i)
      worst_increase = std::max(worst_increase, plain.objective_trace[i] - plain.objective_trace[i - 1]);
  }
  const double secs = seconds_since(t0);
  return {mean_acc >= 0.95 && worst_increase <= 1e-9 && secs < 30.0,
          fmt("mean accuracy %.4f, largest objective increase %.2e (sparsity 0), %.2f s", mean_acc, worst_increase,
              secs)};
}

// 3. Lambert W residuals on both branches.
Outcome lambert_residuals() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int points = 0;
  for (int i = 0; i < 1000; ++i) {
    // Principal branch over [-1/e, 1e4], log-spaced offsets from the branch point.
    const double x0 = -kInvE + std::pow(10.0, -12.0 + 16.0 * unit(rng));
    // Lower branch over [-1/e, 0).
    const double x1 = -kInvE * (1.0 - unit(rng));
    const double w0 = lambert_w(x0, LambertBranch::principal);
    worst = std::max(worst, std::abs(w0 * std::exp(w0) - x0) / std::max(1.0, std::abs(x0)));
    ++points;
    if (x1 < 0.0) {
      const double w1 = lambert_w(x1, LambertBranch::lower);
      worst = std::max(worst, std::abs(w1 * std::exp(w1) - x1) / std::max(1.0, std::abs(x1)));
      ++points;
    }
  }
  return {worst <= 1e-12, fmt("%d points, worst scaled residual %.2e", points, worst)};
}

// 4. CCA on identical, linearly related and independent views.
Outcome cca_oracle() {
  const auto a = testing::gaussian_matrix(500, 5, 1);
  const double top_identical = ctw::cca(a, a, 1.0).correlations(0);
  const auto r = testing::gaussian_matrix(5, 5, 2);
  const auto related = ctw::cca(a, a * r, 0.95);
  const double min_related = related.correlations.minCoeff();
  double max_independent = 0.0;
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto p = ctw::cca(testing::gaussian_matrix(500, 4, 10 + t), testing::gaussian_matrix(500, 5, 50 + t), 1.0);
    max_independent = std::max(max_independent, p.all_correlations(0));
  }
  const bool pass = std::abs(top_identical - 1.0) <= 1e-6 && min_related >= 0.999 && max_independent <= 0.3;
  return {pass, fmt("identical %.9f, related min %.6f, independent max %.3f", top_identical, min_related,
                    max_independent)};
}

// 5. CTW convergence and time-stretch recovery.
Outcome ctw_convergence() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  int good = 0, total = 0, max_cycles = 0, violations = 0, cases = 0;
  const auto check_trace = [&](const ctw::CtwResult& res) {
    ++cases;
    max_cycles = std::max(max_cycles, res.cycles);
    for (std::size_t i = 1; i < res.j_trace.size(); ++i)
      if (res.j_trace[i] > res.j_trace[i - 1] + 1e-9) ++violations;
  };

  for (int trial = 0; trial < 10; ++trial) {
    const int m = 40, l = 5, stretch = 3;
    Eigen::MatrixXd a(m, l), mix(l, l);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < l; ++j) a(i, j) = g(rng);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) mix(i, j) = g(rng);
    Eigen::MatrixXd b(m * stretch, l);
    for (int i = 0; i < m * stretch; ++i) b.row(i) = a.row(i / stretch) * mix;
    const double scale = b.cwiseAbs().mean();
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < l; ++j) b(i, j) += 0.01 * scale * g(rng);

    const auto res = ctw::ctw_align(a, b);
    check_trace(res);
    for (int row = 0; row < m; ++row) {
      std::size_t first = std::numeric_limits<std::size_t>::max();
      for (std::size_t t = 0; t < res.path.size(); ++t)
        if (res.path.a[t] == static_cast<std::size_t>(row)) first = std::min(first, res.path.b[t]);
      ++total;
      if (std::abs(static_cast<long>(first) - static_cast<long>(row * stretch)) <= 1) ++good;
    }
  }
  // Unrelated random pairs and one-hot lyric-like inputs only exercise convergence.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    check_trace(ctw::ctw_align(testing::gaussian_matrix(25 + static_cast<int>(seed), 4, seed),
                               testing::random_matrix(80, 6, seed + 40)));
    synth::SynthSpec spec;
    spec.units = 40;
    spec.classes = 5;
    spec.seed = seed + 1;
    const auto song = synth::generate(spec);
    const auto a = text::build_matrix(text::decompose_hangul(song.lyrics), text::VowelClassTable::korean());
    check_trace(ctw::ctw_align(a.a, song.features));
  }
  const double recovered = static_cast<double>(good) / total;
  return {violations == 0 && max_cycles <= 50 && recovered >= 0.95,
          fmt("%d cases, J increases %d, max cycles %d, rows within +-1 frame %.1f%%", cases, violations, max_cycles,
              100.0 * recovered)};
}

// 6. Perfect-vowel upper bound, full songs against random 10 s cuts.
Outcome vowel_oracle() {
  const auto& table = text::VowelClassTable::korean();
  std::vector<double> full_acc, cut_acc, full_mad, cut_mad;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    synth::SynthSpec spec;
    spec.units = 120;
    spec.classes = 7;
    spec.seed = seed;
    const auto song = synth::generate(spec);
    const auto full = pipeline::vowel_oracle_align(song.truth, table, 0.0, song.duration);
    const auto cuts = pipeline::random_cut_study(song.truth, table, song.duration, 20, 10.0, 5, seed);
    full_acc.push_back(full.accuracy);
    full_mad.push_back(full.mad);
    cut_acc.push_back(cuts.mean_accuracy);
    cut_mad.push_back(cuts.mean_mad);
  }
  const double fa = metrics::dataset_accuracy(full_acc), ca = metrics::dataset_accuracy(cut_acc);
  const double fm = metrics::dataset_accuracy(full_mad), cm = metrics::dataset_accuracy(cut_mad);
  return {fa >= 95.0 && ca >= 90.0 && fm <= cm,
          fmt("full SA %.2f MAD %.4f s, 10 s cuts SA %.2f MAD %.4f s", fa, fm, ca, cm)};
}

// 7. Rendered songs through the whole chain.
Outcome end_to_end() {
  struct Case {
    std::size_t units, classes;
    std::uint64_t seed;
  };
  const std::vector<Case> cases{{60, 3, 11}, {120, 5, 12}, {200, 7, 13}};
  std::string detail;
  bool pass = true;
  for (const auto& c : cases) {
    synth::SynthSpec spec;
    spec.units = c.units;
    spec.classes = c.classes;
    spec.seed = c.seed;
    const auto song = synth::generate(spec);
    synth::RenderSpec rs;
    rs.seed = c.seed;
    const auto clip = synth::render(song, rs);
    pipeline::PipelineConfig cfg;
    cfg.vad_theta = synth::calibrate_theta(synth::render_voice(song, rs), song, cfg.vad_theta);
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = pipeline::align_prepared(pipeline::prepare_audio(clip, song.lyrics, cfg, nullptr), cfg);
    const double secs = seconds_since(t0);
    const double sa = metrics::unit_accuracy(song.truth, out.prediction, 1.0);
    pass = pass && sa >= 90.0 && secs < 120.0;
    detail += fmt("%s%zu units/%zu classes: SA %.1f in %.1f s (theta %.2f)", detail.empty() ? "" : "; ", c.units,
                  c.classes, sa, secs, cfg.vad_theta);
  }
  return {pass, detail};
}

// 8. Metric ground truth.
Outcome metric_examples() {
  int failures = 0;
  const auto expect = [&](bool ok) { failures += ok ? 0 : 1; };
  const double f1 = metrics::f_measure(72.58, 93.07);
  expect(std::abs(f1 - 81.56) <= 0.01);

  expect(metrics::unit_accuracy({1, 2, 3}, {1, 2, 3}, 1.0) == 100.0);
  expect(metrics::unit_accuracy({0, 5}, {2, 3}, 1.0) == 0.0);
  expect(std::abs(metrics::unit_accuracy({0, 10, 20}, {0.5, 11.5, 20.2}, 1.0) - 66.67) < 0.005);
  expect(metrics::dataset_accuracy({42.0}) == 42.0);
  expect(metrics::dataset_accuracy({100.0, 0.0}) == 50.0);
  expect(metrics::dataset_accuracy({62.0, 64.0, 63.0}) == 63.0);
  expect(metrics::accuracy_std({7.0, 7.0}) == 0.0);
  expect(std::abs(metrics::accuracy_std({0.0, 100.0}) - 70.71) < 0.005);
  expect(metrics::accuracy_std({10.0, 20.0, 30.0}) == 10.0);
  expect(metrics::song_mad({1, 2}, {1, 2}) == 0.0);
  expect(metrics::song_mad({0, 10}, {1, 7}) == 2.0);
  metrics::AnnotationSet r1, p1, r2, p2;
  r1.units = {{text::UnitKind::syllable, "a", 0.0, 0.1, 0, ""}};
  p1.units = {{text::UnitKind::syllable, "a", 1.0, 1.1, 0, ""}};
  r2.units = {{text::UnitKind::syllable, "b", 0.0, 0.1, 0, ""}};
  p2.units = {{text::UnitKind::syllable, "b", 3.0, 3.1, 0, ""}};
  expect(metrics::mad({r1, r2}, {p1, p2}) == 2.0);
  const auto all = metrics::vad_scores({true, true, false, false}, {true, true, true, true});
  expect(all.precision == 50.0 && all.recall == 100.0 && std::abs(all.f1 - 66.67) < 0.005);

  const auto grid = metrics::default_tau_grid();
  const auto steps = metrics::accuracy_curve({0, 10}, {0.25, 10.75}, grid);
  expect(steps[1] == 0.0 && steps[2] == 50.0 && steps[6] == 50.0 && steps[7] == 100.0);
  bool monotone = true;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> err(0.0, 0.8);
  for (int song = 0; song < 50; ++song) {
    std::vector<double> ref(40), pred(40);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      ref[i] = static_cast<double>(i);
      pred[i] = ref[i] + err(rng);
    }
    const auto curve = metrics::accuracy_curve(ref, pred, grid);
    for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i] >= curve[i - 1];
  }
  expect(monotone);
  return {failures == 0, fmt("F1(72.58, 93.07) = %.4f, %d worked-example mismatches, tau curves %s", f1, failures,
                             monotone ? "monotone" : "NOT monotone")};
}

// 9. RPCA on a planted rank-one plus sparse matrix.
Outcome rpca_recovery() {
  const int t = 200, f = 150;
  const auto u = testing::random_matrix(t, 1, 1, 0.5, 1.5);
  const auto v = testing::random_matrix(1, f, 2, 0.5, 1.5);
  const Eigen::MatrixXd low = u * v;
  const auto coin = testing::random_matrix(t, f, 3);
  const auto height = testing::random_matrix(t, f, 4, 2.0, 6.0);
  Eigen::MatrixXd spikes = Eigen::MatrixXd::Zero(t, f);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < f; ++j)
      if (coin(i, j) < 0.05) spikes(i, j) = height(i, j);
  const Eigen::MatrixXd x = low + spikes;
  const auto res = separation::rpca(x);

  int tp = 0, fp = 0, fn = 0;
  const double threshold = 1e-3 * x.maxCoeff();
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < f; ++j) {
      const bool truth = spikes(i, j) > 0.0, found = std::abs(res.sparse(i, j)) > threshold;
      tp += truth && found;
      fp += !truth && found;
      fn += truth && !found;
    }
  const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  int increases = 0;
  for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
    if (res.objective_trace[i] > res.objective_trace[i - 1] * (1.0 + 1e-9)) ++increases;
  const double residual = res.residual_trace.empty() ? 0.0 : res.residual_trace.back();
  return {res.converged && f1 >= 0.9 && increases == 0 && residual < 1e-6,
          fmt("support F1 %.3f, %d iterations, objective increases %d, final relative residual %.2e", f1,
              res.iterations, increases, residual)};
}

// 10. Vowel mapping for dictionary words covering every class, and the hangul block.
Outcome text_processing() {
  int failures = 0;
  std::istringstream dict_text(
      "OFF  AO1 F\nFAR  F AA1 R\nSHE  SH IY1\nYOU  Y UW1\nRED  R EH1 D\nPIG  P IH1 G\nSHOULD  SH UH1 D\n"
      "BUT  B AH1 T\nSOFA  S OW1 F AH0\nAT  AE1 T\nDAY  D EY1\nMY  M AY1\nLOW  L OW1\nNOW  N AW1\nBOY  B OY1\n");
  const auto dict = text::parse_cmudict(dict_text);
  const std::vector<std::pair<std::string, std::vector<std::string>>> english{
      {"off", {"ɔ"}}, {"far", {"ɑ"}},    {"she", {"i"}},  {"you", {"u"}},   {"red", {"ɛ"}},
      {"pig", {"ɪ"}}, {"should", {"ʊ"}}, {"but", {"ʌ"}},  {"sofa", {"oʊ", "ə"}},
      {"at", {"æ"}},  {"day", {"eɪ"}},   {"my", {"aɪ"}},  {"low", {"oʊ"}},  {"now", {"aʊ"}},
      {"boy", {"ɔɪ"}}};
  for (const auto& [word, classes] : english) failures += text::word_to_vowels(word, dict) != classes;

  const std::vector<std::pair<std::string, std::string>> korean{{"아", "a"}, {"에", "e"}, {"이", "i"}, {"오", "o"},
                                                                {"우", "u"}, {"어", "ʌ"}, {"으", "ɯ"}};
  for (const auto& [syllable, cls] : korean) failures += text::decompose_hangul(syllable).labels.front() != cls;

  // Independent fold table, indexed by medial.
  static const char* const fold[21] = {"a", "e", "a", "e", "ʌ", "e", "ʌ", "e", "o", "a", "e",
                                       "e", "o", "u", "ʌ", "e", "i", "u", "ɯ", "i", "i"};
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<char32_t> block(0xAC00, 0xD7A3);
  int spot_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const char32_t cp = block(rng);
    const int medial = static_cast<int>((cp - 0xAC00) / 28 % 21);
    const auto seq = text::decompose_hangul(text::encode_utf8(cp));
    spot_failures += text::hangul_medial_index(cp) != medial || seq.labels.size() != 1 || seq.labels[0] != fold[medial];
  }
  int range_failures = 0;
  for (char32_t cp = 0xAC00; cp <= 0xD7A3; ++cp)
    range_failures += text::hangul_medial_index(cp) != static_cast<int>((cp - 0xAC00) / 28 % 21);
  range_failures += text::hangul_medial_index(0xABFF) != -1 || text::hangul_medial_index(0xD7A4) != -1;
  return {failures == 0 && spot_failures == 0 && range_failures == 0,
          fmt("%zu dictionary words, %d mismatches; 1000 random syllables, %d mismatches; full block, %d mismatches",
              english.size() + korean.size(), failures, spot_failures, range_failures)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"dtw-exhaustive-oracle", dtw_oracle},
      {"wsnmf-planted-clusters", wsnmf_planted},
      {"lambert-w-residual", lambert_residuals},
      {"cca-oracle", cca_oracle},
      {"ctw-convergence", ctw_convergence},
      {"vowel-oracle-upper-bound", vowel_oracle},
      {"end-to-end-synthetic", end_to_end},
      {"metrics-ground-truth", metric_examples},
      {"rpca-recovery", rpca_recovery},
      {"text-processing", text_processing},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
