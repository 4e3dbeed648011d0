#include "lyricalign/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "lyricalign/error.hpp"
#include "lyricalign/io.hpp"
#include "lyricalign/wsnmf.hpp"

namespace lyricalign::pipeline {

namespace {

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

std::string ssm_mode_name(features::SsmMode mode) {
  return mode == features::SsmMode::heat_similarity ? "heat" : "inverted_heat";
}

features::SsmMode parse_ssm_mode(const std::string& name) {
  if (name == "heat") return features::SsmMode::heat_similarity;
  if (name == "inverted_heat") return features::SsmMode::inverted_heat;
  fail(ErrorKind::invalid_input, "unknown ssm_mode: " + name);
}

Eigen::MatrixXd one_hot(const std::vector<std::size_t>& classes, std::size_t columns) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes.size()),
                                            static_cast<Eigen::Index>(columns));
  for (std::size_t r = 0; r < classes.size(); ++r)
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(classes[r])) = 1.0;
  return m;
}

}  // namespace

nlohmann::json to_json(const PipelineConfig& c) {
  return {{"language", text::language_name(c.language)},
          {"dictionary", c.dictionary_path},
          {"oov", c.oov == text::OovPolicy::skip ? "skip" : "fail"},
          {"separate", c.separate},
          {"sample_rate", c.separation.sample_rate},
          {"stft_window", c.separation.window_size},
          {"stft_hop", c.separation.hop_size},
          {"rpca_lambda_scale", c.separation.rpca.lambda_scale},
          {"rpca_tolerance", c.separation.rpca.tolerance},
          {"rpca_max_iterations", c.separation.rpca.max_iterations},
          {"mask_gain", c.separation.mask_gain},
          {"power_spectrogram", c.separation.power_spectrogram},
          {"vad_theta", c.vad_theta},
          {"vad_order", c.vad_order},
          {"mfcc_window", c.mfcc.window_size},
          {"mfcc_hop", c.mfcc.hop_size},
          {"ssm_mode", ssm_mode_name(c.ssm_mode)},
          {"sigma", c.sigma ? nlohmann::json(*c.sigma) : nlohmann::json(nullptr)},
          {"k_offset", c.k_offset},
          {"sparsity", c.sparsity},
          {"epsilon", c.epsilon},
          {"max_iterations", c.max_iterations},
          {"seed", c.seed},
          {"w_init", wsnmf::w_init_name(c.w_init)},
          {"wtbw_w_update", c.wtbw_w_update},
          {"ctw_energy", c.ctw.energy},
          {"ctw_h_scale", c.ctw.h_scale},
          {"ctw_ridge", c.ctw.ridge},
          {"ctw_max_cycles", c.ctw.max_cycles},
          {"ctw_tolerance", c.ctw.tolerance}};
}

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig c) {
  require(j.is_object(), "config must be a JSON object");
  const auto known = to_json(c);
  for (const auto& [key, value] : j.items())
    require(known.contains(key), "unknown config key: " + key);
  try {
    if (j.contains("language")) c.language = text::parse_language(j["language"].get<std::string>());
    if (j.contains("dictionary")) c.dictionary_path = j["dictionary"].get<std::string>();
    if (j.contains("oov")) {
      const auto v = j["oov"].get<std::string>();
      require(v == "skip" || v == "fail", "oov must be \"skip\" or \"fail\"");
      c.oov = v == "skip" ? text::OovPolicy::skip : text::OovPolicy::fail;
    }
    if (j.contains("separate")) c.separate = j["separate"].get<bool>();
    if (j.contains("sample_rate")) c.separation.sample_rate = j["sample_rate"].get<int>();
    if (j.contains("stft_window")) c.separation.window_size = j["stft_window"].get<int>();
    if (j.contains("stft_hop")) c.separation.hop_size = j["stft_hop"].get<int>();
    if (j.contains("rpca_lambda_scale")) c.separation.rpca.lambda_scale = j["rpca_lambda_scale"].get<double>();
    if (j.contains("rpca_tolerance")) c.separation.rpca.tolerance = j["rpca_tolerance"].get<double>();
    if (j.contains("rpca_max_iterations")) c.separation.rpca.max_iterations = j["rpca_max_iterations"].get<int>();
    if (j.contains("mask_gain")) c.separation.mask_gain = j["mask_gain"].get<double>();
    if (j.contains("power_spectrogram")) c.separation.power_spectrogram = j["power_spectrogram"].get<bool>();
    if (j.contains("vad_theta")) c.vad_theta = j["vad_theta"].get<double>();
    if (j.contains("vad_order")) c.vad_order = j["vad_order"].get<int>();
    if (j.contains("mfcc_window")) c.mfcc.window_size = j["mfcc_window"].get<int>();
    if (j.contains("mfcc_hop")) c.mfcc.hop_size = j["mfcc_hop"].get<int>();
    if (j.contains("ssm_mode")) c.ssm_mode = parse_ssm_mode(j["ssm_mode"].get<std::string>());
    if (j.contains("sigma"))
      c.sigma = j["sigma"].is_null() ? std::nullopt : std::optional<double>(j["sigma"].get<double>());
    if (j.contains("k_offset")) c.k_offset = j["k_offset"].get<int>();
    if (j.contains("sparsity")) c.sparsity = j["sparsity"].get<double>();
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("max_iterations")) c.max_iterations = j["max_iterations"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("w_init")) c.w_init = wsnmf::parse_w_init(j["w_init"].get<std::string>());
    if (j.contains("wtbw_w_update")) c.wtbw_w_update = j["wtbw_w_update"].get<bool>();
    if (j.contains("ctw_energy")) c.ctw.energy = j["ctw_energy"].get<double>();
    if (j.contains("ctw_h_scale")) c.ctw.h_scale = j["ctw_h_scale"].get<double>();
    if (j.contains("ctw_ridge")) c.ctw.ridge = j["ctw_ridge"].get<double>();
    if (j.contains("ctw_max_cycles")) c.ctw.max_cycles = j["ctw_max_cycles"].get<int>();
    if (j.contains("ctw_tolerance")) c.ctw.tolerance = j["ctw_tolerance"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_input, std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::invalid_input, path.string() + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

text::VowelSequence lyrics_to_vowels(const std::string& lyrics, const PipelineConfig& config,
                                     const text::PronouncingDictionary* dictionary) {
  if (config.language == text::Language::kr) return text::decompose_hangul(lyrics);
  require(dictionary != nullptr, "English lyrics need a pronouncing dictionary");
  return text::english_vowels(lyrics, *dictionary, config.oov);
}

PreparedSong prepare_features(features::FeatureMatrix frames, const std::string& lyrics,
                              const PipelineConfig& config, const text::PronouncingDictionary* dictionary,
                              double duration_s) {
  PreparedSong song;
  song.language = config.language;
  song.duration_s = duration_s;
  song.sequence = stage("textproc", [&] { return lyrics_to_vowels(lyrics, config, dictionary); });
  song.lyrics = stage("textproc", [&] {
    return text::build_matrix(song.sequence, text::VowelClassTable::for_language(config.language));
  });
  song.l_prime = text::distinct_classes(song.lyrics);
  if (frames.vectors.rows() < 2) fail(ErrorKind::no_voice, "features: fewer than two voiced frames");
  song.frames = std::move(frames);
  song.ssm = stage("features", [&] { return features::build_ssm(song.frames.vectors, config.sigma, config.ssm_mode); });
  song.report["kept_frames"] = song.frames.vectors.rows();
  song.report["units"] = song.sequence.labels.size();
  song.report["l_prime"] = song.l_prime;
  song.report["sigma"] = song.ssm.sigma;
  song.report["skipped_words"] = song.sequence.skipped_words;
  return song;
}

PreparedSong prepare_audio(const audio::AudioClip& clip, const std::string& lyrics, const PipelineConfig& config,
                           const text::PronouncingDictionary* dictionary) {
  const audio::AudioClip input = stage("audio_io", [&] { return audio::resample(clip, config.separation.sample_rate); });
  const audio::AudioClip voice = config.separate
                                     ? stage("separation", [&] { return separation::separate_voice(input, config.separation); })
                                     : input;
  const auto decision = stage("vad", [&] {
    return vad::smooth(vad::detect(voice, config.vad_theta), config.vad_order);
  });
  auto all = stage("features", [&] { return features::mfcc(voice, config.mfcc); });
  const auto timeline = stage("vad", [&] {
    return vad::build_timeline(decision, static_cast<std::size_t>(all.vectors.rows()), all.timeline.hop_s,
                               all.timeline.window_s);
  });
  auto frames = features::select_frames(all, timeline);
  PreparedSong song = prepare_features(std::move(frames), lyrics, config, dictionary, input.duration());
  song.report["vad"] = {{"frames", decision.active.size()},
                        {"active", decision.active_count()},
                        {"theta", decision.threshold}};
  return song;
}

metrics::AnnotationSet timestamps_from_path(const ctw::WarpPath& path, const text::VowelSequence& sequence,
                                            const vad::FrameTimeline& timeline, text::Language language) {
  const std::size_t m = sequence.units.size();
  std::vector<std::size_t> first(m, std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> last(m, 0);
  for (std::size_t t = 0; t < path.size(); ++t) {
    const auto row = path.a[t];
    require(row < m && path.b[t] < timeline.size(), "timestamps: path does not match the inputs");
    first[row] = std::min(first[row], path.b[t]);
    last[row] = std::max(last[row], path.b[t]);
  }
  metrics::AnnotationSet out;
  for (std::size_t u = 0; u < m; ++u) {
    require(first[u] != std::numeric_limits<std::size_t>::max(), "timestamps: unit without frames");
    const auto& rec = sequence.units[u];
    const bool merge = language == text::Language::en && !out.units.empty() && u > 0 &&
                       sequence.units[u - 1].word_index == rec.word_index;
    if (merge) {
      out.units.back().offset_s = std::max(out.units.back().offset_s, timeline.offset(last[u]));
      continue;
    }
    metrics::AnnotatedUnit unit;
    unit.kind = language == text::Language::en ? text::UnitKind::word : text::UnitKind::syllable;
    unit.text = language == text::Language::en ? sequence.words[rec.word_index] : rec.source_text;
    unit.onset_s = timeline.onset(first[u]);
    unit.offset_s = timeline.offset(last[u]);
    unit.line_index = rec.line_index;
    out.units.push_back(std::move(unit));
  }
  return out;
}

namespace {

wsnmf::Factorization factorize_song(const PreparedSong& song, const PipelineConfig& config, int k) {
  wsnmf::WsnmfConfig wc;
  wc.k = k;
  wc.sparsity = config.sparsity;
  wc.epsilon = config.epsilon;
  wc.max_iterations = config.max_iterations;
  wc.seed = config.seed;
  wc.w_init = config.w_init;
  wc.wtbw_w_update = config.wtbw_w_update;
  return stage("wsnmf", [&] { return wsnmf::factorize(song.ssm.s, wc); });
}

AlignmentOutput warp_song(const PreparedSong& song, const wsnmf::Factorization& fact, const PipelineConfig& config,
                          int k) {
  AlignmentOutput out;
  out.report = song.report;
  out.report["k"] = k;
  out.report["wsnmf"] = {{"iterations", fact.iterations},
                         {"converged", fact.converged},
                         {"objective", fact.objective_trace.empty() ? 0.0 : fact.objective_trace.back()},
                         {"fallback_rows", fact.projection.fallback_rows},
                         {"zero_rows", fact.projection.zero_rows}};

  const auto m = static_cast<std::size_t>(song.lyrics.a.rows());
  const auto n = static_cast<std::size_t>(fact.b.rows());
  // One component makes B constant, which leaves CCA nothing to correlate.
  const bool degenerate = song.l_prime < 2 || k < 2 || m < 2 || n < 2;
  out.report["degenerate_single_class"] = song.l_prime < 2;
  out.report["degenerate_single_component"] = k < 2;
  if (degenerate) {
    out.path = ctw::utw_init(m, n, config.ctw.h_scale);
    out.report["ctw"] = {{"fallback", "uniform"}};
  } else {
    auto res = stage("ctw", [&] { return ctw::ctw_align(song.lyrics.a, fact.b, config.ctw); });
    out.report["ctw"] = {{"cycles", res.cycles},
                         {"converged", res.converged},
                         {"stopped_on_increase", res.stopped_on_increase},
                         {"dims", res.projections.dims()},
                         {"j_trace", res.j_trace}};
    out.path = std::move(res.path);
    out.accumulated = std::move(res.accumulated);
  }
  out.prediction = timestamps_from_path(out.path, song.sequence, song.frames.timeline, song.language);
  return out;
}

}  // namespace

AlignmentOutput align_prepared(const PreparedSong& song, const PipelineConfig& config) {
  const int k = stage("wsnmf", [&] { return wsnmf::choose_k(song.l_prime, config.k_offset); });
  auto out = warp_song(song, factorize_song(song, config, k), config, k);
  out.report["config"] = to_json(config);
  return out;
}

AlignmentOutput align(const std::filesystem::path& audio_path, const std::filesystem::path& lyrics_path,
                      const PipelineConfig& config) {
  const auto clip = stage("audio_io", [&] { return audio::load_audio(audio_path, config.separation.sample_rate); });
  const auto lyrics = io::read_text(lyrics_path);
  std::optional<text::PronouncingDictionary> dict;
  if (config.language == text::Language::en) {
    require(!config.dictionary_path.empty(), "English alignment needs --dict or a \"dictionary\" config key");
    dict = stage("textproc", [&] { return text::load_cmudict(config.dictionary_path); });
  }
  const auto song = prepare_audio(clip, lyrics, config, dict ? &*dict : nullptr);
  auto out = align_prepared(song, config);
  out.prediction.song_id = audio_path.stem().string();
  return out;
}

OracleResult vowel_oracle_align(const metrics::AnnotationSet& truth, const text::VowelClassTable& table,
                                double start, double end, double frame_s, double tau) {
  require(end > start && frame_s > 0.0, "oracle: invalid window");
  OracleResult out;
  std::vector<std::size_t> lyric_classes;
  for (const auto& u : truth.units) {
    if (u.onset_s < start || u.offset_s > end) continue;
    const auto c = table.index_of(u.vowel);
    require(c.has_value(), "oracle: unit label is not in the class table: " + u.vowel);
    lyric_classes.push_back(*c);
    out.reference.units.push_back(u);
  }
  if (lyric_classes.empty()) fail(ErrorKind::empty_vowels, "oracle: no complete unit inside the window");

  // Perfect frame labels G. The ground-truth SSM G G' factors exactly as B = G, W = I.
  std::vector<std::size_t> frame_classes;
  vad::FrameTimeline timeline;
  timeline.hop_s = timeline.window_s = frame_s;
  std::size_t unit = 0;
  for (auto j = static_cast<std::size_t>(std::floor(start / frame_s));; ++j) {
    const double onset = static_cast<double>(j) * frame_s;
    const double center = onset + 0.5 * frame_s;
    if (center >= end) break;
    if (center < start) continue;
    while (unit < truth.units.size() && truth.units[unit].offset_s <= center) ++unit;
    if (unit >= truth.units.size() || truth.units[unit].onset_s > center) continue;
    const auto c = table.index_of(truth.units[unit].vowel);
    require(c.has_value(), "oracle: unit label is not in the class table");
    frame_classes.push_back(*c);
    timeline.kept.push_back({j, onset});
  }
  if (frame_classes.empty()) fail(ErrorKind::no_voice, "oracle: no voiced frame inside the window");

  const auto a = one_hot(lyric_classes, table.size());
  const auto g = one_hot(frame_classes, table.size());
  const auto res = ctw::dtw(a, g);

  text::VowelSequence seq;
  for (std::size_t i = 0; i < out.reference.units.size(); ++i) {
    seq.words.push_back(out.reference.units[i].text);
    seq.units.push_back({text::UnitKind::syllable, out.reference.units[i].text, i, 0, out.reference.units[i].line_index});
  }
  out.prediction = timestamps_from_path(res.path, seq, timeline, text::Language::kr);
  out.units = lyric_classes.size();
  out.accuracy = metrics::unit_accuracy(out.reference, out.prediction, tau);
  out.mad = metrics::song_mad(out.reference.onsets(), out.prediction.onsets());
  return out;
}

CutStudy random_cut_study(const metrics::AnnotationSet& truth, const text::VowelClassTable& table, double duration,
                          std::size_t cuts, double length, std::size_t min_units, std::uint64_t seed, double tau) {
  require(cuts >= 1 && length > 0.0 && duration > length, "cut study: song shorter than one cut");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> start_dist(0.0, duration - length);
  CutStudy study;
  for (std::size_t attempt = 0; study.cuts.size() < cuts && attempt < cuts * 500; ++attempt) {
    const double start = start_dist(rng);
    const double end = start + length;
    const auto inside = std::count_if(truth.units.begin(), truth.units.end(), [&](const auto& u) {
      return u.onset_s >= start && u.offset_s <= end;
    });
    if (static_cast<std::size_t>(inside) < min_units) continue;
    study.cuts.push_back(vowel_oracle_align(truth, table, start, end, 0.064, tau));
  }
  require(study.cuts.size() == cuts, "cut study: could not find enough windows with the minimum unit count");
  std::vector<double> acc, mads;
  for (const auto& c : study.cuts) {
    acc.push_back(c.accuracy);
    mads.push_back(c.mad);
  }
  study.mean_accuracy = metrics::dataset_accuracy(acc);
  study.mean_mad = metrics::dataset_accuracy(mads);
  return study;
}

GridResult grid_search(const std::vector<ValidationSong>& songs, const PipelineConfig& base,
                       const std::vector<int>& offsets, const std::vector<double>& energies, double tau) {
  require(!songs.empty(), "grid search: empty validation set");
  require(!offsets.empty() && !energies.empty(), "grid search: empty grid");
  GridResult grid;
  for (const int offset : offsets) {
    // The factorization depends on K only, so it is shared across energies.
    std::vector<std::optional<wsnmf::Factorization>> facts(songs.size());
    bool valid = true;
    int max_k = 0;
    for (std::size_t s = 0; s < songs.size(); ++s) {
      const long k = static_cast<long>(songs[s].prepared.l_prime) + offset;
      if (k < 1) {
        valid = false;
        break;
      }
      max_k = std::max(max_k, static_cast<int>(k));
      facts[s] = factorize_song(songs[s].prepared, base, static_cast<int>(k));
    }
    for (const double energy : energies) {
      GridRow row;
      row.k_offset = offset;
      row.energy = energy;
      row.valid = valid;
      row.max_k = max_k;
      if (valid) {
        PipelineConfig cfg = base;
        cfg.k_offset = offset;
        cfg.ctw.energy = energy;
        std::vector<double> per_song;
        for (std::size_t s = 0; s < songs.size(); ++s) {
          const int k = static_cast<int>(songs[s].prepared.l_prime) + offset;
          const auto out = warp_song(songs[s].prepared, *facts[s], cfg, k);
          per_song.push_back(metrics::unit_accuracy(songs[s].truth, out.prediction, tau));
        }
        row.accuracy = metrics::dataset_accuracy(per_song);
      }
      grid.rows.push_back(row);
    }
  }
  bool found = false;
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    if (!grid.rows[i].valid) continue;
    if (!found || grid.rows[i].accuracy > grid.rows[grid.best].accuracy) {
      grid.best = i;
      found = true;
    }
  }
  require(found, "grid search: no valid cell");
  return grid;
}

std::string grid_csv(const GridResult& grid) {
  std::ostringstream out;
  out << "k_offset,energy,max_k,valid,accuracy,best\n";
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    const auto& r = grid.rows[i];
    out << r.k_offset << ',' << r.energy << ',' << r.max_k << ',' << (r.valid ? 1 : 0) << ',' << r.accuracy << ','
        << (i == grid.best ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace lyricalign::pipeline
