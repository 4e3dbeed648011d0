// Command-line front end: align, separate, vad, eval, synth, grid.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lyricalign/audio.hpp"
#include "lyricalign/ctw.hpp"
#include "lyricalign/error.hpp"
#include "lyricalign/features.hpp"
#include "lyricalign/io.hpp"
#include "lyricalign/metrics.hpp"
#include "lyricalign/pipeline.hpp"
#include "lyricalign/separation.hpp"
#include "lyricalign/synth.hpp"
#include "lyricalign/vad.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lyricalign;

namespace {

// Runs job(i) for i in [0, count) on up to `jobs` threads. The first error wins.
template <class Job>
void run_parallel(std::size_t count, int jobs, Job job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(threads, count); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Overrides {
  std::optional<std::string> language;
  std::optional<std::string> dictionary;
  std::optional<double> theta;
  std::optional<int> k_offset;
  std::optional<double> energy;
  std::optional<double> sparsity;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iterations;
  std::optional<std::string> w_init;
  bool no_separate = false;
  std::string config_path;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--lang", language, "Lyrics language: kr or en");
    app->add_option("--dict", dictionary, "CMU-format pronouncing dictionary (English)");
    app->add_option("--theta", theta, "VAD log-energy threshold");
    app->add_option("--k-offset", k_offset, "K = L' + offset");
    app->add_option("--energy", energy, "CCA energy kept (0, 1]");
    app->add_option("--sparsity", sparsity, "Entropic sparsity weight");
    app->add_option("--seed", seed, "Random seed for the factorization");
    app->add_option("--max-iterations", max_iterations, "Factorization iteration cap");
    app->add_option("--w-init", w_init, "Factorization W start: uniform or identity");
    app->add_flag("--no-separate", no_separate, "Skip voice separation");
  }

  pipeline::PipelineConfig resolve() const {
    pipeline::PipelineConfig cfg;
    if (!config_path.empty()) cfg = pipeline::load_config(config_path, cfg);
    if (language) cfg.language = text::parse_language(*language);
    if (dictionary) cfg.dictionary_path = *dictionary;
    if (theta) cfg.vad_theta = *theta;
    if (k_offset) cfg.k_offset = *k_offset;
    if (energy) cfg.ctw.energy = *energy;
    if (sparsity) cfg.sparsity = *sparsity;
    if (seed) cfg.seed = *seed;
    if (max_iterations) cfg.max_iterations = *max_iterations;
    if (w_init) cfg.w_init = wsnmf::parse_w_init(*w_init);
    if (no_separate) cfg.separate = false;
    return cfg;
  }
};

struct AlignJob {
  fs::path audio, lyrics, out, lrc, report, svg;
};

void write_alignment(const AlignJob& job, const pipeline::AlignmentOutput& result) {
  if (!job.out.empty()) io::write_annotations(job.out, result.prediction);
  else std::cout << io::to_json(result.prediction).dump(2) << "\n";
  if (!job.lrc.empty()) io::write_text(job.lrc, io::to_lrc(result.prediction));
  if (!job.report.empty()) io::write_text(job.report, result.report.dump(2) + "\n");
  if (!job.svg.empty() && result.accumulated.size() > 0) ctw::write_svg(job.svg, result.accumulated, result.path);
}

std::vector<AlignJob> read_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::invalid_input, path.string() + ": " + e.what());
  }
  require(j.is_array(), "manifest must be a JSON array");
  std::vector<AlignJob> jobs;
  for (const auto& e : j) {
    AlignJob job;
    job.audio = e.at("audio").get<std::string>();
    job.lyrics = e.at("lyrics").get<std::string>();
    job.out = e.value("out", std::string{});
    job.lrc = e.value("lrc", std::string{});
    job.report = e.value("report", std::string{});
    jobs.push_back(job);
  }
  return jobs;
}

int run(int argc, char** argv) {
  CLI::App app{"Lyrics-to-audio alignment from vowel patterns"};
  app.require_subcommand(1);

  // align
  auto* align = app.add_subcommand("align", "Align lyrics to a recording");
  Overrides align_opts;
  align_opts.attach(align);
  AlignJob single;
  std::string manifest;
  int jobs = 1;
  align->add_option("--audio", single.audio, "WAV recording");
  align->add_option("--lyrics", single.lyrics, "UTF-8 lyrics, one line per lyric line");
  align->add_option("--out", single.out, "Prediction JSON (stdout when omitted)");
  align->add_option("--lrc", single.lrc, "Enhanced LRC output");
  align->add_option("--report", single.report, "Run report JSON");
  align->add_option("--svg", single.svg, "Warp path SVG");
  align->add_option("--manifest", manifest, "JSON list of {audio, lyrics, out, lrc, report}");
  align->add_option("--jobs", jobs, "Songs processed in parallel")->check(CLI::PositiveNumber);

  // separate
  auto* separate = app.add_subcommand("separate", "Extract the voice track");
  fs::path sep_in, sep_out;
  separate->add_option("--in", sep_in, "Mixture WAV")->required();
  separate->add_option("--out", sep_out, "Voice WAV")->required();

  // vad
  auto* vadcmd = app.add_subcommand("vad", "Voice activity detection");
  fs::path vad_in, vad_out, vad_truth;
  double vad_theta = vad::kDefaultTheta;
  bool vad_no_separate = false;
  vadcmd->add_option("--in", vad_in, "WAV recording")->required();
  vadcmd->add_option("--out", vad_out, "Segments JSON (stdout when omitted)");
  vadcmd->add_option("--theta", vad_theta, "Log-energy threshold");
  vadcmd->add_option("--truth", vad_truth, "Reference annotation JSON for P/R/F scores");
  vadcmd->add_flag("--no-separate", vad_no_separate, "Skip voice separation");

  // eval
  auto* eval = app.add_subcommand("eval", "Score predictions against references");
  std::vector<fs::path> refs, preds;
  fs::path eval_out, eval_curve;
  double tau = 1.0;
  eval->add_option("--ref", refs, "Reference annotation JSON (repeatable)")->required();
  eval->add_option("--pred", preds, "Prediction JSON, paired with --ref")->required();
  eval->add_option("--tau", tau, "Tolerance in seconds");
  eval->add_option("--out", eval_out, "Metrics JSON (stdout when omitted)");
  eval->add_option("--curve", eval_curve, "CSV of accuracy over tau = 0.1..2.0");

  // synth
  auto* synthcmd = app.add_subcommand("synth", "Generate synthetic songs with ground truth");
  fs::path synth_dir;
  synth::SynthSpec spec;
  std::size_t songs = 1;
  std::string synth_lang = "kr";
  bool render_audio = true;
  synthcmd->add_option("--out", synth_dir, "Output directory")->required();
  synthcmd->add_option("--songs", songs, "Number of songs");
  synthcmd->add_option("--units", spec.units, "Units per song");
  synthcmd->add_option("--classes", spec.classes, "Distinct vowel classes per song");
  synthcmd->add_option("--lang", synth_lang, "kr or en");
  synthcmd->add_option("--seed", spec.seed, "Base seed");
  synthcmd->add_option("--noise", spec.noise, "Feature noise level");
  synthcmd->add_flag("!--no-audio", render_audio, "Skip WAV rendering");

  // grid
  auto* grid = app.add_subcommand("grid", "Search K offset and CCA energy on validation songs");
  Overrides grid_opts;
  grid_opts.attach(grid);
  fs::path grid_manifest, grid_out;
  int grid_jobs = 1;
  grid->add_option("--manifest", grid_manifest, "JSON list of {audio, lyrics, truth}")->required();
  grid->add_option("--out", grid_out, "Grid CSV (stdout when omitted)");
  grid->add_option("--jobs", grid_jobs, "Songs prepared in parallel")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (*align) {
    const auto cfg = align_opts.resolve();
    std::vector<AlignJob> work;
    if (!manifest.empty()) {
      work = read_manifest(manifest);
    } else {
      require(!single.audio.empty() && !single.lyrics.empty(), "align needs --audio and --lyrics, or --manifest");
      work.push_back(single);
    }
    run_parallel(work.size(), jobs, [&](std::size_t i) {
      const auto result = pipeline::align(work[i].audio, work[i].lyrics, cfg);
      if (const auto it = result.report.find("skipped_words"); it != result.report.end())
        for (const auto& w : *it) std::fprintf(stderr, "warning: no pronunciation for %s\n", w.get<std::string>().c_str());
      write_alignment(work[i], result);
    });
    return 0;
  }

  if (*separate) {
    separation::SeparationConfig cfg;
    const auto clip = audio::load_audio(sep_in, cfg.sample_rate);
    audio::write_wav(sep_out, separation::separate_voice(clip, cfg));
    return 0;
  }

  if (*vadcmd) {
    separation::SeparationConfig cfg;
    const auto clip = audio::load_audio(vad_in, cfg.sample_rate);
    const auto voice = vad_no_separate ? clip : separation::separate_voice(clip, cfg);
    const auto decision = vad::smooth(vad::detect(voice, vad_theta));
    json segments = json::array();
    for (const auto& s : vad::active_segments(decision)) segments.push_back({{"onset_s", s.onset_s}, {"offset_s", s.offset_s}});
    json out = {{"theta", vad_theta}, {"frames", decision.active.size()}, {"active", decision.active_count()},
                {"segments", segments}};
    if (!vad_truth.empty()) {
      const auto truth = io::read_annotations(vad_truth);
      std::vector<vad::Segment> ref;
      for (const auto& u : truth.units) ref.push_back({u.onset_s, u.offset_s});
      const auto scores = metrics::vad_scores(vad::frames_from_segments(ref, decision.active.size()), decision.active);
      out["scores"] = {{"precision", scores.precision}, {"recall", scores.recall}, {"f1", scores.f1},
                       {"f2", scores.f_beta}};
    }
    if (vad_out.empty()) std::cout << out.dump(2) << "\n";
    else io::write_text(vad_out, out.dump(2) + "\n");
    return 0;
  }

  if (*eval) {
    require(refs.size() == preds.size(), "eval: --ref and --pred counts differ");
    std::vector<metrics::AnnotationSet> ref_sets, pred_sets;
    std::vector<double> per_song;
    json songs_json = json::array();
    for (std::size_t i = 0; i < refs.size(); ++i) {
      ref_sets.push_back(io::read_annotations(refs[i]));
      pred_sets.push_back(io::read_annotations(preds[i]));
      per_song.push_back(metrics::unit_accuracy(ref_sets.back(), pred_sets.back(), tau));
      songs_json.push_back({{"ref", refs[i].string()},
                            {"accuracy", per_song.back()},
                            {"mad", metrics::song_mad(ref_sets.back().onsets(), pred_sets.back().onsets())}});
    }
    json out = {{"tau", tau}, {"accuracy", metrics::dataset_accuracy(per_song)},
                {"mad", metrics::mad(ref_sets, pred_sets)}, {"songs", songs_json}};
    if (per_song.size() >= 2) out["std"] = metrics::accuracy_std(per_song);
    if (!eval_curve.empty()) {
      std::string csv = "tau,accuracy\n";
      for (const double t : metrics::default_tau_grid()) {
        std::vector<double> acc;
        for (std::size_t i = 0; i < ref_sets.size(); ++i) acc.push_back(metrics::unit_accuracy(ref_sets[i], pred_sets[i], t));
        csv += std::to_string(t) + "," + std::to_string(metrics::dataset_accuracy(acc)) + "\n";
      }
      io::write_text(eval_curve, csv);
    }
    if (eval_out.empty()) std::cout << out.dump(2) << "\n";
    else io::write_text(eval_out, out.dump(2) + "\n");
    return 0;
  }

  if (*synthcmd) {
    spec.language = text::parse_language(synth_lang);
    fs::create_directories(synth_dir);
    json listing = json::array();
    std::string dictionary;
    for (std::size_t s = 0; s < songs; ++s) {
      auto song_spec = spec;
      song_spec.seed = spec.seed + s;
      const auto song = synth::generate(song_spec);
      const std::string stem = "song" + std::to_string(s);
      io::write_text(synth_dir / (stem + ".txt"), song.lyrics);
      io::write_annotations(synth_dir / (stem + ".truth.json"), song.truth);
      io::write_matrix_csv(synth_dir / (stem + ".features.csv"), song.features);
      dictionary += song.dictionary;
      json entry = {{"lyrics", (synth_dir / (stem + ".txt")).string()},
                    {"truth", (synth_dir / (stem + ".truth.json")).string()}};
      if (render_audio) {
        synth::RenderSpec rs;
        rs.seed = song_spec.seed;
        audio::write_wav(synth_dir / (stem + ".wav"), synth::render(song, rs));
        entry["audio"] = (synth_dir / (stem + ".wav")).string();
        entry["theta"] = synth::calibrate_theta(synth::render_voice(song, rs), song);
      }
      listing.push_back(entry);
    }
    if (spec.language == text::Language::en) io::write_text(synth_dir / "dictionary.txt", dictionary);
    io::write_text(synth_dir / "manifest.json", listing.dump(2) + "\n");
    return 0;
  }

  if (*grid) {
    const auto cfg = grid_opts.resolve();
    const auto entries = [&] {
      json j = json::parse(io::read_text(grid_manifest));
      require(j.is_array() && !j.empty(), "grid manifest must be a non-empty JSON array");
      return j;
    }();
    std::optional<text::PronouncingDictionary> dict;
    if (cfg.language == text::Language::en) dict = text::load_cmudict(cfg.dictionary_path);
    std::vector<pipeline::ValidationSong> songs_v(entries.size());
    run_parallel(entries.size(), grid_jobs, [&](std::size_t i) {
      const auto& e = entries[i];
      const auto clip = audio::load_audio(e.at("audio").get<std::string>(), cfg.separation.sample_rate);
      const auto lyrics = io::read_text(e.at("lyrics").get<std::string>());
      songs_v[i].prepared = pipeline::prepare_audio(clip, lyrics, cfg, dict ? &*dict : nullptr);
      songs_v[i].truth = io::read_annotations(e.at("truth").get<std::string>());
    });
    const auto result = pipeline::grid_search(songs_v, cfg);
    if (grid_out.empty()) std::cout << pipeline::grid_csv(result);
    else io::write_text(grid_out, pipeline::grid_csv(result));
    const auto& best = result.rows[result.best];
    std::fprintf(stderr, "best: k_offset=%d energy=%.2f accuracy=%.2f\n", best.k_offset, best.energy, best.accuracy);
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
