#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lyricalign::audio {

/// Mono clip with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// One-sided STFT. Frame t covers samples [t * hop, t * hop + window).
struct Spectrogram {
  Eigen::MatrixXcd frames;  // T x (window / 2 + 1)
  int window_size = 0;
  int hop_size = 0;
  int sample_rate = 0;

  Eigen::Index frame_count() const { return frames.rows(); }
  Eigen::Index bin_count() const { return frames.cols(); }
};

enum class WavEncoding { pcm16, float32 };

/// Decodes a RIFF/WAVE byte stream (PCM 16/24/32-bit integer or 32-bit float),
/// downmixing to mono by channel mean. The native sample rate is kept.
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

/// Reads a WAV file, downmixes, resamples to `target_rate` and peak-normalizes
/// only when some sample exceeds full scale.
AudioClip load_audio(const std::filesystem::path& path, int target_rate);

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding = WavEncoding::float32);
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::float32);

/// Band-limited windowed-sinc (Kaiser) resampling. Identity when rates match.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Periodic Hann window, which overlap-adds cleanly at hop = size / 4.
std::vector<double> hann_window(int size);

Spectrogram stft(const AudioClip& clip, int window_size, int hop_size);

/// Weighted overlap-add inverse with Hann synthesis window, normalized by the
/// summed squared window. Output length is (T - 1) * hop + window.
AudioClip istft(const Spectrogram& spec);

Eigen::MatrixXd magnitude(const Spectrogram& spec);

/// Real-input FFT of a fixed size backed by FFTW. Not copyable; one instance
/// per thread.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }
  /// `in` has `size()` samples, `out` has size() / 2 + 1 bins.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// Unnormalized inverse: forward followed by inverse scales by size().
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  int size_;
  double* real_ = nullptr;
  void* complex_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace lyricalign::audio
