#include "lyricalign/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "lyricalign/error.hpp"

namespace lyricalign::audio {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

double decode_sample(const std::uint8_t* p, int format, int bits) {
  if (format == 3) {
    if (bits == 32) {
      float f;
      std::memcpy(&f, p, 4);
      return static_cast<double>(f);
    }
    double d;
    std::memcpy(&d, p, 8);
    return d;
  }
  switch (bits) {
    case 16: {
      const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default: {
      std::int32_t v;
      std::memcpy(&v, p, 4);
      return v / 2147483648.0;
    }
  }
}

double kaiser(double x, double beta) {
  if (std::abs(x) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - x * x)) / std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

RealFft::RealFft(int size) : size_(size) {
  require(size > 0, "RealFft: size must be positive");
  std::lock_guard lock(fftw_planner_mutex());
  real_ = fftw_alloc_real(static_cast<std::size_t>(size));
  complex_ = fftw_alloc_complex(static_cast<std::size_t>(size / 2 + 1));
  auto* c = static_cast<fftw_complex*>(complex_);
  forward_plan_ = fftw_plan_dft_r2c_1d(size, real_, c, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(size, c, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(complex_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.begin() + size_, real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const auto* c = static_cast<const fftw_complex*>(complex_);
  for (int k = 0; k < size_ / 2 + 1; ++k) out[k] = {c[k][0], c[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  auto* c = static_cast<fftw_complex*>(complex_);
  for (int k = 0; k < size_ / 2 + 1; ++k) {
    c[k][0] = in[k].real();
    c[k][1] = in[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::copy(real_, real_ + size_, out.begin());
}

AudioClip decode_wav(std::span<const std::uint8_t> b) {
  require(b.size() >= 12 && tag_is(b, 0, "RIFF") && tag_is(b, 8, "WAVE"), "not a RIFF/WAVE stream");
  int format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  std::size_t data_at = 0, data_size = 0;
  bool have_fmt = false, have_data = false;

  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::size_t size = read_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (tag_is(b, at, "fmt ")) {
      require(size >= 16 && body + 16 <= b.size(), "truncated fmt chunk");
      format = read_u16(b, body);
      channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      block_align = read_u16(b, body + 12);
      bits = read_u16(b, body + 14);
      if (format == 0xFFFE) {
        require(size >= 40 && body + 26 <= b.size(), "truncated extensible fmt chunk");
        format = read_u16(b, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(b, at, "data")) {
      data_at = body;
      data_size = std::min(size, b.size() - body);
      have_data = true;
      break;
    }
    at = body + size + (size & 1u);
  }
  require(have_fmt, "WAV has no fmt chunk");
  require(have_data, "WAV has no data chunk");
  const bool int_ok = format == 1 && (bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == 3 && (bits == 32 || bits == 64);
  require(int_ok || float_ok, "unsupported WAV encoding (format " + std::to_string(format) +
                                  ", " + std::to_string(bits) + " bits)");
  require(channels >= 1 && rate > 0, "invalid WAV channel count or sample rate");
  const int bytes_per_sample = bits / 8;
  if (block_align < channels * bytes_per_sample) block_align = channels * bytes_per_sample;
  const std::size_t frames = data_size / static_cast<std::size_t>(block_align);
  require(frames > 0, "WAV stream has zero samples");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::uint8_t* frame = b.data() + data_at + f * static_cast<std::size_t>(block_align);
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) acc += decode_sample(frame + c * bytes_per_sample, format, bits);
    clip.samples[f] = acc / channels;
  }
  return clip;
}

AudioClip load_audio(const std::filesystem::path& path, int target_rate) {
  require(target_rate > 0, "target sample rate must be positive");
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open audio file: " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  AudioClip clip = resample(decode_wav(bytes), target_rate);
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (peak > 1.0) {
    for (double& s : clip.samples) s /= peak;
  }
  return clip;
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding) {
  const int bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const int bytes_per_sample = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(clip.samples.size() * bytes_per_sample);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::pcm16 ? 1 : 3);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate * bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(bits));
  put_tag(out, "data");
  put_u32(out, data_size);
  for (double s : clip.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    if (encoding == WavEncoding::pcm16) {
      const auto v = static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0, -32768.0, 32767.0)));
      put_u16(out, static_cast<std::uint16_t>(v));
    } else {
      const auto f = static_cast<float>(s);
      std::uint32_t bits32;
      std::memcpy(&bits32, &f, 4);
      put_u32(out, bits32);
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavEncoding encoding) {
  const auto bytes = encode_wav(clip, encoding);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write WAV file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  require(clip.sample_rate > 0 && target_rate > 0, "resample: invalid sample rate");
  if (clip.sample_rate == target_rate) return clip;

  const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
  const double cutoff = 0.5 * std::min(1.0, ratio) * 0.94;  // cycles per input sample
  constexpr double zero_crossings = 24.0;
  constexpr double beta = 8.0;
  const double half = zero_crossings / (2.0 * cutoff);
  const auto in_len = static_cast<std::int64_t>(clip.samples.size());
  const auto out_len = static_cast<std::int64_t>(std::llround(in_len * ratio));

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.assign(static_cast<std::size_t>(out_len), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < out_len; ++n) {
    const double x = n / ratio;
    const auto k_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(x - half)));
    const auto k_hi = std::min<std::int64_t>(in_len - 1, static_cast<std::int64_t>(std::floor(x + half)));
    double acc = 0.0;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
      const double d = x - static_cast<double>(k);
      acc += clip.samples[static_cast<std::size_t>(k)] * 2.0 * cutoff * sinc(2.0 * cutoff * d) * kaiser(d / half, beta);
    }
    out.samples[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

std::vector<double> hann_window(int size) {
  std::vector<double> w(static_cast<std::size_t>(size));
  for (int n = 0; n < size; ++n) w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / size);
  return w;
}

Spectrogram stft(const AudioClip& clip, int window_size, int hop_size) {
  require(hop_size > 0 && window_size >= hop_size, "stft: need window_size >= hop_size > 0");
  const auto len = static_cast<std::int64_t>(clip.samples.size());
  require(len >= window_size, "stft: clip shorter than one window");
  const auto frames = (len - window_size) / hop_size + 1;
  const int bins = window_size / 2 + 1;
  const auto window = hann_window(window_size);

  Spectrogram spec;
  spec.window_size = window_size;
  spec.hop_size = hop_size;
  spec.sample_rate = clip.sample_rate;
  spec.frames.resize(frames, bins);

  RealFft fft(window_size);
  std::vector<double> buffer(static_cast<std::size_t>(window_size));
  std::vector<std::complex<double>> bins_out(static_cast<std::size_t>(bins));
  for (std::int64_t t = 0; t < frames; ++t) {
    const double* src = clip.samples.data() + t * hop_size;
    for (int n = 0; n < window_size; ++n) buffer[n] = src[n] * window[n];
    fft.forward(buffer, bins_out);
    for (int k = 0; k < bins; ++k) spec.frames(t, k) = bins_out[k];
  }
  return spec;
}

AudioClip istft(const Spectrogram& spec) {
  require(spec.window_size > 0 && spec.hop_size > 0, "istft: invalid window metadata");
  require(spec.frames.cols() == spec.window_size / 2 + 1, "istft: frame width does not match window_size");
  const Eigen::Index frames = spec.frames.rows();
  const int win = spec.window_size;
  const int hop = spec.hop_size;
  const auto window = hann_window(win);

  AudioClip out;
  out.sample_rate = spec.sample_rate;
  if (frames == 0) return out;
  const auto len = static_cast<std::size_t>((frames - 1) * hop + win);
  out.samples.assign(len, 0.0);
  std::vector<double> norm(len, 0.0);

  RealFft fft(win);
  std::vector<std::complex<double>> bins(static_cast<std::size_t>(win / 2 + 1));
  std::vector<double> frame(static_cast<std::size_t>(win));
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int k = 0; k < win / 2 + 1; ++k) bins[k] = spec.frames(t, k);
    fft.inverse(bins, frame);
    const std::size_t offset = static_cast<std::size_t>(t) * hop;
    for (int n = 0; n < win; ++n) {
      out.samples[offset + n] += window[n] * frame[n] / win;
      norm[offset + n] += window[n] * window[n];
    }
  }
  // Edges covered only by window tails get a floored normalizer so masked
  // frames cannot blow up there; interior samples are divided exactly.
  const double floor = 1e-3 * *std::max_element(norm.begin(), norm.end());
  for (std::size_t i = 0; i < len; ++i) out.samples[i] /= std::max(norm[i], floor);
  return out;
}

Eigen::MatrixXd magnitude(const Spectrogram& spec) { return spec.frames.cwiseAbs(); }

}  // namespace lyricalign::audio
