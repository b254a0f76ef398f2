// Copyright 2026 The csong Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "csong/audio.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numbers>
#include <vector>

namespace csong {
namespace {

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return std::uint32_t(b[at]) | (std::uint32_t(b[at + 1]) << 8) |
         (std::uint32_t(b[at + 2]) << 16) | (std::uint32_t(b[at + 3]) << 24);
}

std::uint16_t read_u16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return std::uint16_t(b[at] | (b[at + 1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t((v >> (8 * i)) & 0xff));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v & 0xff));
  out.push_back(std::uint8_t(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(const std::vector<std::uint8_t>& b, std::size_t at, const char* tag) {
  return std::equal(tag, tag + 4, b.begin() + static_cast<std::ptrdiff_t>(at));
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFileNotFound, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE"))
    throw Error(ErrorKind::kMalformedFile, name + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size())
      throw Error(ErrorKind::kMalformedFile, name + ": chunk runs past end of file");
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16) throw Error(ErrorKind::kMalformedFile, name + ": short fmt chunk");
      const std::uint16_t format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format != 1)
        throw Error(ErrorKind::kUnsupportedEncoding,
                    name + ": format tag " + std::to_string(format) + " is not PCM");
      if (channels != 1)
        throw Error(ErrorKind::kUnsupportedChannels,
                    name + ": " + std::to_string(channels) + " channels, expected mono");
      if (bits != 16)
        throw Error(ErrorKind::kUnsupportedEncoding,
                    name + ": " + std::to_string(bits) + "-bit samples, expected 16");
      if (rate == 0) throw Error(ErrorKind::kMalformedFile, name + ": zero sample rate");
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw Error(ErrorKind::kMalformedFile, name + ": data before fmt");
      const std::size_t count = size / 2;
      Eigen::VectorXd samples(static_cast<Eigen::Index>(count));
      for (std::size_t i = 0; i < count; ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16(bytes, body + 2 * i));
        samples[static_cast<Eigen::Index>(i)] = raw / 32768.0;
      }
      return AudioBuffer(std::move(samples), static_cast<int>(rate));
    }
    pos = body + size + (size & 1);
  }
  throw Error(ErrorKind::kMalformedFile, name + ": no data chunk");
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path) {
  if (buffer.empty()) throw Error(ErrorKind::kEmptyInput, "refusing to write an empty buffer");
  const auto count = static_cast<std::uint32_t>(buffer.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * count);
  put_tag(out, "RIFF");
  put_u32(out, 36 + 2 * count);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, 2 * count);
  for (Eigen::Index i = 0; i < buffer.size(); ++i) {
    const double s = std::clamp(buffer.samples[i], -1.0, 1.0);
    const long q = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::kUnwritablePath, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorKind::kUnwritablePath, "write failed for " + path.string());
}

AudioBuffer load_audio(const std::filesystem::path& path) {
  AudioBuffer raw = read_wav(path);
  if (raw.sample_rate == kCanonicalRate) return raw;
  return resample(raw, kCanonicalRate);
}

double signal_power(const AudioBuffer& buffer) {
  if (buffer.empty()) throw Error(ErrorKind::kEmptyInput, "signal_power of empty buffer");
  return mean_square(buffer.samples);
}

double snr_db(const AudioBuffer& signal, const AudioBuffer& noise) {
  if (signal.size() != noise.size())
    throw Error(ErrorKind::kLengthMismatch, "snr_db: signal and noise lengths differ");
  const double pn = signal_power(noise);
  if (pn <= 0.0) throw Error(ErrorKind::kZeroPower, "snr_db: noise has zero power");
  return 10.0 * std::log10(signal_power(signal) / pn);
}

AudioBuffer mix(const AudioBuffer& a, const AudioBuffer& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kLengthMismatch, "mix: lengths differ");
  if (a.sample_rate != b.sample_rate) throw Error(ErrorKind::kRateMismatch, "mix: rates differ");
  return AudioBuffer(clip_unit(a.samples + b.samples), a.sample_rate);
}

AudioBuffer negate(const AudioBuffer& a) { return AudioBuffer(-a.samples, a.sample_rate); }

Eigen::VectorXd lowpass(const Eigen::VectorXd& x, double cutoff_hz, int sample_rate,
                        int half_taps) {
  const double fc = cutoff_hz / sample_rate;
  const int taps = 2 * half_taps + 1;
  Eigen::VectorXd h(taps);
  for (int k = -half_taps; k <= half_taps; ++k) {
    const double sinc = k == 0 ? 2.0 * fc
                               : std::sin(2.0 * std::numbers::pi * fc * k) / (std::numbers::pi * k);
    const double phase = 2.0 * std::numbers::pi * (k + half_taps) / (taps - 1);
    const double blackman = 0.42 - 0.5 * std::cos(phase) + 0.08 * std::cos(2.0 * phase);
    h[k + half_taps] = sinc * blackman;
  }
  h /= h.sum();

  const Eigen::Index n = x.size();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half_taps);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half_taps);
    double acc = 0.0;
    for (Eigen::Index j = lo; j <= hi; ++j) acc += h[j - i + half_taps] * x[j];
    y[i] = acc;
  }
  return y;
}

namespace {

Eigen::VectorXd linear_interpolate(const Eigen::VectorXd& x, int from_rate, int to_rate) {
  const Eigen::Index n = x.size();
  const auto out_len = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(double(n) * to_rate / from_rate)));
  const double step = double(from_rate) / to_rate;
  Eigen::VectorXd y(out_len);
  for (Eigen::Index j = 0; j < out_len; ++j) {
    const double t = j * step;
    const auto i0 = static_cast<Eigen::Index>(std::floor(t));
    if (i0 + 1 >= n) {
      y[j] = x[n - 1];
    } else {
      const double frac = t - double(i0);
      y[j] = (1.0 - frac) * x[i0] + frac * x[i0 + 1];
    }
  }
  return y;
}

// Blackman-windowed sinc interpolation, pass band up to 0.45 of the source rate.
Eigen::VectorXd sinc_interpolate(const Eigen::VectorXd& x, int from_rate, int to_rate,
                                 int half_taps = 48) {
  const Eigen::Index n = x.size();
  const auto out_len = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(double(n) * to_rate / from_rate)));
  const double step = double(from_rate) / to_rate;
  const double fc = 0.45;
  Eigen::VectorXd y(out_len);
  for (Eigen::Index j = 0; j < out_len; ++j) {
    const double t = j * step;
    const auto i0 = static_cast<Eigen::Index>(std::floor(t));
    const Eigen::Index lo = std::max<Eigen::Index>(0, i0 - half_taps + 1);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i0 + half_taps);
    double acc = 0.0;
    for (Eigen::Index k = lo; k <= hi; ++k) {
      const double u = t - double(k);
      const double sinc = u == 0.0 ? 2.0 * fc
                                   : std::sin(2.0 * std::numbers::pi * fc * u) / (std::numbers::pi * u);
      const double a = std::numbers::pi * u / half_taps;
      acc += x[k] * sinc * (0.42 + 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a));
    }
    y[j] = acc;
  }
  return y;
}

}  // namespace

AudioBuffer downsample(const AudioBuffer& buffer, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw Error(ErrorKind::kOutOfRange, "downsample: ratio must lie in (0, 1]");
  if (buffer.empty()) throw Error(ErrorKind::kEmptyInput, "downsample: empty buffer");
  const int new_rate = static_cast<int>(std::lround(ratio * buffer.sample_rate));
  if (new_rate == buffer.sample_rate) return buffer;
  if (new_rate <= 0) throw Error(ErrorKind::kOutOfRange, "downsample: ratio too small");
  const Eigen::VectorXd filtered = lowpass(buffer.samples, 0.45 * new_rate, buffer.sample_rate);
  return AudioBuffer(linear_interpolate(filtered, buffer.sample_rate, new_rate), new_rate);
}

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
  if (target_rate <= 0) throw Error(ErrorKind::kOutOfRange, "resample: non-positive rate");
  if (target_rate == buffer.sample_rate) return buffer;
  if (target_rate < buffer.sample_rate)
    return downsample(buffer, double(target_rate) / buffer.sample_rate);
  if (buffer.empty()) throw Error(ErrorKind::kEmptyInput, "resample: empty buffer");
  return AudioBuffer(sinc_interpolate(buffer.samples, buffer.sample_rate, target_rate),
                     target_rate);
}

}  // namespace csong
