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

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <filesystem>

#include "csong/error.hpp"

namespace csong {

/// Internal processing rate. Everything entering the pipeline is resampled to it.
inline constexpr int kCanonicalRate = 8000;

/// Mono waveform with amplitudes nominally in [-1, 1].
struct AudioBuffer {
  Eigen::VectorXd samples;
  int sample_rate = kCanonicalRate;

  AudioBuffer() = default;
  AudioBuffer(Eigen::VectorXd s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  Eigen::Index size() const { return samples.size(); }
  bool empty() const { return samples.size() == 0; }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Reads a 16-bit PCM mono RIFF/WAVE file. Samples are divided by 32768.
AudioBuffer read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono. Samples are clamped to [-1, 1] and rounded.
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path);

/// read_wav followed by resampling to kCanonicalRate.
AudioBuffer load_audio(const std::filesystem::path& path);

/// Mean-square power of any real dense expression.
template <typename Derived>
typename Derived::Scalar mean_square(const Eigen::DenseBase<Derived>& x) {
  return x.derived().squaredNorm() / static_cast<typename Derived::Scalar>(x.size());
}

double signal_power(const AudioBuffer& buffer);

/// 10 log10(P_signal / P_noise).
double snr_db(const AudioBuffer& signal, const AudioBuffer& noise);

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar snr_db(const Eigen::DenseBase<DerivedA>& signal,
                                 const Eigen::DenseBase<DerivedB>& noise) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar ps = mean_square(signal);
  const Scalar pn = mean_square(noise);
  return Scalar(10) * std::log10(ps / pn);
}

/// Hard-clips to [-1, 1].
template <typename Derived>
auto clip_unit(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.derived().cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
}

/// Element-wise sum of equal-length, equal-rate buffers, hard-clipped.
AudioBuffer mix(const AudioBuffer& a, const AudioBuffer& b);

AudioBuffer negate(const AudioBuffer& a);

/// Anti-aliased decimation to round(ratio * rate). ratio in (0, 1].
AudioBuffer downsample(const AudioBuffer& buffer, double ratio);

/// General rate conversion: downward goes through downsample(); upward is
/// windowed-sinc interpolation.
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

/// Windowed-sinc (Blackman) low-pass applied at the buffer's own rate.
Eigen::VectorXd lowpass(const Eigen::VectorXd& x, double cutoff_hz, int sample_rate,
                        int half_taps = 48);

}  // namespace csong
