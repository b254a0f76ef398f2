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

#include <cstdint>
#include <optional>

#include "csong/audio.hpp"

namespace csong {

/// Simulated playback channel: additive noise bounded by noise_bound, either
/// uniform random or a captured recording.
struct ChannelConfig {
  double noise_bound = 0.0;
  std::optional<AudioBuffer> captured_noise;
  std::uint64_t seed = 0;

  bool is_noiseless() const { return noise_bound == 0.0 && !captured_noise; }
  void validate() const;
};

/// Noise stream for (seed, draw_index): i.i.d. uniform on (-N, N), or the
/// captured noise looped to length and scaled so its peak is at most N. With
/// N = 0 the captured noise is used at its recorded level.
AudioBuffer sample_noise(Eigen::Index length, const ChannelConfig& cfg, std::uint64_t draw_index,
                         int sample_rate = kCanonicalRate);

/// mix(audio, sample_noise(...)).
AudioBuffer apply_channel(const AudioBuffer& audio, const ChannelConfig& cfg,
                          std::uint64_t draw_index);

/// Noise bound that gives a uniform-noise channel the requested SNR against a
/// signal of the given power: P_noise = N^2 / 3.
double noise_bound_for_snr(double signal_power, double snr_db);

}  // namespace csong
