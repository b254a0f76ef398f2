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

#include "csong/channel.hpp"

#include <cmath>

#include "csong/random.hpp"

namespace csong {

void ChannelConfig::validate() const {
  if (!(noise_bound >= 0.0 && noise_bound < 1.0))
    throw Error(ErrorKind::kOutOfRange, "channel: noise bound must lie in [0, 1)");
  if (captured_noise && captured_noise->empty())
    throw Error(ErrorKind::kEmptyInput, "channel: captured noise is empty");
}

AudioBuffer sample_noise(Eigen::Index length, const ChannelConfig& cfg, std::uint64_t draw_index,
                         int sample_rate) {
  cfg.validate();
  if (length <= 0) throw Error(ErrorKind::kInvalidArgument, "sample_noise: length must be positive");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(length);
  if (cfg.is_noiseless()) return AudioBuffer(std::move(out), sample_rate);

  if (cfg.captured_noise) {
    const Eigen::VectorXd& src = cfg.captured_noise->samples;
    for (Eigen::Index i = 0; i < length; ++i) out[i] = src[i % src.size()];
    const double peak = out.cwiseAbs().maxCoeff();
    if (cfg.noise_bound > 0.0 && peak > cfg.noise_bound) out *= cfg.noise_bound / peak;
    return AudioBuffer(std::move(out), sample_rate);
  }

  Rng rng(derive_seed(cfg.seed, draw_index));
  for (Eigen::Index i = 0; i < length; ++i) {
    double v;
    do {
      v = rng.uniform_open(-cfg.noise_bound, cfg.noise_bound);
    } while (std::abs(v) >= cfg.noise_bound);
    out[i] = v;
  }
  return AudioBuffer(std::move(out), sample_rate);
}

AudioBuffer apply_channel(const AudioBuffer& audio, const ChannelConfig& cfg,
                          std::uint64_t draw_index) {
  if (audio.empty()) return audio;
  if (cfg.is_noiseless()) return AudioBuffer(clip_unit(audio.samples), audio.sample_rate);
  return mix(audio, sample_noise(audio.size(), cfg, draw_index, audio.sample_rate));
}

double noise_bound_for_snr(double signal_power, double snr_db) {
  return std::sqrt(3.0 * signal_power / std::pow(10.0, snr_db / 10.0));
}

}  // namespace csong
