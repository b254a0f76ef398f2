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

#include "csong/defense.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "csong/decoder.hpp"
#include "csong/random.hpp"

namespace csong {

AudioBuffer turbulence_noise(const AudioBuffer& audio, double snr_db, std::uint64_t seed) {
  if (audio.empty()) throw Error(ErrorKind::kEmptyInput, "turbulence: empty audio");
  if (std::isnan(snr_db)) throw Error(ErrorKind::kInvalidArgument, "turbulence: SNR is NaN");
  const double power = signal_power(audio);
  if (power == 0.0) throw Error(ErrorKind::kZeroPower, "turbulence: input has zero power");
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(audio.size());
  if (std::isinf(snr_db) && snr_db > 0) return AudioBuffer(std::move(noise), audio.sample_rate);

  Rng rng(derive_seed(seed, 0x54555242));
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = rng.uniform_open(-1.0, 1.0);
  const double target = power / std::pow(10.0, snr_db / 10.0);
  noise *= std::sqrt(target / mean_square(noise));
  return AudioBuffer(std::move(noise), audio.sample_rate);
}

AudioBuffer squeeze(const AudioBuffer& audio, double ratio) {
  if (audio.empty()) throw Error(ErrorKind::kEmptyInput, "squeeze: empty audio");
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw Error(ErrorKind::kOutOfRange, "squeeze: ratio must lie in (0, 1]");
  if (ratio == 1.0) return audio;
  AudioBuffer back = resample(downsample(audio, ratio), audio.sample_rate);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(audio.size());
  const Eigen::Index n = std::min(out.size(), back.samples.size());
  out.head(n) = back.samples.head(n);
  return AudioBuffer(std::move(out), audio.sample_rate);
}

namespace {

DefenseVerdict compare(const std::string& name, double parameter, const AudioBuffer& audio,
                       const AudioBuffer& transformed, const AcousticModel& model,
                       const PhonemeTable& table, const Lexicon& lexicon) {
  DefenseVerdict v;
  v.defense = name;
  v.parameter = parameter;
  v.text1 = decode_text(audio, model, table, lexicon).words;
  v.text2 = decode_text(transformed, model, table, lexicon).words;
  v.detected = v.text1 != v.text2;
  return v;
}

}  // namespace

DefenseVerdict detect_turbulence(const AudioBuffer& audio, const AcousticModel& model,
                                 const PhonemeTable& table, const Lexicon& lexicon,
                                 double snr_db, std::uint64_t seed) {
  const AudioBuffer noisy = mix(audio, turbulence_noise(audio, snr_db, seed));
  return compare("turbulence", snr_db, audio, noisy, model, table, lexicon);
}

DefenseVerdict detect_squeezing(const AudioBuffer& audio, const AcousticModel& model,
                                const PhonemeTable& table, const Lexicon& lexicon,
                                double ratio) {
  return compare("squeezing", ratio, audio, squeeze(audio, ratio), model, table, lexicon);
}

std::string verdict_csv_header() { return "input,defense,parameter,text1,text2,detected"; }

std::string format_verdict_csv(const std::string& input, const DefenseVerdict& v) {
  char param[40];
  std::snprintf(param, sizeof param, "%.6g", v.parameter);
  std::ostringstream out;
  out << input << ',' << v.defense << ',' << param << ',' << join_words(v.text1) << ','
      << join_words(v.text2) << ',' << (v.detected ? 1 : 0);
  return out.str();
}

}  // namespace csong
