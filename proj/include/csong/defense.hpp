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
#include <string>
#include <vector>

#include "csong/acoustic.hpp"
#include "csong/lexicon.hpp"

namespace csong {

/// Transcripts before (text1) and after (text2) the transformation. The input
/// is flagged as adversarial when they differ.
struct DefenseVerdict {
  std::string defense;
  double parameter = 0.0;
  std::vector<std::string> text1;
  std::vector<std::string> text2;
  bool detected = false;
};

/// Uniform noise scaled so that snr_db(audio, noise) equals the target
/// exactly. An infinite target gives silence.
AudioBuffer turbulence_noise(const AudioBuffer& audio, double snr_db, std::uint64_t seed);

/// Downsample by `ratio`, then resample back to the original rate. The result
/// is cut or zero-padded to the input length.
AudioBuffer squeeze(const AudioBuffer& audio, double ratio);

DefenseVerdict detect_turbulence(const AudioBuffer& audio, const AcousticModel& model,
                                 const PhonemeTable& table, const Lexicon& lexicon,
                                 double snr_db, std::uint64_t seed);

DefenseVerdict detect_squeezing(const AudioBuffer& audio, const AcousticModel& model,
                                const PhonemeTable& table, const Lexicon& lexicon,
                                double ratio);

/// `input,defense,parameter,text1,text2,detected`
std::string verdict_csv_header();
std::string format_verdict_csv(const std::string& input, const DefenseVerdict& verdict);

}  // namespace csong
