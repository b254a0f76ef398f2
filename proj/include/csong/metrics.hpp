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
#include <string>
#include <vector>

#include "csong/acoustic.hpp"
#include "csong/channel.hpp"
#include "csong/crafter.hpp"
#include "csong/lexicon.hpp"

namespace csong {

enum class CorrelationMode {
  /// Cov(X, Y) / sqrt(Var X Var Y) on the raw MFCC values.
  kAsWritten,
  /// The same formula on average ranks.
  kSpearman,
};

/// Pearson coefficient of two equally long vectors. Throws kZeroPower when
/// either is constant.
double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Average ranks (1-based), ties sharing the mean rank.
Eigen::VectorXd ranks(const Eigen::VectorXd& x);

/// Correlation of the flattened MFCC matrices of a and b, both trimmed to the
/// shorter length.
double correlation(const AudioBuffer& a, const AudioBuffer& b, const FeatureConfig& cfg,
                   CorrelationMode mode = CorrelationMode::kAsWritten);

/// One CSV row. Rates are percentages; absent cells are left empty.
struct SweepRow {
  double param = 0.0;
  std::optional<double> corr_song;
  std::optional<double> corr_cmd;
  std::optional<double> success_pct;
  std::optional<double> detect_clean_pct;
  std::optional<double> detect_wta_pct;
  std::optional<double> detect_waa_pct;
  int trials = 0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kSweepCsvHeader =
    "param,corr_song,corr_cmd,success_pct,detect_clean_pct,detect_wta_pct,detect_waa_pct,trials,seed";

std::string format_sweep_csv(const std::vector<SweepRow>& rows);

/// count values from lo to hi with a constant ratio.
std::vector<double> log_spaced(double lo, double hi, int count);

struct NoiseSweepConfig {
  std::vector<double> noise_bounds = log_spaced(0.01, 0.16, 5);
  int trials = 20;
  std::uint64_t seed = 1;
  CraftConfig craft;
  /// Fixed playback channel used to score every grid point.
  ChannelConfig eval_channel;
  CorrelationMode mode = CorrelationMode::kAsWritten;
};

/// For each N: robust crafting with that crafting noise, then correlation to
/// the song and to the command, and success over `trials` evaluation draws.
std::vector<SweepRow> run_noise_sweep(const AudioBuffer& song,
                                      const std::vector<std::string>& command,
                                      const AcousticModel& model, const PhonemeTable& table,
                                      const Lexicon& lexicon, const NoiseSweepConfig& cfg);

enum class SampleLabel { kClean, kWta, kWaa };

SampleLabel parse_sample_label(const std::string& text);
std::string to_string(SampleLabel label);

struct LabeledSample {
  SampleLabel label = SampleLabel::kClean;
  AudioBuffer audio;
};

enum class DefenseKind { kTurbulence, kSqueezing };

/// Detection rate per label for every grid value. Turbulence runs `trials`
/// seeded noise draws per sample; squeezing is deterministic and runs once.
std::vector<SweepRow> run_defense_sweep(const std::vector<LabeledSample>& samples,
                                        const AcousticModel& model, const PhonemeTable& table,
                                        const Lexicon& lexicon, DefenseKind defense,
                                        const std::vector<double>& grid, int trials,
                                        std::uint64_t seed);

}  // namespace csong
