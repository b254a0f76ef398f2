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
#include "csong/decoder.hpp"
#include "csong/lexicon.hpp"

namespace csong {

enum class Surrogate {
  /// Per-frame cross-entropy toward the target pdf-id.
  kCrossEntropy,
  /// |expected pdf index - target pdf-id| per frame, the expectation taken
  /// under the softmax. Treats ids as numbers, like the plain L1 objective.
  kLiteralL1,
};

enum class StepRule {
  /// delta -= lr * gradient.
  kGradient,
  /// delta -= lr * sign(gradient).
  kSign,
  /// delta -= lr * gradient / max|gradient|.
  kNormalized,
};

struct CraftConfig {
  /// Per-sample perturbation bound l: |delta(t)| <= l.
  double perturbation_bound = 0.15;
  /// Crafting noise bound N for the robust (over-the-air) variant.
  double noise_bound = 0.0;
  double learning_rate = 0.01;
  int max_iters = 5000;
  int noise_draws_per_iter = 4;
  int eval_noise_draws = 20;
  /// Robust crafting stops only after this many consecutive iterations in
  /// which every noisy draw decodes to the command.
  int confirm_iters = 5;
  int min_repeat = 4;
  Surrogate surrogate = Surrogate::kCrossEntropy;
  StepRule step_rule = StepRule::kNormalized;
  std::uint64_t seed = 1;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  int mismatch = 0;
  int best_mismatch = 0;
  double snr_db = 0.0;
};

/// Frame-reduced command target, trimmed of leading and trailing silence.
struct CraftTarget {
  TargetSequence target;
  /// Frames of the unreduced command that precede its first speech frame.
  int command_lead_frames = 0;
  AudioBuffer command_audio;
};

struct CraftResult {
  AudioBuffer adversarial;
  AudioBuffer perturbation;
  int iterations = 0;
  std::vector<IterationRecord> history;
  /// snr_db(song, perturbation); +infinity when the perturbation is zero.
  double snr_db = 0.0;
  bool clean_success = false;
  std::optional<double> noisy_success_fraction;
  int offset = 0;
  int final_mismatch = 0;
  std::vector<std::string> decoded_words;
  TargetSequence target;
};

/// Frames i with m[offset + i] != target[i].
int pdf_mismatch(const std::vector<int>& m, const std::vector<int>& target, int offset);

struct SurrogateValue {
  double loss = 0.0;
  Eigen::MatrixXd logit_grad;  // same shape as the posterior matrix
};

/// Loss over rows [offset, offset + q) of the posterior matrix and its
/// gradient with respect to the logits that produced it.
SurrogateValue surrogate_loss(const PosteriorMatrix& posteriors, const std::vector<int>& target,
                              int offset, Surrogate mode = Surrogate::kCrossEntropy);

/// Synthesises the command, extracts b with the model, reduces it to b' and
/// trims silence at both ends.
CraftTarget prepare_target(const std::vector<std::string>& words, const AcousticModel& model,
                           const PhonemeTable& table, const Lexicon& lexicon, int min_repeat,
                           std::uint64_t seed);

/// Offset minimising the initial mismatch; ties go to the offset nearest the
/// middle of the song, then to the earlier one.
int choose_offset(const std::vector<int>& song_pdfs, const std::vector<int>& target);

CraftResult craft_wta(const AudioBuffer& song, const TargetSequence& target,
                      const AcousticModel& model, const PhonemeTable& table,
                      const Lexicon& lexicon, const CraftConfig& cfg);

CraftResult craft_wta(const AudioBuffer& song, const std::vector<std::string>& command,
                      const AcousticModel& model, const PhonemeTable& table,
                      const Lexicon& lexicon, const CraftConfig& cfg);

/// Robust variant: gradients are averaged over fresh noise draws from
/// {noise_bound = cfg.noise_bound, captured noise of `channel`}, and the result
/// is scored on held-out draws of `channel`.
CraftResult craft_waa(const AudioBuffer& song, const TargetSequence& target,
                      const AcousticModel& model, const PhonemeTable& table,
                      const Lexicon& lexicon, const CraftConfig& cfg,
                      const ChannelConfig& channel);

CraftResult craft_waa(const AudioBuffer& song, const std::vector<std::string>& command,
                      const AcousticModel& model, const PhonemeTable& table,
                      const Lexicon& lexicon, const CraftConfig& cfg,
                      const ChannelConfig& channel);

/// Draw indices at and above this value are reserved for evaluation.
inline constexpr std::uint64_t kEvalDrawBase = std::uint64_t(1) << 40;

/// Fraction of `draws` held-out channel realisations under which the audio
/// decodes exactly to `command`.
double noisy_success_fraction(const AudioBuffer& audio, const std::vector<std::string>& command,
                              const AcousticModel& model, const PhonemeTable& table,
                              const Lexicon& lexicon, const ChannelConfig& channel, int draws);

/// `iteration,loss,mismatch,best_mismatch,snr_db` rows.
std::string format_history_csv(const std::vector<IterationRecord>& history);

/// key: value report of a crafting run.
std::string format_craft_report(const CraftResult& result);

}  // namespace csong
