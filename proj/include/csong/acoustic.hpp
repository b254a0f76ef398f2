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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csong/audio.hpp"
#include "csong/features.hpp"
#include "csong/lexicon.hpp"

namespace csong {

/// Per-frame pdf-id probabilities: rows are frames, columns are pdf-ids.
using PosteriorMatrix = Eigen::MatrixXd;

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Feed-forward acoustic model: MFCC -> context splice -> input standardisation
/// -> affine/tanh stack -> affine -> softmax.
struct AcousticModel {
  FeatureConfig features;
  int sample_rate = kCanonicalRate;
  int context_left = 2;
  int context_right = 2;
  Eigen::RowVectorXd input_mean;
  Eigen::RowVectorXd input_inv_std;
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  int input_dim() const { return (context_left + context_right + 1) * features.num_cepstra; }
  int num_pdfs() const { return layers.empty() ? 0 : int(layers.back().weight.rows()); }
  /// Throws kShapeMismatch if layer dimensions do not chain.
  void validate() const;
};

PosteriorMatrix softmax_rows(const Eigen::MatrixXd& logits);

/// Evaluates a model on raw samples. Rows can be computed for any sub-range
/// and match the corresponding rows of a full-signal pass exactly.
class AcousticRunner {
 public:
  explicit AcousticRunner(const AcousticModel& model);

  struct Trace {
    MfccFrontEnd::Trace mfcc;
    Eigen::Index total_frames = 0;
    Eigen::Index first_frame = 0;
    Eigen::Index row_begin = 0;
    std::vector<Eigen::MatrixXd> activations;  // layer inputs; [0] is the normalised splice
  };

  Eigen::Index num_frames(Eigen::Index num_samples) const {
    return front_.num_frames(num_samples);
  }

  /// Logits for rows [row_begin, row_end).
  Eigen::MatrixXd logits(const Eigen::VectorXd& samples, Eigen::Index row_begin,
                         Eigen::Index row_end, Trace* trace = nullptr) const;

  PosteriorMatrix posteriors(const Eigen::VectorXd& samples) const;

  /// Adds d(loss)/d(samples) into grad, given d(loss)/d(logits) for the traced rows.
  void backward(const Trace& trace, const Eigen::MatrixXd& logit_grad,
                Eigen::VectorXd& grad) const;

  const AcousticModel& model() const { return model_; }
  const MfccFrontEnd& front_end() const { return front_; }

 private:
  const AcousticModel& model_;
  MfccFrontEnd front_;
};

PosteriorMatrix forward(const AcousticModel& model, const AudioBuffer& audio);

enum class GradientSpace { kLogits, kProbabilities };

/// Backpropagates a gradient given on the posterior logits (or on the
/// probabilities themselves) through the network, splice and MFCC to samples.
Eigen::VectorXd input_gradient(const AcousticModel& model, const AudioBuffer& audio,
                               const Eigen::MatrixXd& upstream,
                               GradientSpace space = GradientSpace::kLogits);

struct Utterance {
  AudioBuffer audio;
  std::vector<int> labels;
  std::vector<std::string> words;
};

struct ToyCorpus {
  std::vector<Utterance> utterances;
  std::uint64_t seed = 0;
  int num_pdfs = 0;
};

struct CorpusSpec {
  int utterances = 320;
  int max_words = 3;
  double music_only_fraction = 0.1;
  double background_music_fraction = 0.15;
  /// Speech-to-music level range for background beds, in dB.
  double min_music_snr_db = 6.0;
  double max_music_snr_db = 20.0;
  double min_gain = 0.12;
  double max_gain = 0.5;
  double min_noise = 0.0005;
  double max_noise = 0.06;
  double max_tilt = 0.4;
  double band_limit_fraction = 0.3;
  double min_band_hz = 2000.0;
  std::uint64_t seed = 1;
};

/// Randomised word strings rendered by the toy synthesiser, with level,
/// noise, tilt, band-limit and background-music augmentation, plus music-only clips
/// labelled as silence.
ToyCorpus generate_synthetic_corpus(const PhonemeTable& table, const Lexicon& lexicon,
                                    const CorpusSpec& spec);

struct TrainConfig {
  FeatureConfig features;
  int context = 2;
  std::vector<int> hidden = {64, 64};
  double learning_rate = 2e-3;
  int epochs = 12;
  int batch_size = 64;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 7;
};

struct TrainReport {
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;
  std::size_t train_frames = 0;
  std::size_t heldout_frames = 0;
  std::vector<double> epoch_loss;
};

/// Adam on frame cross-entropy. The last holdout_fraction of utterances is
/// held out for the accuracy report.
AcousticModel train_toy_model(const ToyCorpus& corpus, const TrainConfig& cfg,
                              TrainReport* report = nullptr);

/// Fraction of frames whose argmax equals the label.
double frame_accuracy(const AcousticModel& model, const std::vector<Utterance>& utterances);

inline constexpr const char* kModelMagic = "CSONG-ACOUSTIC-MODEL";
inline constexpr int kModelVersion = 1;

std::string serialize_model(const AcousticModel& model);
AcousticModel parse_model(const std::string& bytes);
void save_model(const AcousticModel& model, const std::filesystem::path& path);
AcousticModel load_model(const std::filesystem::path& path);

}  // namespace csong
