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

#include "csong/audio.hpp"

namespace csong {

struct FeatureConfig {
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  double preemphasis = 0.97;
  int num_mel_filters = 26;
  int num_cepstra = 13;
  double log_floor = 1e-10;
  int fft_size = 256;
  double low_freq_hz = 20.0;
  /// Upper edge of the mel filterbank; <= 0 selects the Nyquist frequency.
  double high_freq_hz = 0.0;

  int frame_samples(int sample_rate) const;
  int shift_samples(int sample_rate) const;
  /// Throws kInvalidArgument when the configuration cannot be realised at this rate.
  void validate(int sample_rate) const;

  bool operator==(const FeatureConfig&) const = default;
};

/// Frame count for a signal of num_samples: floor((n - frame) / shift) + 1, or 0.
Eigen::Index num_frames(Eigen::Index num_samples, int frame_samples, int shift_samples);

/// Cepstral features for a contiguous run of frames. Row i describes samples
/// [(first_frame + i) * shift, (first_frame + i) * shift + frame).
struct FeatureMatrix {
  Eigen::MatrixXd values;
  int frame_samples = 0;
  int shift_samples = 0;
  Eigen::Index first_frame = 0;

  Eigen::Index frame_count() const { return values.rows(); }
  Eigen::Index sample_offset(Eigen::Index row) const {
    return (first_frame + row) * shift_samples;
  }
};

/// Pre-emphasis, Hamming window, power spectrum, mel filterbank, log, DCT-II.
/// Every matrix the pipeline needs is built once; compute() and backward()
/// are const and may be shared across threads.
///
/// Pre-emphasis is applied inside each frame, so a frame's features depend on
/// that frame's samples only.
class MfccFrontEnd {
 public:
  MfccFrontEnd(const FeatureConfig& cfg, int sample_rate);

  /// Per-frame intermediates retained for backward().
  struct Trace {
    Eigen::MatrixXd windowed;  // frames x frame_samples
    Eigen::MatrixXd re;        // frames x bins
    Eigen::MatrixXd im;
    Eigen::MatrixXd mel;       // frames x filters, before the floor
    Eigen::Index first_frame = 0;
  };

  FeatureMatrix compute(const AudioBuffer& audio) const;

  /// Frames [first, last). Throws kAudioTooShort if the range exceeds the signal.
  FeatureMatrix compute(const Eigen::VectorXd& samples, Eigen::Index first, Eigen::Index last,
                        Trace* trace = nullptr) const;

  /// Vector-Jacobian product: adds d(loss)/d(samples) into grad given
  /// d(loss)/d(features) for the frames recorded in trace.
  void backward(const Trace& trace, const Eigen::MatrixXd& upstream,
                Eigen::VectorXd& grad) const;

  const FeatureConfig& config() const { return cfg_; }
  int sample_rate() const { return rate_; }
  int frame_samples() const { return frame_; }
  int shift_samples() const { return shift_; }
  Eigen::Index num_frames(Eigen::Index num_samples) const {
    return csong::num_frames(num_samples, frame_, shift_);
  }

  const Eigen::MatrixXd& mel_weights() const { return mel_; }
  const Eigen::MatrixXd& dct_matrix() const { return dct_; }

 private:
  FeatureConfig cfg_;
  int rate_;
  int frame_;
  int shift_;
  Eigen::RowVectorXd window_;
  Eigen::MatrixXd cos_;  // frame_samples x bins
  Eigen::MatrixXd sin_;
  Eigen::MatrixXd mel_;  // bins x filters
  Eigen::MatrixXd dct_;  // filters x cepstra
};

FeatureMatrix extract_mfcc(const AudioBuffer& audio, const FeatureConfig& cfg);

/// Exact gradient of sum(upstream .* extract_mfcc(audio)) with respect to the samples.
Eigen::VectorXd mfcc_input_gradient(const AudioBuffer& audio, const FeatureConfig& cfg,
                                    const Eigen::MatrixXd& upstream);

/// Stacks rows i-left .. i+right, replicating the edge rows.
Eigen::MatrixXd splice_context(const Eigen::MatrixXd& features, int left, int right);

/// Adjoint of splice_context: scatter-adds each block back onto its source row.
Eigen::MatrixXd splice_context_backward(const Eigen::MatrixXd& spliced_grad,
                                        Eigen::Index num_rows, int left, int right);

/// Rows [row_begin, row_end) of the splice of a total_frames-long matrix, given
/// only the frames [first_frame, first_frame + local.rows()). The local block
/// must cover every context frame those rows need (after edge clamping).
Eigen::MatrixXd splice_rows(const Eigen::MatrixXd& local, Eigen::Index first_frame,
                            Eigen::Index total_frames, Eigen::Index row_begin,
                            Eigen::Index row_end, int left, int right);

/// Adjoint of splice_rows; the result has local.rows() rows.
Eigen::MatrixXd splice_rows_backward(const Eigen::MatrixXd& spliced_grad,
                                     Eigen::Index local_rows, Eigen::Index first_frame,
                                     Eigen::Index total_frames, Eigen::Index row_begin,
                                     int left, int right);

}  // namespace csong
