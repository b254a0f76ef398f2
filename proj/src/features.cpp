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

#include "csong/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace csong {
namespace {

double hz_to_mel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

}  // namespace

int FeatureConfig::frame_samples(int sample_rate) const {
  return static_cast<int>(std::lround(frame_length_ms * 1e-3 * sample_rate));
}

int FeatureConfig::shift_samples(int sample_rate) const {
  return static_cast<int>(std::lround(frame_shift_ms * 1e-3 * sample_rate));
}

void FeatureConfig::validate(int sample_rate) const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); };
  if (sample_rate <= 0) fail("feature config: sample rate must be positive");
  if (!(frame_length_ms > 0.0) || !(frame_shift_ms > 0.0))
    fail("feature config: frame length and shift must be positive");
  if (frame_shift_ms > frame_length_ms) fail("feature config: frame shift exceeds frame length");
  if (!(preemphasis >= 0.0 && preemphasis < 1.0))
    fail("feature config: preemphasis must lie in [0, 1)");
  if (num_mel_filters < 1) fail("feature config: need at least one mel filter");
  if (num_cepstra < 1 || num_cepstra > num_mel_filters)
    fail("feature config: num_cepstra must lie in [1, num_mel_filters]");
  if (!(log_floor > 0.0)) fail("feature config: log_floor must be positive");
  if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
    fail("feature config: fft_size must be a power of two");
  if (fft_size < frame_samples(sample_rate)) fail("feature config: fft_size shorter than frame");
  if (shift_samples(sample_rate) < 1) fail("feature config: frame shift below one sample");
  const double nyquist = 0.5 * sample_rate;
  const double high = high_freq_hz > 0.0 ? high_freq_hz : nyquist;
  if (!(low_freq_hz >= 0.0 && low_freq_hz < high && high <= nyquist))
    fail("feature config: filterbank edges must satisfy 0 <= low < high <= nyquist");
}

Eigen::Index num_frames(Eigen::Index num_samples, int frame_samples, int shift_samples) {
  if (num_samples < frame_samples) return 0;
  return (num_samples - frame_samples) / shift_samples + 1;
}

MfccFrontEnd::MfccFrontEnd(const FeatureConfig& cfg, int sample_rate)
    : cfg_(cfg), rate_(sample_rate) {
  cfg_.validate(sample_rate);
  frame_ = cfg_.frame_samples(rate_);
  shift_ = cfg_.shift_samples(rate_);
  const int n_fft = cfg_.fft_size;
  const int bins = n_fft / 2 + 1;

  window_.resize(frame_);
  for (int t = 0; t < frame_; ++t)
    window_[t] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * t / (frame_ - 1));

  cos_.resize(frame_, bins);
  sin_.resize(frame_, bins);
  for (int t = 0; t < frame_; ++t) {
    for (int f = 0; f < bins; ++f) {
      // Reduce the phase index modulo n_fft so large products stay exact.
      const long k = (static_cast<long>(t) * f) % n_fft;
      const double theta = 2.0 * std::numbers::pi * double(k) / n_fft;
      cos_(t, f) = std::cos(theta);
      sin_(t, f) = std::sin(theta);
    }
  }

  const int filters = cfg_.num_mel_filters;
  const double high = cfg_.high_freq_hz > 0.0 ? cfg_.high_freq_hz : 0.5 * rate_;
  const double mel_lo = hz_to_mel(cfg_.low_freq_hz);
  const double mel_hi = hz_to_mel(high);
  const double delta = (mel_hi - mel_lo) / (filters + 1);
  mel_ = Eigen::MatrixXd::Zero(bins, filters);
  for (int m = 0; m < filters; ++m) {
    const double left = mel_lo + m * delta;
    const double centre = left + delta;
    const double right = centre + delta;
    for (int f = 0; f < bins; ++f) {
      const double mel = hz_to_mel(double(f) * rate_ / n_fft);
      if (mel > left && mel < right)
        mel_(f, m) = mel <= centre ? (mel - left) / (centre - left) : (right - mel) / (right - centre);
    }
  }

  // Orthonormal DCT-II.
  const int ceps = cfg_.num_cepstra;
  dct_.resize(filters, ceps);
  for (int k = 0; k < ceps; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / filters) : std::sqrt(2.0 / filters);
    for (int m = 0; m < filters; ++m)
      dct_(m, k) = scale * std::cos(std::numbers::pi * k * (m + 0.5) / filters);
  }
}

FeatureMatrix MfccFrontEnd::compute(const AudioBuffer& audio) const {
  if (audio.sample_rate != rate_)
    throw Error(ErrorKind::kRateMismatch, "mfcc: audio rate " + std::to_string(audio.sample_rate) +
                                              " differs from front-end rate " +
                                              std::to_string(rate_));
  const Eigen::Index n = num_frames(audio.size());
  if (n == 0) throw Error(ErrorKind::kAudioTooShort, "mfcc: audio shorter than one frame");
  return compute(audio.samples, 0, n);
}

FeatureMatrix MfccFrontEnd::compute(const Eigen::VectorXd& samples, Eigen::Index first,
                                    Eigen::Index last, Trace* trace) const {
  const Eigen::Index total = num_frames(samples.size());
  if (first < 0 || last > total || first >= last)
    throw Error(ErrorKind::kAudioTooShort, "mfcc: requested frames exceed the signal");
  const Eigen::Index count = last - first;
  const double a = cfg_.preemphasis;

  Eigen::MatrixXd windowed(count, frame_);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto seg = samples.segment((first + i) * shift_, frame_);
    windowed(i, 0) = (1.0 - a) * seg[0];
    windowed.row(i).tail(frame_ - 1) =
        (seg.tail(frame_ - 1) - a * seg.head(frame_ - 1)).transpose();
  }
  windowed.array().rowwise() *= window_.array();

  Eigen::MatrixXd re = windowed * cos_;
  Eigen::MatrixXd im = -(windowed * sin_);
  const Eigen::MatrixXd power = re.array().square() + im.array().square();
  Eigen::MatrixXd mel = power * mel_;
  const Eigen::MatrixXd log_mel = mel.array().max(cfg_.log_floor).log().matrix();

  FeatureMatrix out;
  out.values = log_mel * dct_;
  out.frame_samples = frame_;
  out.shift_samples = shift_;
  out.first_frame = first;

  if (trace != nullptr) {
    trace->windowed = std::move(windowed);
    trace->re = std::move(re);
    trace->im = std::move(im);
    trace->mel = std::move(mel);
    trace->first_frame = first;
  }
  return out;
}

void MfccFrontEnd::backward(const Trace& trace, const Eigen::MatrixXd& upstream,
                            Eigen::VectorXd& grad) const {
  const Eigen::Index count = trace.windowed.rows();
  if (upstream.rows() != count || upstream.cols() != cfg_.num_cepstra)
    throw Error(ErrorKind::kShapeMismatch, "mfcc backward: upstream shape mismatch");
  if (grad.size() < (trace.first_frame + count - 1) * shift_ + frame_)
    throw Error(ErrorKind::kShapeMismatch, "mfcc backward: gradient buffer too short");

  const Eigen::MatrixXd d_log_mel = upstream * dct_.transpose();
  // The floor is a constant where active, so no gradient flows through it.
  const Eigen::MatrixXd d_mel =
      (trace.mel.array() > cfg_.log_floor).select(d_log_mel.array() / trace.mel.array(), 0.0);
  const Eigen::MatrixXd d_power = d_mel * mel_.transpose();
  const Eigen::MatrixXd d_re = 2.0 * trace.re.cwiseProduct(d_power);
  const Eigen::MatrixXd d_im = 2.0 * trace.im.cwiseProduct(d_power);
  Eigen::MatrixXd d_windowed = d_re * cos_.transpose() - d_im * sin_.transpose();
  d_windowed.array().rowwise() *= window_.array();

  const double a = cfg_.preemphasis;
  for (Eigen::Index i = 0; i < count; ++i) {
    auto seg = grad.segment((trace.first_frame + i) * shift_, frame_);
    const auto dp = d_windowed.row(i);
    seg[0] += (1.0 - a) * dp(0) - a * dp(1);
    seg.segment(1, frame_ - 2) +=
        (dp.segment(1, frame_ - 2) - a * dp.segment(2, frame_ - 2)).transpose();
    seg[frame_ - 1] += dp(frame_ - 1);
  }
}

FeatureMatrix extract_mfcc(const AudioBuffer& audio, const FeatureConfig& cfg) {
  return MfccFrontEnd(cfg, audio.sample_rate).compute(audio);
}

Eigen::VectorXd mfcc_input_gradient(const AudioBuffer& audio, const FeatureConfig& cfg,
                                    const Eigen::MatrixXd& upstream) {
  const MfccFrontEnd front(cfg, audio.sample_rate);
  const Eigen::Index n = front.num_frames(audio.size());
  if (n == 0) throw Error(ErrorKind::kAudioTooShort, "mfcc: audio shorter than one frame");
  if (upstream.rows() != n || upstream.cols() != cfg.num_cepstra)
    throw Error(ErrorKind::kShapeMismatch, "mfcc gradient: upstream shape mismatch");
  MfccFrontEnd::Trace trace;
  front.compute(audio.samples, 0, n, &trace);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(audio.size());
  front.backward(trace, upstream, grad);
  return grad;
}

Eigen::MatrixXd splice_rows(const Eigen::MatrixXd& local, Eigen::Index first_frame,
                            Eigen::Index total_frames, Eigen::Index row_begin,
                            Eigen::Index row_end, int left, int right) {
  const Eigen::Index dim = local.cols();
  const int width = left + right + 1;
  Eigen::MatrixXd out(row_end - row_begin, width * dim);
  for (Eigen::Index r = row_begin; r < row_end; ++r) {
    for (int d = -left; d <= right; ++d) {
      const Eigen::Index src = std::clamp<Eigen::Index>(r + d, 0, total_frames - 1) - first_frame;
      if (src < 0 || src >= local.rows())
        throw Error(ErrorKind::kShapeMismatch, "splice: context frame outside supplied block");
      out.block(r - row_begin, (d + left) * dim, 1, dim) = local.row(src);
    }
  }
  return out;
}

Eigen::MatrixXd splice_rows_backward(const Eigen::MatrixXd& spliced_grad,
                                     Eigen::Index local_rows, Eigen::Index first_frame,
                                     Eigen::Index total_frames, Eigen::Index row_begin,
                                     int left, int right) {
  const int width = left + right + 1;
  if (spliced_grad.cols() % width != 0)
    throw Error(ErrorKind::kShapeMismatch, "splice backward: width is not a context multiple");
  const Eigen::Index dim = spliced_grad.cols() / width;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(local_rows, dim);
  for (Eigen::Index i = 0; i < spliced_grad.rows(); ++i) {
    const Eigen::Index r = row_begin + i;
    for (int d = -left; d <= right; ++d) {
      const Eigen::Index src = std::clamp<Eigen::Index>(r + d, 0, total_frames - 1) - first_frame;
      if (src < 0 || src >= local_rows)
        throw Error(ErrorKind::kShapeMismatch, "splice backward: frame outside block");
      out.row(src) += spliced_grad.block(i, (d + left) * dim, 1, dim);
    }
  }
  return out;
}

Eigen::MatrixXd splice_context(const Eigen::MatrixXd& features, int left, int right) {
  if (left < 0 || right < 0) throw Error(ErrorKind::kInvalidArgument, "splice: negative context");
  return splice_rows(features, 0, features.rows(), 0, features.rows(), left, right);
}

Eigen::MatrixXd splice_context_backward(const Eigen::MatrixXd& spliced_grad,
                                        Eigen::Index num_rows, int left, int right) {
  if (spliced_grad.rows() != num_rows)
    throw Error(ErrorKind::kShapeMismatch, "splice backward: row count mismatch");
  return splice_rows_backward(spliced_grad, num_rows, 0, num_rows, 0, left, right);
}

}  // namespace csong
