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

#include "csong/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "csong/features.hpp"

namespace csong {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Box-smooths an envelope so state changes and onsets ramp over ~5 ms.
Eigen::VectorXd smooth(const Eigen::VectorXd& x, int radius) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd prefix(n + 1);
  prefix[0] = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - radius);
    const Eigen::Index hi = std::min<Eigen::Index>(n, i + radius + 1);
    y[i] = (prefix[hi] - prefix[lo]) / double(2 * radius + 1);
  }
  return y;
}

}  // namespace

std::pair<double, double> state_formant_balance(int state) {
  switch (state) {
    case 0: return {1.0, 0.25};
    case 1: return {0.7, 0.7};
    default: return {0.25, 1.0};
  }
}

std::vector<Segment> schedule_words(const std::vector<std::string>& words,
                                    const PhonemeTable& table, const Lexicon& lexicon,
                                    const RenderOptions& opts, Rng& rng) {
  const int sil = table.silence_pdf();
  std::vector<Segment> schedule;
  schedule.push_back({sil, opts.lead_silence_frames});
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (!lexicon.contains(words[w]))
      throw Error(ErrorKind::kOutOfVocabulary, "word '" + words[w] + "' is not in the lexicon");
    if (w > 0) schedule.push_back({sil, opts.word_gap_frames});
    for (const auto& phoneme : lexicon.pronunciation(words[w])) {
      const int states = table.num_states(phoneme);
      for (int s = 0; s < states; ++s) {
        const auto frames =
            static_cast<int>(rng.uniform_int(opts.min_state_frames, opts.max_state_frames));
        schedule.push_back({table.pdf_for(phoneme, s), frames});
      }
    }
  }
  schedule.push_back({sil, opts.tail_silence_frames});
  return schedule;
}

std::vector<int> frame_labels_from_samples(const std::vector<int>& sample_labels,
                                           int frame_samples, int shift_samples) {
  const auto n = static_cast<Eigen::Index>(sample_labels.size());
  const Eigen::Index frames = num_frames(n, frame_samples, shift_samples);
  std::vector<int> labels(static_cast<std::size_t>(frames));
  for (Eigen::Index i = 0; i < frames; ++i)
    labels[std::size_t(i)] = sample_labels[std::size_t(i * shift_samples + frame_samples / 2)];
  return labels;
}

Rendering render_schedule(const std::vector<Segment>& schedule, const PhonemeTable& table,
                          const RenderOptions& opts, Rng& rng) {
  const int shift = opts.frame_shift_samples;
  const int frame = opts.frame_samples;
  int total_frames = 0;
  for (const auto& seg : schedule) total_frames += seg.frames;
  if (total_frames <= 0) throw Error(ErrorKind::kEmptyInput, "render: empty schedule");

  // Segment k occupies frame indices [start_k, end_k); offsetting the sample
  // timeline by (frame - shift) / 2 puts each frame centre inside its segment.
  const Eigen::Index n = Eigen::Index(total_frames) * shift + (frame - shift);
  const int offset = (frame - shift) / 2;
  std::vector<int> sample_labels(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> seg_begin(schedule.size()), seg_end(schedule.size());
  {
    Eigen::Index f = 0;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
      seg_begin[k] = k == 0 ? 0 : f * shift + offset;
      f += schedule[k].frames;
      seg_end[k] = k + 1 == schedule.size() ? n : f * shift + offset;
      for (Eigen::Index t = seg_begin[k]; t < seg_end[k]; ++t)
        sample_labels[std::size_t(t)] = schedule[k].pdf_id;
    }
  }

  Eigen::VectorXd signal = Eigen::VectorXd::Zero(n);
  constexpr int kRamp = 20;
  std::size_t k = 0;
  while (k < schedule.size()) {
    const PhonemeEntry& first = table.entry_for_pdf(schedule[k].pdf_id);
    if (first.is_silence()) {
      ++k;
      continue;
    }
    // A phoneme instance is the run of consecutive segments sharing a label
    // with non-decreasing states.
    std::size_t end = k + 1;
    while (end < schedule.size()) {
      const PhonemeEntry& e = table.entry_for_pdf(schedule[end].pdf_id);
      const PhonemeEntry& prev = table.entry_for_pdf(schedule[end - 1].pdf_id);
      if (e.phoneme != first.phoneme || e.state <= prev.state) break;
      ++end;
    }
    const Eigen::Index s0 = seg_begin[k];
    const Eigen::Index s1 = seg_end[end - 1];
    const Eigen::Index lo = std::max<Eigen::Index>(0, s0 - kRamp);
    const Eigen::Index hi = std::min<Eigen::Index>(n, s1 + kRamp);
    Eigen::VectorXd a1 = Eigen::VectorXd::Zero(hi - lo);
    Eigen::VectorXd a2 = Eigen::VectorXd::Zero(hi - lo);
    for (std::size_t j = k; j < end; ++j) {
      const auto [b1, b2] = state_formant_balance(table.entry_for_pdf(schedule[j].pdf_id).state);
      for (Eigen::Index t = seg_begin[j]; t < seg_end[j]; ++t) {
        a1[t - lo] = b1;
        a2[t - lo] = b2;
      }
    }
    a1 = smooth(a1, kRamp);
    a2 = smooth(a2, kRamp);
    const double phase1 = rng.uniform(0.0, kTwoPi);
    const double phase2 = rng.uniform(0.0, kTwoPi);
    const double w1 = kTwoPi * first.f1_hz / opts.sample_rate;
    const double w2 = kTwoPi * first.f2_hz / opts.sample_rate;
    for (Eigen::Index t = lo; t < hi; ++t) {
      const double tt = double(t - lo);
      signal[t] += opts.gain * (a1[t - lo] * std::sin(phase1 + w1 * tt) +
                                a2[t - lo] * std::sin(phase2 + w2 * tt));
    }
    k = end;
  }

  if (opts.noise_amplitude > 0.0)
    for (Eigen::Index t = 0; t < n; ++t)
      signal[t] += rng.uniform(-opts.noise_amplitude, opts.noise_amplitude);
  if (opts.tilt != 0.0) {
    for (Eigen::Index t = n - 1; t > 0; --t) signal[t] += opts.tilt * signal[t - 1];
  }

  Rendering out;
  out.audio = AudioBuffer(clip_unit(signal), opts.sample_rate);
  out.frame_labels = frame_labels_from_samples(sample_labels, frame, shift);
  out.schedule = schedule;
  return out;
}

AudioBuffer render_music(const MusicOptions& opts, std::uint64_t seed) {
  Rng rng(seed);
  const int rate = opts.sample_rate;
  const auto n = static_cast<Eigen::Index>(std::llround(opts.duration_s * rate));
  if (n <= 0) throw Error(ErrorKind::kEmptyInput, "music: non-positive duration");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);

  static constexpr std::array<int, 11> kScale = {0, 3, 5, 7, 10, 12, 15, 17, 19, 22, 24};
  auto pitch = [](double base, int semitones) { return base * std::pow(2.0, semitones / 12.0); };

  auto add_voice = [&](double base_hz, double min_len, double max_len, double level,
                       int harmonics, double decay_s) {
    Eigen::Index t0 = 0;
    while (t0 < n) {
      const auto len = static_cast<Eigen::Index>(rng.uniform(min_len, max_len) * rate);
      const double f0 = pitch(base_hz, kScale[std::size_t(rng.uniform_int(0, kScale.size() - 1))]);
      const double phase = rng.uniform(0.0, kTwoPi);
      const Eigen::Index t1 = std::min(n, t0 + len);
      for (Eigen::Index t = t0; t < t1; ++t) {
        const double tau = double(t - t0) / rate;
        const double attack = std::min(1.0, tau / 0.01);
        const double release = std::min(1.0, double(t1 - t) / (0.01 * rate));
        const double env = attack * release * std::exp(-tau / decay_s);
        double v = 0.0;
        for (int h = 1; h <= harmonics; ++h) {
          if (f0 * h > 0.45 * rate) break;
          v += std::sin(phase * h + kTwoPi * f0 * h * tau) / h;
        }
        out[t] += level * env * v;
      }
      t0 = t1;
    }
  };

  add_voice(220.0, 0.15, 0.4, 1.0, 5, 0.3);
  add_voice(330.0, 0.3, 0.8, 0.5, 4, 0.5);
  add_voice(55.0, 0.5, 1.0, 0.8, 4, 0.8);

  const double rms = std::sqrt(mean_square(out));
  out *= opts.target_rms / rms;
  const double peak = out.cwiseAbs().maxCoeff();
  if (peak > 0.8) out *= 0.8 / peak;
  return AudioBuffer(std::move(out), rate);
}

}  // namespace csong
