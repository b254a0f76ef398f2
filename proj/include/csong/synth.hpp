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
#include <vector>

#include "csong/audio.hpp"
#include "csong/lexicon.hpp"
#include "csong/random.hpp"

namespace csong {

/// Controls for the toy speech renderer. Durations are in analysis frames
/// (10 ms at the canonical rate) so frame labels fall on segment boundaries.
struct RenderOptions {
  double gain = 0.3;
  double noise_amplitude = 0.002;
  int min_state_frames = 6;
  int max_state_frames = 9;
  int lead_silence_frames = 12;
  int word_gap_frames = 8;
  int tail_silence_frames = 12;
  /// First-order spectral tilt: y[t] = x[t] + tilt * x[t-1].
  double tilt = 0.0;
  int frame_shift_samples = 80;
  int frame_samples = 200;
  int sample_rate = kCanonicalRate;
};

/// A stretch of constant label.
struct Segment {
  int pdf_id = 0;
  int frames = 0;
};

struct Rendering {
  AudioBuffer audio;
  std::vector<int> frame_labels;
  std::vector<Segment> schedule;
};

/// Silence, then each word's phonemes (three states each) with gaps between words.
std::vector<Segment> schedule_words(const std::vector<std::string>& words,
                                    const PhonemeTable& table, const Lexicon& lexicon,
                                    const RenderOptions& opts, Rng& rng);

/// Renders a schedule. Each phoneme is a phase-continuous pair of sines at its
/// formants; the three states differ in the balance between the two formants.
Rendering render_schedule(const std::vector<Segment>& schedule, const PhonemeTable& table,
                          const RenderOptions& opts, Rng& rng);

/// Relative formant amplitudes (first, second) for an HMM state.
std::pair<double, double> state_formant_balance(int state);

/// Label of analysis frame i: the label of its centre sample.
std::vector<int> frame_labels_from_samples(const std::vector<int>& sample_labels,
                                           int frame_samples, int shift_samples);

struct MusicOptions {
  double duration_s = 5.0;
  double target_rms = 0.1;
  int sample_rate = kCanonicalRate;
};

/// Synthetic music: a harmonic melody over a bass line with plucked envelopes.
AudioBuffer render_music(const MusicOptions& opts, std::uint64_t seed);

}  // namespace csong
