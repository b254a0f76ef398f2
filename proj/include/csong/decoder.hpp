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

#include <string>
#include <vector>

#include "csong/acoustic.hpp"
#include "csong/lexicon.hpp"

namespace csong {

struct DecodeOptions {
  /// Runs of one pdf-id shorter than this are treated as glitches.
  int min_run = 3;
};

struct DecodeResult {
  std::vector<int> pdf_sequence;
  std::vector<std::string> phonemes;
  std::vector<std::string> words;
  /// Filled by score(): one flag per target word.
  std::vector<bool> word_matches;
};

/// m_i = argmax_j a_ij, ties resolved toward the lower pdf-id.
std::vector<int> most_likely_pdf_sequence(const PosteriorMatrix& posteriors);

/// Greedy run-collapse decoding of a per-frame pdf-id sequence.
DecodeResult decode_pdf_sequence(const std::vector<int>& pdf_sequence, const PhonemeTable& table,
                                 const Lexicon& lexicon, const DecodeOptions& opts = {});

DecodeResult decode_posteriors(const PosteriorMatrix& posteriors, const PhonemeTable& table,
                               const Lexicon& lexicon, const DecodeOptions& opts = {});

DecodeResult decode_text(const AudioBuffer& audio, const AcousticModel& model,
                         const PhonemeTable& table, const Lexicon& lexicon,
                         const DecodeOptions& opts = {});

/// For each target word, whether it is matched by an order-preserving longest
/// common subsequence alignment against the decoded words.
std::vector<bool> align_words(const std::vector<std::string>& decoded,
                              const std::vector<std::string>& target);

/// Matched target words / target words x 100. Words must match exactly.
double success_rate(const std::vector<std::string>& decoded,
                    const std::vector<std::string>& target);

/// Sets result.word_matches against target and returns the success rate.
double score(DecodeResult& result, const std::vector<std::string>& target);

/// Line-oriented report:
///   words: ...
///   phonemes: ...
///   frames: N
///   match: word=1 word=0 ...   (only when scored)
///   success_pct: X             (only when scored)
std::string format_decode_report(const DecodeResult& result, const std::vector<std::string>& target = {});

}  // namespace csong
