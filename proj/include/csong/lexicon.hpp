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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csong/audio.hpp"

namespace csong {

struct AcousticModel;

inline constexpr const char* kSilencePhoneme = "sil";

enum class TransitionKind { kSelfLoop, kForward };

/// One (phoneme, HMM state) row: its pdf-id, the two transition-ids that leave
/// the state, and the formant pair used by the toy synthesiser.
struct PhonemeEntry {
  std::string phoneme;
  int state = 0;
  int pdf_id = 0;
  int tid_selfloop = 0;
  int tid_forward = 0;
  double f1_hz = 0.0;
  double f2_hz = 0.0;

  bool is_silence() const { return phoneme == kSilencePhoneme; }
};

class PhonemeTable {
 public:
  PhonemeTable() = default;
  /// Validates pdf uniqueness per (phoneme, state) and transition-id uniqueness.
  explicit PhonemeTable(std::vector<PhonemeEntry> entries);

  int transition_to_pdf(int transition_id) const;
  TransitionKind transition_kind(int transition_id) const;
  /// Transition-ids that map onto pdf_id, self-loop first.
  std::vector<int> pdf_to_transitions(int pdf_id) const;

  const PhonemeEntry* find_pdf(int pdf_id) const;
  const PhonemeEntry& entry_for_pdf(int pdf_id) const;
  int pdf_for(const std::string& phoneme, int state) const;
  bool has_phoneme(const std::string& phoneme) const;
  bool is_silence_pdf(int pdf_id) const;
  /// Pdf-id of the silence entry; throws if the table has none.
  int silence_pdf() const;
  int num_states(const std::string& phoneme) const;

  /// One past the largest pdf-id, i.e. the posterior width this table needs.
  int num_pdfs() const;
  /// Non-silence phoneme labels in first-appearance order.
  std::vector<std::string> phonemes() const;
  const std::vector<PhonemeEntry>& entries() const { return entries_; }

 private:
  std::vector<PhonemeEntry> entries_;
  std::map<int, std::size_t> by_pdf_;
  std::map<int, std::size_t> by_tid_;
};

class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::map<std::string, std::vector<std::string>> words);

  bool contains(const std::string& word) const { return words_.count(word) != 0; }
  const std::vector<std::string>& pronunciation(const std::string& word) const;
  const std::map<std::string, std::vector<std::string>>& words() const { return words_; }
  std::size_t max_pronunciation_length() const;

  /// Throws kOutOfVocabulary if a phoneme is missing from the table.
  void check_against(const PhonemeTable& table) const;

 private:
  std::map<std::string, std::vector<std::string>> words_;
};

struct Inventory {
  PhonemeTable table;
  Lexicon lexicon;
};

/// The built-in toy inventory: 12 phonemes x 3 states plus one silence state
/// (37 pdf-ids), and a small closed vocabulary.
Inventory default_inventory();

/// Line-oriented format:
///   `phoneme state pdf_id tid_selfloop tid_forward f1_hz f2_hz`
///   `word: phoneme phoneme ...`
/// Blank lines and lines starting with '#' are ignored.
Inventory parse_inventory(const std::string& text);
Inventory load_inventory(const std::filesystem::path& path);
std::string format_inventory(const Inventory& inventory);
void save_inventory(const Inventory& inventory, const std::filesystem::path& path);

/// Splits on whitespace.
std::vector<std::string> split_words(const std::string& text);
std::string join_words(const std::vector<std::string>& words);

/// Per-frame pdf-id target and the command it encodes.
struct TargetSequence {
  std::vector<int> pdf_ids;
  std::vector<std::string> words;
};

/// Maps pdf-ids to phoneme labels, merges repeats, and drops silence.
std::vector<std::string> phoneme_collapse(const std::vector<int>& pdf_ids,
                                          const PhonemeTable& table);

/// Caps every maximal run of equal pdf-ids at min_repeat entries.
TargetSequence reduce_frames(const TargetSequence& b, int min_repeat = 4);

/// Per-frame argmax of the model posteriors on the command audio.
TargetSequence extract_target_sequence(const AudioBuffer& command_audio,
                                       const AcousticModel& model);

/// Toy text-to-speech: renders each word's phonemes with the synthesiser used
/// for the training corpus.
AudioBuffer synthesize_command(const std::vector<std::string>& words, const PhonemeTable& table,
                               const Lexicon& lexicon, std::uint64_t seed);

}  // namespace csong
