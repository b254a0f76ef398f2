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

#include "csong/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "csong/acoustic.hpp"
#include "csong/decoder.hpp"
#include "csong/synth.hpp"

namespace csong {

PhonemeTable::PhonemeTable(std::vector<PhonemeEntry> entries) : entries_(std::move(entries)) {
  std::set<std::pair<std::string, int>> seen_states;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.phoneme.empty() || e.state < 0 || e.pdf_id < 0)
      throw Error(ErrorKind::kMalformedFile, "phoneme table: invalid entry");
    if (!seen_states.insert({e.phoneme, e.state}).second)
      throw Error(ErrorKind::kMalformedFile,
                  "phoneme table: duplicate state " + e.phoneme + "/" + std::to_string(e.state));
    if (!by_pdf_.emplace(e.pdf_id, i).second)
      throw Error(ErrorKind::kMalformedFile,
                  "phoneme table: pdf-id " + std::to_string(e.pdf_id) + " used twice");
    for (int tid : {e.tid_selfloop, e.tid_forward}) {
      if (!by_tid_.emplace(tid, i).second)
        throw Error(ErrorKind::kMalformedFile,
                    "phoneme table: transition-id " + std::to_string(tid) + " used twice");
    }
  }
}

int PhonemeTable::transition_to_pdf(int transition_id) const {
  const auto it = by_tid_.find(transition_id);
  if (it == by_tid_.end())
    throw Error(ErrorKind::kUnknownTransitionId,
                "unknown transition-id " + std::to_string(transition_id));
  return entries_[it->second].pdf_id;
}

TransitionKind PhonemeTable::transition_kind(int transition_id) const {
  const auto it = by_tid_.find(transition_id);
  if (it == by_tid_.end())
    throw Error(ErrorKind::kUnknownTransitionId,
                "unknown transition-id " + std::to_string(transition_id));
  return entries_[it->second].tid_selfloop == transition_id ? TransitionKind::kSelfLoop
                                                            : TransitionKind::kForward;
}

std::vector<int> PhonemeTable::pdf_to_transitions(int pdf_id) const {
  const auto& e = entry_for_pdf(pdf_id);
  return {e.tid_selfloop, e.tid_forward};
}

const PhonemeEntry* PhonemeTable::find_pdf(int pdf_id) const {
  const auto it = by_pdf_.find(pdf_id);
  return it == by_pdf_.end() ? nullptr : &entries_[it->second];
}

const PhonemeEntry& PhonemeTable::entry_for_pdf(int pdf_id) const {
  const PhonemeEntry* e = find_pdf(pdf_id);
  if (e == nullptr)
    throw Error(ErrorKind::kOutOfRange, "pdf-id " + std::to_string(pdf_id) + " not in table");
  return *e;
}

int PhonemeTable::pdf_for(const std::string& phoneme, int state) const {
  for (const auto& e : entries_)
    if (e.phoneme == phoneme && e.state == state) return e.pdf_id;
  throw Error(ErrorKind::kOutOfVocabulary,
              "no entry for phoneme " + phoneme + " state " + std::to_string(state));
}

bool PhonemeTable::has_phoneme(const std::string& phoneme) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const PhonemeEntry& e) { return e.phoneme == phoneme; });
}

bool PhonemeTable::is_silence_pdf(int pdf_id) const {
  const PhonemeEntry* e = find_pdf(pdf_id);
  return e != nullptr && e->is_silence();
}

int PhonemeTable::silence_pdf() const {
  for (const auto& e : entries_)
    if (e.is_silence()) return e.pdf_id;
  throw Error(ErrorKind::kMalformedFile, "phoneme table has no silence entry");
}

int PhonemeTable::num_states(const std::string& phoneme) const {
  int n = 0;
  for (const auto& e : entries_)
    if (e.phoneme == phoneme) n = std::max(n, e.state + 1);
  if (n == 0) throw Error(ErrorKind::kOutOfVocabulary, "unknown phoneme " + phoneme);
  return n;
}

int PhonemeTable::num_pdfs() const {
  return by_pdf_.empty() ? 0 : by_pdf_.rbegin()->first + 1;
}

std::vector<std::string> PhonemeTable::phonemes() const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (!e.is_silence() && std::find(out.begin(), out.end(), e.phoneme) == out.end())
      out.push_back(e.phoneme);
  return out;
}

Lexicon::Lexicon(std::map<std::string, std::vector<std::string>> words) : words_(std::move(words)) {
  for (const auto& [word, phones] : words_)
    if (phones.empty())
      throw Error(ErrorKind::kMalformedFile, "lexicon: word '" + word + "' has no phonemes");
}

const std::vector<std::string>& Lexicon::pronunciation(const std::string& word) const {
  const auto it = words_.find(word);
  if (it == words_.end())
    throw Error(ErrorKind::kOutOfVocabulary, "word '" + word + "' is not in the lexicon");
  return it->second;
}

std::size_t Lexicon::max_pronunciation_length() const {
  std::size_t n = 0;
  for (const auto& [word, phones] : words_) n = std::max(n, phones.size());
  return n;
}

void Lexicon::check_against(const PhonemeTable& table) const {
  for (const auto& [word, phones] : words_)
    for (const auto& p : phones)
      if (!table.has_phoneme(p))
        throw Error(ErrorKind::kOutOfVocabulary,
                    "lexicon word '" + word + "' uses unknown phoneme " + p);
}

Inventory default_inventory() {
  struct Spec {
    const char* label;
    double f1, f2;
  };
  static constexpr Spec kPhonemes[] = {
      {"eh", 550, 1450}, {"k", 250, 1450}, {"ow", 400, 950},  {"p", 250, 950},
      {"ax", 550, 1200}, {"n", 250, 1200}, {"dh", 400, 1200}, {"d", 700, 1450},
      {"ao", 700, 950},  {"r", 400, 1450}, {"ay", 700, 1200}, {"t", 550, 950},
  };
  std::vector<PhonemeEntry> entries;
  int pdf = 0;
  for (const auto& p : kPhonemes) {
    for (int s = 0; s < 3; ++s, ++pdf)
      entries.push_back({p.label, s, pdf, 2 * pdf + 1, 2 * pdf + 2, p.f1, p.f2});
  }
  entries.push_back({kSilencePhoneme, 0, pdf, 2 * pdf + 1, 2 * pdf + 2, 0.0, 0.0});

  Lexicon lexicon({
      {"echo", {"eh", "k", "ow"}},
      {"open", {"ow", "p", "ax", "n"}},
      {"the", {"dh", "ax"}},
      {"door", {"d", "ao", "r"}},
      {"night", {"n", "ay", "t"}},
      {"ten", {"t", "eh", "n"}},
  });
  Inventory inv{PhonemeTable(std::move(entries)), std::move(lexicon)};
  inv.lexicon.check_against(inv.table);
  return inv;
}

Inventory parse_inventory(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<PhonemeEntry> entries;
  std::map<std::string, std::vector<std::string>> words;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto colon = line.find(':');
    if (colon != std::string::npos) {
      std::string word = line.substr(0, colon);
      word.erase(0, word.find_first_not_of(" \t"));
      word.erase(word.find_last_not_of(" \t") + 1);
      auto phones = split_words(line.substr(colon + 1));
      if (word.empty() || phones.empty())
        throw Error(ErrorKind::kMalformedFile,
                    "inventory line " + std::to_string(line_no) + ": bad lexicon entry");
      words[word] = std::move(phones);
      continue;
    }
    std::istringstream fields(line);
    PhonemeEntry e;
    if (!(fields >> e.phoneme >> e.state >> e.pdf_id >> e.tid_selfloop >> e.tid_forward >>
          e.f1_hz >> e.f2_hz))
      throw Error(ErrorKind::kMalformedFile,
                  "inventory line " + std::to_string(line_no) + ": expected 7 fields");
    std::string extra;
    if (fields >> extra)
      throw Error(ErrorKind::kMalformedFile,
                  "inventory line " + std::to_string(line_no) + ": trailing fields");
    entries.push_back(std::move(e));
  }
  Inventory inv{PhonemeTable(std::move(entries)), Lexicon(std::move(words))};
  inv.lexicon.check_against(inv.table);
  return inv;
}

Inventory load_inventory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_inventory(ss.str());
}

std::string format_inventory(const Inventory& inventory) {
  std::ostringstream out;
  out << "# phoneme state pdf_id tid_selfloop tid_forward f1_hz f2_hz\n";
  out << std::setprecision(17);
  for (const auto& e : inventory.table.entries())
    out << e.phoneme << ' ' << e.state << ' ' << e.pdf_id << ' ' << e.tid_selfloop << ' '
        << e.tid_forward << ' ' << e.f1_hz << ' ' << e.f2_hz << '\n';
  out << "# word: phonemes\n";
  for (const auto& [word, phones] : inventory.lexicon.words())
    out << word << ": " << join_words(phones) << '\n';
  return out.str();
}

void save_inventory(const Inventory& inventory, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kUnwritablePath, "cannot write " + path.string());
  out << format_inventory(inventory);
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::vector<std::string> phoneme_collapse(const std::vector<int>& pdf_ids,
                                          const PhonemeTable& table) {
  std::vector<std::string> out;
  const PhonemeEntry* prev = nullptr;
  for (int pdf : pdf_ids) {
    const PhonemeEntry& e = table.entry_for_pdf(pdf);
    if (e.is_silence()) {
      prev = nullptr;
      continue;
    }
    // A new instance starts on a label change or when the state index falls back.
    if (prev == nullptr || prev->phoneme != e.phoneme || e.state < prev->state)
      out.push_back(e.phoneme);
    prev = &e;
  }
  return out;
}

TargetSequence reduce_frames(const TargetSequence& b, int min_repeat) {
  if (min_repeat < 3)
    throw Error(ErrorKind::kInvalidArgument, "reduce_frames: min_repeat must be at least 3");
  TargetSequence out;
  out.words = b.words;
  int run = 0;
  for (std::size_t i = 0; i < b.pdf_ids.size(); ++i) {
    run = (i > 0 && b.pdf_ids[i] == b.pdf_ids[i - 1]) ? run + 1 : 1;
    if (run <= min_repeat) out.pdf_ids.push_back(b.pdf_ids[i]);
  }
  return out;
}

TargetSequence extract_target_sequence(const AudioBuffer& command_audio,
                                       const AcousticModel& model) {
  TargetSequence out;
  out.pdf_ids = most_likely_pdf_sequence(forward(model, command_audio));
  return out;
}

AudioBuffer synthesize_command(const std::vector<std::string>& words, const PhonemeTable& table,
                               const Lexicon& lexicon, std::uint64_t seed) {
  if (words.empty()) throw Error(ErrorKind::kEmptyInput, "synthesize_command: no words");
  for (const auto& w : words)
    if (!lexicon.contains(w))
      throw Error(ErrorKind::kOutOfVocabulary, "word '" + w + "' is not in the lexicon");
  Rng rng(seed);
  const RenderOptions opts;
  const auto schedule = schedule_words(words, table, lexicon, opts, rng);
  return render_schedule(schedule, table, opts, rng).audio;
}

}  // namespace csong
