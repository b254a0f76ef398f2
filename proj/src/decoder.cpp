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

#include "csong/decoder.hpp"

#include <cstdio>
#include <sstream>

namespace csong {

std::vector<int> most_likely_pdf_sequence(const PosteriorMatrix& posteriors) {
  if (posteriors.rows() == 0 || posteriors.cols() == 0)
    throw Error(ErrorKind::kEmptyInput, "most_likely_pdf_sequence: empty matrix");
  std::vector<int> m(static_cast<std::size_t>(posteriors.rows()));
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < posteriors.cols(); ++j)
      if (posteriors(i, j) > posteriors(i, best)) best = j;
    m[std::size_t(i)] = int(best);
  }
  return m;
}

namespace {

struct Run {
  int pdf;
  int length;
};

// Repeatedly deletes the shortest run below min_run (leftmost on ties) and
// merges the neighbours it separated, so a one-frame blip inside a state
// does not break that state into two short runs.
std::vector<Run> stable_runs(const std::vector<int>& seq, int min_run) {
  std::vector<Run> runs;
  for (int pdf : seq) {
    if (!runs.empty() && runs.back().pdf == pdf)
      ++runs.back().length;
    else
      runs.push_back({pdf, 1});
  }
  for (;;) {
    std::size_t victim = runs.size();
    for (std::size_t i = 0; i < runs.size(); ++i)
      if (runs[i].length < min_run &&
          (victim == runs.size() || runs[i].length < runs[victim].length))
        victim = i;
    if (victim == runs.size()) break;
    runs.erase(runs.begin() + std::ptrdiff_t(victim));
    if (victim > 0 && victim < runs.size() && runs[victim - 1].pdf == runs[victim].pdf) {
      runs[victim - 1].length += runs[victim].length;
      runs.erase(runs.begin() + std::ptrdiff_t(victim));
    }
  }
  return runs;
}

void match_words(const std::vector<std::string>& phones, const Lexicon& lexicon,
                 std::vector<std::string>& words) {
  const std::size_t longest = lexicon.max_pronunciation_length();
  std::size_t i = 0;
  while (i < phones.size()) {
    const std::string* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [word, pron] : lexicon.words()) {
      const std::size_t len = pron.size();
      if (len > longest || len <= best_len || i + len > phones.size()) continue;
      if (std::equal(pron.begin(), pron.end(), phones.begin() + std::ptrdiff_t(i))) {
        best = &word;
        best_len = len;
      }
    }
    if (best != nullptr) {
      words.push_back(*best);
      i += best_len;
    } else {
      ++i;
    }
  }
}

}  // namespace

DecodeResult decode_pdf_sequence(const std::vector<int>& pdf_sequence, const PhonemeTable& table,
                                 const Lexicon& lexicon, const DecodeOptions& opts) {
  DecodeResult out;
  out.pdf_sequence = pdf_sequence;
  const std::vector<Run> runs = stable_runs(pdf_sequence, opts.min_run);

  std::vector<std::string> segment;
  auto flush = [&] {
    match_words(segment, lexicon, out.words);
    segment.clear();
  };
  std::size_t k = 0;
  while (k < runs.size()) {
    const PhonemeEntry* e = table.find_pdf(runs[k].pdf);
    if (e == nullptr) {
      ++k;
      continue;
    }
    if (e->is_silence()) {
      flush();
      ++k;
      continue;
    }
    // Accept a phoneme only when all of its states follow in order.
    const int states = table.num_states(e->phoneme);
    bool complete = e->state == 0 && k + std::size_t(states) <= runs.size();
    for (int s = 1; complete && s < states; ++s) {
      const PhonemeEntry* next = table.find_pdf(runs[k + std::size_t(s)].pdf);
      complete = next != nullptr && next->phoneme == e->phoneme && next->state == s;
    }
    if (complete) {
      segment.push_back(e->phoneme);
      out.phonemes.push_back(e->phoneme);
      k += std::size_t(states);
    } else {
      ++k;
    }
  }
  flush();
  return out;
}

DecodeResult decode_posteriors(const PosteriorMatrix& posteriors, const PhonemeTable& table,
                               const Lexicon& lexicon, const DecodeOptions& opts) {
  return decode_pdf_sequence(most_likely_pdf_sequence(posteriors), table, lexicon, opts);
}

DecodeResult decode_text(const AudioBuffer& audio, const AcousticModel& model,
                         const PhonemeTable& table, const Lexicon& lexicon,
                         const DecodeOptions& opts) {
  return decode_posteriors(forward(model, audio), table, lexicon, opts);
}

std::vector<bool> align_words(const std::vector<std::string>& decoded,
                              const std::vector<std::string>& target) {
  const std::size_t n = decoded.size(), m = target.size();
  std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = decoded[i] == target[j] ? lcs[i + 1][j + 1] + 1
                                          : std::max(lcs[i + 1][j], lcs[i][j + 1]);
  std::vector<bool> matched(m, false);
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (decoded[i] == target[j]) {
      matched[j] = true;
      ++i;
      ++j;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      ++i;
    } else {
      ++j;
    }
  }
  return matched;
}

double success_rate(const std::vector<std::string>& decoded,
                    const std::vector<std::string>& target) {
  if (target.empty()) throw Error(ErrorKind::kEmptyInput, "success_rate: empty target command");
  const auto matched = align_words(decoded, target);
  const auto hits = std::count(matched.begin(), matched.end(), true);
  return 100.0 * double(hits) / double(target.size());
}

double score(DecodeResult& result, const std::vector<std::string>& target) {
  const double rate = success_rate(result.words, target);
  result.word_matches = align_words(result.words, target);
  return rate;
}

std::string format_decode_report(const DecodeResult& result,
                                 const std::vector<std::string>& target) {
  std::ostringstream out;
  out << "words: " << join_words(result.words) << '\n';
  out << "phonemes: " << join_words(result.phonemes) << '\n';
  out << "frames: " << result.pdf_sequence.size() << '\n';
  if (!target.empty()) {
    const auto matched = align_words(result.words, target);
    out << "match:";
    for (std::size_t i = 0; i < target.size(); ++i)
      out << ' ' << target[i] << '=' << (matched[i] ? 1 : 0);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", success_rate(result.words, target));
    out << "\nsuccess_pct: " << buf << '\n';
  }
  return out.str();
}

}  // namespace csong
