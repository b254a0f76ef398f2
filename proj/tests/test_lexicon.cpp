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

#include <doctest.h>

#include <set>

#include "csong/error.hpp"
#include "csong/lexicon.hpp"
#include "csong/synth.hpp"
#include "support.hpp"

using namespace csong;
using csong::testing::data_dir;
using csong::testing::inventory;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kInvalidArgument;
}

std::vector<int> random_pdf_sequence(Rng& rng, const PhonemeTable& table) {
  const auto& entries = table.entries();
  std::vector<int> out;
  const auto runs = rng.uniform_int(1, 30);
  for (std::int64_t r = 0; r < runs; ++r) {
    const int pdf =
        entries[std::size_t(rng.uniform_int(0, std::int64_t(entries.size()) - 1))].pdf_id;
    const auto len = rng.uniform_int(1, 12);
    out.insert(out.end(), std::size_t(len), pdf);
  }
  return out;
}

}  // namespace

TEST_CASE("production transition table excerpt") {
  const Inventory inv = load_inventory(data_dir() / "transition_excerpt.txt");
  const PhonemeTable& t = inv.table;
  CHECK(t.transition_to_pdf(15985) == 6383);
  CHECK(t.transition_to_pdf(15986) == 6383);
  CHECK(t.transition_to_pdf(16189) == 5760);
  CHECK(t.transition_kind(16189) == TransitionKind::kSelfLoop);
  CHECK(t.transition_to_pdf(16190) == 5760);
  CHECK(t.transition_to_pdf(31223) == 6673);
  CHECK(t.transition_to_pdf(31380) == 3787);
  CHECK(t.transition_to_pdf(9644) == 5316);
  CHECK(t.transition_to_pdf(39898) == 8335);
  CHECK(t.entry_for_pdf(6383).phoneme == "eh_B");
  CHECK(t.entry_for_pdf(6383).state == 0);
  CHECK(kind_of([&] { t.transition_to_pdf(99999); }) == ErrorKind::kUnknownTransitionId);

  // The per-frame ids that spell eh_B, capped at four repeats.
  TargetSequence b{{6383, 5760, 5760, 5760, 5760, 5760, 5760, 5760, 5760, 5760}, {}};
  CHECK(reduce_frames(b, 4).pdf_ids == std::vector<int>{6383, 5760, 5760, 5760, 5760});
  CHECK(phoneme_collapse(b.pdf_ids, t) == std::vector<std::string>{"eh_B"});
}

TEST_CASE("transition_to_pdf is a left inverse of pdf_to_transitions") {
  const PhonemeTable& t = inventory().table;
  for (const auto& e : t.entries()) {
    const auto tids = t.pdf_to_transitions(e.pdf_id);
    REQUIRE(tids.size() == 2);
    CHECK(tids[0] == e.tid_selfloop);
    CHECK(t.transition_kind(tids[0]) == TransitionKind::kSelfLoop);
    CHECK(t.transition_kind(tids[1]) == TransitionKind::kForward);
    for (int tid : tids) CHECK(t.transition_to_pdf(tid) == e.pdf_id);
  }
}

TEST_CASE("default inventory shape") {
  const Inventory& inv = inventory();
  CHECK(inv.table.num_pdfs() == 37);
  CHECK(inv.table.phonemes().size() == 12);
  CHECK(inv.table.is_silence_pdf(inv.table.silence_pdf()));
  for (const auto& p : inv.table.phonemes()) CHECK(inv.table.num_states(p) == 3);
  for (const char* w : {"open", "the", "door", "echo", "night"}) CHECK(inv.lexicon.contains(w));
  CHECK_NOTHROW(inv.lexicon.check_against(inv.table));
  std::set<int> pdfs;
  for (const auto& e : inv.table.entries()) CHECK(pdfs.insert(e.pdf_id).second);
}

TEST_CASE("inventory text round trip and malformed input") {
  const Inventory& inv = inventory();
  const Inventory back = parse_inventory(format_inventory(inv));
  CHECK(format_inventory(back) == format_inventory(inv));
  CHECK(back.lexicon.words() == inv.lexicon.words());

  CHECK(kind_of([] { parse_inventory("a 0 1 2 3 100\n"); }) == ErrorKind::kMalformedFile);
  CHECK(kind_of([] { parse_inventory("a 0 1 2 3 100 200 9\n"); }) == ErrorKind::kMalformedFile);
  CHECK(kind_of([] { parse_inventory("a 0 1 2 3 100 200\nw: b\n"); }) ==
        ErrorKind::kOutOfVocabulary);
  CHECK(kind_of([] { parse_inventory("a 0 1 2 3 100 200\na 0 2 4 5 100 200\n"); }) ==
        ErrorKind::kMalformedFile);
  CHECK(kind_of([] { load_inventory("/nonexistent/inv.txt"); }) == ErrorKind::kFileNotFound);
}

TEST_CASE("reduce_frames") {
  const TargetSequence shortrun{{1, 1, 2, 3, 3, 3, 3}, {"x"}};
  CHECK(reduce_frames(shortrun).pdf_ids == shortrun.pdf_ids);
  CHECK(reduce_frames(shortrun).words == shortrun.words);
  CHECK(reduce_frames({{7, 7, 7, 7, 7, 7}, {}}, 3).pdf_ids == std::vector<int>{7, 7, 7});
  CHECK(reduce_frames({{}, {}}).pdf_ids.empty());
  CHECK(kind_of([] { reduce_frames({{1}, {}}, 2); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("reduce_frames properties on random sequences") {
  const PhonemeTable& t = inventory().table;
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const TargetSequence b{random_pdf_sequence(rng, t), {}};
    const int m = int(rng.uniform_int(3, 6));
    const TargetSequence r = reduce_frames(b, m);
    CHECK(reduce_frames(r, m).pdf_ids == r.pdf_ids);
    CHECK(phoneme_collapse(r.pdf_ids, t) == phoneme_collapse(b.pdf_ids, t));
    CHECK(r.pdf_ids.size() <= b.pdf_ids.size());
    // Subsequence, and no run longer than m.
    std::size_t j = 0;
    for (int v : r.pdf_ids) {
      while (j < b.pdf_ids.size() && b.pdf_ids[j] != v) ++j;
      REQUIRE(j < b.pdf_ids.size());
      ++j;
    }
    int run = 0;
    for (std::size_t i = 0; i < r.pdf_ids.size(); ++i) {
      run = (i > 0 && r.pdf_ids[i] == r.pdf_ids[i - 1]) ? run + 1 : 1;
      CHECK(run <= m);
    }
  }
}

TEST_CASE("phoneme_collapse") {
  const PhonemeTable& t = inventory().table;
  const int sil = t.silence_pdf();
  const int k0 = t.pdf_for("k", 0), k1 = t.pdf_for("k", 1), k2 = t.pdf_for("k", 2);
  CHECK(phoneme_collapse({sil, k0, k0, k1, k2, sil}, t) == std::vector<std::string>{"k"});
  // Two instances: separated by silence, or by a state falling back.
  CHECK(phoneme_collapse({k0, k1, k2, sil, k0}, t) == std::vector<std::string>{"k", "k"});
  CHECK(phoneme_collapse({k0, k1, k2, k0, k1}, t) == std::vector<std::string>{"k", "k"});
  CHECK(phoneme_collapse({sil, sil}, t).empty());
}

TEST_CASE("rendering echo labels eh k ow") {
  const Inventory& inv = inventory();
  Rng rng(3);
  const RenderOptions opts;
  const auto schedule = schedule_words({"echo"}, inv.table, inv.lexicon, opts, rng);
  const Rendering r = render_schedule(schedule, inv.table, opts, rng);
  CHECK(phoneme_collapse(r.frame_labels, inv.table) ==
        std::vector<std::string>{"eh", "k", "ow"});
  CHECK(r.frame_labels.front() == inv.table.silence_pdf());
  CHECK(r.frame_labels.back() == inv.table.silence_pdf());
}

TEST_CASE("synthesize_command") {
  const Inventory& inv = inventory();
  const AudioBuffer a = synthesize_command({"open", "the", "door"}, inv.table, inv.lexicon, 5);
  const AudioBuffer b = synthesize_command({"open", "the", "door"}, inv.table, inv.lexicon, 5);
  CHECK(a.samples == b.samples);
  CHECK(a.sample_rate == 8000);
  CHECK(a.samples.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(synthesize_command({"open"}, inv.table, inv.lexicon, 6).samples != a.samples);
  CHECK(kind_of([&] { synthesize_command({}, inv.table, inv.lexicon, 1); }) ==
        ErrorKind::kEmptyInput);
  CHECK(kind_of([&] { synthesize_command({"zebra"}, inv.table, inv.lexicon, 1); }) ==
        ErrorKind::kOutOfVocabulary);
}

TEST_CASE("split and join") {
  CHECK(split_words("  open  the\tdoor ") == std::vector<std::string>{"open", "the", "door"});
  CHECK(join_words({"open", "the", "door"}) == "open the door");
  CHECK(join_words({}).empty());
}

TEST_CASE("shipped inventory file matches the built-in one") {
  const Inventory shipped = load_inventory(data_dir() / "default_inventory.txt");
  CHECK(format_inventory(shipped) == format_inventory(inventory()));
}
