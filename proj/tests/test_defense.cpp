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

#include "csong/crafter.hpp"
#include "csong/defense.hpp"
#include "csong/error.hpp"
#include "csong/synth.hpp"
#include "support.hpp"

using namespace csong;
using csong::testing::inventory;
using csong::testing::random_signal;
using csong::testing::toy_model;

namespace {

const std::vector<std::vector<std::string>>& commands() {
  static const std::vector<std::vector<std::string>> c = {
      {"open", "the", "door"}, {"echo"}, {"night"}};
  return c;
}

const CraftResult& wta_echo() {
  static const CraftResult r = [] {
    const Inventory& inv = inventory();
    return craft_wta(render_music(MusicOptions{}, 11), {"echo"}, toy_model(), inv.table,
                     inv.lexicon, CraftConfig{});
  }();
  return r;
}

}  // namespace

TEST_CASE("turbulence noise hits the requested SNR") {
  const AudioBuffer a(random_signal(5000, 1, 0.4), 8000);
  for (double db : {-5.0, 0.0, 15.0, 42.5}) {
    const AudioBuffer n = turbulence_noise(a, db, 3);
    CHECK(n.size() == a.size());
    CHECK(std::abs(snr_db(a, n) - db) < 1e-9);
  }
  CHECK(turbulence_noise(a, 15.0, 3).samples == turbulence_noise(a, 15.0, 3).samples);
  CHECK(turbulence_noise(a, 15.0, 3).samples != turbulence_noise(a, 15.0, 4).samples);
  CHECK(turbulence_noise(a, INFINITY, 3).samples == Eigen::VectorXd::Zero(a.size()));

  const AudioBuffer silence(Eigen::VectorXd::Zero(4000), 8000);
  CHECK_THROWS_AS(turbulence_noise(silence, 15.0, 1), Error);
  CHECK_THROWS_AS(turbulence_noise(a, NAN, 1), Error);
}

TEST_CASE("squeeze") {
  const AudioBuffer a(random_signal(4001, 2, 0.4), 8000);
  CHECK(squeeze(a, 1.0).samples == a.samples);
  for (double r : {0.3, 0.5, 0.7, 0.9}) {
    const AudioBuffer s = squeeze(a, r);
    CHECK(s.size() == a.size());
    CHECK(s.sample_rate == 8000);
  }
  // A low tone well inside the squeezed band survives; the residual comes from
  // linear interpolation in the decimation step.
  Eigen::VectorXd tone(8000);
  for (Eigen::Index i = 0; i < tone.size(); ++i) tone[i] = 0.5 * std::sin(2 * M_PI * 700.0 * double(i) / 8000.0);
  const Eigen::VectorXd back = squeeze(AudioBuffer(tone, 8000), 0.7).samples;
  CHECK((back - tone).segment(400, 7200).cwiseAbs().maxCoeff() < 0.025);
  for (double r : {0.0, -0.5, 1.01})
    CHECK_THROWS_AS(squeeze(a, r), Error);
}

TEST_CASE("identity transforms never detect") {
  const Inventory& inv = inventory();
  const AcousticModel& m = toy_model();
  const AudioBuffer a = synthesize_command({"open", "the", "door"}, inv.table, inv.lexicon, 3);
  const DefenseVerdict sq = detect_squeezing(a, m, inv.table, inv.lexicon, 1.0);
  CHECK_FALSE(sq.detected);
  CHECK(sq.text1 == sq.text2);
  const DefenseVerdict tb = detect_turbulence(a, m, inv.table, inv.lexicon, INFINITY, 0);
  CHECK_FALSE(tb.detected);
  CHECK(tb.text1 == std::vector<std::string>{"open", "the", "door"});

  const AudioBuffer silence(Eigen::VectorXd::Zero(8000), 8000);
  CHECK_THROWS_AS(detect_turbulence(silence, m, inv.table, inv.lexicon, 15.0, 0), Error);
}

TEST_CASE("clean commands pass both defenses") {
  const Inventory& inv = inventory();
  const AcousticModel& m = toy_model();
  int squeezed = 0, turbulent = 0;
  const int n = 30;
  for (int i = 0; i < n; ++i) {
    const AudioBuffer a = synthesize_command(commands()[std::size_t(i % 3)], inv.table, inv.lexicon,
                                             std::uint64_t(2000 + i));
    squeezed += detect_squeezing(a, m, inv.table, inv.lexicon, 0.7).detected;
    turbulent += detect_turbulence(a, m, inv.table, inv.lexicon, 15.0, std::uint64_t(i)).detected;
  }
  MESSAGE("clean false positives: squeeze " << squeezed << "/" << n << ", turbulence "
                                            << turbulent << "/" << n);
  CHECK(squeezed <= n / 10);
  CHECK(turbulent <= n / 10);
}

TEST_CASE("a WTA sample is flagged") {
  const Inventory& inv = inventory();
  const AcousticModel& m = toy_model();
  const CraftResult& r = wta_echo();
  REQUIRE(r.clean_success);
  const DefenseVerdict sq = detect_squeezing(r.adversarial, m, inv.table, inv.lexicon, 0.7);
  CHECK(sq.text1 == std::vector<std::string>{"echo"});
  CHECK(sq.detected);
  int hits = 0;
  for (std::uint64_t s = 0; s < 10; ++s)
    hits += detect_turbulence(r.adversarial, m, inv.table, inv.lexicon, 15.0, s).detected;
  CHECK(hits >= 9);

  // Verdicts are pure functions of their inputs.
  const DefenseVerdict again = detect_turbulence(r.adversarial, m, inv.table, inv.lexicon, 15.0, 4);
  const DefenseVerdict first = detect_turbulence(r.adversarial, m, inv.table, inv.lexicon, 15.0, 4);
  CHECK(again.text2 == first.text2);
  CHECK(again.detected == (again.text1 != again.text2));
}

TEST_CASE("verdict CSV") {
  CHECK(verdict_csv_header() == "input,defense,parameter,text1,text2,detected");
  DefenseVerdict v;
  v.defense = "squeezing";
  v.parameter = 0.7;
  v.text1 = {"open", "the", "door"};
  v.text2 = {"open"};
  v.detected = true;
  CHECK(format_verdict_csv("a.wav", v) == "a.wav,squeezing,0.7,open the door,open,1");
  v.text2 = v.text1;
  v.detected = false;
  v.defense = "turbulence";
  v.parameter = 15;
  CHECK(format_verdict_csv("b.wav", v) == "b.wav,turbulence,15,open the door,open the door,0");
}
