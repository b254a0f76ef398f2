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

#include <filesystem>
#include <fstream>
#include <set>

#include "csong/acoustic.hpp"
#include "csong/error.hpp"
#include "support.hpp"

using namespace csong;
using csong::testing::inventory;
using csong::testing::random_model;
using csong::testing::random_signal;
using csong::testing::relative_error;
using csong::testing::scratch_dir;
using csong::testing::toy_model;

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

void check_stochastic(const PosteriorMatrix& p) {
  CHECK(p.minCoeff() >= 0.0);
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-6);
}

ToyCorpus small_corpus(std::uint64_t seed, int utterances) {
  CorpusSpec spec;
  spec.utterances = utterances;
  spec.seed = seed;
  return generate_synthetic_corpus(inventory().table, inventory().lexicon, spec);
}

}  // namespace

TEST_CASE("softmax_rows") {
  Eigen::MatrixXd z(3, 4);
  z << 0, 0, 0, 0, 1000, 0, 0, -1000, -3, 1, 2, 0.5;
  const PosteriorMatrix p = softmax_rows(z);
  check_stochastic(p);
  CHECK(p(0, 2) == doctest::Approx(0.25));
  CHECK(p(1, 0) == doctest::Approx(1.0));
  const double denom = std::exp(-3) + std::exp(1) + std::exp(2) + std::exp(0.5);
  CHECK(p(2, 2) == doctest::Approx(std::exp(2) / denom).epsilon(1e-12));
}

TEST_CASE("forward is row-stochastic") {
  const AcousticModel m = random_model(3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const PosteriorMatrix p = forward(m, AudioBuffer(random_signal(2000 + 331 * s, s, 0.8), 8000));
    CHECK(p.cols() == 37);
    CHECK(p.rows() == num_frames(2000 + 331 * Eigen::Index(s), 200, 80));
    check_stochastic(p);
  }
  CHECK(kind_of([&] { forward(m, AudioBuffer(random_signal(100, 1), 8000)); }) ==
        ErrorKind::kAudioTooShort);
}

TEST_CASE("zero final layer gives uniform posteriors") {
  AcousticModel m = random_model(4);
  m.layers.back().weight.setZero();
  m.layers.back().bias.setZero();
  const PosteriorMatrix p = forward(m, AudioBuffer(random_signal(1600, 2), 8000));
  CHECK((p.array() - 1.0 / 37.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("partial rows equal the full pass") {
  const AcousticModel m = random_model(5);
  const AcousticRunner runner(m);
  const Eigen::VectorXd x = random_signal(4000, 6);
  const Eigen::MatrixXd full = runner.logits(x, 0, runner.num_frames(x.size()));
  for (auto [b, e] : {std::pair<Eigen::Index, Eigen::Index>{0, 3}, {10, 20}, {45, 48}}) {
    const Eigen::MatrixXd part = runner.logits(x, b, e);
    CHECK((part - full.middleRows(b, e - b)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("input_gradient") {
  const AcousticModel m = random_model(8);
  const AcousticRunner runner(m);
  const Eigen::VectorXd x = random_signal(4000, 9);
  const AudioBuffer audio(x, 8000);
  const Eigen::Index frames = runner.num_frames(x.size());
  Rng rng(10);
  Eigen::MatrixXd up(frames, 37);
  for (Eigen::Index i = 0; i < up.size(); ++i) up.data()[i] = rng.uniform(-1.0, 1.0);

  SUBCASE("zero upstream") {
    const Eigen::VectorXd g = input_gradient(m, audio, Eigen::MatrixXd::Zero(frames, 37));
    CHECK(g.size() == x.size());
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("shape mismatch") {
    CHECK(kind_of([&] { input_gradient(m, audio, Eigen::MatrixXd::Zero(frames, 5)); }) ==
          ErrorKind::kShapeMismatch);
  }
  for (GradientSpace space : {GradientSpace::kLogits, GradientSpace::kProbabilities}) {
    CAPTURE(int(space));
    auto loss = [&](const Eigen::VectorXd& s) {
      const Eigen::MatrixXd z = runner.logits(s, 0, frames);
      return (space == GradientSpace::kLogits ? z : softmax_rows(z)).cwiseProduct(up).sum();
    };
    const Eigen::VectorXd g = input_gradient(m, audio, up, space);
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
      const Eigen::Index t = Eigen::Index(rng.uniform_int(0, x.size() - 1));
      Eigen::VectorXd xp = x, xm = x;
      xp[t] += 1e-4;
      xm[t] -= 1e-4;
      worst = std::max(worst, relative_error(g[t], (loss(xp) - loss(xm)) / 2e-4, 1e-3));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("synthetic corpus") {
  const ToyCorpus a = small_corpus(11, 30);
  const ToyCorpus b = small_corpus(11, 30);
  REQUIRE(a.utterances.size() == 30);
  CHECK(a.num_pdfs == 37);
  for (std::size_t i = 0; i < a.utterances.size(); ++i) {
    const Utterance& u = a.utterances[i];
    CHECK(u.audio.samples == b.utterances[i].audio.samples);
    CHECK(u.labels == b.utterances[i].labels);
    CHECK(Eigen::Index(u.labels.size()) == num_frames(u.audio.size(), 200, 80));
    for (int l : u.labels) CHECK((l >= 0 && l < 37));
    if (!u.words.empty()) {
      CHECK(std::set<int>(u.labels.begin(), u.labels.end()).size() >= 4);
    } else {
      CHECK(std::set<int>(u.labels.begin(), u.labels.end()).size() == 1);
    }
  }
  CHECK(small_corpus(12, 30).utterances[0].audio.samples != a.utterances[0].audio.samples);
}

TEST_CASE("training is deterministic and zero epochs is chance level") {
  const ToyCorpus corpus = small_corpus(21, 40);
  TrainConfig cfg;
  cfg.epochs = 1;
  const std::string a = serialize_model(train_toy_model(corpus, cfg));
  const std::string b = serialize_model(train_toy_model(corpus, cfg));
  CHECK(a == b);
  cfg.seed = 8;
  CHECK(serialize_model(train_toy_model(corpus, cfg)) != a);

  cfg.epochs = 0;
  TrainReport report;
  const AcousticModel init = train_toy_model(corpus, cfg, &report);
  MESSAGE("untrained held-out accuracy " << report.heldout_accuracy);
  CHECK(report.epoch_loss.empty());
  // Chance is 1/37; silence-heavy labels can push a random argmax either side of it.
  CHECK(report.heldout_accuracy < 0.1);

  CHECK(kind_of([&] { train_toy_model(ToyCorpus{}, cfg); }) == ErrorKind::kEmptyInput);
}

TEST_CASE("trained toy model") {
  const AcousticModel& m = toy_model();
  CHECK(m.num_pdfs() == 37);
  CHECK(m.input_dim() == 65);
  // Fresh utterances the model never saw.
  const ToyCorpus fresh = small_corpus(4242, 40);
  const double acc = frame_accuracy(m, fresh.utterances);
  MESSAGE("fresh-corpus frame accuracy " << acc);
  CHECK(acc >= 0.95);
}

TEST_CASE("model file") {
  const AcousticModel m = random_model(12);
  const auto dir = scratch_dir("acoustic");
  const auto path = dir / "m.bin";
  save_model(m, path);
  const AcousticModel back = load_model(path);
  CHECK(serialize_model(back) == serialize_model(m));
  const AudioBuffer x(random_signal(1200, 13), 8000);
  CHECK(forward(back, x) == forward(m, x));

  const std::string bytes = serialize_model(m);
  CHECK(kind_of([&] { parse_model(bytes.substr(0, bytes.size() - 9)); }) ==
        ErrorKind::kCorruptedPayload);
  CHECK(kind_of([&] { parse_model(bytes + "x"); }) == ErrorKind::kCorruptedPayload);
  std::string v2 = bytes;
  v2.replace(v2.find("version 1"), 9, "version 7");
  CHECK(kind_of([&] { parse_model(v2); }) == ErrorKind::kVersionMismatch);
  CHECK(kind_of([&] { parse_model("hello"); }) == ErrorKind::kMalformedFile);
  CHECK(kind_of([&] { load_model(dir / "missing.bin"); }) == ErrorKind::kFileNotFound);
  CHECK(kind_of([&] { save_model(m, "/nonexistent/dir/m.bin"); }) == ErrorKind::kUnwritablePath);

  AcousticModel broken = m;
  broken.layers[1].weight.resize(16, 3);
  CHECK(kind_of([&] { broken.validate(); }) == ErrorKind::kShapeMismatch);
}
