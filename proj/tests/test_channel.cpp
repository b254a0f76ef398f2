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

#include "csong/channel.hpp"
#include "csong/error.hpp"
#include "support.hpp"

using namespace csong;
using csong::testing::random_signal;

TEST_CASE("noiseless channel") {
  ChannelConfig cfg;
  CHECK(cfg.is_noiseless());
  CHECK(sample_noise(500, cfg, 3).samples == Eigen::VectorXd::Zero(500));
  const AudioBuffer a(random_signal(500, 1, 0.9), 8000);
  CHECK(apply_channel(a, cfg, 0).samples == a.samples);
}

TEST_CASE("uniform noise range and statistics") {
  ChannelConfig cfg;
  cfg.noise_bound = 0.05;
  cfg.seed = 123;
  const Eigen::VectorXd n = sample_noise(1000000, cfg, 0).samples;
  CHECK(n.cwiseAbs().maxCoeff() < 0.05);
  CHECK(std::abs(n.mean()) <= 3.0 * 0.05 / std::sqrt(3.0e6));
  // Variance of U(-N, N) is N^2 / 3.
  CHECK(mean_square(n) == doctest::Approx(0.05 * 0.05 / 3.0).epsilon(0.01));
}

TEST_CASE("tiny bounds stay strictly inside") {
  ChannelConfig cfg;
  cfg.noise_bound = 1e-300;
  const Eigen::VectorXd n = sample_noise(1000, cfg, 0).samples;
  CHECK(n.cwiseAbs().maxCoeff() < 1e-300);
}

TEST_CASE("determinism and independence of draws") {
  ChannelConfig cfg;
  cfg.noise_bound = 0.2;
  cfg.seed = 9;
  const Eigen::VectorXd a = sample_noise(20000, cfg, 4).samples;
  CHECK(sample_noise(20000, cfg, 4).samples == a);
  const Eigen::VectorXd b = sample_noise(20000, cfg, 5).samples;
  CHECK(b != a);
  const double r = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
  CHECK(std::abs(r) < 0.03);  // ~4 sigma for 20000 samples
  ChannelConfig other = cfg;
  other.seed = 10;
  CHECK(sample_noise(20000, other, 4).samples != a);
}

TEST_CASE("channel SNR matches the uniform-noise power") {
  Eigen::VectorXd x(80000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 0.3 * std::sin(0.05 * double(i));
  const AudioBuffer a(x, 8000);
  for (double target : {0.0, 5.0, 10.0, 20.0}) {
    ChannelConfig cfg;
    cfg.noise_bound = noise_bound_for_snr(signal_power(a), target);
    cfg.seed = 2;
    const AudioBuffer noise = sample_noise(a.size(), cfg, 0);
    CHECK(std::abs(snr_db(a, noise) - target) < 0.5);
    const AudioBuffer y = apply_channel(a, cfg, 0);
    CHECK(y.samples.cwiseAbs().maxCoeff() <= 1.0);
  }
}

TEST_CASE("apply_channel stays in range") {
  ChannelConfig cfg;
  cfg.noise_bound = 0.9;
  for (std::uint64_t d = 0; d < 20; ++d) {
    const AudioBuffer a(random_signal(300, d, 1.0), 8000);
    CHECK(apply_channel(a, cfg, d).samples.cwiseAbs().maxCoeff() <= 1.0);
  }
}

TEST_CASE("captured noise") {
  Eigen::VectorXd rec(4);
  rec << 0.1, -0.4, 0.2, 0.0;
  ChannelConfig cfg;
  cfg.captured_noise = AudioBuffer(rec, 8000);
  CHECK_FALSE(cfg.is_noiseless());

  SUBCASE("looped at recorded level when no bound is given") {
    Eigen::VectorXd want(10);
    want << 0.1, -0.4, 0.2, 0.0, 0.1, -0.4, 0.2, 0.0, 0.1, -0.4;
    CHECK(sample_noise(10, cfg, 0).samples == want);
    CHECK(sample_noise(10, cfg, 7).samples == want);
  }
  SUBCASE("scaled so the peak is at most N") {
    cfg.noise_bound = 0.2;
    const Eigen::VectorXd n = sample_noise(8, cfg, 0).samples;
    CHECK(n.cwiseAbs().maxCoeff() == doctest::Approx(0.2));
    CHECK(n[0] == doctest::Approx(0.05));
    cfg.noise_bound = 0.5;
    CHECK(sample_noise(4, cfg, 0).samples == rec);
  }
  SUBCASE("empty recording") {
    cfg.captured_noise = AudioBuffer(Eigen::VectorXd(0), 8000);
    CHECK_THROWS_AS(sample_noise(4, cfg, 0), Error);
  }
}

TEST_CASE("validation") {
  ChannelConfig cfg;
  cfg.noise_bound = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.noise_bound = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.noise_bound = 0.1;
  CHECK_THROWS_AS(sample_noise(0, cfg, 0), Error);
}

TEST_CASE("noise_bound_for_snr") {
  CHECK(noise_bound_for_snr(1.0 / 3.0, 0.0) == doctest::Approx(1.0));
  CHECK(noise_bound_for_snr(0.3, 10.0) == doctest::Approx(std::sqrt(0.09)));
}
