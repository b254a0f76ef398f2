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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numbers>
#include <vector>

#include "csong/audio.hpp"
#include "csong/error.hpp"
#include "support.hpp"

using namespace csong;
using csong::testing::random_signal;
using csong::testing::scratch_dir;

namespace {

Eigen::VectorXd tone(double hz, int rate, Eigen::Index n, double amp = 1.0) {
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * double(i) / rate);
  return x;
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(char((v >> (8 * i)) & 0xff));
}
void put_u16(std::ofstream& out, std::uint16_t v) {
  out.put(char(v & 0xff));
  out.put(char(v >> 8));
}

// Hand-rolled RIFF writer used as an oracle for the reader.
void write_raw_wav(const std::filesystem::path& path, int channels, int rate, int bits,
                   const std::vector<std::int16_t>& pcm, std::uint16_t format = 1) {
  std::ofstream out(path, std::ios::binary);
  const std::uint32_t data_bytes = std::uint32_t(pcm.size() * 2);
  out.write("RIFF", 4);
  put_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, std::uint16_t(channels));
  put_u32(out, std::uint32_t(rate));
  put_u32(out, std::uint32_t(rate * channels * bits / 8));
  put_u16(out, std::uint16_t(channels * bits / 8));
  put_u16(out, std::uint16_t(bits));
  out.write("data", 4);
  put_u32(out, data_bytes);
  for (auto s : pcm) put_u16(out, std::uint16_t(s));
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST_CASE("read_wav: one second of 8 kHz mono") {
  const auto path = scratch_dir("audio") / "one_second.wav";
  std::vector<std::int16_t> pcm(8000);
  for (std::size_t i = 0; i < pcm.size(); ++i) pcm[i] = std::int16_t(int(i % 200) - 100);
  write_raw_wav(path, 1, 8000, 16, pcm);
  const AudioBuffer a = read_wav(path);
  CHECK(a.size() == 8000);
  CHECK(a.sample_rate == 8000);
  CHECK(a.samples[0] == doctest::Approx(-100.0 / 32768.0));
  CHECK(a.samples[150] == doctest::Approx(50.0 / 32768.0));
}

TEST_CASE("read_wav: all-zero PCM reads as exact zeros") {
  const auto path = scratch_dir("audio") / "zeros.wav";
  write_raw_wav(path, 1, 8000, 16, std::vector<std::int16_t>(400, 0));
  const AudioBuffer a = read_wav(path);
  CHECK(a.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("read_wav: rejects stereo, non-PCM, missing and malformed files") {
  const auto dir = scratch_dir("audio");
  write_raw_wav(dir / "stereo.wav", 2, 8000, 16, std::vector<std::int16_t>(200, 1));
  CHECK(kind_of([&] { read_wav(dir / "stereo.wav"); }) == ErrorKind::kUnsupportedChannels);

  write_raw_wav(dir / "float.wav", 1, 8000, 16, std::vector<std::int16_t>(200, 1), 3);
  CHECK(kind_of([&] { read_wav(dir / "float.wav"); }) == ErrorKind::kUnsupportedEncoding);

  CHECK(kind_of([&] { read_wav(dir / "does_not_exist.wav"); }) == ErrorKind::kFileNotFound);

  {
    std::ofstream out(dir / "garbage.wav", std::ios::binary);
    out << "this is not a wave file at all";
  }
  CHECK(kind_of([&] { read_wav(dir / "garbage.wav"); }) == ErrorKind::kMalformedFile);
}

TEST_CASE("write_wav / read_wav round trip") {
  const auto dir = scratch_dir("audio");
  SUBCASE("440 Hz tone") {
    const AudioBuffer a(tone(440.0, 8000, 8000, 0.9), 8000);
    write_wav(a, dir / "tone.wav");
    const AudioBuffer b = read_wav(dir / "tone.wav");
    CHECK(b.sample_rate == 8000);
    REQUIRE(b.size() == a.size());
    CHECK((a.samples - b.samples).cwiseAbs().maxCoeff() <= 1.0 / 32768.0);
  }
  SUBCASE("rate is preserved") {
    const AudioBuffer a(random_signal(500, 3), 22050);
    write_wav(a, dir / "rate.wav");
    CHECK(read_wav(dir / "rate.wav").sample_rate == 22050);
  }
  SUBCASE("random buffers") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const AudioBuffer a(random_signal(300 + Eigen::Index(s) * 17, 100 + s, 1.0), 8000);
      write_wav(a, dir / "prop.wav");
      const AudioBuffer b = read_wav(dir / "prop.wav");
      CHECK((a.samples - b.samples).cwiseAbs().maxCoeff() <= 1.0 / 32768.0);
    }
  }
  SUBCASE("empty buffer is rejected") {
    CHECK(kind_of([&] { write_wav(AudioBuffer(Eigen::VectorXd(), 8000), dir / "e.wav"); }) ==
          ErrorKind::kEmptyInput);
  }
}

TEST_CASE("signal_power") {
  CHECK(signal_power(AudioBuffer(Eigen::VectorXd::Constant(100, 0.5), 8000)) ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK(signal_power(AudioBuffer(Eigen::VectorXd::Zero(100), 8000)) == 0.0);
  // 100 Hz at 8 kHz: 80 samples per period, 10 whole periods.
  CHECK(signal_power(AudioBuffer(tone(100.0, 8000, 800), 8000)) ==
        doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("snr_db") {
  const AudioBuffer s(Eigen::VectorXd::Constant(64, 1.0), 8000);
  const AudioBuffer n(Eigen::VectorXd::Constant(64, 0.1), 8000);
  CHECK(std::abs(snr_db(s, n) - 20.0) <= 1e-9);
  CHECK(std::abs(snr_db(s, s)) <= 1e-12);

  // 14 dB leaves the noise at 10^-1.4 = 3.98% of the signal power.
  const double ratio = std::pow(10.0, -14.0 / 10.0);
  CHECK(ratio == doctest::Approx(0.0398).epsilon(1e-3));
  const AudioBuffer n14(Eigen::VectorXd::Constant(64, std::sqrt(ratio)), 8000);
  CHECK(std::abs(snr_db(s, n14) - 14.0) <= 1e-9);

  SUBCASE("antisymmetry") {
    for (std::uint64_t k = 0; k < 50; ++k) {
      const AudioBuffer a(random_signal(256, 2 * k + 1, 0.9), 8000);
      const AudioBuffer b(random_signal(256, 2 * k + 2, 0.05), 8000);
      CHECK(std::abs(snr_db(a, b) + snr_db(b, a)) <= 1e-9);
    }
  }
  SUBCASE("template form agrees") {
    const Eigen::VectorXd a = random_signal(128, 5);
    const Eigen::VectorXd b = random_signal(128, 6, 0.01);
    CHECK(snr_db(a, b) == doctest::Approx(snr_db(AudioBuffer(a, 8000), AudioBuffer(b, 8000))));
    const Eigen::VectorXf af = a.cast<float>();
    const Eigen::VectorXf bf = b.cast<float>();
    CHECK(double(snr_db(af, bf)) == doctest::Approx(snr_db(a, b)).epsilon(1e-5));
  }
  SUBCASE("errors") {
    const AudioBuffer z(Eigen::VectorXd::Zero(64), 8000);
    CHECK(kind_of([&] { snr_db(s, z); }) == ErrorKind::kZeroPower);
    CHECK(std::isinf(snr_db(z, s)));
    const AudioBuffer shorter(Eigen::VectorXd::Constant(10, 1.0), 8000);
    CHECK(kind_of([&] { snr_db(s, shorter); }) == ErrorKind::kLengthMismatch);
  }
}

TEST_CASE("downsample") {
  const AudioBuffer one_second(random_signal(8000, 9), 8000);
  SUBCASE("ratio 0.7 at 8 kHz gives 5600 samples/s") {
    const AudioBuffer d = downsample(one_second, 0.7);
    CHECK(d.sample_rate == 5600);
    CHECK(std::abs(double(d.size()) - 5600.0) <= 1.0);
  }
  SUBCASE("ratio 1 is the identity") {
    const AudioBuffer d = downsample(one_second, 1.0);
    CHECK(d.sample_rate == 8000);
    CHECK(d.samples == one_second.samples);
  }
  SUBCASE("ratio 0.5 halves the length") {
    const AudioBuffer d = downsample(one_second, 0.5);
    CHECK(std::abs(double(d.size()) - 4000.0) <= 1.0);
  }
  SUBCASE("in-band tone survives, out-of-band tone is removed") {
    const AudioBuffer low(tone(300.0, 8000, 8000, 0.5), 8000);
    const AudioBuffer d = downsample(low, 0.5);
    const Eigen::VectorXd expect = tone(300.0, 4000, d.size(), 0.5);
    // Ignore the filter's edge transients.
    const Eigen::Index a = 100, len = d.size() - 200;
    CHECK((d.samples.segment(a, len) - expect.segment(a, len)).cwiseAbs().maxCoeff() < 0.01);

    const AudioBuffer high(tone(3500.0, 8000, 8000, 0.5), 8000);
    const AudioBuffer dh = downsample(high, 0.5);
    CHECK(std::sqrt(mean_square(dh.samples.segment(a, len))) < 0.005);
  }
  SUBCASE("bad ratios") {
    CHECK(kind_of([&] { downsample(one_second, 0.0); }) == ErrorKind::kOutOfRange);
    CHECK(kind_of([&] { downsample(one_second, 1.5); }) == ErrorKind::kOutOfRange);
  }
}

TEST_CASE("resample up and load_audio") {
  const AudioBuffer a(tone(200.0, 4000, 4000, 0.5), 4000);
  const AudioBuffer up = resample(a, 8000);
  CHECK(up.sample_rate == 8000);
  CHECK(std::abs(double(up.size()) - 8000.0) <= 1.0);
  const Eigen::VectorXd expect = tone(200.0, 8000, up.size(), 0.5);
  CHECK((up.samples.segment(200, 7000) - expect.segment(200, 7000)).cwiseAbs().maxCoeff() < 0.02);

  // Pass band stays flat: a 1500 Hz tone survives 5600 -> 8000 within 1%.
  const AudioBuffer b(tone(1500.0, 5600, 5600, 0.5), 5600);
  const AudioBuffer ub = resample(b, 8000);
  const Eigen::VectorXd eb = tone(1500.0, 8000, ub.size(), 0.5);
  CHECK((ub.samples.segment(200, 7000) - eb.segment(200, 7000)).cwiseAbs().maxCoeff() < 0.005);

  const auto path = scratch_dir("audio") / "sixteen_k.wav";
  write_wav(AudioBuffer(tone(300.0, 16000, 16000, 0.5), 16000), path);
  const AudioBuffer loaded = load_audio(path);
  CHECK(loaded.sample_rate == kCanonicalRate);
  CHECK(std::abs(double(loaded.size()) - 8000.0) <= 1.0);
}

TEST_CASE("mix") {
  const AudioBuffer a(random_signal(100, 11, 0.9), 8000);
  const AudioBuffer zeros(Eigen::VectorXd::Zero(100), 8000);
  CHECK(mix(a, zeros).samples == a.samples);
  const AudioBuffer big(Eigen::VectorXd::Constant(4, 0.8), 8000);
  CHECK(mix(big, big).samples == Eigen::VectorXd::Constant(4, 1.0));
  CHECK(mix(a, negate(a)).samples.cwiseAbs().maxCoeff() == 0.0);

  for (std::uint64_t k = 0; k < 50; ++k) {
    const AudioBuffer x(random_signal(64, 300 + k, 1.0), 8000);
    const AudioBuffer y(random_signal(64, 400 + k, 1.0), 8000);
    CHECK(mix(x, y).samples.cwiseAbs().maxCoeff() <= 1.0);
  }
  CHECK(kind_of([&] { mix(a, AudioBuffer(Eigen::VectorXd::Zero(5), 8000)); }) ==
        ErrorKind::kLengthMismatch);
  CHECK(kind_of([&] { mix(a, AudioBuffer(Eigen::VectorXd::Zero(100), 16000)); }) ==
        ErrorKind::kRateMismatch);
}
