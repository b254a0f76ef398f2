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

#include "csong/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "csong/defense.hpp"
#include "csong/random.hpp"

namespace csong {

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::kLengthMismatch, "pearson: lengths differ");
  if (x.size() < 2) throw Error(ErrorKind::kEmptyInput, "pearson: need at least two values");
  const Eigen::ArrayXd xc = x.array() - x.mean();
  const Eigen::ArrayXd yc = y.array() - y.mean();
  const double sxx = xc.square().sum();
  const double syy = yc.square().sum();
  if (sxx == 0.0 || syy == 0.0)
    throw Error(ErrorKind::kZeroPower, "correlation: constant feature vector");
  const double r = (xc * yc).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

Eigen::VectorXd ranks(const Eigen::VectorXd& x) {
  std::vector<Eigen::Index> order(std::size_t(x.size()));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
  Eigen::VectorXd r(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double correlation(const AudioBuffer& a, const AudioBuffer& b, const FeatureConfig& cfg,
                   CorrelationMode mode) {
  if (a.sample_rate != b.sample_rate)
    throw Error(ErrorKind::kRateMismatch, "correlation: rates differ");
  const Eigen::Index n = std::min(a.size(), b.size());
  const AudioBuffer at(a.samples.head(n), a.sample_rate);
  const AudioBuffer bt(b.samples.head(n), b.sample_rate);
  const Eigen::MatrixXd fa = extract_mfcc(at, cfg).values;
  const Eigen::MatrixXd fb = extract_mfcc(bt, cfg).values;
  if (fa.size() == 0) throw Error(ErrorKind::kAudioTooShort, "correlation: audio shorter than a frame");
  Eigen::VectorXd x = fa.reshaped();
  Eigen::VectorXd y = fb.reshaped();
  if (mode == CorrelationMode::kSpearman) {
    x = ranks(x);
    y = ranks(y);
  }
  return pearson(x, y);
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    char param[40];
    std::snprintf(param, sizeof param, "%.6g", r.param);
    out << param << ',' << cell(r.corr_song) << ',' << cell(r.corr_cmd) << ','
        << cell(r.success_pct) << ',' << cell(r.detect_clean_pct) << ','
        << cell(r.detect_wta_pct) << ',' << cell(r.detect_waa_pct) << ',' << r.trials << ','
        << r.seed << '\n';
  }
  return out.str();
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo) || count < 1)
    throw Error(ErrorKind::kInvalidArgument, "log_spaced: need 0 < lo <= hi and count >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[std::size_t(i)] =
        count == 1 ? lo : lo * std::pow(hi / lo, double(i) / double(count - 1));
  return out;
}

std::vector<SweepRow> run_noise_sweep(const AudioBuffer& song,
                                      const std::vector<std::string>& command,
                                      const AcousticModel& model, const PhonemeTable& table,
                                      const Lexicon& lexicon, const NoiseSweepConfig& cfg) {
  if (cfg.noise_bounds.empty()) throw Error(ErrorKind::kEmptyInput, "sweep: empty noise grid");
  if (cfg.trials < 1) throw Error(ErrorKind::kInvalidArgument, "sweep: trials must be >= 1");
  const CraftTarget t = prepare_target(command, model, table, lexicon, cfg.craft.min_repeat,
                                       derive_seed(cfg.seed, 0x545453));
  const int shift = model.features.shift_samples(model.sample_rate);

  std::vector<SweepRow> rows;
  for (double n_bound : cfg.noise_bounds) {
    CraftConfig cc = cfg.craft;
    cc.noise_bound = n_bound;
    cc.seed = cfg.seed;
    cc.eval_noise_draws = cfg.trials;
    const CraftResult r = craft_waa(song, t.target, model, table, lexicon, cc, cfg.eval_channel);

    // Command audio against the stretch of the adversarial song it was aimed at.
    Eigen::Index start = Eigen::Index(r.offset - t.command_lead_frames) * shift;
    Eigen::Index skip = 0;
    if (start < 0) {
      skip = -start;
      start = 0;
    }
    const Eigen::Index len = std::min(t.command_audio.size() - skip, song.size() - start);
    const AudioBuffer excerpt(r.adversarial.samples.segment(start, len), song.sample_rate);
    const AudioBuffer cmd(t.command_audio.samples.segment(skip, len), song.sample_rate);

    SweepRow row;
    row.param = n_bound;
    row.corr_song = correlation(r.adversarial, song, model.features, cfg.mode);
    row.corr_cmd = correlation(excerpt, cmd, model.features, cfg.mode);
    row.success_pct = 100.0 * r.noisy_success_fraction.value_or(0.0);
    row.trials = cfg.trials;
    row.seed = cfg.seed;
    rows.push_back(row);
  }
  return rows;
}

SampleLabel parse_sample_label(const std::string& text) {
  if (text == "clean") return SampleLabel::kClean;
  if (text == "wta") return SampleLabel::kWta;
  if (text == "waa") return SampleLabel::kWaa;
  throw Error(ErrorKind::kInvalidArgument, "unknown sample label '" + text + "'");
}

std::string to_string(SampleLabel label) {
  switch (label) {
    case SampleLabel::kClean: return "clean";
    case SampleLabel::kWta: return "wta";
    case SampleLabel::kWaa: return "waa";
  }
  return "clean";
}

std::vector<SweepRow> run_defense_sweep(const std::vector<LabeledSample>& samples,
                                        const AcousticModel& model, const PhonemeTable& table,
                                        const Lexicon& lexicon, DefenseKind defense,
                                        const std::vector<double>& grid, int trials,
                                        std::uint64_t seed) {
  if (samples.empty()) throw Error(ErrorKind::kEmptyInput, "defense sweep: no samples");
  if (grid.empty()) throw Error(ErrorKind::kEmptyInput, "defense sweep: empty parameter grid");
  if (trials < 1) throw Error(ErrorKind::kInvalidArgument, "defense sweep: trials must be >= 1");
  const int runs = defense == DefenseKind::kTurbulence ? trials : 1;

  std::vector<SweepRow> rows;
  for (double p : grid) {
    int hits[3] = {0, 0, 0};
    int total[3] = {0, 0, 0};
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const int k = int(samples[s].label);
      for (int t = 0; t < runs; ++t) {
        const DefenseVerdict v =
            defense == DefenseKind::kTurbulence
                ? detect_turbulence(samples[s].audio, model, table, lexicon, p,
                                    derive_seed(derive_seed(seed, std::uint64_t(t)), s))
                : detect_squeezing(samples[s].audio, model, table, lexicon, p);
        hits[k] += v.detected ? 1 : 0;
        ++total[k];
      }
    }
    const auto rate = [&](int k) -> std::optional<double> {
      if (total[k] == 0) return std::nullopt;
      return 100.0 * double(hits[k]) / double(total[k]);
    };
    SweepRow row;
    row.param = p;
    row.detect_clean_pct = rate(0);
    row.detect_wta_pct = rate(1);
    row.detect_waa_pct = rate(2);
    row.trials = runs;
    row.seed = seed;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace csong
