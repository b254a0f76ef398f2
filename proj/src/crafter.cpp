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

#include "csong/crafter.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "csong/random.hpp"

namespace csong {

void CraftConfig::validate() const {
  if (!(perturbation_bound >= 0.0 && perturbation_bound <= 1.0))
    throw Error(ErrorKind::kOutOfRange, "craft: perturbation bound must lie in [0, 1]");
  if (!(noise_bound >= 0.0 && noise_bound < 1.0))
    throw Error(ErrorKind::kOutOfRange, "craft: noise bound must lie in [0, 1)");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error(ErrorKind::kInvalidArgument, "craft: learning rate must be positive");
  if (max_iters < 0) throw Error(ErrorKind::kInvalidArgument, "craft: max_iters must be >= 0");
  if (noise_draws_per_iter < 1)
    throw Error(ErrorKind::kInvalidArgument, "craft: noise_draws_per_iter must be >= 1");
  if (eval_noise_draws < 1)
    throw Error(ErrorKind::kInvalidArgument, "craft: eval_noise_draws must be >= 1");
  if (confirm_iters < 1)
    throw Error(ErrorKind::kInvalidArgument, "craft: confirm_iters must be >= 1");
  if (min_repeat < 3) throw Error(ErrorKind::kInvalidArgument, "craft: min_repeat must be >= 3");
}

int pdf_mismatch(const std::vector<int>& m, const std::vector<int>& target, int offset) {
  if (offset < 0 || std::size_t(offset) + target.size() > m.size())
    throw Error(ErrorKind::kOutOfRange, "pdf_mismatch: target does not fit at this offset");
  int count = 0;
  for (std::size_t i = 0; i < target.size(); ++i)
    if (m[std::size_t(offset) + i] != target[i]) ++count;
  return count;
}

SurrogateValue surrogate_loss(const PosteriorMatrix& posteriors, const std::vector<int>& target,
                              int offset, Surrogate mode) {
  const Eigen::Index q = Eigen::Index(target.size());
  if (offset < 0 || offset + q > posteriors.rows())
    throw Error(ErrorKind::kOutOfRange, "surrogate_loss: target does not fit at this offset");
  SurrogateValue out;
  out.logit_grad = Eigen::MatrixXd::Zero(posteriors.rows(), posteriors.cols());
  for (Eigen::Index i = 0; i < q; ++i) {
    const Eigen::Index row = offset + i;
    const int b = target[std::size_t(i)];
    if (b < 0 || b >= posteriors.cols())
      throw Error(ErrorKind::kOutOfRange, "surrogate_loss: target pdf-id outside the model");
    const auto p = posteriors.row(row);
    if (mode == Surrogate::kCrossEntropy) {
      out.loss -= std::log(std::max(p(b), std::numeric_limits<double>::min()));
      out.logit_grad.row(row) = p;
      out.logit_grad(row, b) -= 1.0;
    } else {
      const Eigen::RowVectorXd ids =
          Eigen::RowVectorXd::LinSpaced(posteriors.cols(), 0.0, double(posteriors.cols() - 1));
      const double expected = p.dot(ids);
      const double diff = expected - double(b);
      out.loss += std::abs(diff);
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      out.logit_grad.row(row) = sign * p.cwiseProduct((ids.array() - expected).matrix());
    }
  }
  return out;
}

CraftTarget prepare_target(const std::vector<std::string>& words, const AcousticModel& model,
                           const PhonemeTable& table, const Lexicon& lexicon, int min_repeat,
                           std::uint64_t seed) {
  CraftTarget out;
  out.command_audio = synthesize_command(words, table, lexicon, seed);
  TargetSequence b = extract_target_sequence(out.command_audio, model);
  b.words = words;

  const auto speech = [&](int pdf) { return !table.is_silence_pdf(pdf); };
  const auto lead = std::find_if(b.pdf_ids.begin(), b.pdf_ids.end(), speech);
  if (lead == b.pdf_ids.end())
    throw Error(ErrorKind::kInvalidArgument,
                "the model hears only silence in the synthesized command");
  out.command_lead_frames = int(lead - b.pdf_ids.begin());

  TargetSequence reduced = reduce_frames(b, min_repeat);
  const auto first = std::find_if(reduced.pdf_ids.begin(), reduced.pdf_ids.end(), speech);
  const auto last = std::find_if(reduced.pdf_ids.rbegin(), reduced.pdf_ids.rend(), speech).base();
  out.target.pdf_ids.assign(first, last);
  out.target.words = words;

  const auto check = decode_pdf_sequence(out.target.pdf_ids, table, lexicon);
  if (check.words != words)
    throw Error(ErrorKind::kInvalidArgument,
                "the model does not recognise the synthesized command '" + join_words(words) +
                    "' (heard '" + join_words(check.words) + "')");
  return out;
}

int choose_offset(const std::vector<int>& song_pdfs, const std::vector<int>& target) {
  if (target.empty()) throw Error(ErrorKind::kEmptyInput, "choose_offset: empty target");
  if (target.size() > song_pdfs.size())
    throw Error(ErrorKind::kAudioTooShort, "choose_offset: song shorter than the target");
  const int last = int(song_pdfs.size() - target.size());
  const double centre = 0.5 * last;
  int best = 0;
  int best_count = INT_MAX;
  for (int o = 0; o <= last; ++o) {
    const int c = pdf_mismatch(song_pdfs, target, o);
    if (c < best_count || (c == best_count && std::abs(o - centre) < std::abs(best - centre))) {
      best = o;
      best_count = c;
    }
  }
  return best;
}

namespace {

double perturbation_snr(const Eigen::VectorXd& song, const Eigen::VectorXd& delta) {
  const double pd = delta.squaredNorm();
  if (pd == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(song.squaredNorm() / pd);
}

std::vector<int> window_argmax(const PosteriorMatrix& p, std::vector<int> m, Eigen::Index w0) {
  const auto local = most_likely_pdf_sequence(p);
  std::copy(local.begin(), local.end(), m.begin() + w0);
  return m;
}

// Zeroes gradient entries where the clip is saturated.
void mask_clipped(const Eigen::VectorXd& raw, Eigen::VectorXd& grad) {
  grad = (raw.array().abs() > 1.0).select(0.0, grad);
}

CraftResult run_attack(const AudioBuffer& song, const TargetSequence& target,
                       const AcousticModel& model, const PhonemeTable& table,
                       const Lexicon& lexicon, const CraftConfig& cfg,
                       const ChannelConfig* noise) {
  cfg.validate();
  if (song.empty()) throw Error(ErrorKind::kEmptyInput, "craft: empty song");
  if (song.sample_rate != model.sample_rate)
    throw Error(ErrorKind::kRateMismatch, "craft: song rate differs from the model rate");
  if (target.pdf_ids.empty()) throw Error(ErrorKind::kEmptyInput, "craft: empty target sequence");
  for (int pdf : target.pdf_ids)
    if (pdf < 0 || pdf >= model.num_pdfs())
      throw Error(ErrorKind::kOutOfRange, "craft: target pdf-id outside the model");

  const AcousticRunner runner(model);
  const Eigen::Index n = song.size();
  const Eigen::Index total = runner.num_frames(n);
  const Eigen::Index q = Eigen::Index(target.pdf_ids.size());
  if (total < q)
    throw Error(ErrorKind::kAudioTooShort, "craft: song has fewer frames than the target");

  std::vector<int> m = most_likely_pdf_sequence(runner.posteriors(song.samples));
  CraftResult result;
  result.target = target;
  result.offset = choose_offset(m, target.pdf_ids);
  const Eigen::Index offset = result.offset;

  // Rows whose logits can move when the perturbation changes.
  const int frame = runner.front_end().frame_samples();
  const int shift = runner.front_end().shift_samples();
  const Eigen::Index margin =
      model.context_left + model.context_right + (frame + shift - 1) / shift + 1;
  const Eigen::Index w0 = std::max<Eigen::Index>(0, offset - margin);
  const Eigen::Index w1 = std::min<Eigen::Index>(total, offset + q + margin);
  const int local_offset = int(offset - w0);

  const bool robust = noise != nullptr && !noise->is_noiseless();
  const int draws = robust ? cfg.noise_draws_per_iter : 1;

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd best_delta = delta;
  int best = INT_MAX;
  int streak = 0;
  bool success = false;
  int it = 0;
  for (;; ++it) {
    const Eigen::VectorXd raw = song.samples + delta;
    const Eigen::VectorXd x = clip_unit(raw);
    AcousticRunner::Trace trace;
    const PosteriorMatrix p = softmax_rows(runner.logits(x, w0, w1, robust ? nullptr : &trace));
    const SurrogateValue sv = surrogate_loss(p, target.pdf_ids, local_offset, cfg.surrogate);
    m = window_argmax(p, std::move(m), w0);
    const int mismatch = pdf_mismatch(m, target.pdf_ids, int(offset));
    const bool clean_ok = decode_pdf_sequence(m, table, lexicon).words == target.words;
    if (mismatch < best) {
      best = mismatch;
      best_delta = delta;
    }
    result.history.push_back({it, sv.loss, mismatch, best, perturbation_snr(song.samples, delta)});

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
    if (!robust) {
      if (clean_ok) {
        success = true;
        break;
      }
      if (it >= cfg.max_iters || cfg.perturbation_bound == 0.0) break;
      runner.backward(trace, sv.logit_grad, grad);
      mask_clipped(raw, grad);
    } else {
      bool all_ok = clean_ok;
      for (int d = 0; d < draws; ++d) {
        const std::uint64_t index = std::uint64_t(it) * std::uint64_t(draws) + std::uint64_t(d);
        const Eigen::VectorXd noisy_raw = raw + sample_noise(n, *noise, index, song.sample_rate).samples;
        AcousticRunner::Trace tr;
        const PosteriorMatrix pn = softmax_rows(runner.logits(clip_unit(noisy_raw), w0, w1, &tr));
        const SurrogateValue svn = surrogate_loss(pn, target.pdf_ids, local_offset, cfg.surrogate);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        runner.backward(tr, svn.logit_grad, g);
        mask_clipped(noisy_raw, g);
        grad += g;
        if (all_ok)
          all_ok = decode_pdf_sequence(window_argmax(pn, m, w0), table, lexicon).words ==
                   target.words;
      }
      grad /= double(draws);
      streak = all_ok ? streak + 1 : 0;
      if (clean_ok && streak >= cfg.confirm_iters) {
        success = true;
        break;
      }
      if (it >= cfg.max_iters || cfg.perturbation_bound == 0.0) break;
    }

    if (cfg.step_rule == StepRule::kSign) {
      delta -= cfg.learning_rate * grad.array().sign().matrix();
    } else if (cfg.step_rule == StepRule::kNormalized) {
      const double peak = grad.cwiseAbs().maxCoeff();
      if (peak > 0.0) delta -= (cfg.learning_rate / peak) * grad;
    } else {
      delta -= cfg.learning_rate * grad;
    }
    delta = delta.cwiseMax(-cfg.perturbation_bound).cwiseMin(cfg.perturbation_bound);
  }

  if (!success) delta = best_delta;
  result.iterations = it;
  result.perturbation = AudioBuffer(delta, song.sample_rate);
  result.adversarial = AudioBuffer(clip_unit(song.samples + delta), song.sample_rate);
  result.snr_db = perturbation_snr(song.samples, delta);

  const auto final_m = most_likely_pdf_sequence(runner.posteriors(result.adversarial.samples));
  result.final_mismatch = pdf_mismatch(final_m, target.pdf_ids, int(offset));
  result.decoded_words = decode_pdf_sequence(final_m, table, lexicon).words;
  result.clean_success = result.decoded_words == target.words;
  return result;
}

ChannelConfig crafting_channel(const CraftConfig& cfg, const ChannelConfig& channel) {
  ChannelConfig out;
  out.noise_bound = cfg.noise_bound;
  out.captured_noise = channel.captured_noise;
  out.seed = derive_seed(cfg.seed, 0x574141);
  return out;
}

std::uint64_t tts_seed(const CraftConfig& cfg) { return derive_seed(cfg.seed, 0x545453); }

}  // namespace

CraftResult craft_wta(const AudioBuffer& song, const TargetSequence& target,
                      const AcousticModel& model, const PhonemeTable& table,
                      const Lexicon& lexicon, const CraftConfig& cfg) {
  return run_attack(song, target, model, table, lexicon, cfg, nullptr);
}

CraftResult craft_wta(const AudioBuffer& song, const std::vector<std::string>& command,
                      const AcousticModel& model, const PhonemeTable& table,
                      const Lexicon& lexicon, const CraftConfig& cfg) {
  cfg.validate();
  const CraftTarget t = prepare_target(command, model, table, lexicon, cfg.min_repeat, tts_seed(cfg));
  return craft_wta(song, t.target, model, table, lexicon, cfg);
}

CraftResult craft_waa(const AudioBuffer& song, const TargetSequence& target,
                      const AcousticModel& model, const PhonemeTable& table,
                      const Lexicon& lexicon, const CraftConfig& cfg,
                      const ChannelConfig& channel) {
  channel.validate();
  const ChannelConfig crafting = crafting_channel(cfg, channel);
  crafting.validate();
  CraftResult r = run_attack(song, target, model, table, lexicon, cfg, &crafting);
  r.noisy_success_fraction = noisy_success_fraction(r.adversarial, target.words, model, table,
                                                    lexicon, channel, cfg.eval_noise_draws);
  return r;
}

CraftResult craft_waa(const AudioBuffer& song, const std::vector<std::string>& command,
                      const AcousticModel& model, const PhonemeTable& table,
                      const Lexicon& lexicon, const CraftConfig& cfg,
                      const ChannelConfig& channel) {
  cfg.validate();
  const CraftTarget t = prepare_target(command, model, table, lexicon, cfg.min_repeat, tts_seed(cfg));
  return craft_waa(song, t.target, model, table, lexicon, cfg, channel);
}

double noisy_success_fraction(const AudioBuffer& audio, const std::vector<std::string>& command,
                              const AcousticModel& model, const PhonemeTable& table,
                              const Lexicon& lexicon, const ChannelConfig& channel, int draws) {
  if (draws < 1) throw Error(ErrorKind::kInvalidArgument, "noisy_success_fraction: draws must be >= 1");
  channel.validate();
  if (channel.is_noiseless())
    return decode_text(apply_channel(audio, channel, kEvalDrawBase), model, table, lexicon).words ==
                   command
               ? 1.0
               : 0.0;
  int hits = 0;
  for (int e = 0; e < draws; ++e) {
    const AudioBuffer heard = apply_channel(audio, channel, kEvalDrawBase + std::uint64_t(e));
    if (decode_text(heard, model, table, lexicon).words == command) ++hits;
  }
  return double(hits) / double(draws);
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string format_history_csv(const std::vector<IterationRecord>& history) {
  std::ostringstream out;
  out << "iteration,loss,mismatch,best_mismatch,snr_db\n";
  for (const auto& r : history)
    out << r.iteration << ',' << fmt(r.loss) << ',' << r.mismatch << ',' << r.best_mismatch << ','
        << fmt(r.snr_db) << '\n';
  return out.str();
}

std::string format_craft_report(const CraftResult& r) {
  std::ostringstream out;
  out << "command: " << join_words(r.target.words) << '\n';
  out << "decoded: " << join_words(r.decoded_words) << '\n';
  out << "clean_success: " << (r.clean_success ? 1 : 0) << '\n';
  out << "noisy_success_fraction: "
      << (r.noisy_success_fraction ? fmt(*r.noisy_success_fraction) : std::string("n/a")) << '\n';
  out << "iterations: " << r.iterations << '\n';
  out << "snr_db: " << fmt(r.snr_db) << '\n';
  out << "offset: " << r.offset << '\n';
  out << "target_frames: " << r.target.pdf_ids.size() << '\n';
  out << "final_mismatch: " << r.final_mismatch << '\n';
  return out.str();
}

}  // namespace csong
