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

#include "csong/acoustic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "csong/random.hpp"
#include "csong/synth.hpp"

namespace csong {

void AcousticModel::validate() const {
  features.validate(sample_rate);
  if (context_left < 0 || context_right < 0)
    throw Error(ErrorKind::kShapeMismatch, "model: negative context");
  if (layers.empty()) throw Error(ErrorKind::kShapeMismatch, "model: no layers");
  if (input_mean.size() != input_dim() || input_inv_std.size() != input_dim())
    throw Error(ErrorKind::kShapeMismatch, "model: input normalisation size mismatch");
  Eigen::Index width = input_dim();
  for (const auto& layer : layers) {
    if (layer.weight.cols() != width || layer.bias.size() != layer.weight.rows())
      throw Error(ErrorKind::kShapeMismatch, "model: layer dimensions do not chain");
    width = layer.weight.rows();
  }
}

PosteriorMatrix softmax_rows(const Eigen::MatrixXd& logits) {
  PosteriorMatrix p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

AcousticRunner::AcousticRunner(const AcousticModel& model)
    : model_(model), front_(model.features, model.sample_rate) {
  model_.validate();
}

Eigen::MatrixXd AcousticRunner::logits(const Eigen::VectorXd& samples, Eigen::Index row_begin,
                                       Eigen::Index row_end, Trace* trace) const {
  const Eigen::Index total = front_.num_frames(samples.size());
  if (total == 0) throw Error(ErrorKind::kAudioTooShort, "acoustic: audio shorter than one frame");
  if (row_begin < 0 || row_end > total || row_begin >= row_end)
    throw Error(ErrorKind::kOutOfRange, "acoustic: row range outside the signal");
  const int left = model_.context_left;
  const int right = model_.context_right;
  const Eigen::Index first = std::max<Eigen::Index>(0, row_begin - left);
  const Eigen::Index last = std::min<Eigen::Index>(total, row_end + right);

  const FeatureMatrix feats =
      front_.compute(samples, first, last, trace != nullptr ? &trace->mfcc : nullptr);
  Eigen::MatrixXd h = splice_rows(feats.values, first, total, row_begin, row_end, left, right);
  h = ((h.rowwise() - model_.input_mean).array().rowwise() * model_.input_inv_std.array())
          .matrix();

  if (trace != nullptr) {
    trace->total_frames = total;
    trace->first_frame = first;
    trace->row_begin = row_begin;
    trace->activations.clear();
  }
  for (std::size_t l = 0; l < model_.layers.size(); ++l) {
    const auto& layer = model_.layers[l];
    if (trace != nullptr) trace->activations.push_back(h);
    Eigen::MatrixXd z = h * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (l + 1 == model_.layers.size()) return z;
    h = z.array().tanh().matrix();
  }
  return h;
}

PosteriorMatrix AcousticRunner::posteriors(const Eigen::VectorXd& samples) const {
  const Eigen::Index total = front_.num_frames(samples.size());
  if (total == 0) throw Error(ErrorKind::kAudioTooShort, "acoustic: audio shorter than one frame");
  return softmax_rows(logits(samples, 0, total));
}

void AcousticRunner::backward(const Trace& trace, const Eigen::MatrixXd& logit_grad,
                              Eigen::VectorXd& grad) const {
  const Eigen::Index rows = trace.activations.empty() ? 0 : trace.activations.front().rows();
  if (logit_grad.rows() != rows || logit_grad.cols() != model_.num_pdfs())
    throw Error(ErrorKind::kShapeMismatch, "acoustic backward: logit gradient shape mismatch");
  Eigen::MatrixXd g = logit_grad;
  for (std::size_t l = model_.layers.size(); l-- > 0;) {
    Eigen::MatrixXd dh = g * model_.layers[l].weight;
    if (l > 0) {
      const auto& act = trace.activations[l];
      g = dh.cwiseProduct((1.0 - act.array().square()).matrix());
    } else {
      g = std::move(dh);
    }
  }
  g.array().rowwise() *= model_.input_inv_std.array();
  const Eigen::MatrixXd d_feats =
      splice_rows_backward(g, trace.mfcc.windowed.rows(), trace.first_frame, trace.total_frames,
                           trace.row_begin, model_.context_left, model_.context_right);
  front_.backward(trace.mfcc, d_feats, grad);
}

PosteriorMatrix forward(const AcousticModel& model, const AudioBuffer& audio) {
  if (audio.sample_rate != model.sample_rate)
    throw Error(ErrorKind::kRateMismatch, "forward: audio rate differs from model rate");
  return AcousticRunner(model).posteriors(audio.samples);
}

Eigen::VectorXd input_gradient(const AcousticModel& model, const AudioBuffer& audio,
                               const Eigen::MatrixXd& upstream, GradientSpace space) {
  if (audio.sample_rate != model.sample_rate)
    throw Error(ErrorKind::kRateMismatch, "input_gradient: audio rate differs from model rate");
  const AcousticRunner runner(model);
  const Eigen::Index total = runner.num_frames(audio.size());
  if (total == 0) throw Error(ErrorKind::kAudioTooShort, "acoustic: audio shorter than one frame");
  if (upstream.rows() != total || upstream.cols() != model.num_pdfs())
    throw Error(ErrorKind::kShapeMismatch, "input_gradient: upstream shape mismatch");
  AcousticRunner::Trace trace;
  const Eigen::MatrixXd z = runner.logits(audio.samples, 0, total, &trace);
  Eigen::MatrixXd dz = upstream;
  if (space == GradientSpace::kProbabilities) {
    const PosteriorMatrix p = softmax_rows(z);
    const Eigen::VectorXd inner = p.cwiseProduct(upstream).rowwise().sum();
    dz = p.cwiseProduct((upstream.colwise() - inner));
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(audio.size());
  runner.backward(trace, dz, grad);
  return grad;
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

}  // namespace

ToyCorpus generate_synthetic_corpus(const PhonemeTable& table, const Lexicon& lexicon,
                                    const CorpusSpec& spec) {
  ToyCorpus corpus;
  corpus.seed = spec.seed;
  corpus.num_pdfs = table.num_pdfs();
  const int sil = table.silence_pdf();
  std::vector<std::string> vocab;
  for (const auto& [word, phones] : lexicon.words()) vocab.push_back(word);
  if (vocab.empty()) throw Error(ErrorKind::kEmptyInput, "corpus: empty lexicon");

  for (int u = 0; u < spec.utterances; ++u) {
    Rng rng(derive_seed(spec.seed, std::uint64_t(u)));
    RenderOptions opts;
    opts.noise_amplitude = log_uniform(rng, spec.min_noise, spec.max_noise);
    opts.tilt = rng.uniform(-spec.max_tilt, spec.max_tilt);
    Utterance utt;

    if (rng.uniform01() < spec.music_only_fraction) {
      MusicOptions music;
      music.duration_s = rng.uniform(1.5, 3.0);
      music.target_rms = log_uniform(rng, 0.03, 0.3);
      AudioBuffer clip = render_music(music, rng.next());
      for (Eigen::Index t = 0; t < clip.size(); ++t)
        clip.samples[t] += rng.uniform(-opts.noise_amplitude, opts.noise_amplitude);
      clip.samples = clip_unit(clip.samples);
      const Eigen::Index frames =
          num_frames(clip.size(), opts.frame_samples, opts.frame_shift_samples);
      utt.labels.assign(std::size_t(frames), sil);
      utt.audio = std::move(clip);
      corpus.utterances.push_back(std::move(utt));
      continue;
    }

    const auto count = rng.uniform_int(1, spec.max_words);
    for (std::int64_t w = 0; w < count; ++w)
      utt.words.push_back(vocab[std::size_t(rng.uniform_int(0, std::int64_t(vocab.size()) - 1))]);
    opts.gain = log_uniform(rng, spec.min_gain, spec.max_gain);
    opts.lead_silence_frames = int(rng.uniform_int(5, 20));
    opts.tail_silence_frames = int(rng.uniform_int(5, 20));
    opts.word_gap_frames = int(rng.uniform_int(4, 12));
    const auto schedule = schedule_words(utt.words, table, lexicon, opts, rng);
    Rendering r = render_schedule(schedule, table, opts, rng);
    if (rng.uniform01() < spec.background_music_fraction) {
      MusicOptions music;
      music.duration_s = r.audio.duration_seconds();
      const double speech_rms = std::sqrt(mean_square(r.audio.samples));
      const double level_db = rng.uniform(spec.min_music_snr_db, spec.max_music_snr_db);
      music.target_rms = speech_rms * std::pow(10.0, -level_db / 20.0);
      AudioBuffer bed = render_music(music, rng.next());
      const Eigen::Index n = std::min(bed.size(), r.audio.size());
      r.audio.samples.head(n) = clip_unit(r.audio.samples.head(n) + bed.samples.head(n));
    }
    if (rng.uniform01() < spec.band_limit_fraction) {
      const double cutoff = rng.uniform(spec.min_band_hz, 0.45 * r.audio.sample_rate);
      r.audio.samples = lowpass(r.audio.samples, cutoff, r.audio.sample_rate);
    }
    utt.audio = std::move(r.audio);
    utt.labels = std::move(r.frame_labels);
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct FrameSet {
  Eigen::MatrixXd inputs;  // spliced, not yet normalised
  std::vector<int> labels;
};

FrameSet collect_frames(const std::vector<Utterance>& utts, const MfccFrontEnd& front,
                        int context) {
  std::vector<Eigen::MatrixXd> blocks;
  FrameSet set;
  Eigen::Index rows = 0;
  for (const auto& u : utts) {
    const FeatureMatrix f = front.compute(u.audio);
    if (std::size_t(f.frame_count()) != u.labels.size())
      throw Error(ErrorKind::kShapeMismatch, "corpus: label count differs from frame count");
    blocks.push_back(splice_context(f.values, context, context));
    rows += f.frame_count();
    set.labels.insert(set.labels.end(), u.labels.begin(), u.labels.end());
  }
  if (blocks.empty()) return set;
  set.inputs.resize(rows, blocks.front().cols());
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    set.inputs.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return set;
}

struct AdamSlot {
  Eigen::MatrixXd m, v;
};

void adam_step(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad, AdamSlot& slot,
               double lr, int step) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  slot.m = kBeta1 * slot.m + (1.0 - kBeta1) * grad;
  slot.v = kBeta2 * slot.v + (1.0 - kBeta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(kBeta1, step);
  const double c2 = 1.0 - std::pow(kBeta2, step);
  param.array() -= lr * (slot.m.array() / c1) / ((slot.v.array() / c2).sqrt() + kEps);
}

double accuracy_on(const AcousticModel& model, const Eigen::MatrixXd& normalised,
                   const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  Eigen::MatrixXd h = normalised;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Eigen::MatrixXd z = h * model.layers[l].weight.transpose();
    z.rowwise() += model.layers[l].bias.transpose();
    h = l + 1 == model.layers.size() ? z : Eigen::MatrixXd(z.array().tanh());
  }
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    Eigen::Index arg;
    h.row(i).maxCoeff(&arg);
    if (arg == labels[std::size_t(i)]) ++correct;
  }
  return double(correct) / double(labels.size());
}

}  // namespace

AcousticModel train_toy_model(const ToyCorpus& corpus, const TrainConfig& cfg,
                              TrainReport* report) {
  if (corpus.utterances.empty()) throw Error(ErrorKind::kEmptyInput, "train: empty corpus");
  if (corpus.num_pdfs <= 0) throw Error(ErrorKind::kInvalidArgument, "train: corpus has no pdfs");
  if (cfg.epochs < 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "train: invalid hyperparameters");

  const std::size_t total_utts = corpus.utterances.size();
  std::size_t heldout = std::size_t(std::ceil(cfg.holdout_fraction * double(total_utts)));
  if (heldout >= total_utts) heldout = total_utts > 1 ? 1 : 0;
  const std::vector<Utterance> train_utts(corpus.utterances.begin(),
                                          corpus.utterances.end() - std::ptrdiff_t(heldout));
  const std::vector<Utterance> held_utts(corpus.utterances.end() - std::ptrdiff_t(heldout),
                                         corpus.utterances.end());

  AcousticModel model;
  model.features = cfg.features;
  model.sample_rate = kCanonicalRate;
  model.context_left = model.context_right = cfg.context;
  model.seed = cfg.seed;
  const MfccFrontEnd front(cfg.features, model.sample_rate);

  FrameSet train = collect_frames(train_utts, front, cfg.context);
  const Eigen::Index dim = train.inputs.cols();
  model.input_mean = train.inputs.colwise().mean();
  const Eigen::RowVectorXd var =
      (train.inputs.rowwise() - model.input_mean).array().square().colwise().mean();
  model.input_inv_std = var.array().max(1e-12).sqrt().inverse();
  Eigen::MatrixXd x =
      ((train.inputs.rowwise() - model.input_mean).array().rowwise() * model.input_inv_std.array())
          .matrix();
  train.inputs.resize(0, 0);

  Rng rng(cfg.seed);
  std::vector<int> widths = {int(dim)};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(corpus.num_pdfs);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    const double bound = std::sqrt(6.0 / double(widths[l] + widths[l + 1]));
    layer.weight.resize(widths[l + 1], widths[l]);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
      layer.weight.data()[i] = rng.uniform(-bound, bound);
    layer.bias = Eigen::VectorXd::Zero(widths[l + 1]);
    model.layers.push_back(std::move(layer));
  }

  const std::size_t layers = model.layers.size();
  std::vector<AdamSlot> w_slots(layers), b_slots(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& L = model.layers[l];
    w_slots[l] = {Eigen::MatrixXd::Zero(L.weight.rows(), L.weight.cols()),
                  Eigen::MatrixXd::Zero(L.weight.rows(), L.weight.cols())};
    b_slots[l] = {Eigen::MatrixXd::Zero(L.bias.size(), 1), Eigen::MatrixXd::Zero(L.bias.size(), 1)};
  }

  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  int step = 0;
  std::vector<double> epoch_loss;
  std::vector<Eigen::MatrixXd> acts(layers + 1);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[std::size_t(rng.uniform_int(0, std::int64_t(i) - 1))]);
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd xb(b, dim);
      for (Eigen::Index r = 0; r < b; ++r) xb.row(r) = x.row(order[std::size_t(start + r)]);
      acts[0] = std::move(xb);
      for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = acts[l] * model.layers[l].weight.transpose();
        z.rowwise() += model.layers[l].bias.transpose();
        acts[l + 1] = l + 1 == layers ? z : Eigen::MatrixXd(z.array().tanh());
      }
      Eigen::MatrixXd g = softmax_rows(acts[layers]);
      for (Eigen::Index r = 0; r < b; ++r) {
        const int label = train.labels[std::size_t(order[std::size_t(start + r)])];
        loss_sum -= std::log(std::max(g(r, label), 1e-300));
        g(r, label) -= 1.0;
      }
      g /= double(b);
      ++step;
      for (std::size_t l = layers; l-- > 0;) {
        const Eigen::MatrixXd dw = g.transpose() * acts[l];
        const Eigen::MatrixXd db = g.colwise().sum().transpose();
        if (l > 0) {
          Eigen::MatrixXd dh = g * model.layers[l].weight;
          g = dh.cwiseProduct((1.0 - acts[l].array().square()).matrix());
        }
        adam_step(model.layers[l].weight, dw, w_slots[l], cfg.learning_rate, step);
        Eigen::Map<Eigen::MatrixXd> bias(model.layers[l].bias.data(), model.layers[l].bias.size(), 1);
        adam_step(bias, db, b_slots[l], cfg.learning_rate, step);
      }
    }
    epoch_loss.push_back(loss_sum / double(n));
  }

  if (report != nullptr) {
    report->train_frames = train.labels.size();
    report->train_accuracy = accuracy_on(model, x, train.labels);
    FrameSet held = collect_frames(held_utts, front, cfg.context);
    report->heldout_frames = held.labels.size();
    if (!held.labels.empty()) {
      const Eigen::MatrixXd hx = ((held.inputs.rowwise() - model.input_mean).array().rowwise() *
                                  model.input_inv_std.array())
                                     .matrix();
      report->heldout_accuracy = accuracy_on(model, hx, held.labels);
    }
    report->epoch_loss = std::move(epoch_loss);
  }
  return model;
}

double frame_accuracy(const AcousticModel& model, const std::vector<Utterance>& utterances) {
  const AcousticRunner runner(model);
  std::size_t correct = 0, total = 0;
  for (const auto& u : utterances) {
    const PosteriorMatrix p = runner.posteriors(u.audio.samples);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      Eigen::Index arg;
      p.row(i).maxCoeff(&arg);
      correct += (arg == u.labels[std::size_t(i)]);
      ++total;
    }
  }
  return total == 0 ? 0.0 : double(correct) / double(total);
}

// ---------------------------------------------------------------------------
// Model file

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xff));
}

double read_le(const std::string& in, std::size_t at) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(std::uint8_t(in[at + std::size_t(i)])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string serialize_model(const AcousticModel& model) {
  model.validate();
  const auto& f = model.features;
  std::ostringstream h;
  h << kModelMagic << '\n'
    << "version " << kModelVersion << '\n'
    << "sample_rate " << model.sample_rate << '\n'
    << "frame_length_ms " << format_real(f.frame_length_ms) << '\n'
    << "frame_shift_ms " << format_real(f.frame_shift_ms) << '\n'
    << "preemphasis " << format_real(f.preemphasis) << '\n'
    << "num_mel_filters " << f.num_mel_filters << '\n'
    << "num_cepstra " << f.num_cepstra << '\n'
    << "log_floor " << format_real(f.log_floor) << '\n'
    << "fft_size " << f.fft_size << '\n'
    << "low_freq_hz " << format_real(f.low_freq_hz) << '\n'
    << "high_freq_hz " << format_real(f.high_freq_hz) << '\n'
    << "context_left " << model.context_left << '\n'
    << "context_right " << model.context_right << '\n'
    << "seed " << model.seed << '\n'
    << "input_dim " << model.input_dim() << '\n'
    << "num_layers " << model.layers.size() << '\n';
  std::size_t payload = 2 * std::size_t(model.input_dim());
  for (const auto& layer : model.layers) {
    h << "layer " << layer.weight.cols() << ' ' << layer.weight.rows() << '\n';
    payload += std::size_t(layer.weight.size() + layer.bias.size());
  }
  h << "payload_doubles " << payload << '\n' << "end_header\n";

  std::string out = h.str();
  out.reserve(out.size() + 8 * payload);
  for (Eigen::Index i = 0; i < model.input_mean.size(); ++i) append_le(out, model.input_mean[i]);
  for (Eigen::Index i = 0; i < model.input_inv_std.size(); ++i)
    append_le(out, model.input_inv_std[i]);
  for (const auto& layer : model.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) append_le(out, layer.weight(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) append_le(out, layer.bias[r]);
  }
  return out;
}

AcousticModel parse_model(const std::string& bytes) {
  const std::string end_marker = "end_header\n";
  const auto end = bytes.find(end_marker);
  if (bytes.rfind(std::string(kModelMagic) + "\n", 0) != 0)
    throw Error(ErrorKind::kMalformedFile, "model: missing magic string");
  if (end == std::string::npos) throw Error(ErrorKind::kCorruptedPayload, "model: header truncated");

  std::istringstream h(bytes.substr(0, end));
  std::string line;
  std::getline(h, line);
  AcousticModel model;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
  std::size_t payload = 0;
  int declared_layers = -1;
  Eigen::Index declared_input = -1;
  bool have_version = false;
  while (std::getline(h, line)) {
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    auto need = [&](auto& value) {
      if (!(fields >> value))
        throw Error(ErrorKind::kMalformedFile, "model: bad value for header key " + key);
    };
    if (key == "version") {
      int v = 0;
      need(v);
      if (v != kModelVersion)
        throw Error(ErrorKind::kVersionMismatch, "model: unsupported version " + std::to_string(v));
      have_version = true;
    } else if (key == "sample_rate") {
      need(model.sample_rate);
    } else if (key == "frame_length_ms") {
      need(model.features.frame_length_ms);
    } else if (key == "frame_shift_ms") {
      need(model.features.frame_shift_ms);
    } else if (key == "preemphasis") {
      need(model.features.preemphasis);
    } else if (key == "num_mel_filters") {
      need(model.features.num_mel_filters);
    } else if (key == "num_cepstra") {
      need(model.features.num_cepstra);
    } else if (key == "log_floor") {
      need(model.features.log_floor);
    } else if (key == "fft_size") {
      need(model.features.fft_size);
    } else if (key == "low_freq_hz") {
      need(model.features.low_freq_hz);
    } else if (key == "high_freq_hz") {
      need(model.features.high_freq_hz);
    } else if (key == "context_left") {
      need(model.context_left);
    } else if (key == "context_right") {
      need(model.context_right);
    } else if (key == "seed") {
      need(model.seed);
    } else if (key == "input_dim") {
      need(declared_input);
    } else if (key == "num_layers") {
      need(declared_layers);
    } else if (key == "layer") {
      Eigen::Index in = 0, out = 0;
      need(in);
      need(out);
      if (in <= 0 || out <= 0) throw Error(ErrorKind::kMalformedFile, "model: bad layer shape");
      shapes.emplace_back(in, out);
    } else if (key == "payload_doubles") {
      need(payload);
    } else {
      throw Error(ErrorKind::kMalformedFile, "model: unknown header key '" + key + "'");
    }
  }
  if (!have_version) throw Error(ErrorKind::kVersionMismatch, "model: missing version tag");
  if (declared_layers != int(shapes.size()) || declared_input != model.input_dim())
    throw Error(ErrorKind::kMalformedFile, "model: header dimensions inconsistent");

  std::size_t expected = 2 * std::size_t(model.input_dim());
  for (const auto& [in, out] : shapes) expected += std::size_t(in * out + out);
  const std::size_t body = end + end_marker.size();
  if (payload != expected || bytes.size() - body != 8 * payload)
    throw Error(ErrorKind::kCorruptedPayload,
                "model: payload holds " + std::to_string((bytes.size() - body) / 8) +
                    " doubles, header expects " + std::to_string(expected));

  std::size_t at = body;
  auto next = [&] {
    const double v = read_le(bytes, at);
    at += 8;
    return v;
  };
  model.input_mean.resize(model.input_dim());
  model.input_inv_std.resize(model.input_dim());
  for (Eigen::Index i = 0; i < model.input_dim(); ++i) model.input_mean[i] = next();
  for (Eigen::Index i = 0; i < model.input_dim(); ++i) model.input_inv_std[i] = next();
  for (const auto& [in, out] : shapes) {
    DenseLayer layer;
    layer.weight.resize(out, in);
    layer.bias.resize(out);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = next();
    for (Eigen::Index r = 0; r < out; ++r) layer.bias[r] = next();
    model.layers.push_back(std::move(layer));
  }
  model.validate();
  return model;
}

void save_model(const AcousticModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kUnwritablePath, "cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw Error(ErrorKind::kUnwritablePath, "write failed for " + path.string());
}

AcousticModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace csong
