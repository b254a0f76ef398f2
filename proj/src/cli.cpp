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

#include "csong/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "csong/acoustic.hpp"
#include "csong/channel.hpp"
#include "csong/crafter.hpp"
#include "csong/decoder.hpp"
#include "csong/defense.hpp"
#include "csong/lexicon.hpp"
#include "csong/metrics.hpp"
#include "csong/random.hpp"
#include "csong/synth.hpp"

namespace csong {
namespace {

namespace fs = std::filesystem;

// Operational failures that are not errors: an attack that did not converge,
// a defense that flagged its input.
struct Failure {
  std::string message;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kUnwritablePath, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::kUnwritablePath, "failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFileNotFound, "cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Inventory inventory_from(const std::string& path) {
  return path.empty() ? default_inventory() : load_inventory(path);
}

std::vector<std::string> command_words(const std::string& text) {
  auto words = split_words(text);
  if (words.empty()) throw Error(ErrorKind::kEmptyInput, "empty command");
  return words;
}

Surrogate parse_surrogate(const std::string& s) {
  if (s == "ce") return Surrogate::kCrossEntropy;
  if (s == "l1") return Surrogate::kLiteralL1;
  throw Error(ErrorKind::kInvalidArgument, "unknown surrogate '" + s + "'");
}

StepRule parse_step(const std::string& s) {
  if (s == "sign") return StepRule::kSign;
  if (s == "normalized") return StepRule::kNormalized;
  if (s == "gradient") return StepRule::kGradient;
  throw Error(ErrorKind::kInvalidArgument, "unknown step rule '" + s + "'");
}

// Options shared by the crafting and sweep subcommands.
struct CraftOptions {
  std::string model, song, command, inventory;
  double l = CraftConfig{}.perturbation_bound;
  double lr = CraftConfig{}.learning_rate;
  int max_iters = CraftConfig{}.max_iters;
  int min_repeat = CraftConfig{}.min_repeat;
  std::string surrogate = "ce";
  std::string step = "normalized";
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--model", model, "Acoustic model file")->required();
    app->add_option("--song", song, "Carrier WAV")->required();
    app->add_option("--command", command, "Target command words")->required();
    app->add_option("--inventory", inventory, "Inventory file (default: built-in)");
    app->add_option("--l", l, "Perturbation bound")->capture_default_str();
    app->add_option("--lr", lr, "Step size")->capture_default_str();
    app->add_option("--max-iters", max_iters, "Iteration budget")->capture_default_str();
    app->add_option("--min-repeat", min_repeat, "Frame-reduction cap")->capture_default_str();
    app->add_option("--surrogate", surrogate, "ce | l1")
        ->check(CLI::IsMember({"ce", "l1"}))
        ->capture_default_str();
    app->add_option("--step", step, "normalized | sign | gradient")
        ->check(CLI::IsMember({"normalized", "sign", "gradient"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "Seed")->capture_default_str();
  }

  CraftConfig config() const {
    CraftConfig c;
    c.perturbation_bound = l;
    c.learning_rate = lr;
    c.max_iters = max_iters;
    c.min_repeat = min_repeat;
    c.surrogate = parse_surrogate(surrogate);
    c.step_rule = parse_step(step);
    c.seed = seed;
    return c;
  }
};

// Playback channel used to score robust samples.
struct EvalChannelOptions {
  double snr = 10.0;
  double bound = -1.0;
  std::string noise_wav;
  std::uint64_t seed = 77;
  int draws = CraftConfig{}.eval_noise_draws;

  void add(CLI::App* app) {
    app->add_option("--eval-snr", snr, "Evaluation channel SNR against the song (dB)")
        ->capture_default_str();
    app->add_option("--eval-noise-bound", bound, "Evaluation noise bound; overrides --eval-snr");
    app->add_option("--noise-wav", noise_wav, "Captured noise recording for the channel");
    app->add_option("--eval-seed", seed, "Evaluation channel seed")->capture_default_str();
    app->add_option("--eval-draws", draws, "Held-out evaluation draws")->capture_default_str();
  }

  ChannelConfig channel(const AudioBuffer& song) const {
    ChannelConfig c;
    c.noise_bound = bound >= 0.0 ? bound : noise_bound_for_snr(signal_power(song), snr);
    if (!noise_wav.empty()) c.captured_noise = load_audio(noise_wav);
    c.seed = seed;
    return c;
  }
};

class Cli {
 public:
  Cli() : app_("Adversarial music commands against a toy speech recogniser", "csong") {
    app_.set_config("--config", "", "key=value configuration file");
    app_.add_flag("--print-config", print_config_, "Print the resolved configuration and exit")
        ->configurable(false);
    app_.set_version_flag("--version", kToolVersion);
    app_.require_subcommand(1);
    app_.fallthrough();
    build();
  }

  int run(int argc, char** argv) {
    try {
      app_.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app_.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app_.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app_.exit(e);
    } catch (const CLI::ParseError& e) {
      app_.exit(e);
      return 2;
    }
    if (print_config_) {
      std::cout << manifest_text();
      return 0;
    }
    try {
      action_();
      return 0;
    } catch (const Failure& f) {
      std::cerr << "failure: " << f.message << '\n';
      return 1;
    } catch (const Error& e) {
      std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
      if (is_io_error(e.kind())) return 3;
      switch (e.kind()) {
        case ErrorKind::kInvalidArgument:
        case ErrorKind::kOutOfRange:
        case ErrorKind::kOutOfVocabulary:
          return 2;
        case ErrorKind::kUnwritablePath:
          return 3;
        default:
          return 1;
      }
    } catch (const std::exception& e) {
      std::cerr << "error: internal: " << e.what() << '\n';
      return 1;
    }
  }

 private:
  std::string manifest_text() const {
    std::ostringstream out;
    out << "# csong " << kToolVersion << " manifest\n";
    out << "# re-run with: csong --config <this file>\n";
    out << app_.config_to_str(true, false);
    return out.str();
  }

  void write_manifest(const fs::path& output) const {
    write_text(fs::path(output.string() + ".manifest.ini"), manifest_text());
  }

  CLI::App* sub(CLI::App* parent, const std::string& name, const std::string& help) {
    CLI::App* s = parent->add_subcommand(name, help);
    s->configurable();
    return s;
  }

  CLI::App* group(const std::string& name, const std::string& help) {
    CLI::App* g = sub(&app_, name, help);
    g->require_subcommand(1);
    return g;
  }

  void build() {
    build_corpus();
    build_model();
    build_synth();
    build_decode();
    build_craft();
    build_channel();
    build_defend();
    build_sweep();
  }

  // corpus gen
  struct {
    std::string out, inventory;
    CorpusSpec spec;
  } corpus_;

  void build_corpus() {
    CLI::App* g = group("corpus", "Toy training corpus");
    CLI::App* s = sub(g, "gen", "Render a labelled toy corpus to a directory");
    s->add_option("--out", corpus_.out, "Output directory")->required();
    s->add_option("--inventory", corpus_.inventory, "Inventory file (default: built-in)");
    s->add_option("--utterances", corpus_.spec.utterances)->capture_default_str();
    s->add_option("--max-words", corpus_.spec.max_words)->capture_default_str();
    s->add_option("--music-only", corpus_.spec.music_only_fraction)->capture_default_str();
    s->add_option("--background", corpus_.spec.background_music_fraction)->capture_default_str();
    s->add_option("--seed", corpus_.spec.seed)->capture_default_str();
    s->callback([this] {
      action_ = [this] {
        const Inventory inv = inventory_from(corpus_.inventory);
        const ToyCorpus corpus = generate_synthetic_corpus(inv.table, inv.lexicon, corpus_.spec);
        fs::create_directories(corpus_.out);
        std::ostringstream labels;
        for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
          const auto& u = corpus.utterances[i];
          std::ostringstream name;
          name << "utt_" << std::setw(5) << std::setfill('0') << i;
          write_wav(u.audio, fs::path(corpus_.out) / (name.str() + ".wav"));
          labels << name.str() << " | " << join_words(u.words) << " |";
          for (int l : u.labels) labels << ' ' << l;
          labels << '\n';
        }
        write_text(fs::path(corpus_.out) / "labels.txt", labels.str());
        write_manifest(fs::path(corpus_.out) / "corpus");
        std::cout << "utterances: " << corpus.utterances.size() << '\n';
      };
    });
  }

  static ToyCorpus read_corpus(const fs::path& dir, int num_pdfs) {
    ToyCorpus corpus;
    corpus.num_pdfs = num_pdfs;
    std::istringstream lines(read_text(dir / "labels.txt"));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      const auto a = line.find('|');
      const auto b = line.find('|', a + 1);
      if (a == std::string::npos || b == std::string::npos)
        throw Error(ErrorKind::kMalformedFile, "labels.txt: malformed line '" + line + "'");
      Utterance u;
      const auto name = split_words(line.substr(0, a));
      if (name.size() != 1) throw Error(ErrorKind::kMalformedFile, "labels.txt: bad name");
      u.audio = load_audio(dir / (name[0] + ".wav"));
      u.words = split_words(line.substr(a + 1, b - a - 1));
      std::istringstream ls(line.substr(b + 1));
      int l;
      while (ls >> l) u.labels.push_back(l);
      corpus.utterances.push_back(std::move(u));
    }
    if (corpus.utterances.empty()) throw Error(ErrorKind::kEmptyInput, "corpus is empty");
    return corpus;
  }

  // model train / model info
  struct {
    std::string out, corpus_dir, inventory, model;
    CorpusSpec spec;
    TrainConfig train;
    bool json = false;
  } model_;

  void build_model() {
    CLI::App* g = group("model", "Acoustic model");
    CLI::App* t = sub(g, "train", "Train the toy acoustic model");
    t->add_option("--out", model_.out, "Model file")->required();
    t->add_option("--corpus", model_.corpus_dir, "Corpus directory (default: generate in memory)");
    t->add_option("--inventory", model_.inventory, "Inventory file (default: built-in)");
    t->add_option("--utterances", model_.spec.utterances)->capture_default_str();
    t->add_option("--corpus-seed", model_.spec.seed)->capture_default_str();
    t->add_option("--hidden", model_.train.hidden, "Hidden layer widths")->capture_default_str();
    t->add_option("--context", model_.train.context)->capture_default_str();
    t->add_option("--lr", model_.train.learning_rate)->capture_default_str();
    t->add_option("--epochs", model_.train.epochs)->capture_default_str();
    t->add_option("--batch", model_.train.batch_size)->capture_default_str();
    t->add_option("--holdout", model_.train.holdout_fraction)->capture_default_str();
    t->add_option("--seed", model_.train.seed)->capture_default_str();
    t->callback([this] {
      action_ = [this] {
        const Inventory inv = inventory_from(model_.inventory);
        const ToyCorpus corpus =
            model_.corpus_dir.empty()
                ? generate_synthetic_corpus(inv.table, inv.lexicon, model_.spec)
                : read_corpus(model_.corpus_dir, inv.table.num_pdfs());
        TrainReport report;
        const AcousticModel m = train_toy_model(corpus, model_.train, &report);
        save_model(m, model_.out);
        write_manifest(model_.out);
        std::cout << std::fixed << std::setprecision(6);
        std::cout << "train_accuracy: " << report.train_accuracy << '\n';
        std::cout << "heldout_accuracy: " << report.heldout_accuracy << '\n';
        std::cout << "train_frames: " << report.train_frames << '\n';
        std::cout << "heldout_frames: " << report.heldout_frames << '\n';
      };
    });

    CLI::App* i = sub(g, "info", "Describe a model file");
    i->add_option("--model", model_.model, "Model file")->required();
    i->add_flag("--json", model_.json, "Emit JSON");
    i->callback([this] {
      action_ = [this] {
        const AcousticModel m = load_model(model_.model);
        nlohmann::json j;
        j["sample_rate"] = m.sample_rate;
        j["num_pdfs"] = m.num_pdfs();
        j["input_dim"] = m.input_dim();
        j["context"] = {m.context_left, m.context_right};
        j["num_cepstra"] = m.features.num_cepstra;
        j["num_mel_filters"] = m.features.num_mel_filters;
        j["seed"] = m.seed;
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& l : m.layers) layers.push_back({l.weight.cols(), l.weight.rows()});
        j["layers"] = layers;
        if (model_.json) {
          std::cout << j.dump(2) << '\n';
          return;
        }
        for (const auto& [k, v] : j.items()) std::cout << k << ": " << v.dump() << '\n';
      };
    });
  }

  // synth
  struct {
    std::string words, out, inventory;
    bool music = false;
    MusicOptions music_opts;
    std::uint64_t seed = 1;
  } synth_;

  void build_synth() {
    CLI::App* s = sub(&app_, "synth", "Toy text-to-speech, or synthetic music with --music");
    s->add_option("--words", synth_.words, "Words to speak");
    s->add_option("--out", synth_.out, "Output WAV")->required();
    s->add_option("--inventory", synth_.inventory, "Inventory file (default: built-in)");
    s->add_flag("--music", synth_.music, "Render music instead of speech");
    s->add_option("--duration", synth_.music_opts.duration_s, "Music length (s)")
        ->capture_default_str();
    s->add_option("--rms", synth_.music_opts.target_rms, "Music RMS level")->capture_default_str();
    s->add_option("--seed", synth_.seed)->capture_default_str();
    s->callback([this] {
      action_ = [this] {
        AudioBuffer a;
        if (synth_.music) {
          a = render_music(synth_.music_opts, synth_.seed);
        } else {
          const Inventory inv = inventory_from(synth_.inventory);
          a = synthesize_command(command_words(synth_.words), inv.table, inv.lexicon, synth_.seed);
        }
        write_wav(a, synth_.out);
        write_manifest(synth_.out);
      };
    });
  }

  // decode
  struct {
    std::string model, in, target, inventory;
    int min_run = DecodeOptions{}.min_run;
  } decode_;

  void build_decode() {
    CLI::App* s = sub(&app_, "decode", "Transcribe a WAV file");
    s->add_option("--model", decode_.model, "Acoustic model file")->required();
    s->add_option("--in", decode_.in, "Input WAV")->required();
    s->add_option("--target", decode_.target, "Score against these words");
    s->add_option("--inventory", decode_.inventory, "Inventory file (default: built-in)");
    s->add_option("--min-run", decode_.min_run)->capture_default_str();
    s->callback([this] {
      action_ = [this] {
        const Inventory inv = inventory_from(decode_.inventory);
        const AcousticModel m = load_model(decode_.model);
        DecodeOptions opts;
        opts.min_run = decode_.min_run;
        const DecodeResult r = decode_text(load_audio(decode_.in), m, inv.table, inv.lexicon, opts);
        std::cout << format_decode_report(r, split_words(decode_.target));
      };
    });
  }

  // craft wta / craft waa
  struct {
    CraftOptions common;
    EvalChannelOptions eval;
    std::string out, history, report;
    double noise_bound = 0.08;
    int draws = CraftConfig{}.noise_draws_per_iter;
    int confirm = CraftConfig{}.confirm_iters;
    int instances = 1;
  } craft_;

  void add_craft_outputs(CLI::App* s) {
    s->add_option("--out", craft_.out, "Adversarial WAV")->required();
    s->add_option("--history", craft_.history, "Per-iteration CSV");
    s->add_option("--report", craft_.report, "Report file (default: stdout only)");
    s->add_option("--instances", craft_.instances,
                  "Embed the command this many times, one per equal song segment")
        ->check(CLI::Range(1, 64))
        ->capture_default_str();
  }

  // Splits the song into disjoint segments and crafts each one on its own.
  // Histories are concatenated segment by segment.
  CraftResult craft_segments(const AudioBuffer& song, const Inventory& inv,
                             const AcousticModel& m,
                             const std::function<CraftResult(const AudioBuffer&, std::uint64_t)>& one) {
    const int k = craft_.instances;
    const std::uint64_t seed = craft_.common.seed;
    if (k == 1) return one(song, seed);
    const Eigen::Index len = song.size() / k;
    CraftResult all;
    all.adversarial = AudioBuffer(Eigen::VectorXd(song.size()), song.sample_rate);
    all.perturbation = AudioBuffer(Eigen::VectorXd(song.size()), song.sample_rate);
    all.clean_success = true;
    for (int i = 0; i < k; ++i) {
      const Eigen::Index start = i * len;
      const Eigen::Index n = i + 1 == k ? song.size() - start : len;
      const CraftResult r = one(AudioBuffer(song.samples.segment(start, n), song.sample_rate),
                                derive_seed(seed, std::uint64_t(i)));
      all.adversarial.samples.segment(start, n) = r.adversarial.samples;
      all.perturbation.samples.segment(start, n) = r.perturbation.samples;
      all.iterations = std::max(all.iterations, r.iterations);
      all.history.insert(all.history.end(), r.history.begin(), r.history.end());
      all.clean_success = all.clean_success && r.clean_success;
      if (r.noisy_success_fraction)
        all.noisy_success_fraction =
            std::min(all.noisy_success_fraction.value_or(1.0), *r.noisy_success_fraction);
      all.final_mismatch += r.final_mismatch;
      if (i == 0) {
        all.offset = r.offset;
        all.target = r.target;
      }
    }
    all.snr_db = all.perturbation.samples.squaredNorm() == 0.0
                     ? std::numeric_limits<double>::infinity()
                     : snr_db(song, all.perturbation);
    all.decoded_words = decode_text(all.adversarial, m, inv.table, inv.lexicon).words;
    return all;
  }

  void finish_craft(const CraftResult& r) {
    write_wav(r.adversarial, craft_.out);
    if (!craft_.history.empty()) write_text(craft_.history, format_history_csv(r.history));
    const std::string report = format_craft_report(r);
    if (!craft_.report.empty()) write_text(craft_.report, report);
    write_manifest(craft_.out);
    std::cout << report;
    if (!r.clean_success) {
      if (craft_.common.l == 0.0) throw Failure{"no perturbation budget (l = 0)"};
      throw Failure{"attack did not converge within the iteration budget"};
    }
  }

  void build_craft() {
    CLI::App* g = group("craft", "Craft adversarial songs");
    CLI::App* w = sub(g, "wta", "Direct (wav-to-api) attack");
    craft_.common.add(w);
    add_craft_outputs(w);
    w->callback([this] {
      action_ = [this] {
        const Inventory inv = inventory_from(craft_.common.inventory);
        const AcousticModel m = load_model(craft_.common.model);
        const AudioBuffer song = load_audio(craft_.common.song);
        const auto words = command_words(craft_.common.command);
        finish_craft(craft_segments(song, inv, m, [&](const AudioBuffer& seg, std::uint64_t seed) {
          CraftConfig c = craft_.common.config();
          c.seed = seed;
          return craft_wta(seg, words, m, inv.table, inv.lexicon, c);
        }));
      };
    });

    CLI::App* a = sub(g, "waa", "Over-the-air (wav-air-api) attack");
    craft_.common.add(a);
    add_craft_outputs(a);
    craft_.eval.add(a);
    a->add_option("--noise-bound", craft_.noise_bound, "Crafting noise bound N")
        ->capture_default_str();
    a->add_option("--draws", craft_.draws, "Noise draws per iteration")->capture_default_str();
    a->add_option("--confirm", craft_.confirm, "Consecutive robust iterations before stopping")
        ->capture_default_str();
    a->callback([this] {
      action_ = [this] {
        const Inventory inv = inventory_from(craft_.common.inventory);
        const AcousticModel m = load_model(craft_.common.model);
        const AudioBuffer song = load_audio(craft_.common.song);
        CraftConfig c = craft_.common.config();
        c.noise_bound = craft_.noise_bound;
        c.noise_draws_per_iter = craft_.draws;
        c.confirm_iters = craft_.confirm;
        c.eval_noise_draws = craft_.eval.draws;
        const auto words = command_words(craft_.common.command);
        const ChannelConfig channel = craft_.eval.channel(song);
        finish_craft(craft_segments(song, inv, m, [&](const AudioBuffer& seg, std::uint64_t seed) {
          CraftConfig cs = c;
          cs.seed = seed;
          return craft_waa(seg, words, m, inv.table, inv.lexicon, cs, channel);
        }));
      };
    });
  }

  // channel apply
  struct {
    std::string in, out, noise_wav;
    double noise_bound = 0.0;
    std::uint64_t seed = 0, draw = 0;
  } channel_;

  void build_channel() {
    CLI::App* g = group("channel", "Simulated playback channel");
    CLI::App* s = sub(g, "apply", "Add bounded channel noise to a WAV");
    s->add_option("--in", channel_.in, "Input WAV")->required();
    s->add_option("--out", channel_.out, "Output WAV")->required();
    s->add_option("--noise-bound", channel_.noise_bound, "Noise bound N")->capture_default_str();
    s->add_option("--noise-wav", channel_.noise_wav, "Captured noise recording");
    s->add_option("--seed", channel_.seed)->capture_default_str();
    s->add_option("--draw", channel_.draw, "Draw index")->capture_default_str();
    s->callback([this] {
      action_ = [this] {
        ChannelConfig c;
        c.noise_bound = channel_.noise_bound;
        c.seed = channel_.seed;
        if (!channel_.noise_wav.empty()) c.captured_noise = load_audio(channel_.noise_wav);
        write_wav(apply_channel(load_audio(channel_.in), c, channel_.draw), channel_.out);
        write_manifest(channel_.out);
      };
    });
  }

  // defend turbulence / defend squeeze
  struct {
    std::string model, inventory, csv;
    std::vector<std::string> inputs;
    double snr = 15.0;
    double ratio = 0.7;
    std::uint64_t seed = 1;
  } defend_;

  void add_defend_common(CLI::App* s) {
    s->add_option("--model", defend_.model, "Acoustic model file")->required();
    s->add_option("--in", defend_.inputs, "Input WAV files")->required();
    s->add_option("--inventory", defend_.inventory, "Inventory file (default: built-in)");
    s->add_option("--csv", defend_.csv, "Write verdict rows here as well");
  }

  void run_defense(const std::function<DefenseVerdict(const AudioBuffer&, const AcousticModel&,
                                                      const Inventory&)>& detect) {
    const Inventory inv = inventory_from(defend_.inventory);
    const AcousticModel m = load_model(defend_.model);
    std::ostringstream rows;
    rows << verdict_csv_header() << '\n';
    int detected = 0;
    for (const auto& path : defend_.inputs) {
      const DefenseVerdict v = detect(load_audio(path), m, inv);
      detected += v.detected ? 1 : 0;
      rows << format_verdict_csv(path, v) << '\n';
    }
    std::cout << rows.str();
    if (!defend_.csv.empty()) {
      write_text(defend_.csv, rows.str());
      write_manifest(defend_.csv);
    }
    if (detected > 0)
      throw Failure{std::to_string(detected) + " of " + std::to_string(defend_.inputs.size()) +
                    " inputs flagged as adversarial"};
  }

  void build_defend() {
    CLI::App* g = group("defend", "Detect adversarial audio");
    CLI::App* t = sub(g, "turbulence", "Compare transcripts before and after added noise");
    add_defend_common(t);
    t->add_option("--snr", defend_.snr, "Turbulence SNR (dB)")->capture_default_str();
    t->add_option("--seed", defend_.seed)->capture_default_str();
    t->callback([this] {
      action_ = [this] {
        run_defense([this](const AudioBuffer& a, const AcousticModel& m, const Inventory& inv) {
          return detect_turbulence(a, m, inv.table, inv.lexicon, defend_.snr, defend_.seed);
        });
      };
    });

    CLI::App* s = sub(g, "squeeze", "Compare transcripts before and after rate squeezing");
    add_defend_common(s);
    s->add_option("--ratio", defend_.ratio, "Squeeze ratio 1/M")->capture_default_str();
    s->callback([this] {
      action_ = [this] {
        run_defense([this](const AudioBuffer& a, const AcousticModel& m, const Inventory& inv) {
          return detect_squeezing(a, m, inv.table, inv.lexicon, defend_.ratio);
        });
      };
    });
  }

  // sweep noise / sweep defense
  struct {
    CraftOptions common;
    EvalChannelOptions eval;
    std::string out;
    std::vector<double> grid;
    int points = 5;
    double n_min = 0.01, n_max = 0.16;
    int trials = 20;
    int draws = CraftConfig{}.noise_draws_per_iter;
    bool spearman = false;

    std::string model, inventory, defense = "turbulence";
    std::vector<std::string> clean, wta, waa;
  } sweep_;

  void build_sweep() {
    CLI::App* g = group("sweep", "Experiment sweeps emitted as CSV");
    CLI::App* n = sub(g, "noise", "Crafting-noise sweep: correlation and robust success");
    sweep_.common.add(n);
    sweep_.eval.add(n);
    n->add_option("--out", sweep_.out, "Output CSV")->required();
    n->add_option("--grid", sweep_.grid, "Explicit N values");
    n->add_option("--n-min", sweep_.n_min)->capture_default_str();
    n->add_option("--n-max", sweep_.n_max)->capture_default_str();
    n->add_option("--points", sweep_.points)->capture_default_str();
    n->add_option("--trials", sweep_.trials, "Evaluation draws per point")->capture_default_str();
    n->add_option("--draws", sweep_.draws, "Noise draws per iteration")->capture_default_str();
    n->add_flag("--spearman", sweep_.spearman, "Rank correlation instead of the plain formula");
    n->callback([this] {
      action_ = [this] {
        const Inventory inv = inventory_from(sweep_.common.inventory);
        const AcousticModel m = load_model(sweep_.common.model);
        const AudioBuffer song = load_audio(sweep_.common.song);
        NoiseSweepConfig cfg;
        cfg.noise_bounds = sweep_.grid.empty()
                               ? log_spaced(sweep_.n_min, sweep_.n_max, sweep_.points)
                               : sweep_.grid;
        cfg.trials = sweep_.trials;
        cfg.seed = sweep_.common.seed;
        cfg.craft = sweep_.common.config();
        cfg.craft.noise_draws_per_iter = sweep_.draws;
        cfg.eval_channel = sweep_.eval.channel(song);
        cfg.mode = sweep_.spearman ? CorrelationMode::kSpearman : CorrelationMode::kAsWritten;
        const auto rows = run_noise_sweep(song, command_words(sweep_.common.command), m, inv.table,
                                          inv.lexicon, cfg);
        const std::string csv = format_sweep_csv(rows);
        write_text(sweep_.out, csv);
        write_manifest(sweep_.out);
        std::cout << csv;
      };
    });

    CLI::App* d = sub(g, "defense", "Detection rates per sample label over a parameter grid");
    d->add_option("--model", sweep_.model, "Acoustic model file")->required();
    d->add_option("--inventory", sweep_.inventory, "Inventory file (default: built-in)");
    d->add_option("--defense", sweep_.defense, "turbulence | squeeze")
        ->check(CLI::IsMember({"turbulence", "squeeze"}))
        ->capture_default_str();
    d->add_option("--clean", sweep_.clean, "Clean command WAVs");
    d->add_option("--wta", sweep_.wta, "Direct-attack WAVs");
    d->add_option("--waa", sweep_.waa, "Over-the-air WAVs");
    d->add_option("--grid", sweep_.grid, "Parameter values")->required();
    d->add_option("--trials", sweep_.trials, "Noise draws per sample")->capture_default_str();
    d->add_option("--seed", sweep_.common.seed)->capture_default_str();
    d->add_option("--out", sweep_.out, "Output CSV")->required();
    d->callback([this] {
      action_ = [this] {
        const Inventory inv = inventory_from(sweep_.inventory);
        const AcousticModel m = load_model(sweep_.model);
        std::vector<LabeledSample> samples;
        const auto add = [&](const std::vector<std::string>& paths, SampleLabel label) {
          for (const auto& p : paths) samples.push_back({label, load_audio(p)});
        };
        add(sweep_.clean, SampleLabel::kClean);
        add(sweep_.wta, SampleLabel::kWta);
        add(sweep_.waa, SampleLabel::kWaa);
        const auto kind =
            sweep_.defense == "squeeze" ? DefenseKind::kSqueezing : DefenseKind::kTurbulence;
        const auto rows = run_defense_sweep(samples, m, inv.table, inv.lexicon, kind, sweep_.grid,
                                            sweep_.trials, sweep_.common.seed);
        const std::string csv = format_sweep_csv(rows);
        write_text(sweep_.out, csv);
        write_manifest(sweep_.out);
        std::cout << csv;
      };
    });
  }

  CLI::App app_;
  bool print_config_ = false;
  std::function<void()> action_;
};

}  // namespace

int cli_main(int argc, char** argv) {
  Cli cli;
  return cli.run(argc, argv);
}

}  // namespace csong
