// Command-line driver: codebook training, Monte-Carlo sweeps and feedback accounting.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "wbhp/channel_io.hpp"
#include "wbhp/codebook_io.hpp"
#include "wbhp/errors.hpp"
#include "wbhp/experiment.hpp"
#include "wbhp/greedy.hpp"

namespace {

using namespace wbhp;

constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

// Training channels come from their own stream so they never coincide with
// the evaluation realizations of a sweep that uses the same seed.
constexpr std::uint64_t kTrainStream = 0x7472616e;
constexpr std::uint64_t kBasebandStream = 0x62617365;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool full_scale = false;
  bool serial = false;
};

void add_common(CLI::App* app, Common& c, bool need_config = true) {
  auto* opt = app->add_option("--config", c.config, "experiment config (JSON)");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "override the config seed");
  app->add_option("--out", c.out, "output path (stdout when omitted)");
  app->add_flag("--full-scale", c.full_scale, "use K = 512, D = 128");
  app->add_flag("--serial", c.serial, "run the serial reference kernels");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_experiment_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.full_scale) apply_full_scale(cfg);
  cfg.validate();
  return cfg;
}

Exec exec_of(const Common& c) { return c.serial ? Exec::Serial : Exec::Parallel; }

template <class Writer>
void emit(const std::string& path, Writer&& w) {
  if (path.empty() || path == "-") {
    w(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  w(out);
  if (!out) throw FormatError("write to " + path + " failed");
}

void write_trace(const std::string& path, const DistortionTrace& t) {
  if (!path.empty()) emit(path, [&](std::ostream& o) { write_trace_csv(o, t); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wideband hybrid precoding: codebook training and spectral-efficiency sweeps"};
  app.require_subcommand(1);

  Common train_rf_opts;
  std::string train_rf_trace;
  bool train_rf_vector = false;
  auto* train_rf = app.add_subcommand("train-rf", "train an RF matrix (or vector) codebook");
  add_common(train_rf, train_rf_opts);
  train_rf->add_option("--trace", train_rf_trace, "distortion trace CSV");
  train_rf->add_flag("--vector", train_rf_vector, "train a rank-1 vector codebook instead");

  Common train_bb_opts;
  std::string train_bb_trace, train_bb_rf;
  auto* train_bb = app.add_subcommand("train-bb", "train an equivalent-baseband codebook (n_s < n_rf)");
  add_common(train_bb, train_bb_opts);
  train_bb->add_option("--trace", train_bb_trace, "distortion trace CSV");
  train_bb->add_option("--rf", train_bb_rf, "RF matrix codebook to condition on (overrides training.rf)");

  Common vcb_opts;
  int vcb_size = 32, vcb_bits = 6;
  auto* gen_vcb = app.add_subcommand("gen-vcb", "write a beamsteering vector codebook");
  add_common(gen_vcb, vcb_opts, false);
  gen_vcb->add_option("--size", vcb_size, "number of beams")->check(CLI::PositiveNumber);
  gen_vcb->add_option("--bits", vcb_bits, "phase-shifter bits")->check(CLI::Range(1, 16));

  Common sweep_opts, cluster_opts, rfchain_opts;
  bool sweep_json = false, timing = false;
  auto* sweep = app.add_subcommand("sweep", "spectral efficiency versus SNR");
  auto* csweep = app.add_subcommand("cluster-sweep", "spectral efficiency versus number of clusters");
  auto* rsweep = app.add_subcommand("rfchain-sweep", "spectral efficiency and feedback versus RF chains");
  for (auto [cmd, opts] : {std::pair{sweep, &sweep_opts}, {csweep, &cluster_opts}, {rsweep, &rfchain_opts}}) {
    add_common(cmd, *opts);
    cmd->add_flag("--json", sweep_json, "write JSON instead of CSV");
    cmd->add_flag("--timing", timing, "record wall-clock per row");
  }

  std::string bits_scheme = "vector";
  FeedbackParams bits_p;
  auto* bits = app.add_subcommand("bits", "feedback bits per channel use");
  bits->add_option("--scheme", bits_scheme, "vector or matrix")->check(CLI::IsMember({"vector", "matrix"}));
  bits->add_option("--n-rf", bits_p.n_rf)->check(CLI::PositiveNumber);
  bits->add_option("--n-s", bits_p.n_s)->check(CLI::PositiveNumber);
  bits->add_option("--k", bits_p.k_sub)->check(CLI::PositiveNumber);
  bits->add_option("--rf-size", bits_p.rf_codebook_size, "|F_RF| or |F_v|")->check(CLI::PositiveNumber);
  bits->add_option("--bb-size", bits_p.bb_codebook_size, "|G_BB|")->check(CLI::PositiveNumber);

  Common chan_opts;
  std::uint64_t chan_index = 0;
  auto* gen_channel = app.add_subcommand("gen-channel", "write one channel realization (.json or binary)");
  add_common(gen_channel, chan_opts, false);
  gen_channel->add_option("--index", chan_index, "realization index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train_rf) {
      const ExperimentConfig cfg = load(train_rf_opts);
      RfTrainingConfig t;
      t.system = cfg.system;
      t.stats = cfg.stats;
      t.n_cb = cfg.train_n_cb;
      t.phase_bits = cfg.train_phase_bits;
      t.n_train = cfg.train_n_train;
      t.max_iters = cfg.train_max_iters;
      t.tol = cfg.train_tol;
      t.seed = realization_seed(cfg.seed, kTrainStream);
      const auto exec = exec_of(train_rf_opts);
      const RfTrainingResult r = train_rf_vector ? train_rf_vector_codebook(t, exec) : train_rf_codebook(t, exec);
      emit(train_rf_opts.out, [&](std::ostream& o) { write_rf_codebook(o, r.codebook); });
      write_trace(train_rf_trace, r.trace);
    } else if (*train_bb) {
      const ExperimentConfig cfg = load(train_bb_opts);
      const std::string ref = train_bb_rf.empty() ? cfg.train_rf_ref : train_bb_rf;
      if (ref.empty()) throw ConfigError("train-bb needs an RF codebook (--rf or training.rf)");
      std::filesystem::path p(ref);
      if (train_bb_rf.empty() && p.is_relative()) p = cfg.base_dir / p;
      RfCodebook rf;
      try {
        rf = load_rf_codebook(p);
      } catch (const FormatError& e) {
        throw ConfigError(e.what());
      }
      if (rf.n != cfg.system.n_bs || rf.r != cfg.system.n_rf)
        throw ConfigError("RF codebook shape does not match n_bs x n_rf");
      BasebandTrainingConfig b;
      b.system = cfg.system;
      b.stats = cfg.stats;
      b.n_cb = cfg.train_bb_n_cb;
      b.n_train = cfg.train_n_train;
      b.max_iters = cfg.train_max_iters;
      b.tol = cfg.train_tol;
      b.seed = realization_seed(cfg.seed, kBasebandStream);
      if (b.system.n_s >= b.system.n_rf) throw ConfigError("train-bb requires n_s < n_rf");
      const auto r = train_baseband_codebook(b, exhaustive_selector(rf, cfg.system.snr_linear(), cfg.system.n_s),
                                             exec_of(train_bb_opts));
      emit(train_bb_opts.out, [&](std::ostream& o) { write_baseband_codebook(o, r.codebook); });
      write_trace(train_bb_trace, r.trace);
    } else if (*gen_vcb) {
      const ExperimentConfig cfg = load(vcb_opts);
      const RfCodebook cb = beamsteering_codebook(vcb_size, cfg.system.n_bs, cfg.system.antenna_spacing, vcb_bits);
      emit(vcb_opts.out, [&](std::ostream& o) { write_rf_codebook(o, cb); });
    } else if (*sweep || *csweep || *rsweep) {
      const Common& opts = *sweep ? sweep_opts : (*csweep ? cluster_opts : rfchain_opts);
      ExperimentConfig cfg = load(opts);
      if (timing) cfg.record_timing = true;
      const auto exec = exec_of(opts);
      const SweepResult r = *sweep ? run_sweep(cfg, exec) : (*csweep ? cluster_sweep(cfg, exec) : rf_chain_sweep(cfg, exec));
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      emit(opts.out, [&](std::ostream& o) {
        if (sweep_json)
          write_sweep_json(o, r);
        else
          write_sweep_csv(o, r);
      });
    } else if (*bits) {
      bits_p.scheme = bits_scheme == "matrix" ? FeedbackScheme::RfMatrix : FeedbackScheme::RfVector;
      if (!is_power_of_two(bits_p.rf_codebook_size) ||
          (bits_p.n_s < bits_p.n_rf && !is_power_of_two(bits_p.bb_codebook_size)))
        std::cerr << "warning: codebook size is not a power of two; using ceil(log2)\n";
      std::cout << feedback_bits(bits_p) << '\n';
    } else if (*gen_channel) {
      const ExperimentConfig cfg = load(chan_opts);
      if (chan_opts.out.empty()) throw ConfigError("gen-channel needs --out");
      ChannelRecord rec;
      rec.seed = cfg.seed;
      rec.channel = generate_channel(cfg.system, cfg.stats, cfg.seed, chan_index);
      save_channel(chan_opts.out, rec);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DegenerateCodeword& e) {
    std::cerr << "numerical degeneracy: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const Infeasible& e) {
    std::cerr << "numerical degeneracy: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
