#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wbhp/channel.hpp"
#include "wbhp/codebook.hpp"
#include "wbhp/parallel.hpp"
#include "wbhp/precoder.hpp"

namespace wbhp {

enum class SchemeKind {
  UnconstrainedSvd,         // fully digital SVD precoding, perfect CSI
  OptimalHybridExhaustive,  // exhaustive RF search (matrix codebook or vector-codebook subsets)
  ApproxGsHp,               // maximum-projection greedy RF + optimal baseband
  DgHp,
  GsHp,
  TrainedCodebook,          // RF matrix codebook + per-subcarrier G_BB codebook
};

std::string_view to_string(SchemeKind k);
SchemeKind scheme_kind_from_string(std::string_view s);

/// One scheme row in a sweep.
///
/// Codebook references are file paths (relative to the config file) or
/// "beamsteering:<size>:<phase_bits>" for a generated vector codebook.
struct SchemeSpec {
  SchemeKind kind = SchemeKind::UnconstrainedSvd;
  PowerConstraint mode = PowerConstraint::Unitary;
  std::string rf_ref;   // RF matrix codebook (exhaustive / trained) or vector codebook
  std::string bb_ref;   // baseband codebook (trained)
  std::string label;    // defaults to a name derived from kind and mode
};

/// Equivalent-baseband handling in RF-chain sweeps.
struct BasebandPolicy {
  bool quantized = true;  // false => optimal (unquantized) G[k]
  int codebook_size = 64;
  int n_train = 300;
  int max_iters = 50;
};

struct ExperimentConfig {
  SystemConfig system;
  ChannelStatsConfig stats;
  std::vector<SchemeSpec> schemes;
  std::vector<double> snr_grid_db{0.0};
  int n_realizations = 200;
  std::uint64_t seed = 1;
  bool record_timing = false;  // false => wall_ms written as 0 so outputs are byte-stable
  std::filesystem::path base_dir = ".";

  std::vector<int> clusters_grid;   // cluster-sweep
  std::vector<int> nrf_grid;        // rfchain-sweep
  std::string rfchain_vcb = "beamsteering:32:5";
  BasebandPolicy baseband;

  // Training settings (train-rf / train-bb subcommands).
  int train_n_cb = 128;
  int train_bb_n_cb = 8;
  int train_phase_bits = 6;
  int train_n_train = 1000;
  int train_max_iters = 50;
  double train_tol = 1e-4;
  std::string train_rf_ref;  // train-bb: RF codebook to condition on

  void validate() const;
};

struct SweepRow {
  std::string scheme;
  double snr_db = 0.0;
  std::optional<double> param;  // L for cluster sweeps, N_RF for RF-chain sweeps
  double mean_se = 0.0;
  double stderr_se = 0.0;
  int n = 0;
  std::int64_t feedback_bits = 0;
  double wall_ms = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;

  [[nodiscard]] const SweepRow* find(std::string_view scheme, double snr_db,
                                     std::optional<double> param = std::nullopt) const;
};

/// A scheme with its codebooks loaded.
struct ResolvedScheme {
  SchemeSpec spec;
  std::string label;
  std::optional<RfCodebook> rf;
  std::optional<BasebandCodebook> bb;
  std::int64_t feedback_bits = 0;
};

// Loads every codebook reference; throws ConfigError before any computation.
std::vector<ResolvedScheme> resolve_schemes(const ExperimentConfig& cfg);

// Spectral efficiency of one scheme on one channel (bits/s/Hz).
double evaluate_scheme(const ResolvedScheme& scheme, const WidebandChannel& channel, double rho,
                       const SystemConfig& sys);

/// Monte-Carlo sweep over (scheme, SNR) with common random numbers.
///
/// Realization r uses generate_channel(system, stats, seed, r) for every
/// scheme and SNR. Realizations run in parallel; rows come out in
/// (scheme, SNR) order.
SweepResult run_sweep(const ExperimentConfig& cfg, Exec exec = Exec::Parallel);

// run_sweep with one ray per cluster and L taken from clusters_grid.
SweepResult cluster_sweep(const ExperimentConfig& cfg, Exec exec = Exec::Parallel);

/// Approximate GS-HP versus N_RF at fixed N_S, with feedback-bit accounting.
///
/// Entries of nrf_grid below N_S are skipped with a warning. When
/// baseband.quantized is set and N_S < N_RF, a G_BB codebook of
/// baseband.codebook_size is trained per N_RF on realizations drawn from an
/// independent seed stream, and G[k] is chosen per subcarrier from it.
/// An "unconstrained-svd" reference row per SNR is always included.
SweepResult rf_chain_sweep(const ExperimentConfig& cfg, Exec exec = Exec::Parallel);

// CSV with columns scheme,snr_db,param,mean_se,stderr,n,feedback_bits,wall_ms.
void write_sweep_csv(std::ostream& out, const SweepResult& r);
void write_sweep_json(std::ostream& out, const SweepResult& r);

// Parses an experiment config (JSON). Relative codebook refs resolve against the file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir);

// Switches to the full-scale setup: K = 512, D = 128.
void apply_full_scale(ExperimentConfig& cfg);

// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

}  // namespace wbhp
