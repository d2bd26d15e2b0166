#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "wbhp/channel.hpp"
#include "wbhp/grassmann.hpp"
#include "wbhp/linalg.hpp"
#include "wbhp/parallel.hpp"

namespace wbhp {

enum class RfKind { Matrix, Vector };

/// RF codebook with unit-modulus entries on a uniform 2^phase_bits phase grid.
///
/// Entry (p, q) of codeword i is exp(j 2 pi phase_index[i](p, q) / 2^phase_bits).
/// Vector codebooks are the r = 1 case. `twins` holds the unconstrained
/// semi-unitary centroids when the codebook came out of Lloyd training.
struct RfCodebook {
  RfKind kind = RfKind::Matrix;
  int n = 0;
  int r = 0;
  int phase_bits = 6;
  std::vector<Eigen::MatrixXi> phase_index;
  std::vector<CMat> codewords;
  std::vector<CMat> twins;

  [[nodiscard]] int size() const { return static_cast<int>(codewords.size()); }
  // Vector codebook as an n x N_CB matrix of columns.
  [[nodiscard]] CMat columns() const;

  static RfCodebook from_phase_indices(RfKind kind, int phase_bits, std::vector<Eigen::MatrixXi> idx);
};

struct BasebandCodebook {
  int n = 0;  // n_rf
  int r = 0;  // n_s
  std::vector<CMat> codewords;

  [[nodiscard]] int size() const { return static_cast<int>(codewords.size()); }
};

/// One channel realization as seen by the quantizer: K dominant bases.
struct TrainingMember {
  std::vector<SubspacePoint> bases;
  std::vector<RVec> sigma;
  CMat projector_sum;  // sum_k B_k B_k^H, cached for fast distortion scoring
};

struct TrainingSet {
  int n = 0;  // ambient dimension
  int r = 0;  // dimension of each basis
  std::vector<TrainingMember> members;

  [[nodiscard]] int size() const { return static_cast<int>(members.size()); }
  void add(std::vector<SubspacePoint> bases, std::vector<RVec> sigma = {});
};

struct DistortionSample {
  double unconstrained = 0.0;
  double rf = 0.0;  // equals `unconstrained` for codebooks without an RF step
};

struct DistortionTrace {
  // Entry 0 is the random initial codebook; entry t the codebook after
  // t Lloyd iterations.
  std::vector<DistortionSample> per_iteration;
};

std::vector<CMat> init_codebook(int n_cb, int n, int r, std::mt19937_64& rng);

/// Training members from realizations 0..n_train-1 of the channel process.
///
/// Each member stores the leading `r` right singular vectors of every H[k].
TrainingSet build_training_set(const SystemConfig& sys, const ChannelStatsConfig& stats, int n_train, int r,
                               std::uint64_t seed, Exec exec = Exec::Parallel);

struct Assignment {
  std::vector<int> cell;           // codeword index per member
  std::vector<double> distortion;  // average chordal distance to that codeword
  [[nodiscard]] double mean() const;
};

// Nearest codeword per member under the average (generalized) chordal metric;
// ties go to the lowest codeword index.
Assignment assign(std::span<const SubspacePoint> codewords, const TrainingSet& training, bool generalized,
                  Exec exec = Exec::Parallel);

std::vector<std::vector<int>> partition(std::span<const SubspacePoint> codewords, const TrainingSet& training,
                                        bool generalized, Exec exec = Exec::Parallel);

/// Centroid of every cell (top-`rank` eigenvectors of the summed projectors).
///
/// Empty cells are reseeded at the centroid of the member with the largest
/// current distortion, taking members in decreasing-distortion order so two
/// empty cells never share a seed.
std::vector<SubspacePoint> recenter(const std::vector<std::vector<int>>& cells, const TrainingSet& training,
                                    int rank, std::span<const double> member_distortion,
                                    Exec exec = Exec::Parallel);

// Nearest grid phase per entry; half-step ties go to the smaller grid angle;
// zero entries map to phase index 0.
Eigen::MatrixXi rf_phase_indices(const CMat& f_u, int phase_bits);
CMat unit_modulus_from_indices(const Eigen::MatrixXi& idx, int phase_bits);
CMat rf_project(const CMat& f_u, int phase_bits);

struct LloydParams {
  int n_cb = 16;
  int rank = 3;            // codeword dimension (n_rf)
  int max_iters = 50;
  double tol = 1e-4;       // relative improvement of the unconstrained distortion
  std::optional<int> phase_bits;  // set => RF projection step after each recenter
};

struct LloydResult {
  std::vector<CMat> twins;       // unconstrained centroids
  std::vector<CMat> rf;          // quantized codewords (empty without RF step)
  std::vector<Eigen::MatrixXi> rf_index;
  DistortionTrace trace;
};

/// Lloyd iteration: partition, recenter, optional RF projection.
///
/// Uses the generalized chordal distance whenever training bases have lower
/// dimension than the codewords.
LloydResult lloyd_train(const TrainingSet& training, const LloydParams& params, std::mt19937_64& rng,
                        Exec exec = Exec::Parallel);

struct RfTrainingConfig {
  SystemConfig system;
  ChannelStatsConfig stats;
  int n_cb = 128;
  int phase_bits = 6;
  int n_train = 1000;
  int max_iters = 50;
  double tol = 1e-4;
  std::uint64_t seed = 1;
};

struct RfTrainingResult {
  RfCodebook codebook;
  DistortionTrace trace;
};

// RF matrix codebook over n_bs x n_rf, trained on the leading n_s right singular vectors.
RfTrainingResult train_rf_codebook(const RfTrainingConfig& cfg, Exec exec = Exec::Parallel);
RfTrainingResult train_rf_codebook(const TrainingSet& training, int n_cb, int n_rf, int phase_bits, int max_iters,
                                   double tol, std::uint64_t seed, Exec exec = Exec::Parallel);

// Maps a channel realization to the RF precoder used when training G_BB.
using RfSelector = std::function<CMat(const WidebandChannel&)>;

// RF selector that runs the closed-form Unitary exhaustive search over `codebook`.
RfSelector exhaustive_selector(const RfCodebook& codebook, double rho, int n_s);

struct BasebandTrainingConfig {
  SystemConfig system;
  ChannelStatsConfig stats;
  int n_cb = 8;
  int n_train = 1000;
  int max_iters = 50;
  double tol = 1e-4;
  std::uint64_t seed = 2;
};

/// Members hold [V_bar[k]]_{:,1:N_S} of the effective channel behind the RF
/// precoder chosen by `selector` for each realization.
TrainingSet build_baseband_training_set(const BasebandTrainingConfig& cfg, const RfSelector& selector,
                                        Exec exec = Exec::Parallel);

struct BasebandTrainingResult {
  BasebandCodebook codebook;
  DistortionTrace trace;
};

// Requires n_s < n_rf; throws InvalidArgument otherwise.
BasebandTrainingResult train_baseband_codebook(const BasebandTrainingConfig& cfg, const RfSelector& selector,
                                               Exec exec = Exec::Parallel);
BasebandTrainingResult train_baseband_codebook(const TrainingSet& training, int n_cb, int max_iters, double tol,
                                               std::uint64_t seed, Exec exec = Exec::Parallel);

/// Beamsteering vectors sqrt(n) a(phi_i) with sin(phi_i) = -1 + 2 i / n_cb,
/// projected onto the phase grid.
RfCodebook beamsteering_codebook(int n_cb, int n, double spacing, int phase_bits);

// Lloyd-trained rank-1 RF vector codebook over the dominant right singular vector of each H[k].
RfTrainingResult train_rf_vector_codebook(const RfTrainingConfig& cfg, Exec exec = Exec::Parallel);

// Subspace points U_RF of RF codewords (orthonormal factor of each codeword).
std::vector<SubspacePoint> rf_subspaces(std::span<const CMat> codewords);
std::vector<SubspacePoint> as_subspaces(std::span<const CMat> semi_unitary);

// Mean over validation members of the minimum average chordal distance.
double codebook_distortion(std::span<const SubspacePoint> codewords, const TrainingSet& validation,
                           bool generalized, Exec exec = Exec::Parallel);

}  // namespace wbhp
