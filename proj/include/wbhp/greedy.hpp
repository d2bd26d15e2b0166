#pragma once

#include <cstdint>
#include <vector>

#include "wbhp/channel.hpp"
#include "wbhp/linalg.hpp"
#include "wbhp/parallel.hpp"
#include "wbhp/precoder.hpp"

namespace wbhp {

/// Working state of the greedy RF selection.
struct GreedyState {
  CMat f_rf_partial;     // selected original codewords, n_bs x i
  CMat projected_basis;  // orthonormal basis of span(f_rf_partial)
  CMat pi;               // residual n_bs x K*r (approximate GS-HP only)
  std::vector<CMat> t_accum;  // per-subcarrier H Q Q^H H^H (GS-HP only)
  std::vector<int> selected;
};

struct GreedyResult {
  CMat f_rf;
  std::vector<int> indices;
  double mi = 0.0;                 // greedy objective after the final iteration
  std::vector<double> mi_per_iteration;
  std::vector<std::vector<double>> scores;  // candidate scores per iteration (NaN = skipped)
};

// How GS-HP evaluates log det(I + c (T + h h^H)) for a candidate.
enum class GsEigenMode { RankOneUpdate, FullDecomposition };

/// Direct greedy selection of n_rf distinct codewords.
///
/// Iteration i picks the unused codeword maximizing
/// (1/K) sum_k log2 det(I + rho/N_S H Q Q^H H^H), Q the orthonormal factor
/// of [F^(i-1), f_n]. Candidates that make the matrix rank deficient are
/// skipped. n_s defaults to n_rf when zero.
GreedyResult dg_hp(const CMat& vcb, const WidebandChannel& channel, double rho, int n_rf, int n_s = 0,
                   Exec exec = Exec::Parallel);

/// Gram-Schmidt greedy selection: candidates are projected onto the orthogonal
/// complement of the selected span before scoring. Returns the original codewords.
GreedyResult gs_hp(const CMat& vcb, const WidebandChannel& channel, double rho, int n_rf, int n_s = 0,
                   GsEigenMode mode = GsEigenMode::RankOneUpdate, Exec exec = Exec::Parallel);

struct ApproxGsResult {
  HybridPrecoder precoder;
  std::vector<int> indices;
  GreedyState state;  // final state, for inspection
};

/// Maximum-projection greedy RF selection followed by the Unitary baseband.
///
/// The residual starts as [V_1 S_1, ..., V_K S_K] truncated to `trunc_rank`
/// (n_s when zero) and is deflated by the complement projector of the
/// selected codewords after each pick.
ApproxGsResult approx_gs_hp(const CMat& vcb, const WidebandChannel& channel, int n_rf, int n_s, double rho,
                            int trunc_rank = 0);

// Exhaustive search over all n_rf-subsets of the vector codebook.
GreedyResult exhaustive_subset_search(const CMat& vcb, const WidebandChannel& channel, double rho, int n_rf, int n_s,
                                      PowerConstraint mode, Exec exec = Exec::Parallel);

enum class FeedbackScheme { RfMatrix, RfVector };

struct FeedbackParams {
  FeedbackScheme scheme = FeedbackScheme::RfVector;
  int n_rf = 2;
  int n_s = 2;
  int k_sub = 512;
  std::uint64_t rf_codebook_size = 32;   // |F_RF| or |F_v|
  std::uint64_t bb_codebook_size = 64;   // |G_BB|, used when n_s < n_rf
};

// ceil(log2(n)); n must be >= 1.
int index_bits(std::uint64_t n);
bool is_power_of_two(std::uint64_t n);

// RF bits plus K log2|G_BB| when n_s < n_rf.
std::int64_t feedback_bits(const FeedbackParams& p);

}  // namespace wbhp
