#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "wbhp/linalg.hpp"

namespace wbhp {

/// Link dimensions and signalling parameters.
///
/// Time is measured in samples (T_s = 1). Subcarriers are indexed 0..K-1 and
/// the subcarrier response uses exp(-j 2 pi k d / K) with that 0-based k.
struct SystemConfig {
  int n_bs = 32;
  int n_ms = 8;
  int n_rf = 3;
  int n_s = 3;
  int k_sub = 64;
  int cp_len = 16;
  double snr_db = 0.0;
  double antenna_spacing = 0.5;  // d_s / lambda
  double rolloff = 1.0;
  std::uint64_t rng_seed = 1;

  // Throws InvalidArgument when an invariant is broken.
  void validate() const;
  [[nodiscard]] double snr_linear() const;
};

/// How ray delays are drawn inside [0, cp_len].
enum class DelayPolicy {
  PerCluster,  // cluster delay ~ U[0, D]; rays add U[0, ray_delay_spread]
  PerRay,      // every ray delay ~ U[0, D] independently
};

/// Statistics of the geometric cluster channel.
struct ChannelStatsConfig {
  int n_clusters = 6;           // L
  int rays_per_cluster = 5;     // R
  double angle_spread_rad = 10.0 * 3.14159265358979323846 / 180.0;  // Laplacian std-dev
  DelayPolicy delay_policy = DelayPolicy::PerCluster;
  double ray_delay_spread = 1.0;  // samples, PerCluster only
  double path_loss = 1.0;
};

struct Ray {
  double rel_delay = 0.0;
  double aoa_shift = 0.0;
  double aod_shift = 0.0;
  cd gain{1.0, 0.0};
};

struct Cluster {
  double delay = 0.0;
  double aoa = 0.0;
  double aod = 0.0;
  std::vector<Ray> rays;
};

struct ClusterSet {
  double path_loss = 1.0;
  std::vector<Cluster> clusters;

  [[nodiscard]] std::size_t ray_count() const;
};

/// Per-subcarrier channel matrices, each n_ms x n_bs, with cached thin SVDs.
struct WidebandChannel {
  std::vector<CMat> per_subcarrier;
  std::vector<TruncatedSvd> svds;  // empty until compute_svds() is called

  [[nodiscard]] int k_sub() const { return static_cast<int>(per_subcarrier.size()); }
  [[nodiscard]] int n_ms() const;
  [[nodiscard]] int n_bs() const;
  [[nodiscard]] bool has_svds() const { return svds.size() == per_subcarrier.size() && !svds.empty(); }

  // Full-rank thin SVD of every subcarrier (rank min(n_ms, n_bs)).
  void compute_svds();
};

// a(angle) with entries exp(j 2 pi spacing m sin(angle)) / sqrt(n), m = 0..n-1.
CVec array_response_ula(double angle, int n, double spacing);

// Raised-cosine pulse with T_s = 1; t = +-1/(2 beta) uses the limit value.
double raised_cosine(double t, double rolloff);

// Zero-mean Laplacian draw with the given standard deviation.
double sample_laplacian(double stddev, std::mt19937_64& rng);

ClusterSet sample_cluster_set(const ChannelStatsConfig& cfg, int cp_len, std::mt19937_64& rng);

// Delay-d tap matrix (n_ms x n_bs) of the geometric channel.
CMat delay_tap(const ClusterSet& cs, int d, const SystemConfig& cfg);

std::vector<CMat> delay_taps(const ClusterSet& cs, const SystemConfig& cfg);

// H[k] = sum_d taps[d] exp(-j 2 pi k d / K), k = 0..K-1. SVDs are not computed.
WidebandChannel to_subcarriers(std::span<const CMat> taps, int k_sub);

/// Seed for realization `index` of a run seeded with `seed` (splitmix64 mix).
///
/// Realizations drawn from derived seeds are independent of evaluation order,
/// so parallel and sequential generation agree bit for bit.
std::uint64_t realization_seed(std::uint64_t seed, std::uint64_t index);

/// Draws realization `index` of the channel process and caches its SVDs.
WidebandChannel generate_channel(const SystemConfig& sys, const ChannelStatsConfig& stats,
                                 std::uint64_t seed, std::uint64_t index);

// Same as generate_channel but also returns the geometric parameters.
std::pair<WidebandChannel, ClusterSet> generate_channel_with_clusters(
    const SystemConfig& sys, const ChannelStatsConfig& stats, std::uint64_t seed, std::uint64_t index);

}  // namespace wbhp
