#include "wbhp/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wbhp/errors.hpp"

namespace wbhp {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}
}  // namespace

void SystemConfig::validate() const {
  if (n_bs < 1 || n_ms < 1 || n_rf < 1 || n_s < 1 || k_sub < 1 || cp_len < 1)
    throw InvalidArgument("SystemConfig: dimensions must be positive");
  if (n_s > n_rf) throw InvalidArgument("SystemConfig: n_s must not exceed n_rf");
  if (n_rf > std::min(n_bs, n_ms)) throw InvalidArgument("SystemConfig: n_rf must not exceed min(n_bs, n_ms)");
  if (cp_len >= k_sub) throw InvalidArgument("SystemConfig: cp_len must be smaller than k_sub");
  if (!(antenna_spacing > 0.0)) throw InvalidArgument("SystemConfig: antenna_spacing must be positive");
  if (!(rolloff > 0.0 && rolloff <= 1.0)) throw InvalidArgument("SystemConfig: rolloff must lie in (0, 1]");
}

double SystemConfig::snr_linear() const { return std::pow(10.0, snr_db / 10.0); }

std::size_t ClusterSet::ray_count() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.rays.size();
  return n;
}

int WidebandChannel::n_ms() const { return per_subcarrier.empty() ? 0 : static_cast<int>(per_subcarrier[0].rows()); }
int WidebandChannel::n_bs() const { return per_subcarrier.empty() ? 0 : static_cast<int>(per_subcarrier[0].cols()); }

void WidebandChannel::compute_svds() {
  svds.clear();
  svds.reserve(per_subcarrier.size());
  for (const auto& h : per_subcarrier) svds.push_back(thin_svd(h));
}

CVec array_response_ula(double angle, int n, double spacing) {
  if (n < 1) throw InvalidArgument("array_response_ula: n must be positive");
  if (!(spacing > 0.0)) throw InvalidArgument("array_response_ula: spacing must be positive");
  const double step = kTwoPi * spacing * std::sin(angle);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  CVec a(n);
  for (int m = 0; m < n; ++m) a(m) = std::polar(scale, step * m);
  return a;
}

double raised_cosine(double t, double rolloff) {
  if (!(rolloff > 0.0 && rolloff <= 1.0)) throw InvalidArgument("raised_cosine: rolloff must lie in (0, 1]");
  const double edge = 1.0 / (2.0 * rolloff);
  if (std::abs(t) == edge) return kPi / 4.0 * sinc(edge);
  // cos(pi x / 2) / (1 - x^2) with x = 2 beta t, rewritten as
  // sin(pi u / 2) / (u (1 + |x|)), u = 1 - |x|, which stays accurate near u = 0.
  const double ax = std::abs(2.0 * rolloff * t);
  const double u = 1.0 - ax;
  const double ratio = (u == 0.0 ? kPi / 2.0 : std::sin(kPi * u / 2.0) / u) / (1.0 + ax);
  return sinc(t) * ratio;
}

double sample_laplacian(double stddev, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  const double v = uni(rng);
  if (stddev == 0.0) return 0.0;
  const double scale = stddev / std::numbers::sqrt2;
  const double mag = -scale * std::log1p(-2.0 * std::abs(v));
  return v < 0.0 ? -mag : mag;
}

ClusterSet sample_cluster_set(const ChannelStatsConfig& cfg, int cp_len, std::mt19937_64& rng) {
  if (cfg.n_clusters < 1 || cfg.rays_per_cluster < 1)
    throw InvalidArgument("sample_cluster_set: need at least one cluster and one ray");
  if (cp_len < 1) throw InvalidArgument("sample_cluster_set: cp_len must be positive");
  if (!(cfg.path_loss > 0.0)) throw InvalidArgument("sample_cluster_set: path_loss must be positive");
  if (cfg.angle_spread_rad < 0.0) throw InvalidArgument("sample_cluster_set: negative angle spread");

  const double d_max = static_cast<double>(cp_len);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> delay(0.0, d_max);
  std::uniform_real_distribution<double> ray_delay(0.0, std::max(cfg.ray_delay_spread, 0.0));
  const double gain_var = 1.0 / (static_cast<double>(cfg.n_clusters) * cfg.rays_per_cluster);
  std::normal_distribution<double> gain(0.0, std::sqrt(gain_var / 2.0));

  ClusterSet cs;
  cs.path_loss = cfg.path_loss;
  cs.clusters.resize(cfg.n_clusters);
  for (auto& c : cs.clusters) {
    c.aoa = angle(rng);
    c.aod = angle(rng);
    c.delay = cfg.delay_policy == DelayPolicy::PerCluster ? delay(rng) : 0.0;
    c.rays.resize(cfg.rays_per_cluster);
    for (auto& r : c.rays) {
      r.aoa_shift = sample_laplacian(cfg.angle_spread_rad, rng);
      r.aod_shift = sample_laplacian(cfg.angle_spread_rad, rng);
      const double rel = cfg.delay_policy == DelayPolicy::PerCluster ? ray_delay(rng) : delay(rng);
      r.rel_delay = std::clamp(rel, 0.0, d_max - c.delay);
      const double re = gain(rng);
      const double im = gain(rng);
      r.gain = cd(re, im);
    }
  }
  return cs;
}

namespace {

struct RayTerm {
  double delay;
  cd gain;
  CMat outer;  // a_MS a_BS^H
};

std::vector<RayTerm> ray_terms(const ClusterSet& cs, const SystemConfig& cfg) {
  std::vector<RayTerm> terms;
  terms.reserve(cs.ray_count());
  for (const auto& c : cs.clusters)
    for (const auto& r : c.rays) {
      const CVec a_ms = array_response_ula(c.aoa - r.aoa_shift, cfg.n_ms, cfg.antenna_spacing);
      const CVec a_bs = array_response_ula(c.aod - r.aod_shift, cfg.n_bs, cfg.antenna_spacing);
      terms.push_back({c.delay + r.rel_delay, r.gain, a_ms * a_bs.adjoint()});
    }
  return terms;
}

CMat tap_from_terms(const std::vector<RayTerm>& terms, int d, const SystemConfig& cfg, double scale) {
  CMat h = CMat::Zero(cfg.n_ms, cfg.n_bs);
  for (const auto& t : terms) {
    const double p = raised_cosine(static_cast<double>(d) - t.delay, cfg.rolloff);
    if (p != 0.0) h += (t.gain * p) * t.outer;
  }
  return h * scale;
}

}  // namespace

CMat delay_tap(const ClusterSet& cs, int d, const SystemConfig& cfg) {
  if (d < 0 || d >= cfg.cp_len) throw InvalidArgument("delay_tap: tap index out of range");
  const double scale = std::sqrt(static_cast<double>(cfg.n_bs) * cfg.n_ms / cs.path_loss);
  return tap_from_terms(ray_terms(cs, cfg), d, cfg, scale);
}

std::vector<CMat> delay_taps(const ClusterSet& cs, const SystemConfig& cfg) {
  const double scale = std::sqrt(static_cast<double>(cfg.n_bs) * cfg.n_ms / cs.path_loss);
  const auto terms = ray_terms(cs, cfg);
  std::vector<CMat> taps;
  taps.reserve(cfg.cp_len);
  for (int d = 0; d < cfg.cp_len; ++d) taps.push_back(tap_from_terms(terms, d, cfg, scale));
  return taps;
}

WidebandChannel to_subcarriers(std::span<const CMat> taps, int k_sub) {
  if (taps.empty()) throw InvalidArgument("to_subcarriers: no taps");
  if (k_sub < 1 || static_cast<int>(taps.size()) > k_sub)
    throw InvalidArgument("to_subcarriers: need 1 <= D <= K");
  const auto rows = taps[0].rows();
  const auto cols = taps[0].cols();
  for (const auto& t : taps)
    if (t.rows() != rows || t.cols() != cols) throw InvalidArgument("to_subcarriers: tap shape mismatch");

  // Twiddles indexed by (k d) mod K keep the phase argument small.
  std::vector<cd> twiddle(k_sub);
  for (int m = 0; m < k_sub; ++m) twiddle[m] = std::polar(1.0, -kTwoPi * m / k_sub);

  WidebandChannel ch;
  ch.per_subcarrier.assign(k_sub, CMat::Zero(rows, cols));
  for (int k = 0; k < k_sub; ++k) {
    CMat& h = ch.per_subcarrier[k];
    for (std::size_t d = 0; d < taps.size(); ++d) {
      const auto m = static_cast<int>((static_cast<long long>(k) * static_cast<long long>(d)) % k_sub);
      h += twiddle[m] * taps[d];
    }
  }
  return ch;
}

std::uint64_t realization_seed(std::uint64_t seed, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(index + 0x632be59bd9b4e019ULL));
}

std::pair<WidebandChannel, ClusterSet> generate_channel_with_clusters(const SystemConfig& sys,
                                                                      const ChannelStatsConfig& stats,
                                                                      std::uint64_t seed, std::uint64_t index) {
  std::mt19937_64 rng(realization_seed(seed, index));
  ClusterSet cs = sample_cluster_set(stats, sys.cp_len, rng);
  const auto taps = delay_taps(cs, sys);
  WidebandChannel ch = to_subcarriers(taps, sys.k_sub);
  ch.compute_svds();
  return {std::move(ch), std::move(cs)};
}

WidebandChannel generate_channel(const SystemConfig& sys, const ChannelStatsConfig& stats, std::uint64_t seed,
                                 std::uint64_t index) {
  return generate_channel_with_clusters(sys, stats, seed, index).first;
}

}  // namespace wbhp
