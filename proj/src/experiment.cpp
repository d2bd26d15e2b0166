#include "wbhp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "parallel_for.hpp"
#include "wbhp/codebook_io.hpp"
#include "wbhp/errors.hpp"
#include "wbhp/greedy.hpp"

namespace wbhp {

std::string_view to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::UnconstrainedSvd: return "unconstrained-svd";
    case SchemeKind::OptimalHybridExhaustive: return "optimal-hybrid";
    case SchemeKind::ApproxGsHp: return "approx-gs-hp";
    case SchemeKind::DgHp: return "dg-hp";
    case SchemeKind::GsHp: return "gs-hp";
    case SchemeKind::TrainedCodebook: return "trained-codebook";
  }
  return "unknown";
}

SchemeKind scheme_kind_from_string(std::string_view s) {
  for (auto k : {SchemeKind::UnconstrainedSvd, SchemeKind::OptimalHybridExhaustive, SchemeKind::ApproxGsHp,
                 SchemeKind::DgHp, SchemeKind::GsHp, SchemeKind::TrainedCodebook})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown scheme kind '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
  try {
    system.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (n_realizations < 1) throw ConfigError("realizations must be at least 1");
  if (snr_grid_db.empty()) throw ConfigError("snr grid is empty");
  if (stats.n_clusters < 1 || stats.rays_per_cluster < 1) throw ConfigError("need at least one cluster and one ray");
  if (!(stats.path_loss > 0.0)) throw ConfigError("path_loss must be positive");
  if (stats.angle_spread_rad < 0.0) throw ConfigError("angle spread must be non-negative");
  for (int l : clusters_grid)
    if (l < 1) throw ConfigError("clusters_grid entries must be positive");
  if (baseband.codebook_size < 1 || baseband.n_train < 1) throw ConfigError("baseband policy sizes must be positive");
  if (train_n_cb < 1 || train_bb_n_cb < 1 || train_n_train < 1 || train_max_iters < 0)
    throw ConfigError("training sizes must be positive");
  if (train_phase_bits < 1 || train_phase_bits > 16) throw ConfigError("phase_bits must lie in [1, 16]");
}

const SweepRow* SweepResult::find(std::string_view scheme, double snr_db, std::optional<double> param) const {
  for (const auto& r : rows)
    if (r.scheme == scheme && r.snr_db == snr_db && r.param == param) return &r;
  return nullptr;
}

void apply_full_scale(ExperimentConfig& cfg) {
  cfg.system.k_sub = 512;
  cfg.system.cp_len = 128;
}

namespace {

std::string default_label(const SchemeSpec& s) {
  std::string l(to_string(s.kind));
  switch (s.kind) {
    case SchemeKind::UnconstrainedSvd:
    case SchemeKind::OptimalHybridExhaustive:
    case SchemeKind::ApproxGsHp: l += "-" + std::string(to_string(s.mode)); break;
    default: break;
  }
  return l;
}

RfCodebook resolve_rf(const std::string& ref, const ExperimentConfig& cfg, const SystemConfig& sys) {
  if (ref.empty()) throw ConfigError("scheme needs an RF codebook reference");
  constexpr std::string_view kBeam = "beamsteering:";
  if (ref.rfind(kBeam, 0) == 0) {
    const std::string rest = ref.substr(kBeam.size());
    const auto colon = rest.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument("missing ':'");
      std::size_t p1 = 0;
      std::size_t p2 = 0;
      const int size = std::stoi(rest.substr(0, colon), &p1);
      const int bits = std::stoi(rest.substr(colon + 1), &p2);
      if (p1 != colon || p2 != rest.size() - colon - 1 || size < 1 || bits < 1 || bits > 16)
        throw std::invalid_argument("bad numbers");
      return beamsteering_codebook(size, sys.n_bs, sys.antenna_spacing, bits);
    } catch (const std::exception&) {
      throw ConfigError("malformed codebook reference '" + ref + "' (expected beamsteering:<size>:<bits>)");
    }
  }
  const std::filesystem::path p = std::filesystem::path(ref).is_absolute() ? std::filesystem::path(ref)
                                                                            : cfg.base_dir / ref;
  try {
    RfCodebook cb = load_rf_codebook(p);
    if (cb.n != sys.n_bs) throw ConfigError("codebook " + p.string() + " has n = " + std::to_string(cb.n) +
                                            ", expected n_bs = " + std::to_string(sys.n_bs));
    return cb;
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

BasebandCodebook resolve_bb(const std::string& ref, const ExperimentConfig& cfg, const SystemConfig& sys) {
  if (ref.empty()) throw ConfigError("trained-codebook scheme with n_s < n_rf needs a baseband codebook");
  const std::filesystem::path p = std::filesystem::path(ref).is_absolute() ? std::filesystem::path(ref)
                                                                            : cfg.base_dir / ref;
  try {
    BasebandCodebook cb = load_baseband_codebook(p);
    if (cb.n != sys.n_rf || cb.r != sys.n_s)
      throw ConfigError("baseband codebook " + p.string() + " does not match n_rf x n_s");
    return cb;
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<ResolvedScheme> resolve_for(const ExperimentConfig& cfg, const SystemConfig& sys) {
  std::vector<ResolvedScheme> out;
  for (const auto& spec : cfg.schemes) {
    ResolvedScheme r;
    r.spec = spec;
    r.label = spec.label.empty() ? default_label(spec) : spec.label;
    FeedbackParams fb;
    fb.n_rf = sys.n_rf;
    fb.n_s = sys.n_s;
    fb.k_sub = sys.k_sub;
    fb.bb_codebook_size = 1;
    switch (spec.kind) {
      case SchemeKind::UnconstrainedSvd: break;
      case SchemeKind::OptimalHybridExhaustive:
        r.rf = resolve_rf(spec.rf_ref, cfg, sys);
        if (r.rf->kind == RfKind::Matrix && r.rf->r != sys.n_rf)
          throw ConfigError("RF matrix codebook rank does not match n_rf");
        fb.scheme = r.rf->kind == RfKind::Matrix ? FeedbackScheme::RfMatrix : FeedbackScheme::RfVector;
        fb.rf_codebook_size = static_cast<std::uint64_t>(r.rf->size());
        r.feedback_bits = feedback_bits(fb);
        break;
      case SchemeKind::ApproxGsHp:
      case SchemeKind::DgHp:
      case SchemeKind::GsHp:
        r.rf = resolve_rf(spec.rf_ref, cfg, sys);
        if (r.rf->r != 1) throw ConfigError(r.label + " needs a vector codebook");
        if (r.rf->size() < sys.n_rf) throw ConfigError(r.label + ": vector codebook smaller than n_rf");
        fb.scheme = FeedbackScheme::RfVector;
        fb.rf_codebook_size = static_cast<std::uint64_t>(r.rf->size());
        r.feedback_bits = feedback_bits(fb);
        break;
      case SchemeKind::TrainedCodebook:
        r.rf = resolve_rf(spec.rf_ref, cfg, sys);
        if (r.rf->kind != RfKind::Matrix || r.rf->r != sys.n_rf)
          throw ConfigError("trained-codebook needs an RF matrix codebook with r = n_rf");
        fb.scheme = FeedbackScheme::RfMatrix;
        fb.rf_codebook_size = static_cast<std::uint64_t>(r.rf->size());
        if (sys.n_s < sys.n_rf) {
          r.bb = resolve_bb(spec.bb_ref, cfg, sys);
          fb.bb_codebook_size = static_cast<std::uint64_t>(r.bb->size());
        }
        r.feedback_bits = feedback_bits(fb);
        break;
    }
    out.push_back(std::move(r));
  }
  return out;
}

// Best G per subcarrier from the baseband codebook behind the orthonormal RF factor q.
double quantized_baseband_mi(const CMat& f_rf, const BasebandCodebook& bb, const WidebandChannel& channel,
                             double rho, int n_s) {
  const CMat q = orthonormal_factor(f_rf);
  const double c = rho / n_s;
  double acc = 0.0;
  for (const auto& h : channel.per_subcarrier) {
    const CMat hq = h * q;
    double best = -1.0;
    for (const auto& g : bb.codewords) best = std::max(best, log2_det_identity_plus(hq * g, c));
    acc += best;
  }
  return acc / channel.k_sub();
}

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
};

Stats summarize(const std::vector<double>& v) {
  Stats s;
  const double n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

using Clock = std::chrono::steady_clock;

// values[scheme][snr][realization], plus elapsed milliseconds per (scheme, snr, realization).
struct Grid {
  std::vector<std::vector<std::vector<double>>> values;
  std::vector<std::vector<std::vector<double>>> ms;
};

Grid evaluate_grid(const std::vector<ResolvedScheme>& schemes, const ExperimentConfig& cfg, const SystemConfig& sys,
                   const ChannelStatsConfig& stats, Exec exec,
                   const std::function<double(const WidebandChannel&, double, std::size_t)>& extra = nullptr,
                   std::size_t n_extra = 0) {
  const std::size_t n_sch = schemes.size() + n_extra;
  const std::size_t n_snr = cfg.snr_grid_db.size();
  const int n_real = cfg.n_realizations;
  Grid g;
  g.values.assign(n_sch, std::vector<std::vector<double>>(n_snr, std::vector<double>(n_real, 0.0)));
  g.ms = g.values;
  detail::parallel_for(n_real, exec, [&](int r) {
    const WidebandChannel ch = generate_channel(sys, stats, cfg.seed, static_cast<std::uint64_t>(r));
    for (std::size_t s = 0; s < n_sch; ++s)
      for (std::size_t t = 0; t < n_snr; ++t) {
        const double rho = std::pow(10.0, cfg.snr_grid_db[t] / 10.0);
        const auto t0 = Clock::now();
        g.values[s][t][r] = s < schemes.size() ? evaluate_scheme(schemes[s], ch, rho, sys)
                                               : extra(ch, rho, s - schemes.size());
        g.ms[s][t][r] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      }
  });
  return g;
}

SweepRow make_row(const std::string& label, double snr, std::optional<double> param, const std::vector<double>& v,
                  const std::vector<double>& ms, std::int64_t bits, bool timing) {
  const Stats st = summarize(v);
  SweepRow row;
  row.scheme = label;
  row.snr_db = snr;
  row.param = param;
  row.mean_se = st.mean;
  row.stderr_se = st.stderr_;
  row.n = static_cast<int>(v.size());
  row.feedback_bits = bits;
  if (timing)
    for (double m : ms) row.wall_ms += m;
  return row;
}

SweepResult sweep_with(const ExperimentConfig& cfg, const SystemConfig& sys, const ChannelStatsConfig& stats,
                       std::optional<double> param, Exec exec) {
  const auto schemes = resolve_for(cfg, sys);
  const Grid g = evaluate_grid(schemes, cfg, sys, stats, exec);
  SweepResult res;
  for (std::size_t s = 0; s < schemes.size(); ++s)
    for (std::size_t t = 0; t < cfg.snr_grid_db.size(); ++t)
      res.rows.push_back(make_row(schemes[s].label, cfg.snr_grid_db[t], param, g.values[s][t], g.ms[s][t],
                                  schemes[s].feedback_bits, cfg.record_timing));
  return res;
}

}  // namespace

std::vector<ResolvedScheme> resolve_schemes(const ExperimentConfig& cfg) { return resolve_for(cfg, cfg.system); }

double evaluate_scheme(const ResolvedScheme& scheme, const WidebandChannel& channel, double rho,
                       const SystemConfig& sys) {
  const int n_s = sys.n_s;
  const PowerConstraint mode = scheme.spec.mode;
  switch (scheme.spec.kind) {
    case SchemeKind::UnconstrainedSvd: return unconstrained_mi(channel, rho, n_s, mode);
    case SchemeKind::OptimalHybridExhaustive:
      if (scheme.rf->kind == RfKind::Matrix)
        return exhaustive_rf_search(scheme.rf->codewords, channel, rho, n_s, mode, Exec::Serial).mi;
      return exhaustive_subset_search(scheme.rf->columns(), channel, rho, sys.n_rf, n_s, mode, Exec::Serial).mi;
    case SchemeKind::ApproxGsHp: {
      const auto a = approx_gs_hp(scheme.rf->columns(), channel, sys.n_rf, n_s, rho);
      return hybrid_mi_for_rf(a.precoder.f_rf, channel, rho, n_s, mode);
    }
    case SchemeKind::DgHp: {
      const auto r = dg_hp(scheme.rf->columns(), channel, rho, sys.n_rf, n_s, Exec::Serial);
      return hybrid_mi_for_rf(r.f_rf, channel, rho, n_s, mode);
    }
    case SchemeKind::GsHp: {
      const auto r = gs_hp(scheme.rf->columns(), channel, rho, sys.n_rf, n_s, GsEigenMode::RankOneUpdate, Exec::Serial);
      return hybrid_mi_for_rf(r.f_rf, channel, rho, n_s, mode);
    }
    case SchemeKind::TrainedCodebook: {
      const auto best = exhaustive_rf_search(scheme.rf->codewords, channel, rho, n_s, PowerConstraint::Unitary,
                                             Exec::Serial);
      const CMat& f = scheme.rf->codewords[best.index];
      if (n_s < sys.n_rf && scheme.bb) return quantized_baseband_mi(f, *scheme.bb, channel, rho, n_s);
      return hybrid_mi_for_rf(f, channel, rho, n_s, mode);
    }
  }
  return 0.0;
}

SweepResult run_sweep(const ExperimentConfig& cfg, Exec exec) {
  cfg.validate();
  return sweep_with(cfg, cfg.system, cfg.stats, std::nullopt, exec);
}

SweepResult cluster_sweep(const ExperimentConfig& cfg, Exec exec) {
  cfg.validate();
  if (cfg.clusters_grid.empty()) throw ConfigError("cluster sweep needs a non-empty clusters_grid");
  resolve_schemes(cfg);  // fail on bad refs before any computation
  SweepResult res;
  for (int l : cfg.clusters_grid) {
    ChannelStatsConfig stats = cfg.stats;
    stats.n_clusters = l;
    stats.rays_per_cluster = 1;
    SweepResult part = sweep_with(cfg, cfg.system, stats, static_cast<double>(l), exec);
    res.rows.insert(res.rows.end(), part.rows.begin(), part.rows.end());
  }
  return res;
}

SweepResult rf_chain_sweep(const ExperimentConfig& cfg, Exec exec) {
  cfg.validate();
  if (cfg.nrf_grid.empty()) throw ConfigError("rfchain sweep needs a non-empty nrf_grid");
  const SystemConfig& base = cfg.system;
  const RfCodebook vcb = resolve_rf(cfg.rfchain_vcb, cfg, base);
  if (vcb.r != 1) throw ConfigError("rfchain_vcb must be a vector codebook");
  const CMat cols = vcb.columns();

  SweepResult res;
  std::vector<int> grid;
  for (int n_rf : cfg.nrf_grid) {
    if (n_rf < base.n_s) {
      res.warnings.push_back("skipping n_rf = " + std::to_string(n_rf) + " < n_s");
      continue;
    }
    if (n_rf > std::min(base.n_bs, base.n_ms) || n_rf > vcb.size()) {
      res.warnings.push_back("skipping n_rf = " + std::to_string(n_rf) + " (exceeds array or codebook size)");
      continue;
    }
    grid.push_back(n_rf);
  }

  // Unconstrained reference row; it does not depend on n_rf.
  {
    ExperimentConfig ref = cfg;
    ref.schemes = {SchemeSpec{SchemeKind::UnconstrainedSvd, PowerConstraint::Unitary, "", "", ""}};
    SystemConfig sys = base;
    sys.n_rf = base.n_s;
    SweepResult part = sweep_with(ref, sys, cfg.stats, std::nullopt, exec);
    res.rows.insert(res.rows.end(), part.rows.begin(), part.rows.end());
  }

  for (int n_rf : grid) {
    SystemConfig sys = base;
    sys.n_rf = n_rf;
    const int n_s = sys.n_s;
    std::optional<BasebandCodebook> bb;
    if (cfg.baseband.quantized && n_s < n_rf) {
      BasebandTrainingConfig bcfg;
      bcfg.system = sys;
      bcfg.stats = cfg.stats;
      bcfg.n_cb = cfg.baseband.codebook_size;
      bcfg.n_train = cfg.baseband.n_train;
      bcfg.max_iters = cfg.baseband.max_iters;
      bcfg.tol = cfg.train_tol;
      bcfg.seed = realization_seed(cfg.seed ^ 0xbb5eed0000000000ULL, static_cast<std::uint64_t>(n_rf));
      const RfSelector sel = [&cols, n_rf, n_s](const WidebandChannel& ch) {
        return approx_gs_hp(cols, ch, n_rf, n_s, 1.0).precoder.f_rf;
      };
      bb = train_baseband_codebook(bcfg, sel, exec).codebook;
    }

    FeedbackParams fb;
    fb.scheme = FeedbackScheme::RfVector;
    fb.n_rf = n_rf;
    fb.n_s = n_s;
    fb.k_sub = sys.k_sub;
    fb.rf_codebook_size = static_cast<std::uint64_t>(vcb.size());
    fb.bb_codebook_size = static_cast<std::uint64_t>(cfg.baseband.codebook_size);
    const std::int64_t bits = feedback_bits(fb);

    ExperimentConfig none = cfg;
    none.schemes.clear();
    const auto extra = [&](const WidebandChannel& ch, double rho, std::size_t) {
      const CMat f = approx_gs_hp(cols, ch, n_rf, n_s, rho).precoder.f_rf;
      if (bb) return quantized_baseband_mi(f, *bb, ch, rho, n_s);
      return hybrid_mi_for_rf(f, ch, rho, n_s, PowerConstraint::Unitary);
    };
    const Grid g = evaluate_grid({}, none, sys, cfg.stats, exec, extra, 1);
    for (std::size_t t = 0; t < cfg.snr_grid_db.size(); ++t)
      res.rows.push_back(make_row("approx-gs-hp", cfg.snr_grid_db[t], static_cast<double>(n_rf), g.values[0][t],
                                  g.ms[0][t], bits, cfg.record_timing));
  }
  return res;
}

}  // namespace wbhp
