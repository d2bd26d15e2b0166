#include "wbhp/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "parallel_for.hpp"
#include "wbhp/errors.hpp"
#include "wbhp/precoder.hpp"

namespace wbhp {

CMat RfCodebook::columns() const {
  CMat m(n, size());
  for (int i = 0; i < size(); ++i) {
    if (codewords[i].cols() != 1) throw InvalidArgument("columns(): not a vector codebook");
    m.col(i) = codewords[i].col(0);
  }
  return m;
}

RfCodebook RfCodebook::from_phase_indices(RfKind kind, int phase_bits, std::vector<Eigen::MatrixXi> idx) {
  if (idx.empty()) throw InvalidArgument("from_phase_indices: empty codebook");
  RfCodebook cb;
  cb.kind = kind;
  cb.phase_bits = phase_bits;
  cb.n = static_cast<int>(idx.front().rows());
  cb.r = static_cast<int>(idx.front().cols());
  for (const auto& m : idx) {
    if (m.rows() != cb.n || m.cols() != cb.r) throw InvalidArgument("from_phase_indices: ragged codewords");
    cb.codewords.push_back(unit_modulus_from_indices(m, phase_bits));
  }
  cb.phase_index = std::move(idx);
  return cb;
}

void TrainingSet::add(std::vector<SubspacePoint> bases, std::vector<RVec> sigma) {
  if (bases.empty()) throw InvalidArgument("TrainingSet::add: member without bases");
  if (members.empty() && n == 0) {
    n = bases.front().ambient();
    r = bases.front().dim();
  }
  CMat s = CMat::Zero(n, n);
  for (const auto& b : bases) {
    if (b.ambient() != n || b.dim() != r) throw InvalidArgument("TrainingSet::add: basis shape mismatch");
    s.noalias() += b.basis * b.basis.adjoint();
  }
  members.push_back({std::move(bases), std::move(sigma), std::move(s)});
}

std::vector<CMat> init_codebook(int n_cb, int n, int r, std::mt19937_64& rng) {
  if (n_cb < 1 || n < 1 || r < 1) throw InvalidArgument("init_codebook: sizes must be positive");
  if (r > n) throw InvalidArgument("init_codebook: r must not exceed n");
  std::vector<CMat> cb;
  cb.reserve(n_cb);
  for (int i = 0; i < n_cb; ++i) cb.push_back(random_semi_unitary(n, r, rng));
  return cb;
}

TrainingSet build_training_set(const SystemConfig& sys, const ChannelStatsConfig& stats, int n_train, int r,
                               std::uint64_t seed, Exec exec) {
  if (n_train < 1) throw InvalidArgument("build_training_set: n_train must be positive");
  if (r < 1 || r > std::min(sys.n_bs, sys.n_ms)) throw InvalidArgument("build_training_set: rank out of range");
  std::vector<std::vector<SubspacePoint>> bases(n_train);
  std::vector<std::vector<RVec>> sigmas(n_train);
  detail::parallel_for(n_train, exec, [&](int i) {
    const WidebandChannel ch = generate_channel(sys, stats, seed, static_cast<std::uint64_t>(i));
    for (const auto& s : ch.svds) {
      bases[i].emplace_back(s.v.leftCols(r));
      sigmas[i].push_back(s.sigma.head(r));
    }
  });
  TrainingSet ts;
  ts.n = sys.n_bs;
  ts.r = r;
  for (int i = 0; i < n_train; ++i) ts.add(std::move(bases[i]), std::move(sigmas[i]));
  return ts;
}

namespace {

// Average (generalized) chordal distance between codeword x and a member,
// computed from the cached projector sum: r_eff - tr(X^H S X) / K.
double member_distortion(const CMat& x, const TrainingMember& m, int member_rank) {
  const double r_eff = std::min<double>(static_cast<double>(x.cols()), member_rank);
  const double k = static_cast<double>(m.bases.size());
  const double captured = (x.adjoint() * (m.projector_sum * x)).trace().real() / k;
  return std::clamp(r_eff - captured, 0.0, r_eff);
}

void check_compat(std::span<const SubspacePoint> codewords, const TrainingSet& training, bool generalized) {
  if (codewords.empty()) throw InvalidArgument("empty codebook");
  if (training.members.empty()) throw InvalidArgument("empty training set");
  for (const auto& c : codewords) {
    if (c.ambient() != training.n) throw InvalidArgument("codeword ambient dimension mismatch");
    if (!generalized && c.dim() != training.r) throw InvalidArgument("codeword rank mismatch");
  }
}

}  // namespace

double Assignment::mean() const {
  if (distortion.empty()) return 0.0;
  double acc = 0.0;
  for (double d : distortion) acc += d;
  return acc / static_cast<double>(distortion.size());
}

Assignment assign(std::span<const SubspacePoint> codewords, const TrainingSet& training, bool generalized,
                  Exec exec) {
  check_compat(codewords, training, generalized);
  const int n_m = training.size();
  Assignment a;
  a.cell.assign(n_m, 0);
  a.distortion.assign(n_m, 0.0);
  detail::parallel_for(n_m, exec, [&](int i) {
    const auto& m = training.members[i];
    int best = 0;
    double best_d = member_distortion(codewords[0].basis, m, training.r);
    for (std::size_t c = 1; c < codewords.size(); ++c) {
      const double d = member_distortion(codewords[c].basis, m, training.r);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    a.cell[i] = best;
    a.distortion[i] = best_d;
  });
  return a;
}

std::vector<std::vector<int>> partition(std::span<const SubspacePoint> codewords, const TrainingSet& training,
                                        bool generalized, Exec exec) {
  const Assignment a = assign(codewords, training, generalized, exec);
  std::vector<std::vector<int>> cells(codewords.size());
  for (int i = 0; i < static_cast<int>(a.cell.size()); ++i) cells[a.cell[i]].push_back(i);
  return cells;
}

std::vector<SubspacePoint> recenter(const std::vector<std::vector<int>>& cells, const TrainingSet& training,
                                    int rank, std::span<const double> member_distortion, Exec exec) {
  if (training.members.empty()) throw InvalidArgument("recenter: empty training set");
  if (member_distortion.size() != training.members.size())
    throw InvalidArgument("recenter: one distortion value per member required");

  // Members by decreasing distortion (ties: lower index first) seed empty cells.
  std::vector<int> order(training.members.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return member_distortion[a] > member_distortion[b]; });
  std::vector<int> seed_member(cells.size(), -1);
  std::size_t next = 0;
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (cells[c].empty()) seed_member[c] = order[next++ % order.size()];

  std::vector<SubspacePoint> out(cells.size());
  detail::parallel_for(static_cast<int>(cells.size()), exec, [&](int c) {
    CMat s = CMat::Zero(training.n, training.n);
    if (seed_member[c] >= 0) {
      s = training.members[seed_member[c]].projector_sum;
    } else {
      for (int m : cells[c]) s += training.members[m].projector_sum;
    }
    out[c] = centroid_from_projector_sum(s, rank);
  });
  return out;
}

Eigen::MatrixXi rf_phase_indices(const CMat& f_u, int phase_bits) {
  if (phase_bits < 1 || phase_bits > 30) throw InvalidArgument("rf_project: phase_bits out of range");
  const int levels = 1 << phase_bits;
  const double step = 2.0 * std::numbers::pi / levels;
  Eigen::MatrixXi idx(f_u.rows(), f_u.cols());
  for (Eigen::Index j = 0; j < f_u.cols(); ++j)
    for (Eigen::Index i = 0; i < f_u.rows(); ++i) {
      const cd z = f_u(i, j);
      if (z == cd(0.0, 0.0)) {
        idx(i, j) = 0;
        continue;
      }
      double phase = std::arg(z);
      if (phase < 0.0) phase += 2.0 * std::numbers::pi;
      const double x = phase / step;
      double lo = std::floor(x);
      const double frac = x - lo;
      // Exact half-step ties go to the lower grid index.
      if (frac > 0.5 + 1e-12) lo += 1.0;
      idx(i, j) = static_cast<int>(lo) % levels;
    }
  return idx;
}

CMat unit_modulus_from_indices(const Eigen::MatrixXi& idx, int phase_bits) {
  if (phase_bits < 1 || phase_bits > 30) throw InvalidArgument("phase_bits out of range");
  const int levels = 1 << phase_bits;
  CMat m(idx.rows(), idx.cols());
  for (Eigen::Index j = 0; j < idx.cols(); ++j)
    for (Eigen::Index i = 0; i < idx.rows(); ++i) {
      const int p = ((idx(i, j) % levels) + levels) % levels;
      m(i, j) = std::polar(1.0, 2.0 * std::numbers::pi * p / levels);
    }
  return m;
}

CMat rf_project(const CMat& f_u, int phase_bits) {
  return unit_modulus_from_indices(rf_phase_indices(f_u, phase_bits), phase_bits);
}

std::vector<SubspacePoint> rf_subspaces(std::span<const CMat> codewords) {
  std::vector<SubspacePoint> out;
  out.reserve(codewords.size());
  for (const auto& c : codewords) out.push_back(SubspacePoint::from_any(c));
  return out;
}

std::vector<SubspacePoint> as_subspaces(std::span<const CMat> semi_unitary) {
  std::vector<SubspacePoint> out;
  out.reserve(semi_unitary.size());
  for (const auto& c : semi_unitary) out.emplace_back(c);
  return out;
}

double codebook_distortion(std::span<const SubspacePoint> codewords, const TrainingSet& validation,
                           bool generalized, Exec exec) {
  return assign(codewords, validation, generalized, exec).mean();
}

LloydResult lloyd_train(const TrainingSet& training, const LloydParams& params, std::mt19937_64& rng, Exec exec) {
  if (training.members.empty()) throw InvalidArgument("lloyd_train: empty training set");
  if (params.n_cb < 1 || params.max_iters < 0 || params.rank < 1 || params.rank > training.n)
    throw InvalidArgument("lloyd_train: bad parameters");
  const bool generalized = training.r != params.rank;

  LloydResult res;
  std::vector<SubspacePoint> twins = as_subspaces(init_codebook(params.n_cb, training.n, params.rank, rng));

  auto rf_step = [&](const std::vector<SubspacePoint>& t) {
    res.rf.clear();
    res.rf_index.clear();
    if (!params.phase_bits) return;
    for (const auto& x : t) {
      res.rf_index.push_back(rf_phase_indices(x.basis, *params.phase_bits));
      res.rf.push_back(unit_modulus_from_indices(res.rf_index.back(), *params.phase_bits));
    }
  };
  auto rf_distortion = [&](double fallback) {
    if (res.rf.empty()) return fallback;
    try {
      return codebook_distortion(rf_subspaces(res.rf), training, generalized, exec);
    } catch (const DegenerateCodeword&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  Assignment a = assign(twins, training, generalized, exec);
  rf_step(twins);
  res.trace.per_iteration.push_back({a.mean(), rf_distortion(a.mean())});

  for (int it = 0; it < params.max_iters; ++it) {
    std::vector<std::vector<int>> cells(twins.size());
    for (int i = 0; i < static_cast<int>(a.cell.size()); ++i) cells[a.cell[i]].push_back(i);
    twins = recenter(cells, training, params.rank, a.distortion, exec);
    rf_step(twins);
    const double prev = a.mean();
    a = assign(twins, training, generalized, exec);
    const double cur = a.mean();
    res.trace.per_iteration.push_back({cur, rf_distortion(cur)});
    if (prev <= 0.0 || (prev - cur) / prev < params.tol) break;
  }
  for (const auto& t : twins) res.twins.push_back(t.basis);
  return res;
}

RfTrainingResult train_rf_codebook(const TrainingSet& training, int n_cb, int n_rf, int phase_bits, int max_iters,
                                   double tol, std::uint64_t seed, Exec exec) {
  if (n_rf < training.r) throw InvalidArgument("train_rf_codebook: n_rf must be at least the training rank");
  std::mt19937_64 rng(realization_seed(seed, ~0ULL));
  const LloydParams p{n_cb, n_rf, max_iters, tol, phase_bits};
  LloydResult lr = lloyd_train(training, p, rng, exec);
  RfTrainingResult out;
  out.codebook = RfCodebook::from_phase_indices(RfKind::Matrix, phase_bits, std::move(lr.rf_index));
  out.codebook.twins = std::move(lr.twins);
  out.trace = std::move(lr.trace);
  return out;
}

RfTrainingResult train_rf_codebook(const RfTrainingConfig& cfg, Exec exec) {
  cfg.system.validate();
  const TrainingSet ts = build_training_set(cfg.system, cfg.stats, cfg.n_train, cfg.system.n_s, cfg.seed, exec);
  return train_rf_codebook(ts, cfg.n_cb, cfg.system.n_rf, cfg.phase_bits, cfg.max_iters, cfg.tol, cfg.seed, exec);
}

RfTrainingResult train_rf_vector_codebook(const RfTrainingConfig& cfg, Exec exec) {
  cfg.system.validate();
  const TrainingSet ts = build_training_set(cfg.system, cfg.stats, cfg.n_train, 1, cfg.seed, exec);
  RfTrainingResult out = train_rf_codebook(ts, cfg.n_cb, 1, cfg.phase_bits, cfg.max_iters, cfg.tol, cfg.seed, exec);
  out.codebook.kind = RfKind::Vector;
  return out;
}

RfSelector exhaustive_selector(const RfCodebook& codebook, double rho, int n_s) {
  if (codebook.size() == 0) throw InvalidArgument("exhaustive_selector: empty codebook");
  return [cw = codebook.codewords, rho, n_s](const WidebandChannel& ch) -> CMat {
    const auto best = exhaustive_rf_search(cw, ch, rho, n_s, PowerConstraint::Unitary, Exec::Serial);
    return cw[best.index];
  };
}

TrainingSet build_baseband_training_set(const BasebandTrainingConfig& cfg, const RfSelector& selector, Exec exec) {
  cfg.system.validate();
  if (cfg.n_train < 1) throw InvalidArgument("build_baseband_training_set: n_train must be positive");
  const int n_s = cfg.system.n_s;
  std::vector<std::vector<SubspacePoint>> bases(cfg.n_train);
  std::vector<std::vector<RVec>> sigmas(cfg.n_train);
  detail::parallel_for(cfg.n_train, exec, [&](int i) {
    const WidebandChannel ch = generate_channel(cfg.system, cfg.stats, cfg.seed, static_cast<std::uint64_t>(i));
    const CMat q = orthonormal_factor(selector(ch));
    if (q.cols() != cfg.system.n_rf) throw InvalidArgument("selector returned wrong number of RF chains");
    for (const auto& s : ch.svds) {
      const EffectiveSvd e = effective_svd_from_factor(s, q);
      bases[i].emplace_back(e.v_bar.leftCols(n_s));
      sigmas[i].push_back(e.sigma_bar.head(n_s));
    }
  });
  TrainingSet ts;
  ts.n = cfg.system.n_rf;
  ts.r = n_s;
  for (int i = 0; i < cfg.n_train; ++i) ts.add(std::move(bases[i]), std::move(sigmas[i]));
  return ts;
}

BasebandTrainingResult train_baseband_codebook(const TrainingSet& training, int n_cb, int max_iters, double tol,
                                               std::uint64_t seed, Exec exec) {
  if (training.r >= training.n)
    throw InvalidArgument("train_baseband_codebook: requires n_s < n_rf (the RF index alone suffices otherwise)");
  std::mt19937_64 rng(realization_seed(seed, ~1ULL));
  const LloydParams p{n_cb, training.r, max_iters, tol, std::nullopt};
  LloydResult lr = lloyd_train(training, p, rng, exec);
  BasebandTrainingResult out;
  out.codebook.n = training.n;
  out.codebook.r = training.r;
  out.codebook.codewords = std::move(lr.twins);
  out.trace = std::move(lr.trace);
  return out;
}

BasebandTrainingResult train_baseband_codebook(const BasebandTrainingConfig& cfg, const RfSelector& selector,
                                               Exec exec) {
  if (cfg.system.n_s >= cfg.system.n_rf)
    throw InvalidArgument("train_baseband_codebook: requires n_s < n_rf (the RF index alone suffices otherwise)");
  const TrainingSet ts = build_baseband_training_set(cfg, selector, exec);
  return train_baseband_codebook(ts, cfg.n_cb, cfg.max_iters, cfg.tol, cfg.seed, exec);
}

RfCodebook beamsteering_codebook(int n_cb, int n, double spacing, int phase_bits) {
  if (n_cb < 1 || n < 1) throw InvalidArgument("beamsteering_codebook: sizes must be positive");
  std::vector<Eigen::MatrixXi> idx;
  idx.reserve(n_cb);
  for (int i = 0; i < n_cb; ++i) {
    const double s = -1.0 + 2.0 * i / n_cb;
    const CVec a = array_response_ula(std::asin(s), n, spacing) * std::sqrt(static_cast<double>(n));
    idx.push_back(rf_phase_indices(a, phase_bits));
  }
  return RfCodebook::from_phase_indices(RfKind::Vector, phase_bits, std::move(idx));
}

}  // namespace wbhp
