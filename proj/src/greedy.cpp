#include "wbhp/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel_for.hpp"
#include "wbhp/errors.hpp"
#include "wbhp/grassmann.hpp"

namespace wbhp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_inputs(const CMat& vcb, const WidebandChannel& channel, double rho, int n_rf) {
  if (channel.per_subcarrier.empty()) throw InvalidArgument("greedy: channel has no subcarriers");
  if (vcb.rows() != channel.n_bs()) throw InvalidArgument("greedy: codebook rows must equal n_bs");
  if (n_rf < 1) throw InvalidArgument("greedy: n_rf must be positive");
  if (vcb.cols() < n_rf) throw Infeasible("greedy: codebook smaller than n_rf");
  if (!(rho > 0.0)) throw InvalidArgument("greedy: rho must be positive");
}

// Lowest index attaining the maximum finite score, or -1.
int argmax_finite(const std::vector<double>& s) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(s.size()); ++i)
    if (!std::isnan(s[i]) && (best < 0 || s[i] > s[best])) best = i;
  return best;
}

double log_det_score(const WidebandChannel& ch, const CMat& q, double c) {
  double acc = 0.0;
  for (const auto& h : ch.per_subcarrier) acc += log2_det_identity_plus(h * q, c);
  return acc / ch.k_sub();
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

GreedyResult dg_hp(const CMat& vcb, const WidebandChannel& channel, double rho, int n_rf, int n_s, Exec exec) {
  check_inputs(vcb, channel, rho, n_rf);
  const double c = rho / (n_s > 0 ? n_s : n_rf);
  const int n_cand = static_cast<int>(vcb.cols());
  GreedyResult res;
  CMat f(vcb.rows(), 0);
  for (int it = 0; it < n_rf; ++it) {
    std::vector<double> score(n_cand, kNaN);
    detail::parallel_for(n_cand, exec, [&](int n) {
      if (contains(res.indices, n)) return;
      CMat trial(f.rows(), f.cols() + 1);
      trial << f, vcb.col(n);
      try {
        score[n] = log_det_score(channel, orthonormal_factor(trial), c);
      } catch (const DegenerateCodeword&) {
      }
    });
    const int best = argmax_finite(score);
    if (best < 0) throw Infeasible("dg_hp: no rank-compatible codeword left");
    CMat next(f.rows(), f.cols() + 1);
    next << f, vcb.col(best);
    f = std::move(next);
    res.indices.push_back(best);
    res.mi_per_iteration.push_back(score[best]);
    res.scores.push_back(std::move(score));
  }
  res.f_rf = std::move(f);
  res.mi = res.mi_per_iteration.back();
  return res;
}

GreedyResult gs_hp(const CMat& vcb, const WidebandChannel& channel, double rho, int n_rf, int n_s, GsEigenMode mode,
                   Exec exec) {
  check_inputs(vcb, channel, rho, n_rf);
  const double c = rho / (n_s > 0 ? n_s : n_rf);
  const int n_cand = static_cast<int>(vcb.cols());
  const int k_sub = channel.k_sub();
  const int n_ms = channel.n_ms();

  GreedyState st;
  st.projected_basis = CMat(vcb.rows(), 0);
  st.t_accum.assign(k_sub, CMat::Zero(n_ms, n_ms));
  GreedyResult res;

  for (int it = 0; it < n_rf; ++it) {
    // log2 det(I + c T) and (I + c T)^{-1} per subcarrier.
    std::vector<double> base(k_sub);
    std::vector<CMat> inv(k_sub);
    if (mode == GsEigenMode::RankOneUpdate) {
      for (int k = 0; k < k_sub; ++k) {
        const CMat a = CMat::Identity(n_ms, n_ms) + c * st.t_accum[k];
        const RVec ev = hermitian_eigenvalues_desc(st.t_accum[k]);
        base[k] = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) base[k] += std::log2(1.0 + c * ev(i));
        inv[k] = a.ldlt().solve(CMat::Identity(n_ms, n_ms));
      }
    }

    std::vector<double> score(n_cand, kNaN);
    std::vector<CVec> projected(n_cand);
    detail::parallel_for(n_cand, exec, [&](int n) {
      if (contains(st.selected, n)) return;
      const CVec f = vcb.col(n);
      CVec p = f - st.projected_basis * (st.projected_basis.adjoint() * f);
      const double pn = p.norm();
      if (!(pn > 1e-10 * f.norm())) return;
      p /= pn;
      projected[n] = p;
      if (mode == GsEigenMode::RankOneUpdate) {
        double acc = 0.0;
        for (int k = 0; k < k_sub; ++k) {
          const CVec h = channel.per_subcarrier[k] * p;
          const double quad = std::max((h.adjoint() * inv[k] * h)(0, 0).real(), 0.0);
          acc += base[k] + std::log2(1.0 + c * quad);
        }
        score[n] = acc / k_sub;
      } else {
        CMat q(vcb.rows(), st.projected_basis.cols() + 1);
        q << st.projected_basis, p;
        score[n] = log_det_score(channel, q, c);
      }
    });
    const int best = argmax_finite(score);
    if (best < 0) throw Infeasible("gs_hp: no codeword outside the selected span");

    const CVec& p = projected[best];
    CMat next(vcb.rows(), st.projected_basis.cols() + 1);
    next << st.projected_basis, p;
    st.projected_basis = std::move(next);
    for (int k = 0; k < k_sub; ++k) {
      const CVec h = channel.per_subcarrier[k] * p;
      st.t_accum[k] += h * h.adjoint();
    }
    st.selected.push_back(best);
    res.indices.push_back(best);
    res.mi_per_iteration.push_back(score[best]);
    res.scores.push_back(std::move(score));
  }
  res.f_rf = CMat(vcb.rows(), n_rf);
  for (int i = 0; i < n_rf; ++i) res.f_rf.col(i) = vcb.col(res.indices[i]);
  res.mi = res.mi_per_iteration.back();
  return res;
}

ApproxGsResult approx_gs_hp(const CMat& vcb, const WidebandChannel& channel, int n_rf, int n_s, double rho,
                            int trunc_rank) {
  check_inputs(vcb, channel, rho, n_rf);
  if (!channel.has_svds()) throw InvalidArgument("approx_gs_hp: channel SVDs have not been computed");
  if (n_s < 1 || n_s > n_rf) throw InvalidArgument("approx_gs_hp: need 1 <= n_s <= n_rf");
  const int r = trunc_rank > 0 ? trunc_rank : n_s;
  if (r > channel.svds.front().rank()) throw InvalidArgument("approx_gs_hp: truncation rank exceeds channel rank");
  const int k_sub = channel.k_sub();
  const auto n_bs = vcb.rows();
  const int n_cand = static_cast<int>(vcb.cols());

  GreedyState st;
  st.pi = CMat(n_bs, static_cast<Eigen::Index>(k_sub) * r);
  for (int k = 0; k < k_sub; ++k) {
    const auto& s = channel.svds[k];
    st.pi.middleCols(static_cast<Eigen::Index>(k) * r, r) = s.v.leftCols(r) * s.sigma.head(r).cast<cd>().asDiagonal();
  }
  st.f_rf_partial = CMat(n_bs, 0);
  st.projected_basis = CMat(n_bs, 0);

  for (int it = 0; it < n_rf; ++it) {
    const RVec energy = (st.pi.adjoint() * vcb).colwise().squaredNorm();
    int best = -1;
    CVec best_dir;
    for (int n = 0; n < n_cand; ++n) {
      if (contains(st.selected, n)) continue;
      const CVec f = vcb.col(n);
      const CVec p = f - st.projected_basis * (st.projected_basis.adjoint() * f);
      const double pn = p.norm();
      if (!(pn > 1e-10 * f.norm())) continue;
      if (best < 0 || energy(n) > energy(best)) {
        best = n;
        best_dir = p / pn;
      }
    }
    if (best < 0) throw Infeasible("approx_gs_hp: no codeword outside the selected span");

    CMat f(n_bs, st.f_rf_partial.cols() + 1);
    f << st.f_rf_partial, vcb.col(best);
    st.f_rf_partial = std::move(f);
    CMat u(n_bs, st.projected_basis.cols() + 1);
    u << st.projected_basis, best_dir;
    st.projected_basis = std::move(u);
    st.selected.push_back(best);
    st.pi = complement_projector(st.f_rf_partial) * st.pi;
  }

  ApproxGsResult out;
  out.precoder = optimal_baseband(st.f_rf_partial, channel, rho, n_s, PowerConstraint::Unitary);
  out.indices = st.selected;
  out.state = std::move(st);
  return out;
}

GreedyResult exhaustive_subset_search(const CMat& vcb, const WidebandChannel& channel, double rho, int n_rf, int n_s,
                                      PowerConstraint mode, Exec exec) {
  check_inputs(vcb, channel, rho, n_rf);
  const int n = static_cast<int>(vcb.cols());
  std::vector<std::vector<int>> subsets;
  std::vector<int> cur(n_rf);
  for (int i = 0; i < n_rf; ++i) cur[i] = i;
  while (true) {
    subsets.push_back(cur);
    int i = n_rf - 1;
    while (i >= 0 && cur[i] == n - n_rf + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < n_rf; ++j) cur[j] = cur[j - 1] + 1;
  }
  std::vector<double> score(subsets.size(), kNaN);
  auto gather = [&](const std::vector<int>& idx) {
    CMat f(vcb.rows(), n_rf);
    for (int i = 0; i < n_rf; ++i) f.col(i) = vcb.col(idx[i]);
    return f;
  };
  detail::parallel_for(static_cast<int>(subsets.size()), exec, [&](int s) {
    try {
      score[s] = hybrid_mi_for_rf(gather(subsets[s]), channel, rho, n_s, mode);
    } catch (const DegenerateCodeword&) {
    }
  });
  const int best = argmax_finite(score);
  if (best < 0) throw Infeasible("exhaustive_subset_search: every subset is rank deficient");
  GreedyResult res;
  res.indices = subsets[best];
  res.f_rf = gather(res.indices);
  res.mi = score[best];
  res.mi_per_iteration = {res.mi};
  return res;
}

int index_bits(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("index_bits: codebook size must be positive");
  int b = 0;
  while ((std::uint64_t{1} << b) < n) ++b;
  return b;
}

bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::int64_t feedback_bits(const FeedbackParams& p) {
  if (p.n_rf < 1 || p.n_s < 1 || p.k_sub < 1) throw InvalidArgument("feedback_bits: sizes must be positive");
  std::int64_t bits = index_bits(p.rf_codebook_size);
  if (p.scheme == FeedbackScheme::RfVector) bits *= p.n_rf;
  if (p.n_s < p.n_rf) bits += static_cast<std::int64_t>(p.k_sub) * index_bits(p.bb_codebook_size);
  return bits;
}

}  // namespace wbhp
