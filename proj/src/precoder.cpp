#include "wbhp/precoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel_for.hpp"
#include "wbhp/errors.hpp"

namespace wbhp {

std::string_view to_string(PowerConstraint c) {
  switch (c) {
    case PowerConstraint::Total: return "total";
    case PowerConstraint::PerSubcarrierTotal: return "per-subcarrier";
    case PowerConstraint::Unitary: return "unitary";
  }
  return "unknown";
}

PowerConstraint power_constraint_from_string(std::string_view s) {
  if (s == "total") return PowerConstraint::Total;
  if (s == "per-subcarrier" || s == "persub") return PowerConstraint::PerSubcarrierTotal;
  if (s == "unitary") return PowerConstraint::Unitary;
  throw InvalidArgument("unknown power constraint '" + std::string(s) + "'");
}

namespace {

struct GramFactors {
  CMat q;         // U V^H
  CMat inv_sqrt;  // V S^-1 V^H
  CMat sqrt;      // V S V^H
};

GramFactors gram_factors(const CMat& f) {
  if (f.cols() == 0 || f.cols() > f.rows()) throw DegenerateCodeword("RF matrix must be tall with at least one column");
  Eigen::JacobiSVD<CMat> svd(f, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& s = svd.singularValues();
  if (!(s(0) > 0.0) || !(s(s.size() - 1) / s(0) > kRankTol))
    throw DegenerateCodeword("RF matrix is rank deficient");
  const CMat& u = svd.matrixU();
  const CMat& v = svd.matrixV();
  GramFactors g;
  g.q = u * v.adjoint();
  g.inv_sqrt = v * s.cwiseInverse().cast<cd>().asDiagonal() * v.adjoint();
  g.sqrt = v * s.cast<cd>().asDiagonal() * v.adjoint();
  return g;
}

void require_svds(const WidebandChannel& ch) {
  if (ch.per_subcarrier.empty()) throw InvalidArgument("channel has no subcarriers");
  if (!ch.has_svds()) throw InvalidArgument("channel SVDs have not been computed");
}

// sigma_bar^2 of subcarrier k, descending, length q.cols().
RVec effective_gains(const TruncatedSvd& h, const CMat& q) {
  const CMat a = h.sigma.cast<cd>().asDiagonal() * (h.v.adjoint() * q);
  return hermitian_eigenvalues_desc(a.adjoint() * a);
}

double unitary_rate(const RVec& gains, double c, int n_s) {
  double acc = 0.0;
  for (int i = 0; i < n_s && i < gains.size(); ++i) acc += std::log2(1.0 + c * gains(i));
  return acc;
}

std::vector<RVec> head_gains(std::vector<RVec> gains, int n_s) {
  for (auto& g : gains) {
    RVec h = RVec::Zero(n_s);
    const auto m = std::min<Eigen::Index>(n_s, g.size());
    h.head(m) = g.head(m);
    g = std::move(h);
  }
  return gains;
}

double loaded_rate(const std::vector<RVec>& gains, double rho, int n_s, PowerConstraint mode) {
  const double c = rho / n_s;
  double acc = 0.0;
  if (mode == PowerConstraint::Unitary) {
    for (const auto& g : gains) acc += unitary_rate(g, c, n_s);
  } else {
    const auto wf = waterfill(gains, rho, n_s, mode);
    for (std::size_t k = 0; k < gains.size(); ++k)
      for (int i = 0; i < n_s; ++i) acc += std::log2(1.0 + c * gains[k](i) * wf.lambda_sq[k](i));
  }
  return acc / static_cast<double>(gains.size());
}

}  // namespace

CMat orthonormal_factor(const CMat& f_rf) { return gram_factors(f_rf).q; }
CMat gram_inv_sqrt(const CMat& f_rf) { return gram_factors(f_rf).inv_sqrt; }
CMat gram_sqrt(const CMat& f_rf) { return gram_factors(f_rf).sqrt; }

EffectiveSvd effective_svd_from_factor(const TruncatedSvd& h_svd, const CMat& q) {
  if (h_svd.v.rows() != q.rows()) throw InvalidArgument("effective_svd: dimension mismatch");
  const CMat a = h_svd.sigma.cast<cd>().asDiagonal() * (h_svd.v.adjoint() * q);
  Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  EffectiveSvd e;
  const auto n_rf = q.cols();
  e.sigma_bar = RVec::Zero(n_rf);
  e.sigma_bar.head(svd.singularValues().size()) = svd.singularValues();
  e.u_bar = svd.matrixU();
  e.v_bar = svd.matrixV();
  return e;
}

EffectiveSvd effective_svd(const TruncatedSvd& h_svd, const CMat& f_rf) {
  return effective_svd_from_factor(h_svd, orthonormal_factor(f_rf));
}

WaterfillResult waterfill(std::span<const RVec> gains, double rho, int n_s, PowerConstraint mode) {
  if (mode == PowerConstraint::Unitary) throw InvalidArgument("waterfill: unitary mode needs no power loading");
  if (!(rho > 0.0)) throw InvalidArgument("waterfill: rho must be positive");
  if (n_s < 1) throw InvalidArgument("waterfill: n_s must be positive");
  if (gains.empty()) throw InvalidArgument("waterfill: no subcarriers");
  for (const auto& g : gains) {
    if (g.size() != n_s) throw InvalidArgument("waterfill: each subcarrier needs n_s gains");
    if ((g.array() < 0.0).any()) throw InvalidArgument("waterfill: negative gain");
  }

  const auto k_sub = gains.size();
  WaterfillResult out;
  out.lambda_sq.assign(k_sub, RVec::Zero(n_s));

  // Fills the entries listed in `slots` with budget `budget`; returns mu (0 if none usable).
  auto fill = [&](const std::vector<std::pair<std::size_t, int>>& slots, double budget) {
    std::vector<std::pair<double, std::pair<std::size_t, int>>> inv;
    for (const auto& s : slots) {
      const double g = gains[s.first](s.second);
      if (g > 0.0) inv.push_back({n_s / (rho * g), s});
    }
    if (inv.empty()) return 0.0;
    std::stable_sort(inv.begin(), inv.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double prefix = 0.0;
    double mu = 0.0;
    for (std::size_t m = 0; m < inv.size(); ++m) {
      const double cand = (budget + prefix + inv[m].first) / static_cast<double>(m + 1);
      if (cand <= inv[m].first) break;
      prefix += inv[m].first;
      mu = cand;
    }
    for (const auto& [c, s] : inv) out.lambda_sq[s.first](s.second) = std::max(mu - c, 0.0);
    return mu;
  };

  if (mode == PowerConstraint::Total) {
    std::vector<std::pair<std::size_t, int>> slots;
    for (std::size_t k = 0; k < k_sub; ++k)
      for (int i = 0; i < n_s; ++i) slots.push_back({k, i});
    const double mu = fill(slots, static_cast<double>(k_sub) * n_s);
    out.water_level.push_back(mu);
    out.degenerate = mu == 0.0;
  } else {
    for (std::size_t k = 0; k < k_sub; ++k) {
      std::vector<std::pair<std::size_t, int>> slots;
      for (int i = 0; i < n_s; ++i) slots.push_back({k, i});
      const double mu = fill(slots, static_cast<double>(n_s));
      out.water_level.push_back(mu);
      if (mu == 0.0) out.degenerate = true;
    }
  }
  return out;
}

HybridPrecoder optimal_baseband(const CMat& f_rf, const WidebandChannel& channel, double rho, int n_s,
                                PowerConstraint mode) {
  require_svds(channel);
  if (n_s < 1 || n_s > f_rf.cols()) throw InvalidArgument("optimal_baseband: need 1 <= n_s <= n_rf");
  if (f_rf.rows() != channel.n_bs()) throw InvalidArgument("optimal_baseband: RF rows must equal n_bs");
  const GramFactors g = gram_factors(f_rf);
  const int k_sub = channel.k_sub();

  std::vector<EffectiveSvd> eff;
  eff.reserve(k_sub);
  for (const auto& s : channel.svds) eff.push_back(effective_svd_from_factor(s, g.q));

  HybridPrecoder p;
  p.f_rf = f_rf;
  p.f_bb.resize(k_sub);
  if (mode == PowerConstraint::Unitary) {
    for (int k = 0; k < k_sub; ++k) p.f_bb[k] = g.inv_sqrt * eff[k].v_bar.leftCols(n_s);
    return p;
  }
  std::vector<RVec> gains(k_sub);
  for (int k = 0; k < k_sub; ++k) gains[k] = eff[k].sigma_bar.head(n_s).array().square();
  const auto wf = waterfill(gains, rho, n_s, mode);
  for (int k = 0; k < k_sub; ++k)
    p.f_bb[k] = g.inv_sqrt * eff[k].v_bar.leftCols(n_s) * wf.lambda_sq[k].cwiseSqrt().cast<cd>().asDiagonal();
  return p;
}

double mutual_information(const WidebandChannel& channel, const HybridPrecoder& p, double rho) {
  const int k_sub = channel.k_sub();
  if (k_sub == 0 || static_cast<int>(p.f_bb.size()) != k_sub)
    throw InvalidArgument("mutual_information: precoder/channel subcarrier mismatch");
  const int n_s = p.n_s();
  if (n_s < 1) throw InvalidArgument("mutual_information: precoder has no streams");
  double acc = 0.0;
  for (int k = 0; k < k_sub; ++k)
    acc += log2_det_identity_plus(channel.per_subcarrier[k] * (p.f_rf * p.f_bb[k]), rho / n_s);
  return acc / k_sub;
}

double hybrid_mi_for_rf(const CMat& f_rf, const WidebandChannel& channel, double rho, int n_s,
                        PowerConstraint mode) {
  require_svds(channel);
  if (n_s < 1 || n_s > f_rf.cols()) throw InvalidArgument("hybrid_mi_for_rf: need 1 <= n_s <= n_rf");
  const CMat q = orthonormal_factor(f_rf);
  std::vector<RVec> gains;
  gains.reserve(channel.k_sub());
  for (const auto& s : channel.svds) gains.push_back(effective_gains(s, q));
  return loaded_rate(head_gains(std::move(gains), n_s), rho, n_s, mode);
}

SearchResult exhaustive_rf_search(std::span<const CMat> codebook, const WidebandChannel& channel, double rho,
                                  int n_s, PowerConstraint mode, Exec exec) {
  if (codebook.empty()) throw InvalidArgument("exhaustive_rf_search: empty codebook");
  std::vector<double> mi(codebook.size());
  detail::parallel_for(static_cast<int>(codebook.size()), exec,
                       [&](int i) { mi[i] = hybrid_mi_for_rf(codebook[i], channel, rho, n_s, mode); });
  SearchResult best{0, mi[0]};
  for (std::size_t i = 1; i < mi.size(); ++i)
    if (mi[i] > best.mi) best = {static_cast<int>(i), mi[i]};
  return best;
}

double unconstrained_mi(const WidebandChannel& channel, double rho, int n_s, PowerConstraint mode) {
  require_svds(channel);
  if (n_s < 1 || n_s > std::min(channel.n_bs(), channel.n_ms()))
    throw InvalidArgument("unconstrained_mi: n_s out of range");
  std::vector<RVec> gains;
  gains.reserve(channel.k_sub());
  for (const auto& s : channel.svds) gains.push_back(s.sigma.array().square());
  return loaded_rate(head_gains(std::move(gains), n_s), rho, n_s, mode);
}

CMat equivalent_baseband(const CMat& f_rf, const CMat& f_bb) { return gram_sqrt(f_rf) * f_bb; }
CMat baseband_from_equivalent(const CMat& f_rf, const CMat& g) { return gram_inv_sqrt(f_rf) * g; }

void attach_equivalent_baseband(HybridPrecoder& p) {
  const CMat s = gram_sqrt(p.f_rf);
  p.equivalent_bb.clear();
  p.equivalent_bb.reserve(p.f_bb.size());
  for (const auto& f : p.f_bb) p.equivalent_bb.push_back(s * f);
}

}  // namespace wbhp
