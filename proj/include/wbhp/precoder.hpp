#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wbhp/channel.hpp"
#include "wbhp/linalg.hpp"
#include "wbhp/parallel.hpp"

namespace wbhp {

enum class PowerConstraint {
  Total,               // sum_k ||F_RF F[k]||_F^2 = K N_S
  PerSubcarrierTotal,  // ||F_RF F[k]||_F^2 = N_S for every k
  Unitary,             // F_RF F[k] semi-unitary for every k
};

std::string_view to_string(PowerConstraint c);
PowerConstraint power_constraint_from_string(std::string_view s);

/// Frequency-flat RF matrix plus one baseband matrix per subcarrier.
struct HybridPrecoder {
  CMat f_rf;                           // n_bs x n_rf, unit-modulus entries
  std::vector<CMat> f_bb;              // K matrices, n_rf x n_s
  std::vector<CMat> equivalent_bb;     // optional G[k] = (F_RF^H F_RF)^{1/2} F[k]

  [[nodiscard]] int n_s() const { return f_bb.empty() ? 0 : static_cast<int>(f_bb.front().cols()); }
  [[nodiscard]] CMat composite(int k) const { return f_rf * f_bb[k]; }
};

struct WaterfillResult {
  std::vector<RVec> lambda_sq;  // per subcarrier, N_S diagonal powers (Lambda^2)
  std::vector<double> water_level;  // one entry (Total) or K entries (PerSubcarrierTotal)
  bool degenerate = false;  // every gain was zero; the budget could not be met
};

struct EffectiveSvd {
  CMat u_bar;
  RVec sigma_bar;  // descending
  CMat v_bar;      // n_rf x n_rf unitary
};

/// F (F^H F)^{-1/2}, computed as U V^H from the thin SVD of f_rf.
///
/// Throws DegenerateCodeword when sigma_min / sigma_max <= 1e-10.
CMat orthonormal_factor(const CMat& f_rf);

// (F^H F)^{-1/2} and (F^H F)^{1/2}; same rank requirement as orthonormal_factor.
CMat gram_inv_sqrt(const CMat& f_rf);
CMat gram_sqrt(const CMat& f_rf);

// SVD of Sigma V^H F_RF (F_RF^H F_RF)^{-1/2} for one subcarrier.
EffectiveSvd effective_svd(const TruncatedSvd& h_svd, const CMat& f_rf);
EffectiveSvd effective_svd_from_factor(const TruncatedSvd& h_svd, const CMat& q);

/// Water-filling over per-subcarrier stream gains.
///
/// `gains[k]` holds the N_S effective gains sigma_bar^2 of subcarrier k.
/// Lambda^2 = (mu - N_S / (rho g))^+ with mu fixed by the budget
/// (K N_S for Total, N_S per subcarrier for PerSubcarrierTotal). The active
/// set is found exactly by sorting the inverse gains, so the budget residual
/// is at round-off level. Zero gains never receive power.
WaterfillResult waterfill(std::span<const RVec> gains, double rho, int n_s, PowerConstraint mode);

/// Optimal baseband precoders for a fixed RF precoder.
///
/// F[k] = (F^H F)^{-1/2} [V_bar[k]]_{:,1:N_S} Lambda[k]; Lambda = I under
/// the Unitary constraint. Requires channel SVDs.
HybridPrecoder optimal_baseband(const CMat& f_rf, const WidebandChannel& channel, double rho, int n_s,
                                PowerConstraint mode);

// (1/K) sum_k log2 det(I + rho/N_S H F_RF F[k] F[k]^H F_RF^H H^H).
double mutual_information(const WidebandChannel& channel, const HybridPrecoder& p, double rho);

// Closed-form optimal MI for a fixed RF precoder (no explicit precoder built).
double hybrid_mi_for_rf(const CMat& f_rf, const WidebandChannel& channel, double rho, int n_s,
                        PowerConstraint mode);

struct SearchResult {
  int index = -1;
  double mi = 0.0;
};

/// Best RF codeword by closed-form optimal MI; ties go to the lowest index.
SearchResult exhaustive_rf_search(std::span<const CMat> codebook, const WidebandChannel& channel, double rho,
                                  int n_s, PowerConstraint mode, Exec exec = Exec::Parallel);

// Fully digital per-subcarrier SVD precoding with n_s streams.
double unconstrained_mi(const WidebandChannel& channel, double rho, int n_s, PowerConstraint mode);

// G[k] = (F_RF^H F_RF)^{1/2} F[k], and its inverse map.
CMat equivalent_baseband(const CMat& f_rf, const CMat& f_bb);
CMat baseband_from_equivalent(const CMat& f_rf, const CMat& g);

// Fills p.equivalent_bb from p.f_rf and p.f_bb.
void attach_equivalent_baseband(HybridPrecoder& p);

}  // namespace wbhp
