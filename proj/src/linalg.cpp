#include "wbhp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <omp.h>

#include "wbhp/errors.hpp"
#include "wbhp/parallel.hpp"

namespace wbhp {

int max_threads() { return omp_get_max_threads(); }

CMat TruncatedSvd::reconstruct() const { return u * sigma.cast<cd>().asDiagonal() * v.adjoint(); }

namespace {

// First entry of v with |v_i| > 1e-12 becomes real and positive.
void normalize_phase(CMat& u, CMat& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double mag = std::abs(v(i, j));
      if (mag > 1e-12) {
        const cd rot = std::conj(v(i, j)) / mag;
        v.col(j) *= rot;
        u.col(j) *= rot;
        v(i, j) = cd(v(i, j).real(), 0.0);
        break;
      }
    }
  }
}

}  // namespace

TruncatedSvd truncated_svd(const CMat& h, int r) {
  const int max_r = static_cast<int>(std::min(h.rows(), h.cols()));
  if (r < 1 || r > max_r) throw InvalidArgument("truncated_svd: rank out of range");
  Eigen::JacobiSVD<CMat> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = svd.matrixU().leftCols(r);
  out.v = svd.matrixV().leftCols(r);
  out.sigma = svd.singularValues().head(r);
  normalize_phase(out.u, out.v);
  return out;
}

TruncatedSvd thin_svd(const CMat& h) { return truncated_svd(h, static_cast<int>(std::min(h.rows(), h.cols()))); }

bool has_full_column_rank(const CMat& f) {
  if (f.cols() == 0 || f.cols() > f.rows()) return false;
  Eigen::JacobiSVD<CMat> svd(f);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0)) return false;
  return s(s.size() - 1) / s(0) > kRankTol;
}

RVec hermitian_eigenvalues_desc(const CMat& a, bool clamp_psd) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a, Eigen::EigenvaluesOnly);
  RVec ev = es.eigenvalues().reverse();
  if (clamp_psd) ev = ev.cwiseMax(0.0);
  return ev;
}

double log2_det_identity_plus(const CMat& m, double c) {
  if (m.size() == 0) return 0.0;
  // The smaller Gram matrix has the same nonzero spectrum.
  const CMat gram = m.cols() <= m.rows() ? CMat(m.adjoint() * m) : CMat(m * m.adjoint());
  const RVec ev = hermitian_eigenvalues_desc(gram);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) acc += std::log2(1.0 + c * ev(i));
  return acc;
}

bool is_semi_unitary(const CMat& q, double tol) {
  const CMat g = q.adjoint() * q;
  return (g - CMat::Identity(g.rows(), g.cols())).norm() <= tol;
}

}  // namespace wbhp
