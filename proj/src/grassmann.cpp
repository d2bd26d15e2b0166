#include "wbhp/grassmann.hpp"

#include <algorithm>

#include "wbhp/errors.hpp"
#include "wbhp/precoder.hpp"

namespace wbhp {

SubspacePoint SubspacePoint::from_any(const CMat& m) { return SubspacePoint(orthonormal_factor(m)); }

double chordal_sq(const SubspacePoint& x, const SubspacePoint& y) {
  if (x.ambient() != y.ambient() || x.dim() != y.dim())
    throw InvalidArgument("chordal_sq: dimension mismatch");
  const double r = x.dim();
  return std::clamp(r - (x.basis.adjoint() * y.basis).squaredNorm(), 0.0, r);
}

double generalized_chordal_sq(const SubspacePoint& u, const SubspacePoint& v) {
  if (u.ambient() != v.ambient()) throw InvalidArgument("generalized_chordal_sq: ambient dimension mismatch");
  const double r = std::min(u.dim(), v.dim());
  return std::clamp(r - (u.basis.adjoint() * v.basis).squaredNorm(), 0.0, r);
}

double avg_chordal(const SubspacePoint& x, std::span<const SubspacePoint> ys, bool generalized) {
  if (ys.empty()) throw InvalidArgument("avg_chordal: empty list");
  double acc = 0.0;
  for (const auto& y : ys) acc += generalized ? generalized_chordal_sq(x, y) : chordal_sq(x, y);
  return acc / static_cast<double>(ys.size());
}

CMat summed_projector(std::span<const std::vector<SubspacePoint>> members) {
  if (members.empty() || members.front().empty()) throw EmptyCell("summed_projector: no members");
  const int n = members.front().front().ambient();
  CMat s = CMat::Zero(n, n);
  for (const auto& m : members)
    for (const auto& y : m) {
      if (y.ambient() != n) throw InvalidArgument("summed_projector: ambient dimension mismatch");
      s.noalias() += y.basis * y.basis.adjoint();
    }
  return s;
}

SubspacePoint centroid_from_projector_sum(const CMat& projector_sum, int rank) {
  const auto n = projector_sum.rows();
  if (rank < 1 || rank > n) throw InvalidArgument("centroid: rank out of range");
  Eigen::SelfAdjointEigenSolver<CMat> es(projector_sum);
  if (es.info() != Eigen::Success) throw DegenerateCodeword("centroid: eigensolver failed");
  // Eigenvalues come out ascending; take the last `rank` columns, largest first.
  CMat b(n, rank);
  for (int j = 0; j < rank; ++j) b.col(j) = es.eigenvectors().col(n - 1 - j);
  return SubspacePoint(std::move(b));
}

SubspacePoint karcher_centroid(std::span<const std::vector<SubspacePoint>> members, int rank) {
  return centroid_from_projector_sum(summed_projector(members), rank);
}

CMat complement_projector(const CMat& f) {
  const CMat q = orthonormal_factor(f);
  CMat p = CMat::Identity(f.rows(), f.rows()) - q * q.adjoint();
  return (p + p.adjoint()) * 0.5;
}

}  // namespace wbhp
