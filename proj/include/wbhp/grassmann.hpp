#pragma once

#include <span>
#include <vector>

#include "wbhp/linalg.hpp"

namespace wbhp {

/// A point on the Grassmann manifold, represented by a semi-unitary basis.
///
/// The constructor does not orthonormalize; use from_any() for arbitrary
/// full-rank matrices.
struct SubspacePoint {
  CMat basis;

  SubspacePoint() = default;
  explicit SubspacePoint(CMat b) : basis(std::move(b)) {}

  static SubspacePoint from_any(const CMat& m);

  [[nodiscard]] int ambient() const { return static_cast<int>(basis.rows()); }
  [[nodiscard]] int dim() const { return static_cast<int>(basis.cols()); }
};

// r - ||X^H Y||_F^2, clamped to [0, r]. Dimensions must match.
double chordal_sq(const SubspacePoint& x, const SubspacePoint& y);

// min(r1, r2) - ||U^H V||_F^2, clamped to [0, min(r1, r2)].
double generalized_chordal_sq(const SubspacePoint& u, const SubspacePoint& v);

// Mean of squared (generalized) chordal distances from x to every ys[k].
double avg_chordal(const SubspacePoint& x, std::span<const SubspacePoint> ys, bool generalized);

// Sum over members and subcarriers of the projectors Y Y^H.
CMat summed_projector(std::span<const std::vector<SubspacePoint>> members);

/// Top-`rank` eigenvectors of the summed projector matrix.
///
/// This is the extrinsic (projection) mean that minimizes the average squared
/// chordal distance. Throws EmptyCell on an empty member list.
SubspacePoint karcher_centroid(std::span<const std::vector<SubspacePoint>> members, int rank);
SubspacePoint centroid_from_projector_sum(const CMat& projector_sum, int rank);

class EmptyCell : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// I - F (F^H F)^{-1} F^H; throws DegenerateCodeword if F is rank deficient.
CMat complement_projector(const CMat& f);

}  // namespace wbhp
