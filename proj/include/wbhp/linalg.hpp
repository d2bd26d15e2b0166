#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace wbhp {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Relative rank threshold used for every "full column rank" test.
inline constexpr double kRankTol = 1e-10;

/// Thin SVD h = u * diag(sigma) * v^H restricted to the leading r triplets.
///
/// Singular values are sorted descending. Each right singular vector is
/// rotated so that its first entry with magnitude above 1e-12 is real and
/// positive (the matching left vector gets the same phase), which makes the
/// factorization reproducible for serialized output.
struct TruncatedSvd {
  CMat u;
  RVec sigma;
  CMat v;

  [[nodiscard]] int rank() const { return static_cast<int>(sigma.size()); }
  [[nodiscard]] CMat reconstruct() const;
};

TruncatedSvd truncated_svd(const CMat& h, int r);

// Full thin SVD, r = min(rows, cols).
TruncatedSvd thin_svd(const CMat& h);

/// Returns true if sigma_min / sigma_max > kRankTol (and the matrix is nonzero).
bool has_full_column_rank(const CMat& f);

// Eigenvalues of a Hermitian matrix, descending, negatives clamped to zero
// when `clamp_psd` is set.
RVec hermitian_eigenvalues_desc(const CMat& a, bool clamp_psd = true);

// log2 det(I + c * M^H M), evaluated through the eigenvalues of the Gram matrix.
double log2_det_identity_plus(const CMat& m, double c);

bool is_semi_unitary(const CMat& q, double tol);

// Random complex Gaussian matrix with i.i.d. CN(0,1) entries.
template <class Rng>
CMat complex_gaussian(int rows, int cols, Rng& rng);

// Orthonormal basis of the column space via Householder QR of a Gaussian matrix.
template <class Rng>
CMat random_semi_unitary(int n, int r, Rng& rng);

}  // namespace wbhp

#include <random>

namespace wbhp {

template <class Rng>
CMat complex_gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      m(i, j) = cd(re, im);
    }
  return m;
}

template <class Rng>
CMat random_semi_unitary(int n, int r, Rng& rng) {
  const CMat a = complex_gaussian(n, r, rng);
  Eigen::HouseholderQR<CMat> qr(a);
  CMat q = qr.householderQ() * CMat::Identity(n, r);
  return q;
}

}  // namespace wbhp
