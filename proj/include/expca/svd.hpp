#ifndef EXPCA_SVD_HPP
#define EXPCA_SVD_HPP

#include <optional>

#include "expca/types.hpp"

namespace expca {

struct SvdFactors {
  Matrix left;        // n x k, orthonormal columns (U)
  Vector singulars;   // k, non-negative, non-increasing (diagonal of D)
  Matrix right;       // m x k, orthonormal columns (V)
  double rank_tolerance = 0.0;

  int k() const { return static_cast<int>(singulars.size()); }
  bool numerically_zero(int component) const {
    return singulars[component] < rank_tolerance;
  }
  Matrix reconstruct() const {
    return left * singulars.asDiagonal() * right.transpose();
  }
};

// Deterministic singular value decomposition by one-sided Jacobi rotations
// applied to the orientation with fewer columns. Fixed sweep order, no
// internal parallelism: identical input gives bit-identical factors.
// k = min(n, m, max_rank). Components with singular value below
// rank_tolerance = 1e-12 * max(n, m) * singulars[0] are retained and can be
// queried through numerically_zero().
SvdFactors svd(const Matrix &input, std::optional<int> max_rank = std::nullopt);

// Make the largest-magnitude entry of each right column non-negative (ties
// broken by the lowest variable index); the paired left column flips in
// tandem so the reconstruction is unchanged.
SvdFactors canonical_signs(SvdFactors factors);

// Flip sign pairs so each right column has non-negative inner product with
// the same-index reference right column. Columns orthogonal to their
// reference stay as they are.
SvdFactors align_signs(SvdFactors factors, const SvdFactors &reference);

}  // namespace expca

#endif
