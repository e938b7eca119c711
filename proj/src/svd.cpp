#include "expca/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "expca/error.hpp"

namespace expca {

namespace {

constexpr double kRotationTol = 1e-15;
constexpr int kMaxSweeps = 100;

// Hestenes one-sided Jacobi: orthogonalize the columns of w in place,
// accumulating the rotations into v (initialized to identity), so that the
// original w equals w_final * v^T. Pair order is fixed; convergence is when
// a full sweep applies no rotation.
void orthogonalize_columns(Matrix &w, Matrix &v) {
  const Eigen::Index q = w.cols();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index i = 0; i + 1 < q; ++i) {
      for (Eigen::Index j = i + 1; j < q; ++j) {
        const double alpha = w.col(i).squaredNorm();
        const double beta = w.col(j).squaredNorm();
        const double gamma = w.col(i).dot(w.col(j));
        if (gamma == 0.0) continue;
        if (std::abs(gamma) <= kRotationTol * std::sqrt(alpha * beta)) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t =
            (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Vector wi = w.col(i);
        w.col(i) = c * wi - s * w.col(j);
        w.col(j) = s * wi + c * w.col(j);
        const Vector vi = v.col(i);
        v.col(i) = c * vi - s * v.col(j);
        v.col(j) = s * vi + c * v.col(j);
        rotated = true;
      }
    }
    if (!rotated) break;
  }
}

// Deterministic orthonormal completion for columns whose singular value is
// exactly zero: pick the standard basis vector whose residual against the
// filled columns is largest (lowest index on ties), then re-orthogonalize.
void complete_column(Matrix &u, Eigen::Index target, Eigen::Index filled_up_to) {
  const Eigen::Index p = u.rows();
  double best_norm = -1.0;
  Vector best;
  for (Eigen::Index cand = 0; cand < p; ++cand) {
    Vector r = Vector::Zero(p);
    r[cand] = 1.0;
    for (Eigen::Index c = 0; c < filled_up_to; ++c) {
      if (c == target) continue;
      r -= u.col(c).dot(r) * u.col(c);
    }
    const double norm = r.norm();
    if (norm > best_norm) {
      best_norm = norm;
      best = r;
    }
  }
  // Second projection pass for numerical hygiene.
  for (Eigen::Index c = 0; c < filled_up_to; ++c) {
    if (c == target) continue;
    best -= u.col(c).dot(best) * u.col(c);
  }
  u.col(target) = best / best.norm();
}

}  // namespace

SvdFactors svd(const Matrix &input, std::optional<int> max_rank) {
  if (input.rows() < 1 || input.cols() < 1) fail("svd: input matrix is empty");
  if (!input.allFinite()) fail("svd: input contains non-finite values");
  if (max_rank && *max_rank < 1) fail("svd: max_rank must be at least 1");

  const bool wide = input.cols() > input.rows();
  Matrix w = wide ? Matrix(input.transpose()) : input;  // p x q, q = min(n, m)
  const Eigen::Index p = w.rows();
  const Eigen::Index q = w.cols();
  Matrix rotations = Matrix::Identity(q, q);
  orthogonalize_columns(w, rotations);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::vector<double> norms(static_cast<std::size_t>(q));
  for (Eigen::Index i = 0; i < q; ++i) norms[static_cast<std::size_t>(i)] = w.col(i).norm();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)];
  });

  Matrix long_side(p, q);   // orthonormal columns spanning the range
  Matrix short_side(q, q);  // accumulated rotations, already orthonormal
  Vector singulars(q);
  for (Eigen::Index r = 0; r < q; ++r) {
    const Eigen::Index src = order[static_cast<std::size_t>(r)];
    const double sigma = norms[static_cast<std::size_t>(src)];
    singulars[r] = sigma;
    short_side.col(r) = rotations.col(src);
    if (sigma > 1e-300) {
      long_side.col(r) = w.col(src) / sigma;
    } else {
      singulars[r] = 0.0;
      long_side.col(r).setZero();  // filled below once earlier columns exist
    }
  }
  for (Eigen::Index r = 0; r < q; ++r) {
    if (singulars[r] == 0.0) complete_column(long_side, r, q);
  }

  SvdFactors factors;
  if (wide) {
    factors.left = short_side;
    factors.right = long_side;
  } else {
    factors.left = long_side;
    factors.right = short_side;
  }
  factors.singulars = singulars;

  const Eigen::Index k =
      max_rank ? std::min<Eigen::Index>(q, *max_rank) : q;
  if (k < q) {
    factors.left = factors.left.leftCols(k).eval();
    factors.right = factors.right.leftCols(k).eval();
    factors.singulars = factors.singulars.head(k).eval();
  }
  factors.rank_tolerance =
      1e-12 * static_cast<double>(std::max(input.rows(), input.cols())) * factors.singulars[0];
  return factors;
}

SvdFactors canonical_signs(SvdFactors factors) {
  for (Eigen::Index i = 0; i < factors.singulars.size(); ++i) {
    Eigen::Index peak = 0;
    double peak_abs = std::abs(factors.right(0, i));
    for (Eigen::Index j = 1; j < factors.right.rows(); ++j) {
      const double a = std::abs(factors.right(j, i));
      if (a > peak_abs) {
        peak_abs = a;
        peak = j;
      }
    }
    if (factors.right(peak, i) < 0.0) {
      factors.right.col(i) *= -1.0;
      factors.left.col(i) *= -1.0;
    }
  }
  return factors;
}

SvdFactors align_signs(SvdFactors factors, const SvdFactors &reference) {
  if (factors.right.rows() != reference.right.rows())
    fail("align_signs: right-vector length differs between factorizations");
  const Eigen::Index shared = std::min(factors.singulars.size(), reference.singulars.size());
  for (Eigen::Index i = 0; i < shared; ++i) {
    if (factors.right.col(i).dot(reference.right.col(i)) < 0.0) {
      factors.right.col(i) *= -1.0;
      factors.left.col(i) *= -1.0;
    }
  }
  return factors;
}

}  // namespace expca
