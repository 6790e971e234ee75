#pragma once

// Norms, proximal maps and the angular weight matrix.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "alfs/dataset.hpp"
#include "alfs/error.hpp"

namespace alfs {

namespace detail {

inline void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite input");
}

}  // namespace detail

/// Thin SVD with singular values in non-increasing order.
struct ThinSvd {
  MatrixXd u;
  VectorXd s;
  MatrixXd v;
};

inline ThinSvd thin_svd(const MatrixXd& m) {
  detail::require_finite(m, "svd");
  if (m.size() == 0) return {MatrixXd(m.rows(), 0), VectorXd(0), MatrixXd(m.cols(), 0)};
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) throw NumericalError("svd: decomposition failed");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

inline VectorXd singular_values(const MatrixXd& m) {
  detail::require_finite(m, "singular_values");
  if (m.size() == 0) return VectorXd(0);
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues();
}

/// Sum of row l2 norms.
inline double l21_norm(const MatrixXd& m) {
  detail::require_finite(m, "l21_norm");
  return m.rowwise().norm().sum();
}

/// Sum of singular values.
inline double nuclear_norm(const MatrixXd& m) { return singular_values(m).sum(); }

/// Moore-Penrose pseudoinverse; singular values below rel_tol * sigma_max
/// count as zero.
inline MatrixXd pseudo_inverse(const MatrixXd& m, double rel_tol = 1e-10) {
  const ThinSvd svd = thin_svd(m);
  if (svd.s.size() == 0) return MatrixXd::Zero(m.cols(), m.rows());
  const double cutoff = rel_tol * svd.s(0);
  VectorXd inv = VectorXd::Zero(svd.s.size());
  for (Index i = 0; i < svd.s.size(); ++i)
    if (svd.s(i) > cutoff && svd.s(i) > 0.0) inv(i) = 1.0 / svd.s(i);
  return svd.v * inv.asDiagonal() * svd.u.transpose();
}

inline double shrink(double k, double mu) {
  const double mag = std::abs(k) - mu;
  if (mag <= 0.0) return 0.0;
  return k > 0.0 ? mag : -mag;
}

/// Entrywise soft thresholding max(|k| - mu, 0) * sgn(k): the prox of mu*||.||_1.
inline MatrixXd soft_threshold(const MatrixXd& k, double mu) {
  detail::require(mu >= 0.0, "soft_threshold: negative threshold");
  detail::require_finite(k, "soft_threshold");
  return k.unaryExpr([mu](double v) { return shrink(v, mu); });
}

/// Soft thresholding with a per-entry threshold matrix (weighted l1 prox).
inline MatrixXd soft_threshold(const MatrixXd& k, const MatrixXd& mu) {
  detail::require(k.rows() == mu.rows() && k.cols() == mu.cols(), "soft_threshold: threshold shape mismatch");
  detail::require((mu.array() >= 0.0).all(), "soft_threshold: negative threshold");
  detail::require_finite(k, "soft_threshold");
  return k.binaryExpr(mu, [](double v, double t) { return shrink(v, t); });
}

/// Singular value thresholding U diag(max(sigma - mu, 0)) V^T: the prox of
/// mu*||.||_*.
inline MatrixXd svt(const MatrixXd& k, double mu) {
  detail::require(mu >= 0.0, "svt: negative threshold");
  const ThinSvd svd = thin_svd(k);
  const VectorXd shrunk = svd.s.unaryExpr([mu](double s) { return std::max(s - mu, 0.0); });
  return svd.u * shrunk.asDiagonal() * svd.v.transpose();
}

// ---------------------------------------------------------------------------

/// n x n weights T_ij = 1 / (|cos theta_ij| + varsigma) between sample columns.
struct AngularWeights {
  MatrixXd t;
  double varsigma = 1e-8;
};

inline AngularWeights angular_weights(const MatrixXd& x, double varsigma = 1e-8) {
  detail::require(varsigma > 0.0, "angular_weights: varsigma must be positive");
  detail::require_finite(x, "angular_weights");
  const VectorXd norms = x.colwise().norm().transpose();
  for (Index j = 0; j < norms.size(); ++j)
    if (norms(j) == 0.0) throw ValidationError("angular_weights: sample " + std::to_string(j) + " is a zero column");
  const MatrixXd unit = x * norms.cwiseInverse().asDiagonal();
  const MatrixXd cosines = unit.transpose() * unit;
  AngularWeights w;
  w.varsigma = varsigma;
  w.t.resize(x.cols(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = j; i < x.cols(); ++i) {
      const double c = std::min(std::abs(cosines(i, j)), 1.0);
      w.t(i, j) = w.t(j, i) = 1.0 / (c + varsigma);
    }
  }
  return w;
}

inline AngularWeights angular_weights(const Dataset& ds, double varsigma = 1e-8) {
  return angular_weights(ds.matrix, varsigma);
}

}  // namespace alfs
