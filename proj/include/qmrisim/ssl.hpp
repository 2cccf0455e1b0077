#pragma once

#include <Eigen/Dense>

#include <algorithm>

#include "qmrisim/volume.hpp"

namespace qmrisim {

/// 2N embedding rows ordered (a1, b1, a2, b2, ...); row 2k and 2k+1 are the
/// positive pair k.
struct EmbeddingBatch {
  Eigen::MatrixXd vectors;
  double tau = 0.5;

  Eigen::Index pairCount() const { return vectors.rows() / 2; }
  Eigen::Index dim() const { return vectors.cols(); }

  /// Throws InvalidArgument unless rows are even and >= 4, entries finite and
  /// non-zero, and tau > 0.
  void validate() const;
};

template <typename DerivedA, typename DerivedB>
double cosineSimilarity(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw Error(ErrorCode::InvalidArgument, "cosine similarity of a zero vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

/// Normalised-temperature cross entropy, averaged over all 2N anchors.
double ntXentLoss(const EmbeddingBatch& batch);

/// Gradient of ntXentLoss with respect to each embedding row.
Eigen::MatrixXd ntXentGrad(const EmbeddingBatch& batch);

/// Contrastive and reconstruction terms with unit weights.
double combinedLoss(double contrastive, double reconL1);

/// Mean absolute voxel difference, accumulated in double.
double l1Loss(const Volume& pred, const Volume& target);

}  // namespace qmrisim
