#include "qmrisim/ssl.hpp"

#include <cmath>

namespace qmrisim {
namespace {

struct Forward {
  Eigen::MatrixXd normalized;  // rows scaled to unit length
  Eigen::VectorXd norms;
  Eigen::MatrixXd probs;       // softmax over k != i of sim(i, k) / tau, zero diagonal
  Eigen::VectorXd losses;      // per-anchor loss
};

Eigen::Index positive(Eigen::Index i) { return i ^ 1; }

Forward forward(const EmbeddingBatch& batch) {
  batch.validate();
  const Eigen::Index rows = batch.vectors.rows();
  Forward f;
  f.norms = batch.vectors.rowwise().norm();
  f.normalized = f.norms.cwiseInverse().asDiagonal() * batch.vectors;
  const Eigen::MatrixXd logits = (f.normalized * f.normalized.transpose()) / batch.tau;
  f.probs.setZero(rows, rows);
  f.losses.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double peak = -INFINITY;
    for (Eigen::Index k = 0; k < rows; ++k) {
      if (k != i) peak = std::max(peak, logits(i, k));
    }
    double total = 0.0;
    for (Eigen::Index k = 0; k < rows; ++k) {
      if (k != i) {
        f.probs(i, k) = std::exp(logits(i, k) - peak);
        total += f.probs(i, k);
      }
    }
    f.probs.row(i) /= total;
    f.losses[i] = peak + std::log(total) - logits(i, positive(i));
  }
  return f;
}

}  // namespace

void EmbeddingBatch::validate() const {
  if (vectors.rows() < 4 || vectors.rows() % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "NT-Xent needs an even number of rows and at least two pairs");
  }
  if (vectors.cols() < 1) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
  if (!vectors.allFinite()) throw Error(ErrorCode::NonFinite, "embeddings must be finite");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
  if ((vectors.rowwise().norm().array() == 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "embedding rows must be non-zero");
  }
}

double ntXentLoss(const EmbeddingBatch& batch) { return forward(batch).losses.mean(); }

Eigen::MatrixXd ntXentGrad(const EmbeddingBatch& batch) {
  const Forward f = forward(batch);
  const Eigen::Index rows = batch.vectors.rows();
  // dL/dsim(i, k) for the ordered pair (i, k).
  Eigen::MatrixXd dsim = f.probs;
  for (Eigen::Index i = 0; i < rows; ++i) dsim(i, positive(i)) -= 1.0;
  dsim /= batch.tau * double(rows);
  const Eigen::MatrixXd dnormalized = (dsim + dsim.transpose()) * f.normalized;
  // Project out the radial component and undo the normalisation scale.
  Eigen::MatrixXd grad(rows, batch.vectors.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto n = f.normalized.row(i);
    grad.row(i) = (dnormalized.row(i) - dnormalized.row(i).dot(n) * n) / f.norms[i];
  }
  return grad;
}

double combinedLoss(double contrastive, double reconL1) {
  if (!std::isfinite(contrastive) || !std::isfinite(reconL1)) {
    throw Error(ErrorCode::NonFinite, "loss terms must be finite");
  }
  return contrastive + reconL1;
}

double l1Loss(const Volume& pred, const Volume& target) {
  if (!(pred.grid() == target.grid())) throw Error(ErrorCode::GridMismatch, "L1 loss needs matching grids");
  return (pred.data().cast<double>() - target.data().cast<double>()).abs().mean();
}

}  // namespace qmrisim
