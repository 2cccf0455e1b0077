#include "qmrisim/volume.hpp"

#include <cmath>

namespace qmrisim {

Grid3D::Grid3D(const Index3& shape_, const Eigen::Vector3d& spacing_) : shape(shape_), spacing(spacing_) {
  affine.setIdentity();
  affine.diagonal().head<3>() = spacing;
}

Grid3D::Grid3D(const Index3& shape_, const Eigen::Vector3d& spacing_, const Eigen::Matrix4d& affine_)
    : shape(shape_), spacing(spacing_), affine(affine_) {}

void Grid3D::validate() const {
  if ((shape.array() < 1).any()) {
    throw Error(ErrorCode::InvalidGrid, "shape entries must be >= 1");
  }
  if (!(spacing.array() > 0.0).all() || !spacing.allFinite()) {
    throw Error(ErrorCode::InvalidGrid, "spacing entries must be > 0");
  }
  const double det = affine.determinant();
  if (!std::isfinite(det) || det == 0.0) {
    throw Error(ErrorCode::InvalidGrid, "affine is singular");
  }
}

std::string toString(VolumeKind kind) {
  switch (kind) {
    case VolumeKind::Intensity: return "intensity";
    case VolumeKind::Map: return "map";
    case VolumeKind::Mask: return "mask";
  }
  return "intensity";
}

VolumeKind volumeKindFromString(const std::string& name) {
  if (name == "intensity") return VolumeKind::Intensity;
  if (name == "map") return VolumeKind::Map;
  if (name == "mask") return VolumeKind::Mask;
  throw Error(ErrorCode::InvalidArgument, "unknown volume kind '" + name + "'");
}

Grid3D subGrid(const Grid3D& grid, const Index3& origin, const Index3& size) {
  Grid3D out = grid;
  out.shape = size;
  out.affine.col(3).head<3>() += grid.affine.topLeftCorner<3, 3>() * origin.cast<double>();
  return out;
}

}  // namespace qmrisim
