#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "qmrisim/error.hpp"

namespace qmrisim {

using Index3 = Eigen::Vector3i;

/// Voxel lattice geometry. The affine maps (i, j, k, 1) voxel indices to
/// world millimetres.
struct Grid3D {
  Index3 shape = Index3::Ones();
  Eigen::Vector3d spacing = Eigen::Vector3d::Ones();
  Eigen::Matrix4d affine = Eigen::Matrix4d::Identity();

  Grid3D() = default;
  /// Grid with a diagonal affine built from the spacing.
  explicit Grid3D(const Index3& shape_, const Eigen::Vector3d& spacing_ = Eigen::Vector3d::Ones());
  Grid3D(const Index3& shape_, const Eigen::Vector3d& spacing_, const Eigen::Matrix4d& affine_);

  std::int64_t voxelCount() const {
    return std::int64_t(shape.x()) * shape.y() * shape.z();
  }

  /// Linear offset of voxel (i, j, k); x varies fastest.
  std::int64_t offset(int i, int j, int k) const {
    return i + std::int64_t(shape.x()) * (j + std::int64_t(shape.y()) * k);
  }

  bool contains(const Index3& p) const {
    return (p.array() >= 0).all() && (p.array() < shape.array()).all();
  }

  /// Throws InvalidGrid when a dimension or spacing is non-positive or the
  /// affine is singular.
  void validate() const;

  bool operator==(const Grid3D& other) const {
    return shape == other.shape && spacing == other.spacing && affine == other.affine;
  }
};

enum class VolumeKind { Intensity, Map, Mask };

std::string toString(VolumeKind kind);
VolumeKind volumeKindFromString(const std::string& name);

/// Dense scalar field on a Grid3D. Voxels are stored x-fastest, z-slowest.
template <typename Scalar>
class BasicVolume {
 public:
  using Data = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  BasicVolume() = default;

  BasicVolume(Grid3D grid, Data data, VolumeKind kind = VolumeKind::Intensity)
      : grid_(std::move(grid)), data_(std::move(data)), kind_(kind) {
    grid_.validate();
    if (data_.size() != grid_.voxelCount()) {
      throw Error(ErrorCode::InvalidGrid, "data length " + std::to_string(data_.size()) +
                                              " does not match grid voxel count " +
                                              std::to_string(grid_.voxelCount()));
    }
    if (kind_ == VolumeKind::Mask) {
      for (Eigen::Index n = 0; n < data_.size(); ++n) {
        if (data_[n] != Scalar(0) && data_[n] != Scalar(1)) {
          throw Error(ErrorCode::NonBinaryMask, "mask voxel " + std::to_string(n) + " is not 0 or 1");
        }
      }
    }
  }

  const Grid3D& grid() const { return grid_; }
  const Index3& shape() const { return grid_.shape; }
  VolumeKind kind() const { return kind_; }
  const Data& data() const { return data_; }
  Data& data() { return data_; }
  std::int64_t size() const { return data_.size(); }

  Scalar operator()(int i, int j, int k) const { return data_[grid_.offset(i, j, k)]; }
  Scalar& operator()(int i, int j, int k) { return data_[grid_.offset(i, j, k)]; }
  Scalar operator[](std::int64_t n) const { return data_[n]; }
  Scalar& operator[](std::int64_t n) { return data_[n]; }

  /// Same grid and kind, new payload.
  BasicVolume withData(Data data) const { return BasicVolume(grid_, std::move(data), kind_); }

 private:
  Grid3D grid_;
  Data data_;
  VolumeKind kind_ = VolumeKind::Intensity;
};

using Volume = BasicVolume<float>;
using Volumed = BasicVolume<double>;

template <typename Scalar = float>
BasicVolume<Scalar> newVolume(const Grid3D& grid, Scalar fill, VolumeKind kind = VolumeKind::Intensity) {
  grid.validate();
  using Data = typename BasicVolume<Scalar>::Data;
  return BasicVolume<Scalar>(grid, Data::Constant(grid.voxelCount(), fill), kind);
}

/// Grid of the sub-block starting at `origin`; the affine is shifted so that
/// world coordinates of every retained voxel are unchanged.
Grid3D subGrid(const Grid3D& grid, const Index3& origin, const Index3& size);

template <typename Scalar>
BasicVolume<Scalar> extractPatch(const BasicVolume<Scalar>& v, const Index3& origin, const Index3& size) {
  if ((size.array() < 1).any() || (origin.array() < 0).any() ||
      ((origin + size).array() > v.shape().array()).any()) {
    throw Error(ErrorCode::OutOfBounds, "patch exceeds volume bounds");
  }
  Grid3D grid = subGrid(v.grid(), origin, size);
  typename BasicVolume<Scalar>::Data out(grid.voxelCount());
  std::int64_t n = 0;
  for (int k = 0; k < size.z(); ++k) {
    for (int j = 0; j < size.y(); ++j) {
      const std::int64_t row = v.grid().offset(origin.x(), origin.y() + j, origin.z() + k);
      out.segment(n, size.x()) = v.data().segment(row, size.x());
      n += size.x();
    }
  }
  return BasicVolume<Scalar>(std::move(grid), std::move(out), v.kind());
}

}  // namespace qmrisim
