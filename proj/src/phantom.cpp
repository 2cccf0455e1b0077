#include "qmrisim/phantom.hpp"

namespace qmrisim {
namespace {

struct Tissue {
  float pd, r1, r2, mt;
};

// PD (a.u.), R1 and R2* (1/s), MT fraction.
constexpr Tissue kTissues[4] = {
    {0.0f, 1.0f, 1.0f, 0.0f},       // background
    {1.0f, 0.25f, 2.0f, 0.0f},      // CSF
    {0.80f, 0.70f, 15.0f, 0.015f},  // grey matter
    {0.69f, 1.20f, 20.0f, 0.030f},  // white matter
};

int labelAt(const Index3& shape, int i, int j, int k) {
  const Eigen::Vector3d centre = (shape.cast<double>().array() - 1.0) / 2.0;
  const Eigen::Vector3d radius = shape.cast<double>() * 0.45;
  const Eigen::Vector3d p = (Eigen::Vector3d(i, j, k) - centre).cwiseQuotient(radius);
  const double r = p.norm();
  // Ventricles: two small ellipsoids either side of the midline.
  const Eigen::Vector3d vent(std::abs(p.x()) - 0.18, p.y() * 0.6, p.z() * 1.2);
  if (r > 1.0) return kBackground;
  if (r > 0.92) return kCsf;
  if (vent.norm() < 0.12) return kCsf;
  if (r > 0.75) return kGreyMatter;
  return kWhiteMatter;
}

}  // namespace

QMRIMaps makePhantom(const Index3& shape, const Eigen::Vector3d& spacing) {
  const Grid3D grid(shape, spacing);
  grid.validate();
  Volume::Data pd(grid.voxelCount()), r1(grid.voxelCount()), r2(grid.voxelCount()), mt(grid.voxelCount()),
      b1(grid.voxelCount());
  const Eigen::Vector3d centre = (shape.cast<double>().array() - 1.0) / 2.0;
  std::int64_t n = 0;
  for (int k = 0; k < shape.z(); ++k) {
    for (int j = 0; j < shape.y(); ++j) {
      for (int i = 0; i < shape.x(); ++i, ++n) {
        const Tissue& t = kTissues[labelAt(shape, i, j, k)];
        pd[n] = t.pd;
        r1[n] = t.r1;
        r2[n] = t.r2;
        mt[n] = t.mt;
        const Eigen::Vector3d d = (Eigen::Vector3d(i, j, k) - centre).cwiseQuotient(shape.cast<double>());
        b1[n] = float(1.0 + 0.1 * d.x() - 0.2 * d.squaredNorm());
      }
    }
  }
  QMRIMaps maps;
  maps.pd = Volume(grid, std::move(pd), VolumeKind::Map);
  maps.r1 = Volume(grid, std::move(r1), VolumeKind::Map);
  maps.r2 = Volume(grid, std::move(r2), VolumeKind::Map);
  maps.mt = Volume(grid, std::move(mt), VolumeKind::Map);
  maps.b1 = Volume(grid, std::move(b1), VolumeKind::Map);
  maps.id = fingerprint(maps);
  return maps;
}

Volume phantomLabels(const Index3& shape, const Eigen::Vector3d& spacing) {
  const Grid3D grid(shape, spacing);
  grid.validate();
  Volume::Data labels(grid.voxelCount());
  std::int64_t n = 0;
  for (int k = 0; k < shape.z(); ++k) {
    for (int j = 0; j < shape.y(); ++j) {
      for (int i = 0; i < shape.x(); ++i) labels[n++] = float(labelAt(shape, i, j, k));
    }
  }
  return Volume(grid, std::move(labels), VolumeKind::Intensity);
}

}  // namespace qmrisim
