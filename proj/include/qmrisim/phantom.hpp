#pragma once

#include "qmrisim/maps.hpp"

namespace qmrisim {

/// Tissue labels used by the phantom: 0 background, 1 CSF, 2 grey matter,
/// 3 white matter.
enum PhantomLabel : int { kBackground = 0, kCsf = 1, kGreyMatter = 2, kWhiteMatter = 3 };

/// Nested-ellipsoid head phantom with typical 3T tissue parameters and a
/// smooth receive field. Deterministic.
QMRIMaps makePhantom(const Index3& shape, const Eigen::Vector3d& spacing = Eigen::Vector3d::Ones());

/// Label volume matching makePhantom's compartments.
Volume phantomLabels(const Index3& shape, const Eigen::Vector3d& spacing = Eigen::Vector3d::Ones());

}  // namespace qmrisim
