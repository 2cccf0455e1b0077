#pragma once

#include <optional>
#include <string>

#include "qmrisim/volume.hpp"

namespace qmrisim {

/// Co-registered quantitative parameter maps for one subject.
///
/// `r2` is read as R2* by the gradient-echo model. Absent `mt` behaves as a
/// constant 0 and absent `b1` as a constant 1.
struct QMRIMaps {
  std::string id;
  Volume pd;
  Volume r1;
  Volume r2;
  std::optional<Volume> mt;
  std::optional<Volume> b1;

  const Grid3D& grid() const { return pd.grid(); }

  float mtAt(std::int64_t n) const { return mt ? (*mt)[n] : 0.0f; }
  float b1At(std::int64_t n) const { return b1 ? (*b1)[n] : 1.0f; }
};

/// Throws on the first violated constraint, naming the map and voxel index.
void validateMaps(const QMRIMaps& maps);

/// Content hash (FNV-1a, 64-bit, hex) over grids and voxel bits of all maps.
std::string fingerprint(const QMRIMaps& maps);

}  // namespace qmrisim
