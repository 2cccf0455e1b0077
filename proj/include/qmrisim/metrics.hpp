#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmrisim/volume.hpp"

namespace qmrisim {

struct MetricResult {
  std::string name;
  double value = 0.0;
  std::optional<std::map<int, double>> perClass;
};

/// 20 log10(peak / sqrt(MSE)); +infinity when the volumes are identical.
double psnr(const Volume& reference, const Volume& test, double peak);

/// max - min of the reference, the `auto` peak convention.
double dynamicRange(const Volume& reference);

/// 2|Y n Yhat| / (|Y| + |Yhat|), 1 for two empty masks. Voxel values must be 0 or 1.
double dice(const Volume& y, const Volume& yhat);

/// One-vs-rest dice per label (labels compared after rounding to integers).
std::map<int, double> multiclassDice(const Volume& y, const Volume& yhat, const std::vector<int>& labels);

/// Foreground voxels with at least one 6-neighbour that is background or
/// outside the volume.
std::vector<Index3> boundaryVoxels(const Volume& mask);

/// 95th percentile (linear interpolation between order statistics) of the
/// pooled directed boundary-to-boundary distances in world millimetres.
double hd95(const Volume& y, const Volume& yhat);

/// Percentile q in [0, 100] of `values` with linear interpolation; sorts.
double percentile(std::vector<double> values, double q);

}  // namespace qmrisim
