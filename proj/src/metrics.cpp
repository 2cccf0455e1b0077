#include "qmrisim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmrisim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void requireSameGrid(const Volume& a, const Volume& b, const char* metric) {
  if (a.shape() != b.shape() || !a.grid().spacing.isApprox(b.grid().spacing, 1e-6)) {
    throw Error(ErrorCode::GridMismatch, std::string(metric) + " needs volumes on the same grid");
  }
}

void requireBinary(const Volume& v, const char* which) {
  for (std::int64_t n = 0; n < v.size(); ++n) {
    if (v[n] != 0.0f && v[n] != 1.0f) {
      throw Error(ErrorCode::NonBinaryMask, std::string(which) + " voxel " + std::to_string(n) + " is not 0 or 1");
    }
  }
}

double diceFromCounts(std::int64_t overlap, std::int64_t a, std::int64_t b) {
  if (a + b == 0) return 1.0;
  return 2.0 * double(overlap) / double(a + b);
}

// 1D squared distance transform under weight w = spacing^2 (lower envelope of
// parabolas, Felzenszwalb & Huttenlocher). `f` is updated in place.
void distanceTransform1D(std::vector<double>& f, double w, std::vector<int>& v, std::vector<double>& z,
                         std::vector<double>& scratch) {
  const int n = int(f.size());
  int first = 0;
  while (first < n && f[first] == kInf) ++first;
  if (first == n) return;
  int k = 0;
  v[0] = first;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = first + 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + w * double(q) * q) - (f[p] + w * double(p) * p)) / (2.0 * w * double(q - p));
      // z[0] is -inf, so the envelope never empties.
      if (k > 0 && s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double d = double(q - v[k]);
    scratch[q] = w * d * d + f[v[k]];
  }
  f.swap(scratch);
}

// Squared world distance from every voxel to the nearest seed voxel.
std::vector<double> squaredDistanceMap(const Grid3D& grid, const std::vector<Index3>& seeds) {
  const Index3& shape = grid.shape;
  std::vector<double> dist(std::size_t(grid.voxelCount()), kInf);
  for (const Index3& s : seeds) dist[std::size_t(grid.offset(s.x(), s.y(), s.z()))] = 0.0;
  const int longest = shape.maxCoeff();
  std::vector<double> line, scratch(longest);
  std::vector<int> v(longest);
  std::vector<double> z(longest + 1);
  for (int axis = 0; axis < 3; ++axis) {
    const int len = shape[axis];
    const int a = (axis + 1) % 3;
    const int b = (axis + 2) % 3;
    const std::int64_t stride = axis == 0 ? 1 : axis == 1 ? shape.x() : std::int64_t(shape.x()) * shape.y();
    const double w = grid.spacing[axis] * grid.spacing[axis];
    line.resize(len);
    scratch.resize(len);
    Index3 p = Index3::Zero();
    for (int ib = 0; ib < shape[b]; ++ib) {
      for (int ia = 0; ia < shape[a]; ++ia) {
        p[a] = ia;
        p[b] = ib;
        p[axis] = 0;
        const std::int64_t start = grid.offset(p.x(), p.y(), p.z());
        for (int m = 0; m < len; ++m) line[m] = dist[std::size_t(start + m * stride)];
        distanceTransform1D(line, w, v, z, scratch);
        for (int m = 0; m < len; ++m) dist[std::size_t(start + m * stride)] = line[m];
      }
    }
  }
  return dist;
}

void directedDistances(const Grid3D& grid, const std::vector<Index3>& from, const std::vector<Index3>& to,
                       std::vector<double>& out) {
  const std::vector<double> sq = squaredDistanceMap(grid, to);
  for (const Index3& p : from) out.push_back(std::sqrt(sq[std::size_t(grid.offset(p.x(), p.y(), p.z()))]));
}

}  // namespace

double psnr(const Volume& reference, const Volume& test, double peak) {
  requireSameGrid(reference, test, "psnr");
  if (!(peak > 0.0)) throw Error(ErrorCode::InvalidArgument, "psnr peak must be > 0");
  const double mse = (reference.data().cast<double>() - test.data().cast<double>()).square().mean();
  if (mse == 0.0) return kInf;
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

double dynamicRange(const Volume& reference) {
  return double(reference.data().maxCoeff()) - double(reference.data().minCoeff());
}

double dice(const Volume& y, const Volume& yhat) {
  requireSameGrid(y, yhat, "dice");
  requireBinary(y, "reference mask");
  requireBinary(yhat, "test mask");
  std::int64_t overlap = 0, a = 0, b = 0;
  for (std::int64_t n = 0; n < y.size(); ++n) {
    const bool in = y[n] != 0.0f, ih = yhat[n] != 0.0f;
    a += in;
    b += ih;
    overlap += in && ih;
  }
  return diceFromCounts(overlap, a, b);
}

std::map<int, double> multiclassDice(const Volume& y, const Volume& yhat, const std::vector<int>& labels) {
  requireSameGrid(y, yhat, "multiclass dice");
  std::map<int, double> out;
  for (int label : labels) {
    std::int64_t overlap = 0, a = 0, b = 0;
    for (std::int64_t n = 0; n < y.size(); ++n) {
      const bool in = std::lround(y[n]) == label, ih = std::lround(yhat[n]) == label;
      a += in;
      b += ih;
      overlap += in && ih;
    }
    out[label] = diceFromCounts(overlap, a, b);
  }
  return out;
}

std::vector<Index3> boundaryVoxels(const Volume& mask) {
  const Index3& shape = mask.shape();
  auto foreground = [&](int i, int j, int k) {
    return i >= 0 && j >= 0 && k >= 0 && i < shape.x() && j < shape.y() && k < shape.z() && mask(i, j, k) != 0.0f;
  };
  std::vector<Index3> out;
  for (int k = 0; k < shape.z(); ++k) {
    for (int j = 0; j < shape.y(); ++j) {
      for (int i = 0; i < shape.x(); ++i) {
        if (!foreground(i, j, k)) continue;
        if (!foreground(i - 1, j, k) || !foreground(i + 1, j, k) || !foreground(i, j - 1, k) ||
            !foreground(i, j + 1, k) || !foreground(i, j, k - 1) || !foreground(i, j, k + 1)) {
          out.emplace_back(i, j, k);
        }
      }
    }
  }
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double rank = q / 100.0 * double(values.size() - 1);
  const auto lo = std::size_t(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (rank - double(lo)) * (values[hi] - values[lo]);
}

double hd95(const Volume& y, const Volume& yhat) {
  requireSameGrid(y, yhat, "hd95");
  requireBinary(y, "reference mask");
  requireBinary(yhat, "test mask");
  const std::vector<Index3> by = boundaryVoxels(y);
  const std::vector<Index3> bh = boundaryVoxels(yhat);
  if (by.empty() || bh.empty()) throw Error(ErrorCode::EmptyMask, "hd95 is undefined for an empty mask");
  std::vector<double> pooled;
  pooled.reserve(by.size() + bh.size());
  directedDistances(y.grid(), by, bh, pooled);
  directedDistances(y.grid(), bh, by, pooled);
  return percentile(std::move(pooled), 95.0);
}

}  // namespace qmrisim
