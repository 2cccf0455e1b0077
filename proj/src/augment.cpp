#include "qmrisim/augment.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "qmrisim/signal.hpp"

namespace qmrisim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool coin(RngState& rng, double prob) { return rng.uniform() < prob; }

void checkProbability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::InvalidRange, std::string(name) + " must lie in [0, 1]");
  }
}

void checkOrdered(double lo, double hi, const char* name) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidRange, std::string(name) + " range is not well ordered");
  }
}

// cos/sin of an angle in degrees; exact at multiples of 90.
std::pair<double, double> cosSinDeg(double deg) {
  const double quarter = deg / 90.0;
  if (quarter == std::round(quarter)) {
    const auto q = ((long long)std::round(quarter) % 4 + 4) % 4;
    constexpr double c[4] = {1, 0, -1, 0};
    constexpr double s[4] = {0, 1, 0, -1};
    return {c[q], s[q]};
  }
  const double rad = deg * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

Eigen::Matrix3d rotationMatrix(int axis, double angleDeg) {
  const auto [c, s] = cosSinDeg(angleDeg);
  const int a = (axis + 1) % 3;
  const int b = (axis + 2) % 3;
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r(a, a) = c;
  r(a, b) = -s;
  r(b, a) = s;
  r(b, b) = c;
  return r;
}

double sampleZeroPadded(const Volume& v, const Eigen::Vector3d& p) {
  const Index3& shape = v.shape();
  const Eigen::Vector3d base = p.array().floor();
  const Eigen::Vector3d frac = p - base;
  const Index3 i0 = base.cast<int>();
  double acc = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    Index3 q;
    for (int d = 0; d < 3; ++d) {
      const bool upper = (corner >> d) & 1;
      q[d] = i0[d] + (upper ? 1 : 0);
      w *= upper ? frac[d] : 1.0 - frac[d];
    }
    if (w == 0.0 || (q.array() < 0).any() || (q.array() >= shape.array()).any()) continue;
    acc += w * double(v(q.x(), q.y(), q.z()));
  }
  return acc;
}

// out(p) = v(inverse * (p - c) + c), c the voxel-space centre.
Volume resampleLinear(const Volume& v, const Eigen::Matrix3d& inverse) {
  const Index3& shape = v.shape();
  const Eigen::Vector3d centre = (shape.cast<double>().array() - 1.0) / 2.0;
  Volume::Data out(v.size());
  std::int64_t n = 0;
  for (int k = 0; k < shape.z(); ++k) {
    for (int j = 0; j < shape.y(); ++j) {
      for (int i = 0; i < shape.x(); ++i) {
        const Eigen::Vector3d src = inverse * (Eigen::Vector3d(i, j, k) - centre) + centre;
        out[n++] = float(sampleZeroPadded(v, src));
      }
    }
  }
  return v.withData(std::move(out));
}

// Per-axis interpolation support: lower control index and fractional weight.
struct Lerp1D {
  std::vector<int> lower;
  std::vector<double> frac;
};

Lerp1D lerpTable(int samples, int controls) {
  Lerp1D t;
  t.lower.resize(samples);
  t.frac.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const double pos = samples > 1 ? double(i) * (controls - 1) / double(samples - 1) : 0.0;
    const int lo = std::min(int(std::floor(pos)), controls - 2);
    t.lower[i] = lo;
    t.frac[i] = pos - lo;
  }
  return t;
}

double lerpBounded(double a, double b, double t) {
  const double v = a + t * (b - a);
  return std::clamp(v, std::min(a, b), std::max(a, b));
}

void lowPassAxis(Volumed& v, int axis, double keep) {
  const Index3& shape = v.shape();
  const int len = shape[axis];
  // Normalised frequency of bin m is min(m, len - m) / len cycles per voxel.
  std::vector<bool> zero(len, false);
  bool any = false;
  for (int m = 0; m < len; ++m) {
    const double f = double(std::min(m, len - m)) / double(len);
    zero[m] = f > keep / 2.0;
    any = any || zero[m];
  }
  if (!any) return;

  const std::int64_t stride = axis == 0 ? 1 : axis == 1 ? shape.x() : std::int64_t(shape.x()) * shape.y();
  const int a = (axis + 1) % 3;
  const int b = (axis + 2) % 3;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> line(len), spectrum(len);
  Index3 p = Index3::Zero();
  for (int ib = 0; ib < shape[b]; ++ib) {
    for (int ia = 0; ia < shape[a]; ++ia) {
      p[a] = ia;
      p[b] = ib;
      p[axis] = 0;
      const std::int64_t start = v.grid().offset(p.x(), p.y(), p.z());
      for (int m = 0; m < len; ++m) line[m] = v[start + m * stride];
      fft.fwd(spectrum, line);
      for (int m = 0; m < len; ++m) {
        if (zero[m]) spectrum[m] = 0.0;
      }
      fft.inv(line, spectrum);
      for (int m = 0; m < len; ++m) v[start + m * stride] = line[m].real();
    }
  }
}

std::vector<double> drawControlValues(const Index3& shape, double amplitude, RngState& rng) {
  std::vector<double> values(std::size_t(shape.prod()));
  for (double& c : values) c = std::clamp(rng.uniform(1.0 - amplitude, 1.0 + amplitude), 1.0 - amplitude, 1.0 + amplitude);
  return values;
}

void checkCuboid(const Cuboid& c, const Index3& shape) {
  if ((c.size.array() < 1).any() || (c.origin.array() < 0).any() ||
      ((c.origin + c.size).array() > shape.array()).any()) {
    throw Error(ErrorCode::OutOfBounds, "cuboid exceeds volume bounds");
  }
}

}  // namespace

void AugmentationConfig::validate() const {
  if ((cropSize.array() < 1).any()) throw Error(ErrorCode::InvalidRange, "crop size must be >= 1");
  checkProbability(rotateProb, "rotate probability");
  checkProbability(shearProb, "shear probability");
  for (int d = 0; d < 3; ++d) checkProbability(flipProb[d], "flip probability");
  checkProbability(biasProb, "bias probability");
  checkProbability(gibbsProb, "Gibbs probability");
  checkProbability(noiseProb, "noise probability");
  checkProbability(dropoutProb, "dropout probability");
  if (!(rotateMaxDeg >= 0.0)) throw Error(ErrorCode::InvalidRange, "rotate_max_deg must be >= 0");
  if (!(shearMax >= 0.0)) throw Error(ErrorCode::InvalidRange, "shear_max must be >= 0");
  if (!(biasAmplitude >= 0.0 && biasAmplitude < 1.0)) {
    throw Error(ErrorCode::InvalidRange, "bias amplitude must lie in [0, 1)");
  }
  if ((biasControlPoints.array() < 2).any()) {
    throw Error(ErrorCode::InvalidRange, "bias control grid needs >= 2 points per axis");
  }
  checkOrdered(gibbsKeepMin, gibbsKeepMax, "Gibbs keep fraction");
  if (!(gibbsKeepMin > 0.0 && gibbsKeepMax <= 1.0)) {
    throw Error(ErrorCode::InvalidRange, "Gibbs keep fraction must lie in (0, 1]");
  }
  checkOrdered(noiseSigmaMin, noiseSigmaMax, "noise sigma");
  if (!(noiseSigmaMin >= 0.0)) throw Error(ErrorCode::InvalidRange, "noise sigma must be >= 0");
  checkOrdered(dropoutCountMin, dropoutCountMax, "dropout count");
  checkOrdered(dropoutSizeMin, dropoutSizeMax, "dropout size");
  if (dropoutCountMin < 0 || dropoutSizeMin < 1) {
    throw Error(ErrorCode::InvalidRange, "dropout count must be >= 0 and size >= 1");
  }
}

AugmentationPlan makePlan(const AugmentationConfig& cfg, const Grid3D& grid, RngState& rng) {
  cfg.validate();
  grid.validate();
  const Index3& shape = grid.shape;
  if ((cfg.cropSize.array() > shape.array()).any()) {
    throw Error(ErrorCode::CropTooLarge, "crop size exceeds grid shape");
  }
  AugmentationPlan plan;
  plan.seed = rng.seed();
  plan.inputShape = shape;

  if (coin(rng, cfg.rotateProb)) {
    const int axis = rng.uniformInt(0, 2);
    plan.steps.push_back(RotateStep{axis, rng.uniform(-cfg.rotateMaxDeg, cfg.rotateMaxDeg)});
  }
  if (coin(rng, cfg.shearProb)) {
    ShearStep s;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        if (r != c) s.matrix(r, c) = rng.uniform(-cfg.shearMax, cfg.shearMax);
      }
    }
    plan.steps.push_back(s);
  }
  FlipStep f;
  for (int d = 0; d < 3; ++d) f.axes[d] = coin(rng, cfg.flipProb[d]);
  if (f.axes[0] || f.axes[1] || f.axes[2]) plan.steps.push_back(f);

  CropStep crop;
  crop.size = cfg.cropSize;
  for (int d = 0; d < 3; ++d) crop.origin[d] = rng.uniformInt(0, shape[d] - cfg.cropSize[d]);
  plan.steps.push_back(crop);

  if (coin(rng, cfg.biasProb)) {
    BiasFieldStep b;
    b.controlShape = cfg.biasControlPoints;
    b.amplitude = cfg.biasAmplitude;
    b.controlValues = drawControlValues(b.controlShape, b.amplitude, rng);
    plan.steps.push_back(std::move(b));
  }
  if (coin(rng, cfg.gibbsProb)) {
    GibbsStep g;
    for (int d = 0; d < 3; ++d) g.keepFraction[d] = rng.uniform(cfg.gibbsKeepMin, cfg.gibbsKeepMax);
    plan.steps.push_back(g);
  }
  if (coin(rng, cfg.noiseProb)) {
    const double sigma = rng.uniform(cfg.noiseSigmaMin, cfg.noiseSigmaMax);
    plan.steps.push_back(RicianNoiseStep{sigma, rng.nextU64()});
  }
  if (coin(rng, cfg.dropoutProb)) {
    CuboidDropoutStep drop;
    const int count = rng.uniformInt(cfg.dropoutCountMin, cfg.dropoutCountMax);
    for (int c = 0; c < count; ++c) {
      Cuboid cub;
      for (int d = 0; d < 3; ++d) {
        const int hi = std::min(cfg.dropoutSizeMax, cfg.cropSize[d]);
        const int lo = std::min(cfg.dropoutSizeMin, hi);
        cub.size[d] = rng.uniformInt(lo, hi);
        cub.origin[d] = rng.uniformInt(0, cfg.cropSize[d] - cub.size[d]);
      }
      drop.cuboids.push_back(cub);
    }
    plan.steps.push_back(std::move(drop));
  }
  return plan;
}

Volume applyPlan(const Volume& v, const AugmentationPlan& plan) {
  if (v.shape() != plan.inputShape) {
    throw Error(ErrorCode::GridMismatch, "volume shape does not match the plan's input shape");
  }
  Volume out = v;
  for (const AugmentationStep& step : plan.steps) {
    out = std::visit(
        Overloaded{
            [&](const CropStep& s) { return extractPatch(out, s.origin, s.size); },
            [&](const FlipStep& s) { return flip(out, s.axes); },
            [&](const RotateStep& s) { return rotate(out, s.axis, s.angleDeg); },
            [&](const ShearStep& s) { return shear(out, s.matrix); },
            [&](const BiasFieldStep& s) {
              const Volumed field = biasField(out.grid(), s.controlShape, s.controlValues, s.amplitude);
              Volume::Data data = (out.data().cast<double>() * field.data()).cast<float>();
              return out.withData(std::move(data));
            },
            [&](const GibbsStep& s) { return gibbsTruncate(out, s.keepFraction); },
            [&](const RicianNoiseStep& s) { return addRician(out, NoiseParams{s.sigma}, s.seed); },
            [&](const CuboidDropoutStep& s) { return cuboidDropout(out, s.cuboids); },
        },
        step);
  }
  return out;
}

Volume flip(const Volume& v, const std::array<bool, 3>& axes) {
  const Index3& shape = v.shape();
  Volume out = v;
  for (int k = 0; k < shape.z(); ++k) {
    const int sk = axes[2] ? shape.z() - 1 - k : k;
    for (int j = 0; j < shape.y(); ++j) {
      const int sj = axes[1] ? shape.y() - 1 - j : j;
      for (int i = 0; i < shape.x(); ++i) {
        const int si = axes[0] ? shape.x() - 1 - i : i;
        out(i, j, k) = v(si, sj, sk);
      }
    }
  }
  return out;
}

Volume rotate(const Volume& v, int axis, double angleDeg) {
  if (axis < 0 || axis > 2) throw Error(ErrorCode::InvalidArgument, "rotation axis must be 0, 1 or 2");
  // Rotation matrices are orthogonal; the inverse is the transpose.
  return resampleLinear(v, rotationMatrix(axis, angleDeg).transpose());
}

Volume shear(const Volume& v, const Eigen::Matrix3d& matrix) {
  Eigen::FullPivLU<Eigen::Matrix3d> lu(matrix);
  if (!lu.isInvertible()) throw Error(ErrorCode::InvalidArgument, "shear matrix is singular");
  return resampleLinear(v, lu.inverse());
}

Volumed biasField(const Grid3D& grid, const Index3& controlShape, const std::vector<double>& controlValues,
                  double amplitude) {
  grid.validate();
  if ((controlShape.array() < 2).any() || std::int64_t(controlValues.size()) != controlShape.prod()) {
    throw Error(ErrorCode::InvalidArgument, "bias control grid must be >= 2 per axis and fully populated");
  }
  if (!(amplitude >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bias amplitude must be >= 0");
  const Index3& shape = grid.shape;
  const Lerp1D tx = lerpTable(shape.x(), controlShape.x());
  const Lerp1D ty = lerpTable(shape.y(), controlShape.y());
  const Lerp1D tz = lerpTable(shape.z(), controlShape.z());
  auto ctrl = [&](int i, int j, int k) {
    return controlValues[std::size_t(i + controlShape.x() * (j + controlShape.y() * k))];
  };
  Volumed::Data out(grid.voxelCount());
  std::int64_t n = 0;
  for (int k = 0; k < shape.z(); ++k) {
    const int k0 = tz.lower[k];
    for (int j = 0; j < shape.y(); ++j) {
      const int j0 = ty.lower[j];
      for (int i = 0; i < shape.x(); ++i) {
        const int i0 = tx.lower[i];
        double plane[2];
        for (int dk = 0; dk < 2; ++dk) {
          const double lo = lerpBounded(ctrl(i0, j0, k0 + dk), ctrl(i0 + 1, j0, k0 + dk), tx.frac[i]);
          const double hi = lerpBounded(ctrl(i0, j0 + 1, k0 + dk), ctrl(i0 + 1, j0 + 1, k0 + dk), tx.frac[i]);
          plane[dk] = lerpBounded(lo, hi, ty.frac[j]);
        }
        out[n++] = lerpBounded(plane[0], plane[1], tz.frac[k]);
      }
    }
  }
  return Volumed(grid, std::move(out), VolumeKind::Map);
}

Volume gibbsTruncate(const Volume& v, const Eigen::Vector3d& keepFraction) {
  if (!((keepFraction.array() > 0.0).all() && (keepFraction.array() <= 1.0).all())) {
    throw Error(ErrorCode::InvalidArgument, "keep fractions must lie in (0, 1]");
  }
  // The mask is a product of per-axis masks, so the 3D transform factorises
  // into independent 1D passes.
  Volumed work(v.grid(), v.data().cast<double>(), VolumeKind::Map);
  for (int axis = 0; axis < 3; ++axis) lowPassAxis(work, axis, keepFraction[axis]);
  return v.withData(work.data().cast<float>());
}

Volume cuboidDropout(const Volume& v, const std::vector<Cuboid>& cuboids) {
  Volume out = v;
  for (const Cuboid& c : cuboids) {
    checkCuboid(c, v.shape());
    for (int k = c.origin.z(); k < c.origin.z() + c.size.z(); ++k) {
      for (int j = c.origin.y(); j < c.origin.y() + c.size.y(); ++j) {
        out.data().segment(v.grid().offset(c.origin.x(), j, k), c.size.x()).setZero();
      }
    }
  }
  return out;
}

}  // namespace qmrisim
