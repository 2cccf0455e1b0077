#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "qmrisim/random.hpp"
#include "qmrisim/volume.hpp"

namespace qmrisim {

// Resolved transform records. Each carries every parameter it needs, so a
// plan replays without touching a random stream.

struct CropStep {
  Index3 origin = Index3::Zero();
  Index3 size = Index3::Ones();
  bool operator==(const CropStep&) const = default;
};

struct FlipStep {
  std::array<bool, 3> axes{};
  bool operator==(const FlipStep&) const = default;
};

/// Rotation about the voxel-space centre, around axis 0 (x), 1 (y) or 2 (z).
struct RotateStep {
  int axis = 2;
  double angleDeg = 0.0;
  bool operator==(const RotateStep&) const = default;
};

/// Linear map about the voxel-space centre (output = matrix * input).
struct ShearStep {
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();
  bool operator==(const ShearStep&) const = default;
};

struct BiasFieldStep {
  Index3 controlShape = Index3::Constant(2);
  /// x-fastest, controlShape.prod() entries.
  std::vector<double> controlValues;
  double amplitude = 0.0;
  bool operator==(const BiasFieldStep&) const = default;
};

struct GibbsStep {
  Eigen::Vector3d keepFraction = Eigen::Vector3d::Ones();
  bool operator==(const GibbsStep&) const = default;
};

struct RicianNoiseStep {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool operator==(const RicianNoiseStep&) const = default;
};

struct Cuboid {
  Index3 origin = Index3::Zero();
  Index3 size = Index3::Ones();
  bool operator==(const Cuboid&) const = default;
};

struct CuboidDropoutStep {
  std::vector<Cuboid> cuboids;
  bool operator==(const CuboidDropoutStep&) const = default;
};

using AugmentationStep = std::variant<CropStep, FlipStep, RotateStep, ShearStep, BiasFieldStep, GibbsStep,
                                      RicianNoiseStep, CuboidDropoutStep>;

struct AugmentationPlan {
  std::uint64_t seed = 0;
  /// Shape of the volume the plan was drawn for.
  Index3 inputShape = Index3::Ones();
  std::vector<AugmentationStep> steps;

  bool operator==(const AugmentationPlan&) const = default;
};

/// Magnitudes and step probabilities for make-plan. The defaults are
/// repository choices.
struct AugmentationConfig {
  Index3 cropSize = Index3::Constant(96);

  double rotateProb = 0.5;
  double rotateMaxDeg = 15.0;
  double shearProb = 0.5;
  double shearMax = 0.1;
  Eigen::Vector3d flipProb = Eigen::Vector3d::Constant(0.5);

  double biasProb = 0.5;
  double biasAmplitude = 0.3;
  Index3 biasControlPoints = Index3::Constant(4);

  double gibbsProb = 0.5;
  double gibbsKeepMin = 0.5;
  double gibbsKeepMax = 1.0;

  double noiseProb = 0.5;
  double noiseSigmaMin = 0.0;
  double noiseSigmaMax = 0.1;

  double dropoutProb = 0.5;
  int dropoutCountMin = 1;
  int dropoutCountMax = 4;
  int dropoutSizeMin = 8;
  int dropoutSizeMax = 32;

  void validate() const;
};

/// Draws a plan in the fixed order rotate, shear, flip, crop, bias, Gibbs,
/// noise, dropout. Throws CropTooLarge when the crop exceeds the grid.
AugmentationPlan makePlan(const AugmentationConfig& cfg, const Grid3D& grid, RngState& rng);

/// Applies the steps in order. Throws GridMismatch if the volume shape is not
/// the plan's input shape.
Volume applyPlan(const Volume& v, const AugmentationPlan& plan);

Volume flip(const Volume& v, const std::array<bool, 3>& axes);
/// Trilinear resampling, zero outside the field of view. Multiples of 90
/// degrees use exact trigonometric values.
Volume rotate(const Volume& v, int axis, double angleDeg);
Volume shear(const Volume& v, const Eigen::Matrix3d& matrix);

/// Trilinear upsampling of the control grid onto `grid`. Values stay inside
/// the hull of the control values; amplitude is the half-width of the
/// interval around 1 the control values were drawn from.
Volumed biasField(const Grid3D& grid, const Index3& controlShape, const std::vector<double>& controlValues,
                  double amplitude);

/// Hard rectangular low-pass in k-space: coefficients whose normalised
/// frequency |f| (in cycles per voxel) exceeds keep/2 on any axis are zeroed.
Volume gibbsTruncate(const Volume& v, const Eigen::Vector3d& keepFraction);

Volume cuboidDropout(const Volume& v, const std::vector<Cuboid>& cuboids);

}  // namespace qmrisim
