#pragma once

#include <map>
#include <string>

#include "qmrisim/random.hpp"
#include "qmrisim/signal.hpp"

namespace qmrisim {

/// One sampling law. Uniform and LogUniform draw on the closed range [a, b];
/// ReflectedNormal draws |x| with x ~ N(a, b^2).
struct Distribution {
  enum class Law { Uniform, LogUniform, ReflectedNormal };
  Law law = Law::Uniform;
  double a = 0.0;
  double b = 1.0;

  bool operator==(const Distribution&) const = default;
};

struct SamplerConfig {
  int mprageN = 192;
  double alphaMaxDeg = 90.0;
  /// Keyed "<sequence>.<param>", e.g. "gre.alpha" or "mprage.tr".
  std::map<std::string, Distribution> overrides;

  void validate() const;
};

/// Built-in acquisition table. Params: te, tr, ti, tx, alpha.
Distribution defaultDistribution(SequenceKind kind, const std::string& param);
bool hasParameter(SequenceKind kind, const std::string& param);

double sampleLogUniform(double lo, double hi, RngState& rng);
double sampleUniform(double lo, double hi, RngState& rng);
double sampleReflectedNormal(double mu, double sd, RngState& rng);
double sample(const Distribution& d, RngState& rng);

inline double reflect(double x) { return x < 0.0 ? -x : x; }

/// Pre-inversion delay that keeps the readout train inside TR.
inline double mprageDelay(double tr, double ti, double tx, int n) {
  const double td = tr - ti - double(n) * tx;
  return td > 0.0 ? td : 0.0;
}

SequenceParams sampleSequence(SequenceKind kind, const SamplerConfig& cfg, RngState& rng);

/// Uniform over the four sequence kinds.
SequenceKind sampleKind(RngState& rng);

}  // namespace qmrisim
