#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include "qmrisim/maps.hpp"
#include "qmrisim/volume.hpp"

namespace qmrisim {

enum class SequenceKind { FSE, GRE, FLAIR, MPRAGE };

std::string toString(SequenceKind kind);
/// Case-insensitive.
SequenceKind sequenceKindFromString(const std::string& name);

/// Acquisition parameters for one sequence. Times are in seconds, the flip
/// angle in degrees. Fields a kind does not use stay empty.
struct SequenceParams {
  SequenceKind kind = SequenceKind::FSE;
  double te = 0.0;
  double tr = 0.0;
  std::optional<double> ti;
  std::optional<double> tx;
  std::optional<double> td;
  std::optional<double> alphaDeg;
  std::optional<int> n;

  bool operator==(const SequenceParams&) const = default;
};

/// Throws InvalidSequence when required fields are missing, unused fields are
/// present, or a value violates its sign/range constraint.
void validate(const SequenceParams& p);

struct NoiseParams {
  double sigma = 0.0;
};

namespace detail {

void requireKind(const SequenceParams& p, SequenceKind kind);
[[noreturn]] void throwMissing(const SequenceParams& p, const char* field);

template <typename T>
T get(const std::optional<double>& field, const SequenceParams& p, const char* name) {
  if (!field) throwMissing(p, name);
  return T(*field);
}

template <typename T>
T radians(T deg) {
  return deg * T(std::numbers::pi_v<long double>) / T(180);
}

}  // namespace detail

// Forward signal equations. T is the evaluation precision; every voxel
// quantity is promoted to T before any exponential is taken.

template <typename T>
T signalFse(T pd, T b1, T r1, T r2, const SequenceParams& p) {
  using std::exp, std::expm1;
  detail::requireKind(p, SequenceKind::FSE);
  const T tr = T(p.tr), te = T(p.te);
  return pd * b1 * -expm1(-r1 * tr) * exp(-r2 * te);
}

template <typename T>
T signalGre(T pd, T b1, T r1, T r2star, T mt, const SequenceParams& p) {
  using std::cos, std::exp, std::expm1, std::sin;
  detail::requireKind(p, SequenceKind::GRE);
  if (!(mt >= T(0) && mt < T(1))) {
    throw Error(ErrorCode::MTOutOfRange, "GRE requires 0 <= mt < 1");
  }
  const T alpha = detail::radians(detail::get<T>(p.alphaDeg, p, "alpha"));
  const T tr = T(p.tr), te = T(p.te);
  const T e1 = exp(-r1 * tr);
  const T c = cos(alpha) * (T(1) - mt);
  return pd * b1 * sin(alpha) * (T(1) - mt) * -expm1(-r1 * tr) / (T(1) - c * e1) * exp(-r2star * te);
}

/// Signed: the inversion-recovery bracket goes negative for short TI.
template <typename T>
T signalFlair(T pd, T b1, T r1, T r2, const SequenceParams& p) {
  using std::exp, std::expm1;
  detail::requireKind(p, SequenceKind::FLAIR);
  const T ti = detail::get<T>(p.ti, p, "ti");
  const T tr = T(p.tr), te = T(p.te);
  // 1 - 2 e^{-R1 TI} + e^{-R1 TR} written with expm1 for small exponents
  const T bracket = expm1(-r1 * tr) - T(2) * expm1(-r1 * ti);
  return pd * b1 * exp(-r2 * te) * bracket;
}

template <typename T>
T signalMprage(T pd, T b1, T r1, const SequenceParams& p) {
  using std::abs, std::cos, std::exp, std::expm1, std::pow, std::sin;
  detail::requireKind(p, SequenceKind::MPRAGE);
  const T alpha = detail::radians(detail::get<T>(p.alphaDeg, p, "alpha"));
  const T tx = detail::get<T>(p.tx, p, "tx");
  const T td = detail::get<T>(p.td, p, "td");
  if (!p.n) detail::throwMissing(p, "n");
  const T tr = T(p.tr);
  const T ca = cos(alpha);
  const T steady = sin(alpha) * -expm1(-r1 * tr) / (T(1) - ca * exp(-r1 * tr));
  const T train = T(1) - pow(ca * exp(-tx * r1), T(*p.n));
  const T ed = exp(-td * r1);
  return pd * b1 * abs(steady * train * ed - expm1(-td * r1));
}

/// Dispatches on `p.kind` for a single voxel.
double signalAt(double pd, double b1, double r1, double r2, double mt, const SequenceParams& p);

/// Voxelwise forward model over a validated map set. Deterministic; the
/// result does not depend on `workers`.
Volume simulateVolume(const QMRIMaps& maps, const SequenceParams& p, int workers = 1);

/// Magnitude of the signal after adding complex Gaussian noise of standard
/// deviation sigma to both channels. Voxel n draws its pair of normals from
/// counter n of the seed's Philox stream, so the result is independent of
/// `workers`.
Volume addRician(const Volume& v, NoiseParams noise, std::uint64_t seed, int workers = 1);

}  // namespace qmrisim
