#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace qmrisim {

/// Name and version of the generator every seeded stream in the library uses.
/// Bumping the version invalidates stored manifests.
inline constexpr const char* kRngAlgorithm = "philox4x32-10/v1";

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Seeded stream over Philox blocks. The 128-bit counter is split into a
/// 64-bit draw position and a 64-bit stream id, so sub-streams never overlap.
class RngState {
 public:
  explicit RngState(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t nextU64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi].
  int uniformInt(int lo, int hi);
  double normal();

  RngState substream(std::uint64_t id) const { return RngState(seed_, id); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Independent 64-bit seed for item `index` of a job seeded with `seed`.
std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t index);

/// Two independent standard normals for element `index` of the stream keyed by
/// `seed`. Pure function of its arguments.
std::pair<double, double> gaussianPairAt(std::uint64_t seed, std::uint64_t index);

/// Converts 64 random bits to a double on [0, 1).
inline double toUnit(std::uint64_t bits) { return double(bits >> 11) * 0x1.0p-53; }

}  // namespace qmrisim
