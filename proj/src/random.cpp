#include "qmrisim/random.hpp"

#include <cmath>
#include <numbers>

namespace qmrisim {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Reserved stream words for seed derivation; ordinary streams use small ids.
constexpr std::uint32_t kDeriveTag = 0x5EEDD3A1u;
constexpr std::uint32_t kGaussTag = 0x6A055u;

Philox4x32::Key keyOf(std::uint64_t seed) {
  return {std::uint32_t(seed), std::uint32_t(seed >> 32)};
}

std::uint64_t join(std::uint32_t lo, std::uint32_t hi) { return std::uint64_t(lo) | (std::uint64_t(hi) << 32); }

std::pair<double, double> boxMuller(std::uint64_t a, std::uint64_t b) {
  const double u1 = 1.0 - toUnit(a);  // (0, 1]
  const double u2 = toUnit(b);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
    ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
           std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

RngState::RngState(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

std::uint64_t RngState::nextU64() {
  if (buffered_ == 0) {
    const auto out = Philox4x32::block(
        {std::uint32_t(position_), std::uint32_t(position_ >> 32), std::uint32_t(stream_),
         std::uint32_t(stream_ >> 32)},
        keyOf(seed_));
    ++position_;
    buffer_ = {join(out[0], out[1]), join(out[2], out[3])};
    buffered_ = 2;
  }
  return buffer_[2 - buffered_--];
}

double RngState::uniform() { return toUnit(nextU64()); }

double RngState::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int RngState::uniformInt(int lo, int hi) {
  const auto span = std::uint64_t(std::int64_t(hi) - lo + 1);
  return lo + int(std::uint64_t(uniform() * double(span)));
}

double RngState::normal() {
  const std::uint64_t a = nextU64();
  const std::uint64_t b = nextU64();
  return boxMuller(a, b).first;
}

std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t index) {
  const auto out = Philox4x32::block(
      {std::uint32_t(index), std::uint32_t(index >> 32), kDeriveTag, kDeriveTag}, keyOf(seed));
  return join(out[0], out[1]);
}

std::pair<double, double> gaussianPairAt(std::uint64_t seed, std::uint64_t index) {
  const auto out = Philox4x32::block(
      {std::uint32_t(index), std::uint32_t(index >> 32), kGaussTag, kGaussTag}, keyOf(seed));
  return boxMuller(join(out[0], out[1]), join(out[2], out[3]));
}

}  // namespace qmrisim
