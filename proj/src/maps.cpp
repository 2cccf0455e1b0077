#include "qmrisim/maps.hpp"

#include <cstdio>
#include <functional>

namespace qmrisim {
namespace {

void checkVoxels(const Volume& v, const char* name, ErrorCode code, const char* rule,
                 const std::function<bool(float)>& ok) {
  for (std::int64_t n = 0; n < v.size(); ++n) {
    if (!ok(v[n])) {
      throw Error(code, std::string(name) + " voxel " + std::to_string(n) + " = " +
                            std::to_string(v[n]) + " violates " + rule);
    }
  }
}

class Fnv1a {
 public:
  void add(const void* bytes, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t n = 0; n < len; ++n) {
      hash_ ^= p[n];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(const Volume& v) {
    add(v.grid().shape.data(), sizeof(int) * 3);
    add(v.grid().spacing.data(), sizeof(double) * 3);
    add(v.grid().affine.data(), sizeof(double) * 16);
    add(v.data().data(), sizeof(float) * std::size_t(v.size()));
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

void validateMaps(const QMRIMaps& maps) {
  const Grid3D& grid = maps.grid();
  auto sameGrid = [&](const Volume& v, const char* name) {
    if (!(v.grid() == grid)) {
      throw Error(ErrorCode::GridMismatch, std::string(name) + " grid differs from pd grid");
    }
  };
  sameGrid(maps.r1, "r1");
  sameGrid(maps.r2, "r2");
  if (maps.mt) sameGrid(*maps.mt, "mt");
  if (maps.b1) sameGrid(*maps.b1, "b1");

  checkVoxels(maps.pd, "pd", ErrorCode::NegativePD, "pd >= 0", [](float x) { return x >= 0.0f; });
  checkVoxels(maps.r1, "r1", ErrorCode::NonPositiveRate, "r1 > 0", [](float x) { return x > 0.0f; });
  checkVoxels(maps.r2, "r2", ErrorCode::NonPositiveRate, "r2 > 0", [](float x) { return x > 0.0f; });
  if (maps.mt) {
    checkVoxels(*maps.mt, "mt", ErrorCode::MTOutOfRange, "0 <= mt < 1",
                [](float x) { return x >= 0.0f && x < 1.0f; });
  }
  if (maps.b1) {
    checkVoxels(*maps.b1, "b1", ErrorCode::NonPositiveB1, "b1 > 0", [](float x) { return x > 0.0f; });
  }
}

std::string fingerprint(const QMRIMaps& maps) {
  Fnv1a h;
  h.add(maps.pd);
  h.add(maps.r1);
  h.add(maps.r2);
  const unsigned char present[2] = {static_cast<unsigned char>(maps.mt.has_value()),
                                    static_cast<unsigned char>(maps.b1.has_value())};
  h.add(present, 2);
  if (maps.mt) h.add(*maps.mt);
  if (maps.b1) h.add(*maps.b1);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.value()));
  return buf;
}

}  // namespace qmrisim
