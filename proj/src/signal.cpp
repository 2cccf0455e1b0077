#include "qmrisim/signal.hpp"

#include <algorithm>
#include <cctype>

#include "qmrisim/parallel.hpp"
#include "qmrisim/random.hpp"

namespace qmrisim {

std::string toString(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::FSE: return "FSE";
    case SequenceKind::GRE: return "GRE";
    case SequenceKind::FLAIR: return "FLAIR";
    case SequenceKind::MPRAGE: return "MPRAGE";
  }
  return "FSE";
}

SequenceKind sequenceKindFromString(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "FSE") return SequenceKind::FSE;
  if (upper == "GRE") return SequenceKind::GRE;
  if (upper == "FLAIR") return SequenceKind::FLAIR;
  if (upper == "MPRAGE") return SequenceKind::MPRAGE;
  throw Error(ErrorCode::InvalidArgument, "unknown sequence kind '" + name + "'");
}

namespace detail {

void requireKind(const SequenceParams& p, SequenceKind kind) {
  if (p.kind != kind) {
    throw Error(ErrorCode::WrongSequenceKind,
                "expected " + toString(kind) + " parameters, got " + toString(p.kind));
  }
}

void throwMissing(const SequenceParams& p, const char* field) {
  throw Error(ErrorCode::InvalidSequence, toString(p.kind) + " requires '" + field + "'");
}

}  // namespace detail

void validate(const SequenceParams& p) {
  const bool needTi = p.kind == SequenceKind::FLAIR || p.kind == SequenceKind::MPRAGE;
  const bool needAlpha = p.kind == SequenceKind::GRE || p.kind == SequenceKind::MPRAGE;
  const bool mprage = p.kind == SequenceKind::MPRAGE;
  auto presence = [&](bool present, bool needed, const char* name) {
    if (needed && !present) detail::throwMissing(p, name);
    if (!needed && present) {
      throw Error(ErrorCode::InvalidSequence, toString(p.kind) + " does not use '" + name + "'");
    }
  };
  presence(p.ti.has_value(), needTi, "ti");
  presence(p.tx.has_value(), mprage, "tx");
  presence(p.td.has_value(), mprage, "td");
  presence(p.alphaDeg.has_value(), needAlpha, "alpha");
  presence(p.n.has_value(), mprage, "n");

  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidSequence, std::string(name) + " must be > 0");
    }
  };
  positive(p.te, "te");
  positive(p.tr, "tr");
  if (p.ti) positive(*p.ti, "ti");
  if (p.tx) positive(*p.tx, "tx");
  if (p.td && !(*p.td >= 0.0 && std::isfinite(*p.td))) {
    throw Error(ErrorCode::InvalidSequence, "td must be >= 0");
  }
  if (p.alphaDeg && !(*p.alphaDeg > 0.0 && *p.alphaDeg <= 90.0)) {
    throw Error(ErrorCode::InvalidSequence, "alpha must lie in (0, 90] degrees");
  }
  if (p.n && *p.n < 1) {
    throw Error(ErrorCode::InvalidSequence, "n must be >= 1");
  }
}

double signalAt(double pd, double b1, double r1, double r2, double mt, const SequenceParams& p) {
  switch (p.kind) {
    case SequenceKind::FSE: return signalFse(pd, b1, r1, r2, p);
    case SequenceKind::GRE: return signalGre(pd, b1, r1, r2, mt, p);
    case SequenceKind::FLAIR: return signalFlair(pd, b1, r1, r2, p);
    case SequenceKind::MPRAGE: return signalMprage(pd, b1, r1, p);
  }
  return 0.0;
}

Volume simulateVolume(const QMRIMaps& maps, const SequenceParams& p, int workers) {
  validateMaps(maps);
  validate(p);
  Volume::Data out(maps.pd.size());
  parallelFor(out.size(), workers, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t n = begin; n < end; ++n) {
      out[n] = float(signalAt(maps.pd[n], maps.b1At(n), maps.r1[n], maps.r2[n], maps.mtAt(n), p));
    }
  });
  return Volume(maps.grid(), std::move(out), VolumeKind::Intensity);
}

Volume addRician(const Volume& v, NoiseParams noise, std::uint64_t seed, int workers) {
  if (!(noise.sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
  }
  Volume::Data out(v.size());
  parallelFor(out.size(), workers, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t n = begin; n < end; ++n) {
      const auto [gr, gi] = gaussianPairAt(seed, std::uint64_t(n));
      const double re = double(v[n]) + noise.sigma * gr;
      const double im = noise.sigma * gi;
      out[n] = float(std::sqrt(re * re + im * im));
    }
  });
  return Volume(v.grid(), std::move(out), VolumeKind::Intensity);
}

}  // namespace qmrisim
