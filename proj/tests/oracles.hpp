// Reference implementations used only by the tests. Nothing here calls into
// the library's numerical code: signal formulas are evaluated directly at 50
// significant digits, metrics by exhaustive counting and all-pairs search.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <Eigen/Core>

#include "qmrisim/random.hpp"
#include "qmrisim/signal.hpp"
#include "qmrisim/volume.hpp"

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

inline Real deg2rad(double deg) { return Real(deg) * boost::math::constants::pi<Real>() / 180; }

inline Real fse(Real pd, Real b1, Real r1, Real r2, Real te, Real tr) {
  return pd * b1 * (1 - exp(-r1 * tr)) * exp(-r2 * te);
}

inline Real gre(Real pd, Real b1, Real r1, Real r2s, Real mt, Real te, Real tr, double alphaDeg) {
  const Real a = deg2rad(alphaDeg);
  const Real e1 = exp(-r1 * tr);
  return pd * b1 * sin(a) * (1 - mt) * (1 - e1) / (1 - cos(a) * (1 - mt) * e1) * exp(-r2s * te);
}

inline Real flair(Real pd, Real b1, Real r1, Real r2, Real te, Real tr, Real ti) {
  return pd * b1 * exp(-r2 * te) * (1 - 2 * exp(-r1 * ti) + exp(-r1 * tr));
}

inline Real mprage(Real pd, Real b1, Real r1, Real tr, Real tx, Real td, double alphaDeg, int n) {
  const Real a = deg2rad(alphaDeg);
  const Real e1 = exp(-r1 * tr);
  Real train = 1;
  Real base = cos(a) * exp(-tx * r1);
  Real power = 1;
  for (int i = 0; i < n; ++i) power *= base;
  train -= power;
  const Real ed = exp(-td * r1);
  return pd * b1 * abs(sin(a) * (1 - e1) / (1 - cos(a) * e1) * train * ed + 1 - ed);
}

// Dispatches on the record; field access mirrors the documented layout.
inline Real signal(const qmrisim::SequenceParams& p, double pd, double b1, double r1, double r2, double mt) {
  using qmrisim::SequenceKind;
  switch (p.kind) {
    case SequenceKind::FSE: return fse(pd, b1, r1, r2, p.te, p.tr);
    case SequenceKind::GRE: return gre(pd, b1, r1, r2, mt, p.te, p.tr, *p.alphaDeg);
    case SequenceKind::FLAIR: return flair(pd, b1, r1, r2, p.te, p.tr, *p.ti);
    case SequenceKind::MPRAGE: return mprage(pd, b1, r1, p.tr, *p.tx, *p.td, *p.alphaDeg, *p.n);
  }
  return 0;
}

inline double relativeError(double value, const Real& reference) {
  const Real diff = abs(Real(value) - reference);
  const Real scale = abs(reference);
  if (scale == 0) return double(diff);
  return double(diff / scale);
}

// NT-Xent by explicit softmax over the full similarity matrix.
inline Real ntXent(const Eigen::MatrixXd& z, double tau) {
  const Eigen::Index m = z.rows();
  std::vector<std::vector<Real>> sim(static_cast<std::size_t>(m), std::vector<Real>(static_cast<std::size_t>(m)));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < m; ++k) {
      Real dot = 0, ni = 0, nk = 0;
      for (Eigen::Index d = 0; d < z.cols(); ++d) {
        dot += Real(z(i, d)) * Real(z(k, d));
        ni += Real(z(i, d)) * Real(z(i, d));
        nk += Real(z(k, d)) * Real(z(k, d));
      }
      sim[std::size_t(i)][std::size_t(k)] = dot / sqrt(ni * nk);
    }
  }
  Real total = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index pos = (i % 2 == 0) ? i + 1 : i - 1;
    Real denom = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != i) denom += exp(sim[std::size_t(i)][std::size_t(k)] / tau);
    }
    total += -log(exp(sim[std::size_t(i)][std::size_t(pos)] / tau) / denom);
  }
  return total / m;
}

// ---------------------------------------------------------------- metrics

inline double dice(const qmrisim::Volume& y, const qmrisim::Volume& yhat) {
  std::int64_t a = 0, b = 0, both = 0;
  for (std::int64_t n = 0; n < y.size(); ++n) {
    const bool in1 = y[n] == 1.0f, in2 = yhat[n] == 1.0f;
    a += in1;
    b += in2;
    both += in1 && in2;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * double(both) / double(a + b);
}

inline std::vector<Eigen::Vector3i> surface(const qmrisim::Volume& m) {
  std::vector<Eigen::Vector3i> out;
  const Eigen::Vector3i s = m.shape();
  auto fg = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= s.x() || j >= s.y() || k >= s.z()) return false;
    return m(i, j, k) == 1.0f;
  };
  for (int k = 0; k < s.z(); ++k)
    for (int j = 0; j < s.y(); ++j)
      for (int i = 0; i < s.x(); ++i) {
        if (!fg(i, j, k)) continue;
        if (!fg(i - 1, j, k) || !fg(i + 1, j, k) || !fg(i, j - 1, k) || !fg(i, j + 1, k) ||
            !fg(i, j, k - 1) || !fg(i, j, k + 1)) {
          out.emplace_back(i, j, k);
        }
      }
  return out;
}

inline double hd95(const qmrisim::Volume& y, const qmrisim::Volume& yhat) {
  const Eigen::Vector3d sp = y.grid().spacing;
  const auto sy = surface(y), sh = surface(yhat);
  std::vector<double> pooled;
  auto directed = [&](const auto& from, const auto& to) {
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        double d2 = 0;
        for (int a = 0; a < 3; ++a) {
          const double d = double(p[a] - q[a]) * sp[a];
          d2 += d * d;
        }
        best = std::min(best, d2);
      }
      pooled.push_back(std::sqrt(best));
    }
  };
  directed(sy, sh);
  directed(sh, sy);
  std::sort(pooled.begin(), pooled.end());
  const double rank = 0.95 * double(pooled.size() - 1);
  const std::size_t lo = std::size_t(rank);
  const std::size_t hi = std::min(lo + 1, pooled.size() - 1);
  return pooled[lo] + (rank - double(lo)) * (pooled[hi] - pooled[lo]);
}

// ------------------------------------------------------------- statistics

// Largest |F_n(x) - x| for samples mapped onto [0, 1].
inline double ksDistance(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = double(u.size());
  double worst = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    worst = std::max(worst, std::max(double(i + 1) / n - u[i], u[i] - double(i) / n));
  }
  return worst;
}

// ------------------------------------------------------------- generators

inline qmrisim::Volume randomVolume(qmrisim::RngState& rng, const Eigen::Vector3i& shape, double lo = 0.0,
                                    double hi = 1.0) {
  qmrisim::Volume v = qmrisim::newVolume(qmrisim::Grid3D(shape), 0.0f);
  for (std::int64_t n = 0; n < v.size(); ++n) v[n] = float(rng.uniform(lo, hi));
  return v;
}

// Random blob mask: union of a few boxes, so boundaries are non-trivial.
inline qmrisim::Volume randomMask(qmrisim::RngState& rng, const qmrisim::Grid3D& grid) {
  qmrisim::Volume m = qmrisim::newVolume(grid, 0.0f, qmrisim::VolumeKind::Mask);
  const Eigen::Vector3i s = grid.shape;
  const int boxes = rng.uniformInt(1, 3);
  for (int b = 0; b < boxes; ++b) {
    Eigen::Vector3i lo, hi;
    for (int a = 0; a < 3; ++a) {
      lo[a] = rng.uniformInt(0, s[a] - 1);
      hi[a] = rng.uniformInt(lo[a], s[a] - 1);
    }
    for (int k = lo.z(); k <= hi.z(); ++k)
      for (int j = lo.y(); j <= hi.y(); ++j)
        for (int i = lo.x(); i <= hi.x(); ++i) m(i, j, k) = 1.0f;
  }
  // Speckle so masks are not always convex.
  for (std::int64_t n = 0; n < m.size(); ++n) {
    if (rng.uniform() < 0.05) m[n] = 1.0f - m[n];
  }
  return m;
}

}  // namespace oracle
