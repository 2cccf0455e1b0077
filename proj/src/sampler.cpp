#include "qmrisim/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace qmrisim {
namespace {

using Law = Distribution::Law;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void checkDistribution(const Distribution& d, const std::string& key) {
  const bool finite = std::isfinite(d.a) && std::isfinite(d.b);
  const bool ok = finite && (d.law == Law::Uniform           ? d.a <= d.b
                             : d.law == Law::LogUniform      ? d.a > 0.0 && d.a < d.b
                                                             : d.b > 0.0);
  if (!ok) throw Error(ErrorCode::InvalidRange, "invalid sampling range for '" + key + "'");
}

Distribution lookup(const SamplerConfig& cfg, SequenceKind kind, const std::string& param) {
  const auto it = cfg.overrides.find(lower(toString(kind)) + "." + param);
  return it != cfg.overrides.end() ? it->second : defaultDistribution(kind, param);
}

}  // namespace

Distribution defaultDistribution(SequenceKind kind, const std::string& param) {
  switch (kind) {
    case SequenceKind::FLAIR:
      if (param == "te") return {Law::LogUniform, 0.02, 0.10};
      if (param == "tr") return {Law::LogUniform, 0.001, 5.0};
      if (param == "ti") return {Law::LogUniform, 0.001, 3.0};
      break;
    case SequenceKind::FSE:
      if (param == "te") return {Law::LogUniform, 0.001, 3.0};
      if (param == "tr") return {Law::LogUniform, 0.001, 3.0};
      break;
    case SequenceKind::MPRAGE:
      if (param == "te") return {Law::Uniform, 0.002, 0.004};
      if (param == "tr") return {Law::ReflectedNormal, 23.0, 2.3};
      if (param == "ti") return {Law::Uniform, 0.6, 0.9};
      if (param == "tx") return {Law::Uniform, 0.004, 0.008};
      if (param == "alpha") return {Law::Uniform, 5.0, 12.0};
      break;
    case SequenceKind::GRE:
      if (param == "te") return {Law::LogUniform, 0.002, 0.08};
      if (param == "tr") return {Law::LogUniform, 0.005, 5.0};
      if (param == "alpha") return {Law::Uniform, 5.0, 50.0};
      break;
  }
  throw Error(ErrorCode::InvalidArgument, toString(kind) + " has no sampled parameter '" + param + "'");
}

bool hasParameter(SequenceKind kind, const std::string& param) {
  try {
    defaultDistribution(kind, param);
    return true;
  } catch (const Error&) {
    return false;
  }
}

void SamplerConfig::validate() const {
  if (mprageN < 1) throw Error(ErrorCode::InvalidArgument, "mprage_n must be >= 1");
  if (!(alphaMaxDeg > 0.0 && alphaMaxDeg <= 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha_max_deg must lie in (0, 90]");
  }
  for (const auto& [key, dist] : overrides) {
    const auto dot = key.find('.');
    if (dot == std::string::npos ||
        !hasParameter(sequenceKindFromString(key.substr(0, dot)), key.substr(dot + 1))) {
      throw Error(ErrorCode::InvalidArgument, "unknown sampler override '" + key + "'");
    }
    checkDistribution(dist, key);
  }
}

double sampleUniform(double lo, double hi, RngState& rng) {
  if (!(lo <= hi)) throw Error(ErrorCode::InvalidRange, "uniform range requires lo <= hi");
  return std::clamp(rng.uniform(lo, hi), lo, hi);
}

double sampleLogUniform(double lo, double hi, RngState& rng) {
  if (!(lo > 0.0 && lo < hi)) throw Error(ErrorCode::InvalidRange, "log-uniform range requires 0 < lo < hi");
  const double u = rng.uniform(std::log(lo), std::log(hi));
  // exp(log(x)) can land one ulp outside the range.
  return std::clamp(std::exp(u), lo, hi);
}

double sampleReflectedNormal(double mu, double sd, RngState& rng) {
  if (!(sd > 0.0)) throw Error(ErrorCode::InvalidRange, "normal sd must be > 0");
  return reflect(mu + sd * rng.normal());
}

double sample(const Distribution& d, RngState& rng) {
  switch (d.law) {
    case Law::Uniform: return sampleUniform(d.a, d.b, rng);
    case Law::LogUniform: return sampleLogUniform(d.a, d.b, rng);
    case Law::ReflectedNormal: return sampleReflectedNormal(d.a, d.b, rng);
  }
  return d.a;
}

SequenceParams sampleSequence(SequenceKind kind, const SamplerConfig& cfg, RngState& rng) {
  cfg.validate();
  constexpr double kTiny = std::numeric_limits<double>::min();
  auto draw = [&](const char* param) { return sample(lookup(cfg, kind, param), rng); };
  // Times must stay strictly positive even when an override law reaches 0.
  auto drawTime = [&](const char* param) { return std::max(draw(param), kTiny); };

  SequenceParams p;
  p.kind = kind;
  p.te = drawTime("te");
  p.tr = drawTime("tr");
  if (kind == SequenceKind::FLAIR || kind == SequenceKind::MPRAGE) p.ti = drawTime("ti");
  if (kind == SequenceKind::MPRAGE) p.tx = drawTime("tx");
  if (kind == SequenceKind::GRE || kind == SequenceKind::MPRAGE) {
    p.alphaDeg = std::clamp(reflect(draw("alpha")), kTiny, cfg.alphaMaxDeg);
  }
  if (kind == SequenceKind::MPRAGE) {
    p.n = cfg.mprageN;
    p.td = mprageDelay(p.tr, *p.ti, *p.tx, *p.n);
  }
  return p;
}

SequenceKind sampleKind(RngState& rng) { return SequenceKind(rng.uniformInt(0, 3)); }

}  // namespace qmrisim
