// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "oracles.hpp"
#include "qmrisim/augment.hpp"
#include "qmrisim/io.hpp"
#include "qmrisim/metrics.hpp"
#include "qmrisim/phantom.hpp"
#include "qmrisim/pipeline.hpp"
#include "qmrisim/sampler.hpp"
#include "qmrisim/serialize.hpp"
#include "qmrisim/signal.hpp"
#include "qmrisim/ssl.hpp"
#include "tempdir.hpp"

using namespace qmrisim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail << "[" << why << "] ";
    }
  }
};

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int hardwareWorkers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

int runCli(std::vector<std::string> args, std::string* err = nullptr) {
  args.insert(args.begin(), "qmrisim");
  std::ostringstream out, e;
  const int code = cli::run(args, out, e);
  if (err) *err = e.str();
  return code;
}

bool bitEqual(const Volume& a, const Volume& b) {
  return a.grid() == b.grid() &&
         std::memcmp(a.data().data(), b.data().data(), sizeof(float) * std::size_t(a.size())) == 0;
}

constexpr SequenceKind kKinds[] = {SequenceKind::FSE, SequenceKind::GRE, SequenceKind::FLAIR, SequenceKind::MPRAGE};
constexpr PairMode kModes[] = {PairMode::Base, PairMode::SeqAug, PairMode::SeqInv};

// ---------------------------------------------------------------------- 1

void signalOracle(Outcome& o) {
  const auto t0 = Clock::now();
  constexpr int kParamDraws = 100, kVoxels = 100;
  const SamplerConfig scfg;
  double worst = 0.0;
  int tuples = 0, subnormal = 0;
  RngState rng(20240101);
  const Grid3D grid(Index3(10, 10, 1));
  for (SequenceKind kind : kKinds) {
    for (int d = 0; d < kParamDraws; ++d) {
      const SequenceParams p = sampleSequence(kind, scfg, rng);
      QMRIMaps m{"acc", newVolume(grid, 0.0f, VolumeKind::Map), newVolume(grid, 0.0f, VolumeKind::Map),
                 newVolume(grid, 0.0f, VolumeKind::Map), newVolume(grid, 0.0f, VolumeKind::Map),
                 newVolume(grid, 0.0f, VolumeKind::Map)};
      for (int n = 0; n < kVoxels; ++n) {
        m.pd[n] = float(rng.uniform(0.1, 1.2));
        m.r1[n] = float(sampleLogUniform(0.2, 4.0, rng));
        m.r2[n] = float(sampleLogUniform(1.0, 25.0, rng));
        (*m.mt)[n] = float(rng.uniform(0.0, 0.6));
        (*m.b1)[n] = float(rng.uniform(0.6, 1.4));
      }
      const Volume s = simulateVolume(m, p, 4);
      for (int n = 0; n < kVoxels; ++n) {
        const oracle::Real ref = oracle::signal(p, m.pd[n], (*m.b1)[n], m.r1[n], m.r2[n], (*m.mt)[n]);
        if (abs(ref) < FLT_MIN && ref != 0) ++subnormal;
        worst = std::max(worst, oracle::relativeError(s[n], ref));
        ++tuples;
      }
    }
  }
  const double secs = secondsSince(t0);
  o.detail << tuples << " tuples, max rel err " << worst << ", below FLT_MIN " << subnormal << ", " << secs
           << " s";
  o.require(tuples == 4 * kParamDraws * kVoxels, "tuple count");
  o.require(worst <= 1e-6, "relative error");
  o.require(secs < 10.0, "runtime");
}

// ---------------------------------------------------------------------- 2

void greReduction(Outcome& o) {
  RngState rng(2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double pd = rng.uniform(0.0, 2.0), b1 = rng.uniform(0.5, 1.5);
    const double r1 = sampleLogUniform(0.1, 10, rng), r2 = sampleLogUniform(1, 100, rng);
    SequenceParams g;
    g.kind = SequenceKind::GRE;
    g.te = sampleLogUniform(0.002, 0.08, rng);
    g.tr = sampleLogUniform(0.005, 5, rng);
    g.alphaDeg = 90.0;
    SequenceParams f;
    f.te = g.te;
    f.tr = g.tr;
    const double a = signalGre(pd, b1, r1, r2, 0.0, g), b = signalFse(pd, b1, r1, r2, f);
    worst = std::max(worst, b == 0.0 ? std::abs(a) : std::abs(a - b) / std::abs(b));
  }
  o.detail << "1000 tuples, max rel diff " << worst;
  o.require(worst <= 1e-12, "relative difference");
}

// ---------------------------------------------------------------------- 3

void ricianStats(Outcome& o) {
  const auto t0 = Clock::now();
  const Volume zero = newVolume(Grid3D(Index3(100, 100, 100)), 0.0f);
  const Volume r = addRician(zero, {1.0}, 31337, hardwareWorkers());
  const double mean = r.data().cast<double>().mean();
  const double secs = secondsSince(t0);
  const double se = std::sqrt((4.0 - std::numbers::pi) / 2.0) / std::sqrt(double(r.size()));
  const double z = (mean - std::sqrt(std::numbers::pi / 2.0)) / se;
  o.detail << r.size() << " voxels, mean " << mean << " (" << z << " SE), min " << r.data().minCoeff() << ", "
           << secs << " s";
  o.require(std::abs(z) < 3.0, "mean");
  o.require((r.data() >= 0.0f).all(), "non-negative");
  o.require(secs < 5.0, "runtime");
}

// ---------------------------------------------------------------------- 4

void samplerConformance(Outcome& o) {
  constexpr int kDraws = 100000;
  const SamplerConfig cfg;
  struct Param {
    SequenceKind kind;
    const char* name;
    double lo, hi;
    bool logUniform;
    std::function<double(const SequenceParams&)> get;
  };
  const auto te = [](const SequenceParams& p) { return p.te; };
  const auto tr = [](const SequenceParams& p) { return p.tr; };
  const auto ti = [](const SequenceParams& p) { return *p.ti; };
  const auto tx = [](const SequenceParams& p) { return *p.tx; };
  const auto alpha = [](const SequenceParams& p) { return *p.alphaDeg; };
  const std::vector<Param> params = {
      {SequenceKind::FLAIR, "flair.te", 0.02, 0.10, true, te},
      {SequenceKind::FLAIR, "flair.tr", 0.001, 5, true, tr},
      {SequenceKind::FLAIR, "flair.ti", 0.001, 3, true, ti},
      {SequenceKind::FSE, "fse.te", 0.001, 3, true, te},
      {SequenceKind::FSE, "fse.tr", 0.001, 3, true, tr},
      {SequenceKind::MPRAGE, "mprage.te", 0.002, 0.004, false, te},
      {SequenceKind::MPRAGE, "mprage.tr", 0.0, INFINITY, false, tr},
      {SequenceKind::MPRAGE, "mprage.ti", 0.6, 0.9, false, ti},
      {SequenceKind::MPRAGE, "mprage.tx", 0.004, 0.008, false, tx},
      {SequenceKind::MPRAGE, "mprage.alpha", 5, 12, false, alpha},
      {SequenceKind::GRE, "gre.te", 0.002, 0.08, true, te},
      {SequenceKind::GRE, "gre.tr", 0.005, 5, true, tr},
      {SequenceKind::GRE, "gre.alpha", 5, 50, false, alpha},
  };
  long violations = 0;
  double worstKs = 0.0;
  std::string worstName;
  for (SequenceKind kind : kKinds) {
    RngState rng(400 + int(kind));
    std::vector<SequenceParams> draws(kDraws);
    for (auto& d : draws) {
      d = sampleSequence(kind, cfg, rng);
      if (kind == SequenceKind::MPRAGE &&
          (*d.n != cfg.mprageN || *d.td != mprageDelay(d.tr, *d.ti, *d.tx, *d.n) || *d.td < 0)) {
        ++violations;
      }
    }
    for (const Param& p : params) {
      if (p.kind != kind) continue;
      std::vector<double> u;
      if (p.logUniform) u.reserve(kDraws);
      for (const auto& d : draws) {
        const double x = p.get(d);
        if (!(x >= p.lo && x <= p.hi)) ++violations;
        if (p.logUniform) u.push_back((std::log(x) - std::log(p.lo)) / (std::log(p.hi) - std::log(p.lo)));
      }
      if (p.logUniform) {
        const double ks = oracle::ksDistance(std::move(u));
        if (ks > worstKs) worstKs = ks, worstName = p.name;
      }
    }
  }
  o.detail << "4 x " << kDraws << " draws, " << violations << " out of range, worst ECDF deviation " << worstKs
           << " (" << worstName << ")";
  o.require(violations == 0, "range");
  o.require(worstKs < 0.02, "uniformity");
}

// ---------------------------------------------------------------------- 5

Eigen::MatrixXd centralDifferences(EmbeddingBatch b, double h) {
  Eigen::MatrixXd g(b.vectors.rows(), b.vectors.cols());
  for (Eigen::Index i = 0; i < b.vectors.size(); ++i) {
    double& x = b.vectors.data()[i];
    const double x0 = x;
    x = x0 + h;
    const double up = ntXentLoss(b);
    x = x0 - h;
    const double down = ntXentLoss(b);
    x = x0;
    g.data()[i] = (up - down) / (2 * h);
  }
  return g;
}

void ntXent(Outcome& o) {
  const auto t0 = Clock::now();
  EmbeddingBatch fixture;
  fixture.vectors.resize(4, 2);
  fixture.vectors << 1, 0, 1, 0, 0, 1, 0, 1;
  const double loss = ntXentLoss(fixture);
  const double brute = double(oracle::ntXent(fixture.vectors, fixture.tau));
  o.detail << "fixture " << std::setprecision(12) << loss << " vs brute force " << brute << std::setprecision(6)
           << " (stated constant 0.239523 is off by " << std::abs(brute - 0.239523) << "); ";
  o.require(std::abs(loss - brute) <= 1e-9, "fixture");

  RngState rng(5);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    EmbeddingBatch b;
    b.vectors.resize(2 * rng.uniformInt(2, 8), rng.uniformInt(1, 16));
    for (Eigen::Index i = 0; i < b.vectors.size(); ++i) b.vectors.data()[i] = rng.normal();
    const Eigen::MatrixXd g = ntXentGrad(b), fd = centralDifferences(b, 1e-5);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::abs(g.data()[i] - fd.data()[i]) / std::max(std::abs(fd.data()[i]), 1e-6));
    }
  }
  const double secs = secondsSince(t0);
  o.detail << "50 batches, max grad rel err " << worst << ", " << secs << " s";
  o.require(worst < 1e-4, "gradient");
  o.require(secs < 5.0, "runtime");
}

// ---------------------------------------------------------------------- 6

void metricOracles(Outcome& o) {
  RngState rng(6);
  const double spacings[] = {0.5, 1.0, 2.0, 1.5, 0.75};
  int pairs = 0, anisotropic = 0, diceMismatch = 0, hdMismatch = 0;
  while (pairs < 100) {
    const Index3 shape(rng.uniformInt(2, 16), rng.uniformInt(2, 16), rng.uniformInt(2, 16));
    Eigen::Vector3d sp(1, 1, 1);
    if (pairs % 2 == 1) {
      for (int a = 0; a < 3; ++a) sp[a] = spacings[rng.uniformInt(0, 4)];
    }
    const Grid3D g(shape, sp);
    const Volume a = oracle::randomMask(rng, g), b = oracle::randomMask(rng, g);
    if ((a.data() == 0.0f).all() || (b.data() == 0.0f).all()) continue;
    ++pairs;
    anisotropic += !(sp.array() == sp[0]).all();
    diceMismatch += dice(a, b) != oracle::dice(a, b);
    hdMismatch += hd95(a, b) != oracle::hd95(a, b);
  }
  const Grid3D g(Index3(6, 5, 4));
  const double p20 = psnr(newVolume(g, 0.0f), newVolume(g, 0.1f), 1.0);
  const double p48 = psnr(newVolume(g, 0.0f), newVolume(g, 1.0f), 255.0);
  o.detail << pairs << " mask pairs (" << anisotropic << " anisotropic), dice mismatches " << diceMismatch
           << ", hd95 mismatches " << hdMismatch << ", psnr " << std::setprecision(9) << p20 << " / " << p48
           << std::setprecision(6);
  o.require(diceMismatch == 0, "dice");
  o.require(hdMismatch == 0, "hd95");
  o.require(std::abs(p20 - 20.0) <= 1e-6, "psnr 20 dB");
  o.require(std::abs(p48 - 48.1308036086791) <= 1e-6, "psnr 48.1308 dB");
}

// ---------------------------------------------------------------------- 7

void gibbsProjection(Outcome& o) {
  RngState rng(7);
  double identity = 0.0, idempotence = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Volume v = oracle::randomVolume(rng, Index3(32, 32, 32), -1.0, 1.0);
    const Volume full = gibbsTruncate(v, Eigen::Vector3d::Ones());
    identity = std::max(identity, double((full.data() - v.data()).abs().maxCoeff()));
    const Eigen::Vector3d keep(rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0));
    const Volume once = gibbsTruncate(v, keep);
    const Volume twice = gibbsTruncate(once, keep);
    idempotence = std::max(idempotence, double((twice.data() - once.data()).abs().maxCoeff()));
  }
  o.detail << "20 volumes of 32^3, keep=1 max abs err " << identity << ", twice-vs-once max abs err "
           << idempotence;
  o.require(identity <= 1e-5, "identity");
  o.require(idempotence <= 1e-5, "idempotence");
}

// ---------------------------------------------------------------------- 8

AugmentationConfig accCrop() {
  AugmentationConfig c;
  c.cropSize = Index3(16, 16, 12);
  c.dropoutSizeMin = 2;
  c.dropoutSizeMax = 6;
  return c;
}

void determinism(Outcome& o, const TempDir& tmp) {
  const QMRIMaps maps = makePhantom(Index3(24, 24, 20));
  const std::vector<QMRIMaps> catalog{maps};
  RngState seeds(8);
  int replayed = 0, mismatched = 0;
  for (int s = 0; s < 100; ++s) {
    const std::uint64_t seed = seeds.nextU64();
    for (PairMode mode : kModes) {
      const ViewPair p = generatePair(maps, mode, accCrop(), SamplerConfig{}, seed);
      const PairManifest m = pairManifestFromJson(Json::parse(toJson(p.manifest).dump()));
      const ViewPair r = regenerateFromManifest(std::span<const QMRIMaps>(catalog), m);
      ++replayed;
      mismatched += !(bitEqual(p.viewA, r.viewA) && bitEqual(p.viewB, r.viewB) && m == p.manifest);
    }
  }
  o.detail << replayed << " replays, " << mismatched << " mismatched; ";
  o.require(replayed == 300 && mismatched == 0, "replay");

  const fs::path mapsDir = tmp / "det-maps";
  writeQmriSet(maps, mapsDir);
  int files = 0, differing = 0, failures = 0;
  for (PairMode mode : kModes) {
    for (const char* workers : {"1", "8"}) {
      failures += runCli({"pair", "--maps", mapsDir.string(), "--mode", toString(mode), "--count", "8", "--seed",
                          "808", "--crop", "16,16,12", "--workers", workers, "--out",
                          (tmp / ("det-" + toString(mode) + "-w" + workers)).string()}) != cli::kOk;
    }
    const fs::path w1 = tmp / ("det-" + toString(mode) + "-w1"), w8 = tmp / ("det-" + toString(mode) + "-w8");
    for (const auto& e : fs::recursive_directory_iterator(w1)) {
      if (!e.is_regular_file()) continue;
      const fs::path other = w8 / fs::relative(e.path(), w1);
      ++files;
      differing += !fs::exists(other) || slurp(e.path()) != slurp(other);
    }
  }
  o.detail << "workers 1 vs 8: " << files << " files compared, " << differing << " differ";
  o.require(failures == 0, "pair command");
  o.require(files == 3 * (1 + 8 * 3) && differing == 0, "byte identity");
}

// ---------------------------------------------------------------------- 9

void modeSemantics(Outcome& o) {
  const std::vector<QMRIMaps> maps{makePhantom(Index3(20, 20, 16))};
  AugmentationConfig acfg;
  acfg.cropSize = Index3(12, 12, 10);
  acfg.dropoutSizeMin = 2;
  acfg.dropoutSizeMax = 5;
  int checked = 0, bad = 0;
  for (PairMode mode : kModes) {
    for (const ViewPair& p : generateBatch(maps, mode, acfg, SamplerConfig{}, 900 + int(mode), 200, 4)) {
      const PairManifest& m = p.manifest;
      ++checked;
      bool ok = m.mode == mode;
      switch (mode) {
        case PairMode::Base:
          ok = ok && m.sequences.size() == 1 && m.sequences[0].kind == SequenceKind::MPRAGE &&
               m.views[0].sequenceIndex == 0 && m.views[1].sequenceIndex == 0;
          break;
        case PairMode::SeqAug:
          ok = ok && m.sequences.size() == 1 && m.views[0].sequenceIndex == m.views[1].sequenceIndex;
          break;
        case PairMode::SeqInv:
          ok = ok && m.sequences.size() == 2 && m.views[0].sequenceIndex != m.views[1].sequenceIndex &&
               !(m.sequences[m.views[0].sequenceIndex] == m.sequences[m.views[1].sequenceIndex]);
          break;
      }
      bad += !ok;
    }
  }
  o.detail << checked << " pairs (200 per mode), " << bad << " violate their mode";
  o.require(checked == 600 && bad == 0, "mode contract");
}

// --------------------------------------------------------------------- 10

void endToEnd(Outcome& o, const TempDir& tmp) {
  const fs::path maps = tmp / "e2e-maps", out = tmp / "e2e-pairs";
  std::string err;
  o.require(runCli({"phantom", "--out", maps.string(), "--shape", "64,64,64"}, &err) == cli::kOk, "phantom: " + err);
  const auto t0 = Clock::now();
  const int code = runCli({"pair", "--maps", maps.string(), "--mode", "seqinv", "--count", "8", "--seed", "2024",
                           "--out", out.string()},
                          &err);
  const double secs = secondsSince(t0);
  o.require(code == cli::kOk, "pair: " + err);
  int dirs = 0;
  if (fs::exists(out)) {
    for (const auto& e : fs::directory_iterator(out)) {
      dirs += e.is_directory() && fs::exists(e.path() / "view_a.nii.gz") && fs::exists(e.path() / "view_b.nii.gz") &&
              fs::exists(e.path() / "manifest.json");
    }
  }
  const int replay = runCli({"replay", "--dir", out.string(), "--maps", maps.string()}, &err);
  o.detail << "pair --mode seqinv --count 8 on 64^3 in " << secs << " s, " << dirs << " complete pair dirs, replay exit "
           << replay;
  o.require(secs < 60.0, "runtime");
  o.require(dirs == 8, "outputs");
  o.require(replay == cli::kOk, "replay: " + err);
}

}  // namespace

int main() {
  TempDir tmp("acceptance");
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"signal models match the high-precision oracle", signalOracle},
      {"GRE(90 deg, MT=0) reduces to FSE", greReduction},
      {"Rician statistics on a zero volume", ricianStats},
      {"sampler conformance", samplerConformance},
      {"NT-Xent value and gradients", ntXent},
      {"metric oracles", metricOracles},
      {"Gibbs projection", gibbsProjection},
      {"determinism and replay", [&](Outcome& o) { determinism(o, tmp); }},
      {"pair mode semantics", modeSemantics},
      {"end-to-end phantom smoke run", [&](Outcome& o) { endToEnd(o, tmp); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": "
              << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - std::size_t(failed)) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
