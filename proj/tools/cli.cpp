#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>

#include "qmrisim/config.hpp"
#include "qmrisim/io.hpp"
#include "qmrisim/metrics.hpp"
#include "qmrisim/parallel.hpp"
#include "qmrisim/phantom.hpp"
#include "qmrisim/pipeline.hpp"
#include "qmrisim/serialize.hpp"

namespace qmrisim::cli {
namespace fs = std::filesystem;

namespace {

constexpr int kSidecarSchemaVersion = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::uint64_t parseSeed(const std::string& text, const char* origin) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 0);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return std::uint64_t(v);
  } catch (const std::exception&) {
    throw UsageError(std::string(origin) + " is not a valid 64-bit seed: '" + text + "'");
  }
}

// --seed, then QMRISIM_SEED, then the config file; randomized commands refuse
// to run without one.
std::uint64_t resolveSeed(const std::optional<std::string>& flag, std::optional<std::uint64_t> fromConfig,
                          const char* command) {
  if (flag) return parseSeed(*flag, "--seed");
  if (auto e = env("QMRISIM_SEED")) return parseSeed(*e, "QMRISIM_SEED");
  if (fromConfig) return *fromConfig;
  throw UsageError(std::string(command) + " is randomized and requires --seed (or QMRISIM_SEED)");
}

int resolveWorkers(const std::optional<int>& flag, std::optional<int> fromConfig) {
  int workers = 1;
  if (flag) {
    workers = *flag;
  } else if (auto e = env("QMRISIM_WORKERS")) {
    try {
      workers = std::stoi(*e);
    } catch (const std::exception&) {
      throw UsageError("QMRISIM_WORKERS is not an integer: '" + *e + "'");
    }
  } else if (fromConfig) {
    workers = *fromConfig;
  }
  if (workers < 1) throw UsageError("worker count must be >= 1");
  return workers;
}

fs::path sidecarPath(const fs::path& volumePath) {
  std::string name = volumePath.filename().string();
  for (const char* ext : {".nii.gz", ".nii"}) {
    const std::string e(ext);
    if (name.size() > e.size() && name.compare(name.size() - e.size(), e.size(), e) == 0) {
      name.resize(name.size() - e.size());
      break;
    }
  }
  return volumePath.parent_path() / (name + ".json");
}

void ensureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

RunConfig configFrom(const std::optional<std::string>& path) {
  return path ? loadRunConfig(*path) : RunConfig{};
}

std::vector<QMRIMaps> loadMapSets(const std::vector<std::string>& dirs) {
  std::vector<QMRIMaps> sets;
  for (const std::string& d : dirs) sets.push_back(readQmriSet(fs::path(d)));
  return sets;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string maps;
  std::string sequence;
  std::string out;
  std::optional<double> te, tr, ti, tx, td, alpha;
  std::optional<int> n;
  bool sample = false;
  std::optional<std::string> seed;
  std::optional<std::string> config;
  std::optional<int> workers;
};

SequenceParams explicitParams(const SimulateArgs& a, const SamplerConfig& scfg) {
  SequenceParams p;
  p.kind = sequenceKindFromString(a.sequence);
  const std::string kind = a.sequence;
  auto need = [&](const std::optional<double>& v, const char* flag) {
    if (!v) throw UsageError(kind + " requires " + flag);
    return *v;
  };
  auto forbid = [&](bool present, const char* flag) {
    if (present) throw UsageError(kind + " does not take " + flag);
  };
  p.te = need(a.te, "--te");
  p.tr = need(a.tr, "--tr");
  switch (p.kind) {
    case SequenceKind::FSE:
      forbid(a.ti.has_value(), "--ti");
      forbid(a.alpha.has_value(), "--alpha");
      break;
    case SequenceKind::GRE:
      forbid(a.ti.has_value(), "--ti");
      p.alphaDeg = need(a.alpha, "--alpha");
      break;
    case SequenceKind::FLAIR:
      forbid(a.alpha.has_value(), "--alpha");
      p.ti = need(a.ti, "--ti");
      break;
    case SequenceKind::MPRAGE:
      p.ti = need(a.ti, "--ti");
      p.tx = need(a.tx, "--tx");
      p.alphaDeg = need(a.alpha, "--alpha");
      p.n = a.n.value_or(scfg.mprageN);
      p.td = a.td ? *a.td : mprageDelay(p.tr, *p.ti, *p.tx, *p.n);
      break;
  }
  if (p.kind != SequenceKind::MPRAGE) {
    forbid(a.tx.has_value(), "--tx");
    forbid(a.td.has_value(), "--td");
    forbid(a.n.has_value(), "--n");
  }
  try {
    validate(p);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return p;
}

int cmdSimulate(const SimulateArgs& a, std::ostream& out) {
  const RunConfig cfg = configFrom(a.config);
  SequenceParams p;
  std::optional<std::uint64_t> seed;
  if (a.sample) {
    seed = resolveSeed(a.seed, cfg.seed, "simulate --sample");
    RngState rng(*seed);
    p = sampleSequence(sequenceKindFromString(a.sequence), cfg.sampler, rng);
  } else {
    p = explicitParams(a, cfg.sampler);
  }
  const QMRIMaps maps = readQmriSet(fs::path(a.maps));
  const Volume v = simulateVolume(maps, p, resolveWorkers(a.workers, cfg.workers));
  const fs::path target(a.out);
  ensureParent(target);
  writeNifti(v, target);
  Json side = {{"schema_version", kSidecarSchemaVersion},
               {"command", "simulate"},
               {"source_id", maps.id},
               {"sequence", toJson(p)}};
  if (seed) {
    side["seed"] = *seed;
    side["rng_algorithm"] = kRngAlgorithm;
  }
  writeJsonFile(side, sidecarPath(target));
  out << target.string() << '\n';
  return kOk;
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string sequence;
  int count = 1;
  std::optional<std::string> seed;
  std::optional<std::string> config;
};

int cmdSample(const SampleArgs& a, std::ostream& out) {
  const RunConfig cfg = configFrom(a.config);
  const std::uint64_t seed = resolveSeed(a.seed, cfg.seed, "sample");
  if (a.count < 1) throw UsageError("--count must be >= 1");
  const bool randomKind = a.sequence == "random";
  const SequenceKind fixed = randomKind ? SequenceKind::FSE : sequenceKindFromString(a.sequence);
  RngState rng(seed);
  for (int i = 0; i < a.count; ++i) {
    const SequenceKind kind = randomKind ? sampleKind(rng) : fixed;
    out << toJson(sampleSequence(kind, cfg.sampler, rng)).dump() << '\n';
  }
  return kOk;
}

// -------------------------------------------------------------------- pair

struct PairArgs {
  std::vector<std::string> maps;
  std::optional<std::string> mode;
  std::optional<std::string> policy;
  std::optional<int> count;
  std::optional<std::string> seed;
  std::optional<std::string> config;
  std::optional<int> workers;
  std::vector<int> crop;
  std::string out;
};

int cmdPair(const PairArgs& a, std::ostream& out) {
  RunConfig cfg = configFrom(a.config);
  const PairMode mode = a.mode ? pairModeFromString(*a.mode)
                               : cfg.mode ? *cfg.mode : throw UsageError("pair requires --mode");
  const DistinctPolicy policy =
      a.policy ? distinctPolicyFromString(*a.policy) : cfg.policy.value_or(DistinctPolicy::Record);
  const int count = a.count.value_or(cfg.count.value_or(1));
  if (count < 1) throw UsageError("--count must be >= 1");
  const std::uint64_t seed = resolveSeed(a.seed, cfg.seed, "pair");
  const int workers = resolveWorkers(a.workers, cfg.workers);
  const std::vector<QMRIMaps> sets = loadMapSets(a.maps);
  if (!a.crop.empty()) {
    if (a.crop.size() != 3) throw UsageError("--crop takes three values");
    cfg.augment.cropSize = Index3(a.crop[0], a.crop[1], a.crop[2]);
  } else if (!cfg.cropExplicit) {
    // Default crop shrinks to fit the smallest map grid.
    for (const QMRIMaps& m : sets) cfg.augment.cropSize = cfg.augment.cropSize.cwiseMin(m.grid().shape);
  }

  const fs::path root(a.out);
  fs::create_directories(root);
  Json sources = Json::array();
  for (const QMRIMaps& m : sets) sources.push_back(m.id);
  writeJsonFile({{"schema_version", kSidecarSchemaVersion},
                 {"command", "pair"},
                 {"mode", toString(mode)},
                 {"distinct_policy", toString(policy)},
                 {"seed", seed},
                 {"count", count},
                 {"crop_size", {cfg.augment.cropSize.x(), cfg.augment.cropSize.y(), cfg.augment.cropSize.z()}},
                 {"rng_algorithm", kRngAlgorithm},
                 {"sources", sources}},
                root / "run.json");

  parallelFor(count, workers, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      const ViewPair pair = generatePair(sets[std::size_t(i) % sets.size()], mode, cfg.augment, cfg.sampler,
                                         deriveSeed(seed, std::uint64_t(i)), policy);
      const fs::path dir = root / std::to_string(i);
      fs::create_directories(dir);
      writeNifti(pair.viewA, dir / "view_a.nii.gz");
      writeNifti(pair.viewB, dir / "view_b.nii.gz");
      writeJsonFile(toJson(pair.manifest), dir / "manifest.json");
    }
  });
  out << "wrote " << count << " pairs to " << root.string() << '\n';
  return kOk;
}

// ------------------------------------------------------------------ replay

struct ReplayArgs {
  std::string dir;
  std::vector<std::string> maps;
};

// Returns a description of the first differing voxel, or nothing if equal.
std::optional<std::string> firstDifference(const Volume& stored, const Volume& regenerated) {
  if (stored.shape() != regenerated.shape()) return std::string("shape differs");
  for (std::int64_t n = 0; n < stored.size(); ++n) {
    const float s = stored[n], r = regenerated[n];
    if (std::memcmp(&s, &r, sizeof(float)) != 0) {
      const Index3& sh = stored.shape();
      const std::int64_t i = n % sh.x(), j = (n / sh.x()) % sh.y(), k = n / (std::int64_t(sh.x()) * sh.y());
      std::ostringstream msg;
      msg.precision(9);
      msg << "voxel (" << i << ", " << j << ", " << k << ") stored " << s << " regenerated " << r;
      return msg.str();
    }
  }
  return std::nullopt;
}

int cmdReplay(const ReplayArgs& a, std::ostream& out) {
  const fs::path root(a.dir);
  std::vector<fs::path> pairDirs;
  if (fs::exists(root / "manifest.json")) {
    pairDirs.push_back(root);
  } else if (fs::is_directory(root)) {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) pairDirs.push_back(entry.path());
    }
    std::sort(pairDirs.begin(), pairDirs.end());
  }
  if (pairDirs.empty()) throw UsageError("no manifest.json found under " + root.string());

  const std::vector<QMRIMaps> sets = loadMapSets(a.maps);
  for (const fs::path& dir : pairDirs) {
    const PairManifest manifest = pairManifestFromJson(readJsonFile(dir / "manifest.json"));
    const ViewPair regenerated = regenerateFromManifest(std::span<const QMRIMaps>(sets), manifest);
    const std::pair<const char*, const Volume*> views[2] = {{"view_a", &regenerated.viewA},
                                                            {"view_b", &regenerated.viewB}};
    for (const auto& [name, volume] : views) {
      const fs::path file = dir / (std::string(name) + ".nii.gz");
      if (!fs::exists(file)) throw VerificationFailure(file.string() + " is missing");
      if (auto diff = firstDifference(readNifti(file), *volume)) {
        throw VerificationFailure(file.string() + ": " + *diff);
      }
    }
    out << dir.string() << ": ok\n";
  }
  return kOk;
}

// ------------------------------------------------------------------- noise

struct NoiseArgs {
  std::string in;
  std::string out;
  double sigma = 0.0;
  std::optional<std::string> seed;
  std::optional<int> workers;
};

int cmdNoise(const NoiseArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolveSeed(a.seed, std::nullopt, "noise");
  if (!(a.sigma >= 0.0)) throw UsageError("--sigma must be >= 0");
  const Volume input = readNifti(a.in);
  const Volume noisy = addRician(input, NoiseParams{a.sigma}, seed, resolveWorkers(a.workers, std::nullopt));
  const fs::path target(a.out);
  ensureParent(target);
  writeNifti(noisy, target);
  writeJsonFile({{"schema_version", kSidecarSchemaVersion},
                 {"command", "noise"},
                 {"input", fs::path(a.in).filename().string()},
                 {"sigma", a.sigma},
                 {"seed", seed},
                 {"rng_algorithm", kRngAlgorithm}},
                sidecarPath(target));
  out << target.string() << '\n';
  return kOk;
}

// ----------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string metric;
  std::string ref;
  std::string test;
  std::optional<std::string> peak;
  std::optional<std::string> labels;
};

std::vector<int> parseLabels(const std::string& text) {
  std::vector<int> labels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      labels.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--labels expects comma-separated integers, got '" + item + "'");
    }
  }
  if (labels.empty()) throw UsageError("--labels is empty");
  return labels;
}

Json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

int cmdMetrics(const MetricsArgs& a, std::ostream& out) {
  const Volume ref = readNifti(a.ref);
  const Volume test = readNifti(a.test);
  Json result;
  if (a.metric == "psnr") {
    if (!a.peak) throw UsageError("psnr requires --peak <value|auto>");
    double peak = 0.0;
    if (*a.peak == "auto") {
      peak = dynamicRange(ref);
    } else {
      try {
        peak = std::stod(*a.peak);
      } catch (const std::exception&) {
        throw UsageError("--peak must be a number or 'auto'");
      }
    }
    result["psnr"] = number(psnr(ref, test, peak));
    result["peak"] = peak;
  } else if (a.metric == "dice") {
    if (a.labels) {
      Json perClass = Json::object();
      for (const auto& [label, value] : multiclassDice(ref, test, parseLabels(*a.labels))) {
        perClass[std::to_string(label)] = value;
      }
      result["dice"] = perClass;
    } else {
      result["dice"] = dice(ref, test);
    }
  } else if (a.metric == "hd95") {
    result["hd95"] = hd95(ref, test);
  } else {
    throw UsageError("unknown metric '" + a.metric + "' (psnr, dice, hd95)");
  }
  out << result.dump() << '\n';
  return kOk;
}

// ----------------------------------------------------------------- phantom

struct PhantomArgs {
  std::string out;
  std::vector<int> shape{64, 64, 64};
  std::vector<double> spacing{1.0, 1.0, 1.0};
  std::optional<std::string> labels;
};

int cmdPhantom(const PhantomArgs& a, std::ostream& out) {
  if (a.shape.size() != 3 || a.spacing.size() != 3) throw UsageError("--shape and --spacing take three values");
  const Index3 shape(a.shape[0], a.shape[1], a.shape[2]);
  const Eigen::Vector3d spacing(a.spacing[0], a.spacing[1], a.spacing[2]);
  const QMRIMaps maps = makePhantom(shape, spacing);
  writeQmriSet(maps, a.out);
  if (a.labels) {
    ensureParent(*a.labels);
    writeNifti(phantomLabels(shape, spacing), *a.labels);
  }
  out << fs::path(a.out).string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qmrisim: synthetic MRI contrasts and self-supervised view pairs from quantitative maps"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate one sequence from a map set");
  simulate->add_option("--maps", sim.maps, "Directory with pd/r1/r2[/mt/b1].nii[.gz]")->required();
  simulate->add_option("--sequence", sim.sequence, "fse | gre | flair | mprage")->required();
  simulate->add_option("--te", sim.te, "Echo time [s]");
  simulate->add_option("--tr", sim.tr, "Repetition time [s]");
  simulate->add_option("--ti", sim.ti, "Inversion time [s]");
  simulate->add_option("--tx", sim.tx, "Excitation spacing [s]");
  simulate->add_option("--td", sim.td, "Delay [s] (MPRAGE; default max(0, TR - TI - n TX))");
  simulate->add_option("--alpha", sim.alpha, "Flip angle [deg]");
  simulate->add_option("--n", sim.n, "Excitation count (MPRAGE)");
  simulate->add_flag("--sample", sim.sample, "Draw parameters from the sampling table");
  simulate->add_option("--seed", sim.seed, "Seed for --sample");
  simulate->add_option("--config", sim.config, "TOML run configuration");
  simulate->add_option("--workers", sim.workers, "Worker threads");
  simulate->add_option("--out", sim.out, "Output .nii or .nii.gz")->required();

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "Print sampled sequence parameters as JSON lines");
  sample->add_option("--sequence", smp.sequence, "fse | gre | flair | mprage | random")->required();
  sample->add_option("--count", smp.count, "Number of records");
  sample->add_option("--seed", smp.seed, "Seed");
  sample->add_option("--config", smp.config, "TOML run configuration");

  PairArgs pr;
  auto* pair = app.add_subcommand("pair", "Generate view pairs with replay manifests");
  pair->add_option("--maps", pr.maps, "Map set directory (repeatable)")->required();
  pair->add_option("--mode", pr.mode, "base | seqaug | seqinv");
  pair->add_option("--policy", pr.policy, "SeqInv distinctness: record | kind");
  pair->add_option("--count", pr.count, "Number of pairs");
  pair->add_option("--seed", pr.seed, "Seed");
  pair->add_option("--config", pr.config, "TOML run configuration");
  pair->add_option("--workers", pr.workers, "Worker threads");
  pair->add_option("--crop", pr.crop, "Crop size nx,ny,nz (default 96^3, shrunk to fit the maps)")
      ->expected(3)
      ->delimiter(',');
  pair->add_option("--out", pr.out, "Output directory")->required();

  ReplayArgs rp;
  auto* replay = app.add_subcommand("replay", "Regenerate pairs from manifests and compare bit-exactly");
  replay->add_option("--dir", rp.dir, "Pair directory or run root")->required();
  replay->add_option("--maps", rp.maps, "Map set directory (repeatable)")->required();

  NoiseArgs nz;
  auto* noise = app.add_subcommand("noise", "Add Rician noise to a volume");
  noise->add_option("--in", nz.in, "Input volume")->required();
  noise->add_option("--sigma", nz.sigma, "Noise standard deviation")->required();
  noise->add_option("--seed", nz.seed, "Seed");
  noise->add_option("--workers", nz.workers, "Worker threads");
  noise->add_option("--out", nz.out, "Output volume")->required();

  MetricsArgs mt;
  auto* metrics = app.add_subcommand("metrics", "Compare two volumes (JSON on stdout)");
  metrics->add_option("metric", mt.metric, "psnr | dice | hd95")->required();
  metrics->add_option("--ref", mt.ref, "Reference volume")->required();
  metrics->add_option("--test", mt.test, "Test volume")->required();
  metrics->add_option("--peak", mt.peak, "PSNR peak value or 'auto' (reference max - min)");
  metrics->add_option("--labels", mt.labels, "Comma-separated labels for per-class dice");

  PhantomArgs ph;
  auto* phantom = app.add_subcommand("phantom", "Write a synthetic head-phantom map set");
  phantom->add_option("--out", ph.out, "Output directory")->required();
  phantom->add_option("--shape", ph.shape, "nx ny nz")->expected(3)->delimiter(',');
  phantom->add_option("--spacing", ph.spacing, "dx dy dz [mm]")->expected(3)->delimiter(',');
  phantom->add_option("--labels", ph.labels, "Also write the tissue label volume here");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*simulate) return cmdSimulate(sim, out);
    if (*sample) return cmdSample(smp, out);
    if (*pair) return cmdPair(pr, out);
    if (*replay) return cmdReplay(rp, out);
    if (*noise) return cmdNoise(nz, out);
    if (*metrics) return cmdMetrics(mt, out);
    if (*phantom) return cmdPhantom(ph, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const VerificationFailure& e) {
    err << "replay mismatch: " << e.what() << '\n';
    return kVerificationFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kUsageError : kIoOrValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrValidationError;
  }
  return kUsageError;
}

}  // namespace qmrisim::cli
