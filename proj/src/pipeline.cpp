#include "qmrisim/pipeline.hpp"

#include <optional>

#include "qmrisim/parallel.hpp"

namespace qmrisim {
namespace {

// Sub-stream ids under a pair seed.
constexpr std::uint64_t kSequenceStream = 1;
constexpr std::uint64_t kPlanStreamA = 2;
constexpr std::uint64_t kPlanStreamB = 3;

// Bounded so a degenerate sampler config (all ranges collapsed) cannot spin.
constexpr int kMaxRedraws = 1000;

bool distinct(const SequenceParams& a, const SequenceParams& b, DistinctPolicy policy) {
  return policy == DistinctPolicy::Kind ? a.kind != b.kind : !(a == b);
}

}  // namespace

std::string toString(PairMode mode) {
  switch (mode) {
    case PairMode::Base: return "base";
    case PairMode::SeqAug: return "seqaug";
    case PairMode::SeqInv: return "seqinv";
  }
  return "base";
}

PairMode pairModeFromString(const std::string& name) {
  if (name == "base" || name == "Base") return PairMode::Base;
  if (name == "seqaug" || name == "SeqAug") return PairMode::SeqAug;
  if (name == "seqinv" || name == "SeqInv") return PairMode::SeqInv;
  throw Error(ErrorCode::InvalidArgument, "unknown pair mode '" + name + "'");
}

std::string toString(DistinctPolicy policy) { return policy == DistinctPolicy::Kind ? "kind" : "record"; }

DistinctPolicy distinctPolicyFromString(const std::string& name) {
  if (name == "record") return DistinctPolicy::Record;
  if (name == "kind") return DistinctPolicy::Kind;
  throw Error(ErrorCode::InvalidArgument, "unknown distinctness policy '" + name + "'");
}

ViewPair generatePair(const QMRIMaps& maps, PairMode mode, const AugmentationConfig& acfg,
                      const SamplerConfig& scfg, std::uint64_t seed, DistinctPolicy policy) {
  validateMaps(maps);
  PairManifest m;
  m.mode = mode;
  m.policy = policy;
  m.sourceId = maps.id;
  m.seed = seed;

  RngState seqRng(seed, kSequenceStream);
  switch (mode) {
    case PairMode::Base:
      m.sequences = {sampleSequence(SequenceKind::MPRAGE, scfg, seqRng)};
      m.views[0].sequenceIndex = m.views[1].sequenceIndex = 0;
      break;
    case PairMode::SeqAug:
      m.sequences = {sampleSequence(sampleKind(seqRng), scfg, seqRng)};
      m.views[0].sequenceIndex = m.views[1].sequenceIndex = 0;
      break;
    case PairMode::SeqInv: {
      const SequenceParams first = sampleSequence(sampleKind(seqRng), scfg, seqRng);
      std::optional<SequenceParams> second;
      for (int attempt = 0; attempt < kMaxRedraws && !second; ++attempt) {
        SequenceParams candidate = sampleSequence(sampleKind(seqRng), scfg, seqRng);
        if (distinct(first, candidate, policy)) second = candidate;
      }
      if (!second) {
        throw Error(ErrorCode::InvalidArgument, "sampler cannot produce two distinct sequences");
      }
      m.sequences = {first, *second};
      m.views[0].sequenceIndex = 0;
      m.views[1].sequenceIndex = 1;
      break;
    }
  }

  RngState planA(seed, kPlanStreamA);
  RngState planB(seed, kPlanStreamB);
  m.views[0].plan = makePlan(acfg, maps.grid(), planA);
  m.views[1].plan = makePlan(acfg, maps.grid(), planB);
  return regenerateFromManifest(maps, m);
}

ViewPair regenerateFromManifest(std::span<const QMRIMaps> catalog, const PairManifest& manifest) {
  for (const QMRIMaps& maps : catalog) {
    if (maps.id == manifest.sourceId) return regenerateFromManifest(maps, manifest);
  }
  throw Error(ErrorCode::MissingSource, "no map set with id '" + manifest.sourceId + "'");
}

ViewPair regenerateFromManifest(const QMRIMaps& maps, const PairManifest& manifest) {
  if (manifest.schemaVersion != kManifestSchemaVersion) {
    throw Error(ErrorCode::SchemaMismatch, "unsupported manifest schema version " +
                                               std::to_string(manifest.schemaVersion));
  }
  if (manifest.rngAlgorithm != kRngAlgorithm) {
    throw Error(ErrorCode::SchemaMismatch, "manifest generator '" + manifest.rngAlgorithm +
                                               "' differs from '" + kRngAlgorithm + "'");
  }
  if (maps.id != manifest.sourceId) {
    throw Error(ErrorCode::MissingSource, "map set '" + maps.id + "' is not the manifest source '" +
                                              manifest.sourceId + "'");
  }
  const int nseq = int(manifest.sequences.size());
  for (const ViewRecord& v : manifest.views) {
    if (v.sequenceIndex < 0 || v.sequenceIndex >= nseq) {
      throw Error(ErrorCode::Malformed, "view references sequence " + std::to_string(v.sequenceIndex));
    }
  }
  std::vector<Volume> simulated;
  simulated.reserve(manifest.sequences.size());
  for (const SequenceParams& p : manifest.sequences) simulated.push_back(simulateVolume(maps, p));

  ViewPair pair;
  pair.viewA = applyPlan(simulated[manifest.views[0].sequenceIndex], manifest.views[0].plan);
  pair.viewB = applyPlan(simulated[manifest.views[1].sequenceIndex], manifest.views[1].plan);
  pair.manifest = manifest;
  return pair;
}

std::vector<ViewPair> generateBatch(std::span<const QMRIMaps> maps, PairMode mode, const AugmentationConfig& acfg,
                                    const SamplerConfig& scfg, std::uint64_t seed, int count, int workers,
                                    DistinctPolicy policy) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "batch count must be >= 1");
  if (maps.empty()) throw Error(ErrorCode::MissingMap, "batch needs at least one map set");
  std::vector<ViewPair> out(static_cast<std::size_t>(count));
  parallelFor(count, workers, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      out[std::size_t(i)] = generatePair(maps[std::size_t(i) % maps.size()], mode, acfg, scfg,
                                         deriveSeed(seed, std::uint64_t(i)), policy);
    }
  });
  return out;
}

}  // namespace qmrisim
