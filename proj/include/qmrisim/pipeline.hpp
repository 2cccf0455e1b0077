#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qmrisim/augment.hpp"
#include "qmrisim/maps.hpp"
#include "qmrisim/sampler.hpp"
#include "qmrisim/signal.hpp"

namespace qmrisim {

inline constexpr int kManifestSchemaVersion = 1;

/// Base: two augmentations of one MPRAGE simulation.
/// SeqAug: two augmentations of one simulation of a random sequence.
/// SeqInv: two independently sampled sequences, one augmentation each.
enum class PairMode { Base, SeqAug, SeqInv };

/// What "different sequence" means for SeqInv: the full (kind, params)
/// record, or the kind alone.
enum class DistinctPolicy { Record, Kind };

std::string toString(PairMode mode);
PairMode pairModeFromString(const std::string& name);
std::string toString(DistinctPolicy policy);
DistinctPolicy distinctPolicyFromString(const std::string& name);

struct ViewRecord {
  int sequenceIndex = 0;
  AugmentationPlan plan;
  bool operator==(const ViewRecord&) const = default;
};

/// Everything needed to rebuild a view pair bit-exactly from its source maps.
struct PairManifest {
  int schemaVersion = kManifestSchemaVersion;
  std::string rngAlgorithm = kRngAlgorithm;
  PairMode mode = PairMode::Base;
  DistinctPolicy policy = DistinctPolicy::Record;
  std::string sourceId;
  std::uint64_t seed = 0;
  std::vector<SequenceParams> sequences;
  std::array<ViewRecord, 2> views;

  bool operator==(const PairManifest&) const = default;
};

struct ViewPair {
  Volume viewA;
  Volume viewB;
  PairManifest manifest;
};

ViewPair generatePair(const QMRIMaps& maps, PairMode mode, const AugmentationConfig& acfg,
                      const SamplerConfig& scfg, std::uint64_t seed,
                      DistinctPolicy policy = DistinctPolicy::Record);

/// Throws SchemaMismatch for an unsupported schema version and MissingSource
/// when no map set carries the manifest's source id.
ViewPair regenerateFromManifest(std::span<const QMRIMaps> catalog, const PairManifest& manifest);
ViewPair regenerateFromManifest(const QMRIMaps& maps, const PairManifest& manifest);

/// Pair i uses maps[i % maps.size()] and seed deriveSeed(seed, i). Output is
/// in index order and independent of `workers`.
std::vector<ViewPair> generateBatch(std::span<const QMRIMaps> maps, PairMode mode, const AugmentationConfig& acfg,
                                    const SamplerConfig& scfg, std::uint64_t seed, int count, int workers = 1,
                                    DistinctPolicy policy = DistinctPolicy::Record);

}  // namespace qmrisim
