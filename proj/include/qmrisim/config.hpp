#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "qmrisim/augment.hpp"
#include "qmrisim/pipeline.hpp"
#include "qmrisim/sampler.hpp"

namespace qmrisim {

/// Settings for a batch run. Fields left empty in the config file fall back
/// to command-line flags and then to library defaults.
struct RunConfig {
  std::optional<PairMode> mode;
  std::optional<DistinctPolicy> policy;
  std::optional<std::uint64_t> seed;
  std::optional<int> count;
  std::optional<int> workers;
  SamplerConfig sampler;
  AugmentationConfig augment;
  /// True when [augment] set crop_size.
  bool cropExplicit = false;
};

/// Parses a TOML run configuration with optional [run], [sampler],
/// [sampler.overrides] and [augment] tables. Unknown keys are rejected.
RunConfig parseRunConfig(const std::string& toml, const std::string& source = "<string>");
RunConfig loadRunConfig(const std::filesystem::path& path);

}  // namespace qmrisim
