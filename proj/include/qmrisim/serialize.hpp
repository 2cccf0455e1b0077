#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>

#include "qmrisim/augment.hpp"
#include "qmrisim/pipeline.hpp"
#include "qmrisim/sampler.hpp"
#include "qmrisim/signal.hpp"

// JSON records. Every reader throws Malformed on missing or mistyped fields;
// the manifest reader checks schema_version before anything else.

namespace qmrisim {

using Json = nlohmann::json;

Json toJson(const SequenceParams& p);
SequenceParams sequenceParamsFromJson(const Json& j);

Json toJson(const AugmentationStep& step);
AugmentationStep augmentationStepFromJson(const Json& j);

Json toJson(const AugmentationPlan& plan);
AugmentationPlan augmentationPlanFromJson(const Json& j);

Json toJson(const PairManifest& manifest);
PairManifest pairManifestFromJson(const Json& j);

Json toJson(const Distribution& d);
Distribution distributionFromJson(const Json& j);

void writeJsonFile(const Json& j, const std::filesystem::path& path);
Json readJsonFile(const std::filesystem::path& path);

}  // namespace qmrisim
