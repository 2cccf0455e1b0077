#include "qmrisim/config.hpp"

#include <tomlplusplus/toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace qmrisim {
namespace {

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw Error(ErrorCode::Malformed, source + ": " + what);
}

void rejectUnknown(const toml::table& table, const std::set<std::string>& known, const std::string& where,
                   const std::string& source) {
  for (const auto& [key, node] : table) {
    if (!known.contains(std::string(key.str()))) fail(source, "unknown key '" + std::string(key.str()) + "' in " + where);
  }
}

double number(const toml::node& node, const std::string& key, const std::string& source) {
  if (auto v = node.value<double>()) return *v;
  fail(source, "'" + key + "' must be a number");
}

std::int64_t integer(const toml::node& node, const std::string& key, const std::string& source) {
  if (auto v = node.value<std::int64_t>()) return *v;
  fail(source, "'" + key + "' must be an integer");
}

std::string string(const toml::node& node, const std::string& key, const std::string& source) {
  if (auto v = node.value<std::string>()) return *v;
  fail(source, "'" + key + "' must be a string");
}

template <typename Vec>
Vec triple(const toml::node& node, const std::string& key, const std::string& source) {
  const toml::array* arr = node.as_array();
  if (!arr || arr->size() != 3) fail(source, "'" + key + "' must be an array of three values");
  Vec out;
  for (int d = 0; d < 3; ++d) {
    if constexpr (std::is_same_v<typename Vec::Scalar, int>) {
      out[d] = int(integer(*arr->get(d), key, source));
    } else {
      out[d] = number(*arr->get(d), key, source);
    }
  }
  return out;
}

// [lo, hi] pairs.
template <typename T>
std::pair<T, T> range(const toml::node& node, const std::string& key, const std::string& source) {
  const toml::array* arr = node.as_array();
  if (!arr || arr->size() != 2) fail(source, "'" + key + "' must be a [min, max] pair");
  if constexpr (std::is_integral_v<T>) {
    return {T(integer(*arr->get(0), key, source)), T(integer(*arr->get(1), key, source))};
  } else {
    return {number(*arr->get(0), key, source), number(*arr->get(1), key, source)};
  }
}

void parseRun(const toml::table& t, RunConfig& cfg, const std::string& source) {
  rejectUnknown(t, {"mode", "distinct_policy", "seed", "count", "workers"}, "[run]", source);
  if (auto n = t.get("mode")) cfg.mode = pairModeFromString(string(*n, "mode", source));
  if (auto n = t.get("distinct_policy")) cfg.policy = distinctPolicyFromString(string(*n, "distinct_policy", source));
  if (auto n = t.get("seed")) {
    const std::int64_t seed = integer(*n, "seed", source);
    if (seed < 0) fail(source, "'seed' must be non-negative");
    cfg.seed = std::uint64_t(seed);
  }
  if (auto n = t.get("count")) cfg.count = int(integer(*n, "count", source));
  if (auto n = t.get("workers")) cfg.workers = int(integer(*n, "workers", source));
}

void parseSampler(const toml::table& t, SamplerConfig& s, const std::string& source) {
  rejectUnknown(t, {"mprage_n", "alpha_max_deg", "overrides"}, "[sampler]", source);
  if (auto n = t.get("mprage_n")) s.mprageN = int(integer(*n, "mprage_n", source));
  if (auto n = t.get("alpha_max_deg")) s.alphaMaxDeg = number(*n, "alpha_max_deg", source);
  if (auto n = t.get("overrides")) {
    const toml::table* overrides = n->as_table();
    if (!overrides) fail(source, "[sampler.overrides] must be a table");
    for (const auto& [key, node] : *overrides) {
      const std::string name(key.str());
      const toml::table* entry = node.as_table();
      if (!entry) fail(source, "override '" + name + "' must be a table {law, a, b}");
      rejectUnknown(*entry, {"law", "a", "b"}, "override '" + name + "'", source);
      Distribution d;
      const std::string law = entry->get("law") ? string(*entry->get("law"), "law", source) : "";
      if (law == "uniform") {
        d.law = Distribution::Law::Uniform;
      } else if (law == "loguniform") {
        d.law = Distribution::Law::LogUniform;
      } else if (law == "reflected_normal") {
        d.law = Distribution::Law::ReflectedNormal;
      } else {
        fail(source, "override '" + name + "' needs law = uniform | loguniform | reflected_normal");
      }
      if (!entry->get("a") || !entry->get("b")) fail(source, "override '" + name + "' needs a and b");
      d.a = number(*entry->get("a"), "a", source);
      d.b = number(*entry->get("b"), "b", source);
      s.overrides[name] = d;
    }
  }
}

void parseAugment(const toml::table& t, AugmentationConfig& a, const std::string& source) {
  rejectUnknown(t,
                {"crop_size", "rotate_prob", "rotate_max_deg", "shear_prob", "shear_max", "flip_prob", "bias_prob",
                 "bias_amplitude", "bias_control_points", "gibbs_prob", "gibbs_keep_range", "noise_prob",
                 "noise_sigma_range", "dropout_prob", "dropout_count_range", "dropout_size_range"},
                "[augment]", source);
  auto num = [&](const char* key, double& out) {
    if (auto n = t.get(key)) out = number(*n, key, source);
  };
  if (auto n = t.get("crop_size")) a.cropSize = triple<Index3>(*n, "crop_size", source);
  num("rotate_prob", a.rotateProb);
  num("rotate_max_deg", a.rotateMaxDeg);
  num("shear_prob", a.shearProb);
  num("shear_max", a.shearMax);
  if (auto n = t.get("flip_prob")) {
    if (n->is_array()) {
      a.flipProb = triple<Eigen::Vector3d>(*n, "flip_prob", source);
    } else {
      a.flipProb.setConstant(number(*n, "flip_prob", source));
    }
  }
  num("bias_prob", a.biasProb);
  num("bias_amplitude", a.biasAmplitude);
  if (auto n = t.get("bias_control_points")) a.biasControlPoints = triple<Index3>(*n, "bias_control_points", source);
  num("gibbs_prob", a.gibbsProb);
  if (auto n = t.get("gibbs_keep_range")) std::tie(a.gibbsKeepMin, a.gibbsKeepMax) = range<double>(*n, "gibbs_keep_range", source);
  num("noise_prob", a.noiseProb);
  if (auto n = t.get("noise_sigma_range")) std::tie(a.noiseSigmaMin, a.noiseSigmaMax) = range<double>(*n, "noise_sigma_range", source);
  num("dropout_prob", a.dropoutProb);
  if (auto n = t.get("dropout_count_range")) std::tie(a.dropoutCountMin, a.dropoutCountMax) = range<int>(*n, "dropout_count_range", source);
  if (auto n = t.get("dropout_size_range")) std::tie(a.dropoutSizeMin, a.dropoutSizeMax) = range<int>(*n, "dropout_size_range", source);
}

}  // namespace

RunConfig parseRunConfig(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at " << e.source().begin;
    fail(source, msg.str());
  }
  rejectUnknown(root, {"run", "sampler", "augment"}, "top level", source);
  RunConfig cfg;
  auto section = [&](const char* name) -> const toml::table* {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) fail(source, std::string("[") + name + "] must be a table");
    return n->as_table();
  };
  if (auto t = section("run")) parseRun(*t, cfg, source);
  if (auto t = section("sampler")) parseSampler(*t, cfg.sampler, source);
  if (auto t = section("augment")) {
    parseAugment(*t, cfg.augment, source);
    cfg.cropExplicit = t->contains("crop_size");
  }
  cfg.sampler.validate();
  cfg.augment.validate();
  if (cfg.count && *cfg.count < 1) fail(source, "'count' must be >= 1");
  if (cfg.workers && *cfg.workers < 1) fail(source, "'workers' must be >= 1");
  return cfg;
}

RunConfig loadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parseRunConfig(buffer.str(), path.string());
}

}  // namespace qmrisim
