#include "qmrisim/serialize.hpp"

#include <fstream>

namespace qmrisim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json toJson(const Index3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Index3 index3FromJson(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::Malformed, "expected an integer triple");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

// Wraps a reader so that JSON type/key errors surface as Malformed.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Malformed, std::string(what) + ": " + e.what());
  }
}

template <typename T>
void putOptional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> getOptional(const Json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

Json toJson(const SequenceParams& p) {
  Json j = {{"kind", toString(p.kind)}, {"te", p.te}, {"tr", p.tr}};
  putOptional(j, "ti", p.ti);
  putOptional(j, "tx", p.tx);
  putOptional(j, "td", p.td);
  putOptional(j, "alpha_deg", p.alphaDeg);
  putOptional(j, "n", p.n);
  return j;
}

SequenceParams sequenceParamsFromJson(const Json& j) {
  return guarded("sequence params", [&] {
    SequenceParams p;
    p.kind = sequenceKindFromString(j.at("kind").get<std::string>());
    p.te = j.at("te").get<double>();
    p.tr = j.at("tr").get<double>();
    p.ti = getOptional<double>(j, "ti");
    p.tx = getOptional<double>(j, "tx");
    p.td = getOptional<double>(j, "td");
    p.alphaDeg = getOptional<double>(j, "alpha_deg");
    p.n = getOptional<int>(j, "n");
    return p;
  });
}

Json toJson(const AugmentationStep& step) {
  return std::visit(
      Overloaded{
          [](const CropStep& s) -> Json {
            return {{"type", "crop"}, {"origin", toJson(s.origin)}, {"size", toJson(s.size)}};
          },
          [](const FlipStep& s) -> Json {
            return {{"type", "flip"}, {"axes", Json::array({s.axes[0], s.axes[1], s.axes[2]})}};
          },
          [](const RotateStep& s) -> Json {
            return {{"type", "rotate"}, {"axis", s.axis}, {"angle_deg", s.angleDeg}};
          },
          [](const ShearStep& s) -> Json {
            Json rows = Json::array();
            for (int r = 0; r < 3; ++r) rows.push_back({s.matrix(r, 0), s.matrix(r, 1), s.matrix(r, 2)});
            return {{"type", "shear"}, {"matrix", rows}};
          },
          [](const BiasFieldStep& s) -> Json {
            return {{"type", "bias_field"},
                    {"control_shape", toJson(s.controlShape)},
                    {"control_values", s.controlValues},
                    {"amplitude", s.amplitude}};
          },
          [](const GibbsStep& s) -> Json {
            return {{"type", "gibbs"},
                    {"keep_fraction", {s.keepFraction[0], s.keepFraction[1], s.keepFraction[2]}}};
          },
          [](const RicianNoiseStep& s) -> Json {
            return {{"type", "rician_noise"}, {"sigma", s.sigma}, {"seed", s.seed}};
          },
          [](const CuboidDropoutStep& s) -> Json {
            Json list = Json::array();
            for (const Cuboid& c : s.cuboids) list.push_back({{"origin", toJson(c.origin)}, {"size", toJson(c.size)}});
            return {{"type", "cuboid_dropout"}, {"cuboids", list}};
          },
      },
      step);
}

AugmentationStep augmentationStepFromJson(const Json& j) {
  return guarded("augmentation step", [&]() -> AugmentationStep {
    const std::string type = j.at("type").get<std::string>();
    if (type == "crop") return CropStep{index3FromJson(j.at("origin")), index3FromJson(j.at("size"))};
    if (type == "flip") {
      const Json& a = j.at("axes");
      return FlipStep{{a.at(0).get<bool>(), a.at(1).get<bool>(), a.at(2).get<bool>()}};
    }
    if (type == "rotate") return RotateStep{j.at("axis").get<int>(), j.at("angle_deg").get<double>()};
    if (type == "shear") {
      ShearStep s;
      const Json& m = j.at("matrix");
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) s.matrix(r, c) = m.at(r).at(c).get<double>();
      }
      return s;
    }
    if (type == "bias_field") {
      return BiasFieldStep{index3FromJson(j.at("control_shape")),
                           j.at("control_values").get<std::vector<double>>(), j.at("amplitude").get<double>()};
    }
    if (type == "gibbs") {
      const Json& k = j.at("keep_fraction");
      return GibbsStep{Eigen::Vector3d(k.at(0).get<double>(), k.at(1).get<double>(), k.at(2).get<double>())};
    }
    if (type == "rician_noise") return RicianNoiseStep{j.at("sigma").get<double>(), j.at("seed").get<std::uint64_t>()};
    if (type == "cuboid_dropout") {
      CuboidDropoutStep s;
      for (const Json& c : j.at("cuboids")) {
        s.cuboids.push_back(Cuboid{index3FromJson(c.at("origin")), index3FromJson(c.at("size"))});
      }
      return s;
    }
    throw Error(ErrorCode::Malformed, "unknown augmentation step '" + type + "'");
  });
}

Json toJson(const AugmentationPlan& plan) {
  Json steps = Json::array();
  for (const AugmentationStep& s : plan.steps) steps.push_back(toJson(s));
  return {{"seed", plan.seed}, {"input_shape", toJson(plan.inputShape)}, {"steps", steps}};
}

AugmentationPlan augmentationPlanFromJson(const Json& j) {
  return guarded("augmentation plan", [&] {
    AugmentationPlan plan;
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.inputShape = index3FromJson(j.at("input_shape"));
    for (const Json& s : j.at("steps")) plan.steps.push_back(augmentationStepFromJson(s));
    return plan;
  });
}

Json toJson(const PairManifest& m) {
  Json sequences = Json::array();
  for (const SequenceParams& p : m.sequences) sequences.push_back(toJson(p));
  Json views = Json::array();
  const char* names[2] = {"view_a", "view_b"};
  for (int v = 0; v < 2; ++v) {
    views.push_back({{"name", names[v]},
                     {"sequence_index", m.views[v].sequenceIndex},
                     {"plan", toJson(m.views[v].plan)}});
  }
  return {{"schema_version", m.schemaVersion},
          {"rng_algorithm", m.rngAlgorithm},
          {"mode", toString(m.mode)},
          {"distinct_policy", toString(m.policy)},
          {"source_id", m.sourceId},
          {"seed", m.seed},
          {"sequences", sequences},
          {"views", views}};
}

PairManifest pairManifestFromJson(const Json& j) {
  const int version = guarded("manifest", [&] { return j.at("schema_version").get<int>(); });
  if (version != kManifestSchemaVersion) {
    throw Error(ErrorCode::SchemaMismatch, "unsupported manifest schema version " + std::to_string(version));
  }
  return guarded("manifest", [&] {
    PairManifest m;
    m.schemaVersion = version;
    m.rngAlgorithm = j.at("rng_algorithm").get<std::string>();
    m.mode = pairModeFromString(j.at("mode").get<std::string>());
    m.policy = distinctPolicyFromString(j.at("distinct_policy").get<std::string>());
    m.sourceId = j.at("source_id").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const Json& s : j.at("sequences")) m.sequences.push_back(sequenceParamsFromJson(s));
    const Json& views = j.at("views");
    if (!views.is_array() || views.size() != 2) throw Error(ErrorCode::Malformed, "manifest needs two views");
    for (int v = 0; v < 2; ++v) {
      m.views[v].sequenceIndex = views[v].at("sequence_index").get<int>();
      m.views[v].plan = augmentationPlanFromJson(views[v].at("plan"));
    }
    return m;
  });
}

Json toJson(const Distribution& d) {
  const char* law = d.law == Distribution::Law::Uniform      ? "uniform"
                    : d.law == Distribution::Law::LogUniform ? "loguniform"
                                                             : "reflected_normal";
  return {{"law", law}, {"a", d.a}, {"b", d.b}};
}

Distribution distributionFromJson(const Json& j) {
  return guarded("distribution", [&] {
    Distribution d;
    const std::string law = j.at("law").get<std::string>();
    if (law == "uniform") {
      d.law = Distribution::Law::Uniform;
    } else if (law == "loguniform") {
      d.law = Distribution::Law::LogUniform;
    } else if (law == "reflected_normal") {
      d.law = Distribution::Law::ReflectedNormal;
    } else {
      throw Error(ErrorCode::Malformed, "unknown sampling law '" + law + "'");
    }
    d.a = j.at("a").get<double>();
    d.b = j.at("b").get<double>();
    return d;
  });
}

void writeJsonFile(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

Json readJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Malformed, path.string() + ": " + e.what());
  }
}

}  // namespace qmrisim
