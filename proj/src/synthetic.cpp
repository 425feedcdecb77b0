#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "mtalk/error.hpp"
#include "mtalk/workspace.hpp"

namespace mtalk {

namespace {

constexpr int kClassesPerFile = 25;
constexpr const char* kScalarTypes[] = {"Long", "String", "Boolean", "Double"};

// Small wrapper so the output depends only on the engine, not on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }

 private:
  std::mt19937_64 engine_;
};

struct Prop {
  std::string name;
  std::string type;  // scalar name or class id
};

struct ClassInfo {
  std::string id;
  std::string metaclass;
  std::string parent;  // empty: Object
  int depth = 1;
  std::vector<Prop> own;
  std::vector<Prop> effective;  // root first
  bool declarative = false;
};

std::string scalar_value(Rng& rng, const std::string& type) {
  if (type == "Long") return std::to_string(static_cast<std::int64_t>(rng.below(100000)));
  if (type == "Double") return fmt::format("{}.{}", rng.below(1000), rng.below(100));
  if (type == "Boolean") return rng.chance(0.5) ? "true" : "false";
  return fmt::format("text-{}", rng.below(1000000));
}

bool is_scalar(const std::string& type) {
  return std::find(std::begin(kScalarTypes), std::end(kScalarTypes), type) != std::end(kScalarTypes);
}

Assignment scalar_assignment(const std::string& name, std::string text) {
  Assignment a;
  a.name = name;
  a.value.value = ScalarLiteral{std::move(text)};
  return a;
}

}  // namespace

SyntheticWorkspace generate_synthetic(const BenchmarkSpec& spec) {
  if (spec.metaclassCount < 1 || spec.classCount < spec.metaclassCount)
    throw Error(ErrorKind::InvalidArgument, "need classCount >= metaclassCount >= 1");
  if (!(spec.meanDit >= 1.0)) throw Error(ErrorKind::InvalidArgument, "meanDit must be at least 1");
  if (spec.instancesPerClass < 0) throw Error(ErrorKind::InvalidArgument, "instancesPerClass must be >= 0");
  if (spec.nativeFraction < 0 || spec.nativeFraction > 1)
    throw Error(ErrorKind::InvalidArgument, "nativeFraction must be within [0, 1]");

  Rng rng(spec.seed);
  SyntheticWorkspace ws;
  ws.manifest.sourcePath = std::string(kManifestFileName);

  // Metaclasses: a small forest under Class, each adding scalar class-level
  // properties with globally unique names.
  std::vector<BeanDecl> metaBeans;
  std::map<std::string, std::vector<Prop>> metaProps;  // effective
  std::vector<std::string> metaIds;
  for (int i = 0; i < spec.metaclassCount; ++i) {
    std::string id = fmt::format("Meta{:04}", i);
    BeanDecl b;
    b.id = ElementId{"", id};
    b.classRef = make_ref("Class", "");
    std::vector<Prop> effective;
    if (i > 0 && rng.chance(0.5)) {
      const std::string& parent = metaIds[rng.below(metaIds.size())];
      b.parentRef = make_ref(parent, "");
      effective = metaProps[parent];
    } else {
      b.parentRef = make_ref("Class", "");
    }
    b.isDeclarative = true;
    b.propertyDefs.emplace();
    int count = 1 + static_cast<int>(rng.below(2));
    for (int j = 0; j < count; ++j) {
      Prop p{fmt::format("meta{}x{}", i, j), kScalarTypes[rng.below(4)]};
      b.propertyDefs->push_back(RawPropertyDef{p.name, {}, make_ref(p.type, ""), "", {}});
      effective.push_back(p);
    }
    metaProps[id] = effective;
    metaIds.push_back(id);
    metaBeans.push_back(std::move(b));
  }
  ws.files["metaclasses.model.xml"] = write_unit("", metaBeans);

  // Model classes. Depths are chosen greedily so that the running mean
  // tracks the target, with a little noise; the parent is any existing class
  // one level up.
  const int modelCount = spec.classCount - spec.metaclassCount;
  std::vector<ClassInfo> classes;
  std::vector<std::vector<int>> byDepth(2);  // byDepth[d]: classes at depth d
  double depthSum = 0;
  for (int i = 0; i < modelCount; ++i) {
    ClassInfo c;
    c.id = fmt::format("C{:05}", i);
    c.metaclass = metaIds[rng.below(metaIds.size())];
    double want = spec.meanDit * (i + 1) - depthSum;
    int noise = static_cast<int>(rng.below(3)) - 1;
    int maxDepth = static_cast<int>(byDepth.size()) - 1;
    int depth = std::clamp(static_cast<int>(std::lround(want)) + noise, 1, maxDepth + 1);
    if (depth > 1 && byDepth[depth - 1].empty()) depth = 1;
    c.depth = depth;
    if (depth > 1) {
      const auto& pool = byDepth[depth - 1];
      const ClassInfo& parent = classes[pool[rng.below(pool.size())]];
      c.parent = parent.id;
      c.effective = parent.effective;
    }
    int ownCount = 1 + static_cast<int>(rng.below(2));
    for (int j = 0; j < ownCount; ++j) {
      Prop p{fmt::format("p{}x{}", i, j), kScalarTypes[rng.below(4)]};
      if (i > 0 && rng.chance(0.25)) p.type = classes[rng.below(classes.size())].id;
      c.own.push_back(p);
      c.effective.push_back(p);
    }
    c.declarative = !rng.chance(spec.nativeFraction);
    if (static_cast<int>(byDepth.size()) <= depth) byDepth.resize(depth + 1);
    byDepth[depth].push_back(i);
    depthSum += depth;
    classes.push_back(std::move(c));
  }

  // Instances: per class an abstract template first, later ones inherit from
  // it. Class-typed values reference an earlier concrete instance of exactly
  // that class, or are written inline when there is none yet.
  std::map<std::string, std::vector<std::string>> concreteOf;
  auto value_for = [&](const Prop& p) {
    Assignment a;
    a.name = p.name;
    if (is_scalar(p.type)) {
      a.value.value = ScalarLiteral{scalar_value(rng, p.type)};
    } else if (auto it = concreteOf.find(p.type); it != concreteOf.end() && !it->second.empty()) {
      a.value.value = Reference{make_ref(it->second[rng.below(it->second.size())], "")};
    } else {
      a.value.value = InlineBean{make_ref(p.type, ""), {}};
    }
    return a;
  };

  std::vector<BeanDecl> chunk;
  int fileIndex = 0;
  auto flush = [&] {
    if (chunk.empty()) return;
    ws.files[fmt::format("classes-{:04}.model.xml", fileIndex++)] = write_unit("", chunk);
    chunk.clear();
  };
  for (int i = 0; i < modelCount; ++i) {
    const ClassInfo& c = classes[i];
    BeanDecl b;
    b.id = ElementId{"", c.id};
    b.classRef = make_ref(c.metaclass, "");
    if (!c.parent.empty()) b.parentRef = make_ref(c.parent, "");
    b.isDeclarative = c.declarative;
    b.propertyDefs.emplace();
    for (const auto& p : c.own) b.propertyDefs->push_back(RawPropertyDef{p.name, {}, make_ref(p.type, ""), "", {}});
    for (const auto& mp : metaProps[c.metaclass])
      if (rng.chance(0.5)) b.assignments.push_back(scalar_assignment(mp.name, scalar_value(rng, mp.type)));
    chunk.push_back(std::move(b));

    if (!c.declarative) {
      NativeClassSig sig;
      sig.name = c.id;
      if (!c.parent.empty()) sig.parent = c.parent;
      for (const auto& p : c.own) sig.fields.push_back({p.name, p.type});
      ws.manifest.order.push_back(sig.name);
      ws.manifest.entries.emplace(sig.name, std::move(sig));
    }

    std::string templateId;
    for (int k = 0; k < spec.instancesPerClass; ++k) {
      BeanDecl inst;
      std::string id = fmt::format("I{:05}x{}", i, k);
      inst.id = ElementId{"", id};
      inst.classRef = make_ref(c.id, "");
      if (k == 0 && spec.instancesPerClass > 1) {
        inst.isAbstract = true;
        templateId = id;
      } else if (!templateId.empty() && rng.chance(0.7)) {
        inst.parentRef = make_ref(templateId, "");
      }
      for (const auto& p : c.effective)
        if (rng.chance(0.6)) inst.assignments.push_back(value_for(p));
      if (!inst.isAbstract) concreteOf[c.id].push_back(id);
      chunk.push_back(std::move(inst));
    }
    if ((i + 1) % kClassesPerFile == 0) flush();
  }
  flush();
  return ws;
}

void write_workspace(const SyntheticWorkspace& ws, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto write = [&](const std::filesystem::path& target, const std::string& text) {
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", target.string()));
  };
  for (const auto& [path, text] : ws.files) write(dir / path, text);
  write(dir / kManifestFileName, serialize_manifest(ws.manifest));
}

double mean_dit(const ResolvedModel& model) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& id : model.order()) {
    const auto& el = model.at(id);
    if (el.isKernel || el.kind != ElementKind::ModelClass) continue;
    sum += static_cast<double>(model.lineage_of(id).size()) - 1;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace mtalk
