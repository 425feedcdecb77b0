#include "mtalk/vm.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mtalk/error.hpp"

namespace mtalk {

const RuntimeValue* RuntimeInstance::value(std::string_view name) const {
  for (const auto& [n, v] : values)
    if (n == name) return &v;
  return nullptr;
}

struct ModelVm::Snapshot {
  CompiledModel compiled;
  const NativeRegistry* registry = nullptr;

  mutable std::mutex cacheMutex;
  mutable std::map<ElementId, InstancePtr> instances;
  mutable std::map<ElementId, InstancePtr> metaViews;

  const ResolvedModel& model() const { return *compiled.resolved; }

  std::optional<std::string> resolve_native(const ElementId& classId) const;
  std::map<std::string, ValueExpr> effective_values(const ElementId& beanId) const;
  InstancePtr instance(const ElementId& beanId) const;
  InstancePtr meta_view(const ElementId& classId) const;

  RuntimeValue convert(const ValueExpr& v, const PropertyDefinition& def, const ElementId& owner) const;
  std::shared_ptr<RuntimeInstance> build(const ElementId& classId,
                                         const std::map<std::string, ValueExpr>& assigned,
                                         const ElementId& owner) const;
  void attach_native(RuntimeInstance& inst) const;
};

std::optional<std::string> ModelVm::Snapshot::resolve_native(const ElementId& classId) const {
  const auto* manifest = compiled.manifest.get();
  if (!manifest) return std::nullopt;
  for (const auto& c : model().lineage_of(classId)) {
    const auto* def = model().class_def(c);
    if (!def || def->isDeclarative || model().at(c).isKernel) continue;
    if (manifest->find(c.local)) return c.local;
  }
  return std::nullopt;
}

std::map<std::string, ValueExpr> ModelVm::Snapshot::effective_values(const ElementId& beanId) const {
  const ResolvedElement* el = model().find(beanId);
  if (!el) throw Error(ErrorKind::NotFound, fmt::format("no bean '{}'", beanId.str()));
  std::map<std::string, ValueExpr> out;
  std::set<ElementId> seen;
  for (const ResolvedElement* cur = el; cur;) {
    if (!seen.insert(cur->decl.id).second) break;
    for (const auto& a : cur->decl.assignments) out.emplace(a.name, a.value);
    if (cur->kind != ElementKind::Instance || !cur->parentRef) break;
    cur = model().find(*cur->parentRef);
  }
  return out;
}

RuntimeValue ModelVm::Snapshot::convert(const ValueExpr& v, const PropertyDefinition& def,
                                        const ElementId& owner) const {
  const TypeRef& type = def.type;
  auto fail = [&](const std::string& why) {
    return Error(ErrorKind::Instantiation,
                 fmt::format("cannot inject '{}' into {}: {}", def.name, owner.str(), why));
  };
  if (type.isScalar()) {
    const auto* s = v.scalar();
    if (!s) throw fail("expected a scalar");
    switch (type.scalar) {
      case BuiltinScalar::String: return s->text;
      case BuiltinScalar::Long: {
        std::int64_t x;
        if (!lex_long(s->text, &x)) throw fail(fmt::format("'{}' is not a 64-bit integer", s->text));
        return x;
      }
      case BuiltinScalar::Double: {
        double x;
        if (!lex_double(s->text, &x)) throw fail(fmt::format("'{}' is not a finite double", s->text));
        return x;
      }
      case BuiltinScalar::Boolean: {
        bool x;
        if (!lex_boolean(s->text, &x)) throw fail(fmt::format("'{}' is not a boolean", s->text));
        return x;
      }
    }
  }
  if (const auto* r = v.reference()) {
    auto target = model().lookup(r->target);
    if (!target) throw fail(fmt::format("unresolved reference '{}'", r->target.text));
    if (model().at(*target).kind == ElementKind::Instance) return instance(*target);
    return meta_view(*target);
  }
  if (const auto* b = v.inlineBean()) {
    auto cls = model().lookup(b->classRef);
    if (!cls) throw fail(fmt::format("unresolved class '{}'", b->classRef.text));
    std::map<std::string, ValueExpr> assigned;
    for (const auto& a : b->assignments) assigned.emplace(a.name, a.value);
    auto inst = build(*cls, assigned, owner);
    attach_native(*inst);
    return InstancePtr(std::move(inst));
  }
  throw fail("unsupported value");
}

std::shared_ptr<RuntimeInstance> ModelVm::Snapshot::build(const ElementId& classId,
                                                          const std::map<std::string, ValueExpr>& assigned,
                                                          const ElementId& owner) const {
  auto inst = std::make_shared<RuntimeInstance>();
  inst->classId = classId;
  inst->nativeBinding = resolve_native(classId);
  for (const auto& def : model().effective_properties_of(classId)) {
    auto it = assigned.find(def.name);
    if (it == assigned.end()) continue;
    inst->values.emplace_back(def.name, convert(it->second, def, owner));
  }
  return inst;
}

void ModelVm::Snapshot::attach_native(RuntimeInstance& inst) const {
  if (!inst.nativeBinding || !registry) return;
  if (const NativeFactory* f = registry->find(*inst.nativeBinding)) inst.native = (*f)(inst);
}

InstancePtr ModelVm::Snapshot::instance(const ElementId& beanId) const {
  {
    std::lock_guard lock(cacheMutex);
    if (auto it = instances.find(beanId); it != instances.end()) return it->second;
  }
  const ResolvedElement* el = model().find(beanId);
  if (!el) throw Error(ErrorKind::NotFound, fmt::format("no bean '{}'", beanId.str()));
  if (el->kind != ElementKind::Instance)
    throw Error(ErrorKind::WrongKind,
                fmt::format("'{}' is a {}, not an instance", beanId.str(), to_string(el->kind)));
  if (el->decl.isAbstract)
    throw Error(ErrorKind::AbstractInstantiation,
                fmt::format("{}: '{}' is abstract and cannot be instantiated", codes::AbstractInstantiation,
                            beanId.str()));
  auto inst = build(*el->classRef, effective_values(beanId), beanId);
  attach_native(*inst);
  std::lock_guard lock(cacheMutex);
  // Another thread may have won the race; everyone shares the first one.
  return instances.emplace(beanId, std::move(inst)).first->second;
}

InstancePtr ModelVm::Snapshot::meta_view(const ElementId& classId) const {
  {
    std::lock_guard lock(cacheMutex);
    if (auto it = metaViews.find(classId); it != metaViews.end()) return it->second;
  }
  const ResolvedElement* el = model().find(classId);
  if (!el) throw Error(ErrorKind::NotFound, fmt::format("no class '{}'", classId.str()));
  if (el->kind == ElementKind::Instance)
    throw Error(ErrorKind::WrongKind, fmt::format("'{}' is an instance, not a class", classId.str()));
  const ElementId& metaclass = *el->classRef;
  // Class-level values: the nearest class in the subclass chain that assigns
  // a name supplies it.
  std::map<std::string, ValueExpr> assigned;
  for (const auto& c : model().lineage_of(classId))
    for (const auto& a : model().class_def(c)->classLevelAssignments) assigned.emplace(a.name, a.value);
  auto view = build(metaclass, assigned, classId);
  view->reifies = classId;
  attach_native(*view);
  std::lock_guard lock(cacheMutex);
  return metaViews.emplace(classId, std::move(view)).first->second;
}

ModelVm::ModelVm(CompiledModel compiled, NativeRegistry registry) : registry_(std::move(registry)) {
  if (!compiled.resolved || !compiled.errorFree)
    throw Error(ErrorKind::Refused, "the model has errors and cannot be loaded");
  current_ = std::make_shared<Snapshot>();
  current_->compiled = std::move(compiled);
  current_->registry = &registry_;
}

ModelVm::~ModelVm() = default;

std::shared_ptr<ModelVm::Snapshot> ModelVm::snapshot() const {
  std::lock_guard lock(mutex_);
  return current_;
}

std::map<std::string, ValueExpr> ModelVm::effective_values(const ElementId& beanId) const {
  return snapshot()->effective_values(beanId);
}

InstancePtr ModelVm::get_instance(const ElementId& beanId) const { return snapshot()->instance(beanId); }

std::optional<std::string> ModelVm::resolve_native(const ElementId& classId) const {
  auto snap = snapshot();
  const ResolvedElement* el = snap->model().find(classId);
  if (!el) throw Error(ErrorKind::NotFound, fmt::format("no class '{}'", classId.str()));
  if (el->kind == ElementKind::Instance)
    throw Error(ErrorKind::WrongKind, fmt::format("'{}' is an instance, not a class", classId.str()));
  return snap->resolve_native(classId);
}

InstancePtr ModelVm::get_class(const RuntimeInstance& instance) const {
  if (instance.reifies) return get_class(instance.classId);
  return get_class(instance.classId);
}

InstancePtr ModelVm::get_class(const ElementId& classId) const { return snapshot()->meta_view(classId); }

bool ModelVm::is_instance_of(const RuntimeInstance& instance, const ElementId& classId) const {
  const auto& chain = snapshot()->model().lineage_of(instance.classId);
  return std::find(chain.begin(), chain.end(), classId) != chain.end();
}

std::vector<PropertyDefinition> ModelVm::reflect_properties(const ElementId& classId) const {
  return effective_properties(snapshot()->model(), classId);
}

void ModelVm::reload(CompiledModel next) {
  if (!next.resolved || !next.errorFree)
    throw Error(ErrorKind::Refused, "reload refused: the new model has errors");
  auto snap = std::make_shared<Snapshot>();
  snap->compiled = std::move(next);
  snap->registry = &registry_;
  std::lock_guard lock(mutex_);
  current_ = std::move(snap);
  ++generation_;
}

CompiledModel ModelVm::current() const { return snapshot()->compiled; }

std::uint64_t ModelVm::generation() const {
  std::lock_guard lock(mutex_);
  return generation_;
}

std::vector<std::string> ModelVm::audit(const RuntimeInstance& instance) const {
  auto snap = snapshot();
  const ResolvedModel& m = snap->model();
  std::vector<std::string> problems;
  std::set<const RuntimeInstance*> visited;
  auto walk = [&](auto&& self, const RuntimeInstance& inst) -> void {
    if (!visited.insert(&inst).second) return;
    for (const auto& [name, value] : inst.values) {
      const PropertyDefinition* def = m.effective_property(inst.classId, name);
      if (!def) {
        problems.push_back(fmt::format("{}: '{}' is not a property of the class", inst.classId.str(), name));
        continue;
      }
      TypeRef actual;
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::int64_t>) actual = TypeRef::of(BuiltinScalar::Long);
            else if constexpr (std::is_same_v<T, double>) actual = TypeRef::of(BuiltinScalar::Double);
            else if constexpr (std::is_same_v<T, bool>) actual = TypeRef::of(BuiltinScalar::Boolean);
            else if constexpr (std::is_same_v<T, std::string>) actual = TypeRef::of(BuiltinScalar::String);
            else actual = TypeRef::of(x->classId);
          },
          value);
      if (!conforms(m, actual, def->type))
        problems.push_back(fmt::format("{}.{}: {} does not conform to {}", inst.classId.str(), name,
                                       actual.render(), def->type.render()));
      if (const auto* child = std::get_if<InstancePtr>(&value); child && *child) self(self, **child);
    }
  };
  walk(walk, instance);
  return problems;
}

namespace {

nlohmann::ordered_json dump_value(const RuntimeInstance& inst);

nlohmann::ordered_json dump_value(const RuntimeValue& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, InstancePtr>) return dump_value(*x);
        else return x;
      },
      v);
}

nlohmann::ordered_json dump_value(const RuntimeInstance& inst) {
  nlohmann::ordered_json j;
  j["class"] = inst.classId.str();
  j["native"] = inst.nativeBinding ? nlohmann::ordered_json(*inst.nativeBinding) : nlohmann::ordered_json();
  auto values = nlohmann::ordered_json::object();
  for (const auto& [name, v] : inst.values) values[name] = dump_value(v);
  j["values"] = std::move(values);
  return j;
}

}  // namespace

std::string dump_instance(const RuntimeInstance& instance, int indent) {
  return dump_value(instance).dump(indent);
}

}  // namespace mtalk
