#include "mtalk/kernel.hpp"

#include <algorithm>
#include <functional>

#include <fmt/format.h>

#include "mtalk/error.hpp"
#include "mtalk/hash.hpp"

namespace mtalk {

std::string_view to_string(BuiltinScalar s) {
  switch (s) {
    case BuiltinScalar::String: return "String";
    case BuiltinScalar::Long: return "Long";
    case BuiltinScalar::Boolean: return "Boolean";
    case BuiltinScalar::Double: return "Double";
  }
  return "String";
}

std::optional<BuiltinScalar> builtin_scalar(std::string_view name) {
  if (name == "String") return BuiltinScalar::String;
  if (name == "Long") return BuiltinScalar::Long;
  if (name == "Boolean") return BuiltinScalar::Boolean;
  if (name == "Double") return BuiltinScalar::Double;
  return std::nullopt;
}

std::string_view to_string(ElementKind k) {
  switch (k) {
    case ElementKind::Metaclass: return "metaclass";
    case ElementKind::ModelClass: return "class";
    case ElementKind::Instance: return "instance";
  }
  return "instance";
}

TypeRef TypeRef::of(BuiltinScalar s) {
  TypeRef t;
  t.kind = Kind::Scalar;
  t.scalar = s;
  t.text = std::string(to_string(s));
  return t;
}

TypeRef TypeRef::of(ElementId cls) {
  TypeRef t;
  t.kind = Kind::Class;
  t.text = cls.str();
  t.cls = std::move(cls);
  return t;
}

std::string TypeRef::render() const {
  switch (kind) {
    case Kind::Scalar: return std::string(to_string(scalar));
    case Kind::Class: return cls.str();
    case Kind::Unresolved: return text;
  }
  return text;
}

std::string_view kernel_source() {
  return R"(<model>
  <bean id="Object" class="Class" declarative="true"/>
  <bean id="Class" class="Class" parent="Object" declarative="true"/>
</model>
)";
}

// ---------------------------------------------------------------------------
// ResolvedModel queries

const ResolvedElement* ResolvedModel::find(const ElementId& id) const {
  auto it = elements_.find(id);
  return it == elements_.end() ? nullptr : &it->second;
}

const ResolvedElement& ResolvedModel::at(const ElementId& id) const {
  if (const auto* el = find(id)) return *el;
  throw Error(ErrorKind::NotFound, fmt::format("unknown element '{}'", id.str()));
}

const ClassDef* ResolvedModel::class_def(const ElementId& id) const {
  auto it = classes_.find(id);
  return it == classes_.end() ? nullptr : &it->second;
}

std::optional<ElementId> ResolvedModel::lookup(const NameRef& ref) const {
  if (elements_.count(ref.id)) return ref.id;
  if (!ref.qualified && !ref.id.ns.empty()) {
    ElementId global{"", ref.id.local};
    if (elements_.count(global)) return global;
  }
  return std::nullopt;
}

TypeRef ResolvedModel::resolve_type(const NameRef& ref) const {
  if (!ref.qualified) {
    if (auto s = builtin_scalar(ref.id.local)) return TypeRef::of(*s);
  }
  if (auto id = lookup(ref)) {
    const auto& el = elements_.at(*id);
    if (el.kind != ElementKind::Instance) return TypeRef::of(*id);
  }
  TypeRef t;
  t.kind = TypeRef::Kind::Unresolved;
  t.text = ref.text;
  return t;
}

const std::vector<ElementId>& ResolvedModel::lineage_of(const ElementId& classId) const {
  static const std::vector<ElementId> empty;
  auto it = lineages_.find(classId);
  return it == lineages_.end() ? empty : it->second;
}

bool ResolvedModel::lineage_has_cycle(const ElementId& classId) const {
  return cyclicLineages_.count(classId) > 0;
}

bool ResolvedModel::parent_chain_has_cycle(const ElementId& id) const {
  return cyclicParentChains_.count(id) > 0;
}

const std::vector<PropertyDefinition>& ResolvedModel::effective_properties_of(
    const ElementId& classId) const {
  static const std::vector<PropertyDefinition> empty;
  auto it = effective_.find(classId);
  return it == effective_.end() ? empty : it->second;
}

const PropertyDefinition* ResolvedModel::effective_property(const ElementId& classId,
                                                            std::string_view name) const {
  for (const auto& p : effective_properties_of(classId))
    if (p.name == name) return &p;
  return nullptr;
}

std::optional<ElementId> ResolvedModel::construction_cycle(const ElementId& id) const {
  auto it = constructionCycles_.find(id);
  if (it == constructionCycles_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// ModelBuilder

namespace {

const SourceUnit& kernel_unit() {
  static const SourceUnit unit = parse_unit(kernel_source(), std::string(kKernelPath));
  return unit;
}

void collect_refs(const std::vector<Assignment>& list, std::vector<const NameRef*>& out) {
  for (const auto& a : list) {
    if (const auto* r = a.value.reference()) out.push_back(&r->target);
    else if (const auto* b = a.value.inlineBean()) collect_refs(b->assignments, out);
  }
}

}  // namespace

class ModelBuilder {
 public:
  explicit ModelBuilder(ResolvedModel& m) : m_(m) {}

  void add_unit(const SourceUnit& unit, bool isKernel);
  void finish();

 private:
  void resolve_refs();
  void classify_all();
  void build_classes();
  void build_lineages();
  void build_effective();
  void find_parent_cycles();
  void find_construction_cycles();

  ResolvedModel& m_;
};

void ModelBuilder::add_unit(const SourceUnit& unit, bool isKernel) {
  m_.sourceHash_ = hash_combine(hash_combine(m_.sourceHash_, fnv1a(unit.path)), unit.contentHash);
  for (const auto& bean : unit.beans) {
    if (!isKernel && builtin_scalar(bean.id.local)) {
      m_.declarationDiags_.push_back(make_error(
          codes::ReservedName,
          fmt::format("'{}' is a reserved scalar type name", bean.id.local), bean.idSpan, bean.id));
      continue;
    }
    if (const auto* first = m_.find(bean.id)) {
      const auto& s = first->decl.span;
      m_.declarationDiags_.push_back(make_error(
          codes::DuplicateId,
          fmt::format("duplicate bean id '{}' (first declared at {}:{}:{})", bean.id.str(), s.path,
                      s.line, s.column),
          bean.idSpan, bean.id));
      continue;
    }
    ResolvedElement el;
    el.decl = bean;
    el.unitPath = unit.path;
    el.isKernel = isKernel;
    m_.elements_.emplace(bean.id, std::move(el));
    m_.order_.push_back(bean.id);
    if (isKernel) m_.kernelIds_.insert(bean.id);
  }
}

void ModelBuilder::resolve_refs() {
  for (auto& [id, el] : m_.elements_) {
    el.classRef = m_.lookup(el.decl.classRef);
    if (el.decl.parentRef) el.parentRef = m_.lookup(*el.decl.parentRef);
  }
}

void ModelBuilder::classify_all() {
  // isMeta: the parent chain reaches Class.
  std::unordered_map<ElementId, bool, ElementIdHash> memo;
  for (const auto& id : m_.order_) {
    std::vector<ElementId> path;
    std::set<ElementId> onPath;
    ElementId cur = id;
    bool result = false;
    while (true) {
      if (auto it = memo.find(cur); it != memo.end()) {
        result = it->second;
        break;
      }
      if (cur == kClassId) {
        result = true;
        break;
      }
      if (!onPath.insert(cur).second) break;
      path.push_back(cur);
      const auto& el = m_.elements_.at(cur);
      if (!el.parentRef) break;
      cur = *el.parentRef;
    }
    for (const auto& p : path) memo[p] = result;
    if (id == kClassId) memo[id] = true;
  }
  for (auto& [id, el] : m_.elements_) {
    if (memo[id]) el.kind = ElementKind::Metaclass;
    else if (el.classRef && memo[*el.classRef]) el.kind = ElementKind::ModelClass;
    else el.kind = ElementKind::Instance;
  }
}

void ModelBuilder::build_classes() {
  for (const auto& id : m_.order_) {
    const auto& el = m_.elements_.at(id);
    if (el.kind == ElementKind::Instance) continue;
    ClassDef def;
    def.id = id;
    def.metaclass = el.classRef.value_or(el.decl.classRef.id);
    if (el.decl.parentRef) def.parent = el.parentRef;
    else if (id != kObjectId) def.parent = kObjectId;
    if (el.decl.propertyDefs) {
      for (const auto& raw : *el.decl.propertyDefs) {
        def.ownProperties.push_back(PropertyDefinition{raw.name, m_.resolve_type(raw.typeRef),
                                                       raw.description, id, raw.span});
      }
    }
    def.classLevelAssignments = el.decl.assignments;
    def.isDeclarative = el.decl.isDeclarative;
    def.isAbstract = el.decl.isAbstract;
    m_.classes_.emplace(id, std::move(def));
  }
}

void ModelBuilder::build_lineages() {
  for (const auto& [id, def] : m_.classes_) {
    std::vector<ElementId> chain;
    std::set<ElementId> seen;
    ElementId cur = id;
    while (true) {
      chain.push_back(cur);
      seen.insert(cur);
      const ClassDef* c = m_.class_def(cur);
      if (!c || !c->parent || !m_.class_def(*c->parent)) break;
      if (seen.count(*c->parent)) {
        m_.cyclicLineages_.insert(id);
        break;
      }
      cur = *c->parent;
    }
    m_.lineages_.emplace(id, std::move(chain));
  }
}

void ModelBuilder::build_effective() {
  for (const auto& [id, def] : m_.classes_) {
    const auto& chain = m_.lineages_.at(id);
    std::vector<PropertyDefinition> props;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      for (const auto& p : m_.classes_.at(*it).ownProperties) {
        auto existing = std::find_if(props.begin(), props.end(),
                                     [&](const PropertyDefinition& q) { return q.name == p.name; });
        if (existing != props.end()) *existing = p;
        else props.push_back(p);
      }
    }
    m_.effective_.emplace(id, std::move(props));
  }
}

void ModelBuilder::find_parent_cycles() {
  // 0 = unknown, 1 = in progress, 2 = acyclic, 3 = cyclic
  std::unordered_map<ElementId, int, ElementIdHash> state;
  for (const auto& id : m_.order_) {
    std::vector<ElementId> path;
    ElementId cur = id;
    int verdict = 2;
    while (true) {
      int& s = state[cur];
      if (s == 2 || s == 3) {
        verdict = s;
        break;
      }
      if (s == 1) {
        verdict = 3;
        break;
      }
      s = 1;
      path.push_back(cur);
      const auto& el = m_.elements_.at(cur);
      if (!el.parentRef) break;
      cur = *el.parentRef;
    }
    for (const auto& p : path) {
      state[p] = verdict;
      if (verdict == 3) m_.cyclicParentChains_.insert(p);
    }
  }
}

void ModelBuilder::find_construction_cycles() {
  // Nodes are elements; an edge X -> Y means building X at runtime builds Y
  // first. Value edges come from references, structural edges from parent
  // beans and superclasses (whose values are merged in).
  const auto& order = m_.order_;
  const std::size_t n = order.size();
  std::unordered_map<ElementId, std::size_t, ElementIdHash> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(order[i], i);

  struct Edge {
    std::size_t to;
    bool value;
  };
  std::vector<std::vector<Edge>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& el = m_.elements_.at(order[i]);
    std::vector<const NameRef*> refs;
    collect_refs(el.decl.assignments, refs);
    for (const NameRef* r : refs) {
      if (auto t = m_.lookup(*r)) adj[i].push_back({index.at(*t), true});
    }
    if (el.kind == ElementKind::Instance) {
      if (el.parentRef) adj[i].push_back({index.at(*el.parentRef), false});
    } else if (const ClassDef* c = m_.class_def(order[i]); c && c->parent && index.count(*c->parent)) {
      adj[i].push_back({index.at(*c->parent), false});
    }
  }

  // Iterative Tarjan.
  std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> onStack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  int compCount = 0;
  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  for (std::size_t s = 0; s < n; ++s) {
    if (idx[s] != -1) continue;
    std::vector<Frame> frames{{s, 0}};
    idx[s] = low[s] = counter++;
    stack.push_back(s);
    onStack[s] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next < adj[f.v].size()) {
        std::size_t w = adj[f.v][f.next++].to;
        if (idx[w] == -1) {
          idx[w] = low[w] = counter++;
          stack.push_back(w);
          onStack[w] = true;
          frames.push_back({w, 0});
        } else if (onStack[w]) {
          low[f.v] = std::min(low[f.v], idx[w]);
        }
        continue;
      }
      std::size_t v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == idx[v]) {
        while (true) {
          std::size_t w = stack.back();
          stack.pop_back();
          onStack[w] = false;
          comp[w] = compCount;
          if (w == v) break;
        }
        ++compCount;
      }
    }
  }

  // A component is bad when one of its internal edges is a value edge.
  std::vector<bool> bad(static_cast<std::size_t>(compCount), false);
  std::vector<std::optional<std::size_t>> rep(static_cast<std::size_t>(compCount));
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& e : adj[v]) {
      if (e.value && comp[e.to] == comp[v]) bad[static_cast<std::size_t>(comp[v])] = true;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto c = static_cast<std::size_t>(comp[v]);
    if (bad[c] && (!rep[c] || order[v] < order[*rep[c]])) rep[c] = v;
  }
  // Tarjan numbers components in reverse topological order, so successors
  // of a component always have smaller numbers.
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(compCount));
  for (std::size_t v = 0; v < n; ++v) members[static_cast<std::size_t>(comp[v])].push_back(v);
  std::vector<std::optional<std::size_t>> reach(static_cast<std::size_t>(compCount));
  for (std::size_t c = 0; c < static_cast<std::size_t>(compCount); ++c) {
    std::optional<std::size_t> best = rep[c];
    for (std::size_t v : members[c]) {
      for (const auto& e : adj[v]) {
        auto d = static_cast<std::size_t>(comp[e.to]);
        if (d == c || !reach[d]) continue;
        if (!best || order[*reach[d]] < order[*best]) best = reach[d];
      }
    }
    reach[c] = best;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (auto r = reach[static_cast<std::size_t>(comp[v])]) m_.constructionCycles_.emplace(order[v], order[*r]);
  }
}

void ModelBuilder::finish() {
  resolve_refs();
  classify_all();
  build_classes();
  build_lineages();
  build_effective();
  find_parent_cycles();
  find_construction_cycles();
}

// ---------------------------------------------------------------------------
// Free functions

ResolveResult resolve(const std::vector<SourceUnit>& units) {
  auto model = std::make_shared<ResolvedModel>();
  ModelBuilder builder(*model);
  builder.add_unit(kernel_unit(), true);
  for (const auto& u : units) builder.add_unit(u, false);
  builder.finish();
  ResolveResult result;
  result.diagnostics = model->declaration_diagnostics();
  for (const auto& id : model->order()) {
    auto d = resolution_diagnostics(*model, id);
    result.diagnostics.insert(result.diagnostics.end(), d.begin(), d.end());
  }
  sort_diagnostics(result.diagnostics);
  result.model = std::move(model);
  return result;
}

std::shared_ptr<const ResolvedModel> bootstrap_kernel() { return resolve({}).model; }

ElementKind classify(const ResolvedModel& model, const ElementId& id) { return model.at(id).kind; }

std::vector<ElementId> lineage(const ResolvedModel& model, const ElementId& classId) {
  const auto& el = model.at(classId);
  if (el.kind == ElementKind::Instance)
    throw Error(ErrorKind::WrongKind, fmt::format("'{}' is an instance, not a class", classId.str()));
  return model.lineage_of(classId);
}

std::vector<PropertyDefinition> effective_properties(const ResolvedModel& model,
                                                     const ElementId& classId) {
  const auto& el = model.at(classId);
  if (el.kind == ElementKind::Instance)
    throw Error(ErrorKind::WrongKind, fmt::format("'{}' is an instance, not a class", classId.str()));
  return model.effective_properties_of(classId);
}

bool conforms(const ResolvedModel& model, const TypeRef& t, const TypeRef& u) {
  if (!t.isResolved() || !u.isResolved() || t.kind != u.kind) return false;
  if (t.isScalar()) return t.scalar == u.scalar;
  const auto& chain = model.lineage_of(t.cls);
  return std::find(chain.begin(), chain.end(), u.cls) != chain.end();
}

std::vector<Diagnostic> resolution_diagnostics(const ResolvedModel& model, const ElementId& id) {
  std::vector<Diagnostic> out;
  const ResolvedElement& el = model.at(id);
  const BeanDecl& d = el.decl;
  if (!el.classRef) {
    out.push_back(make_error(codes::UnresolvedClass,
                             fmt::format("unresolved class '{}'", d.classRef.text), d.classRef.span, id));
  } else {
    ElementKind target = model.at(*el.classRef).kind;
    if (el.kind == ElementKind::Instance && target == ElementKind::Instance) {
      out.push_back(make_error(codes::UnresolvedClass,
                               fmt::format("'{}' is an instance, not a class", d.classRef.text),
                               d.classRef.span, id));
    } else if (el.kind == ElementKind::Metaclass && target != ElementKind::Metaclass) {
      out.push_back(make_error(codes::UnresolvedClass,
                               fmt::format("a metaclass must be an instance of a metaclass, but '{}' is not one",
                                           d.classRef.text),
                               d.classRef.span, id));
    }
  }
  if (d.parentRef && !el.parentRef) {
    out.push_back(make_error(codes::UnresolvedParent,
                             fmt::format("unresolved parent '{}'", d.parentRef->text), d.parentRef->span, id));
  }
  if (model.parent_chain_has_cycle(id)) {
    out.push_back(make_error(codes::InheritanceCycle, "parent chain is cyclic",
                             d.parentRef ? d.parentRef->span : d.idSpan, id));
  }
  if (d.propertyDefs && el.kind == ElementKind::Instance) {
    out.push_back(make_error(codes::PropertiesOnInstance,
                             "<properties> is only allowed on classes and metaclasses", d.span, id));
  }
  if (const ClassDef* c = model.class_def(id)) {
    for (std::size_t i = 0; i < c->ownProperties.size(); ++i) {
      const auto& p = c->ownProperties[i];
      if (p.type.isResolved()) continue;
      const NameRef& ref = (*d.propertyDefs)[i].typeRef;
      bool exists = model.lookup(ref).has_value();
      out.push_back(make_error(
          codes::UnresolvedPropertyType,
          exists ? fmt::format("type '{}' of property '{}' is not a class", ref.text, p.name)
                 : fmt::format("unresolved type '{}' for property '{}'", ref.text, p.name),
          ref.span, id));
    }
  }
  return out;
}

}  // namespace mtalk
