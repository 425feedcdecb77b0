#include "mtalk/compiler.hpp"

#include <algorithm>
#include <deque>

namespace mtalk {

std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::InstanceOf: return "instance-of";
    case EdgeKind::SubclassOf: return "subclass-of";
    case EdgeKind::ParentBean: return "parent-bean";
    case EdgeKind::PropertyType: return "property-type";
    case EdgeKind::ValueRef: return "value-ref";
    case EdgeKind::NativeBinding: return "native-binding";
  }
  return "?";
}

DependencyGraph::DependencyGraph(std::set<ElementId> nodes, std::vector<DependencyEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    out_[edges_[i].from].push_back(i);
    in_[edges_[i].to].push_back(i);
  }
}

std::vector<DependencyEdge> DependencyGraph::outgoing(const ElementId& id) const {
  std::vector<DependencyEdge> out;
  if (auto it = out_.find(id); it != out_.end())
    for (auto i : it->second) out.push_back(edges_[i]);
  return out;
}

std::vector<DependencyEdge> DependencyGraph::incoming(const ElementId& id) const {
  std::vector<DependencyEdge> out;
  if (auto it = in_.find(id); it != in_.end())
    for (auto i : it->second) out.push_back(edges_[i]);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct GraphBuilder {
  const ResolvedModel& model;
  std::set<ElementId> nodes;
  std::vector<DependencyEdge> edges;

  void link(const ElementId& from, std::optional<ElementId> to, EdgeKind kind) {
    ElementId target = to ? *to : unresolved_node();
    nodes.insert(target);
    edges.push_back({from, target, kind});
  }

  void values(const ElementId& from, const std::vector<Assignment>& list) {
    for (const auto& a : list) {
      if (const auto* r = a.value.reference()) {
        link(from, model.lookup(r->target), EdgeKind::ValueRef);
      } else if (const auto* b = a.value.inlineBean()) {
        link(from, model.lookup(b->classRef), EdgeKind::InstanceOf);
        values(from, b->assignments);
      }
    }
  }
};

}  // namespace

DependencyGraph build_dependency_graph(const ResolvedModel& model, const NativeManifest* manifest) {
  GraphBuilder g{model, {}, {}};
  for (const auto& id : model.order()) g.nodes.insert(id);
  if (manifest)
    for (const auto& name : manifest->order) g.nodes.insert(native_node(name));

  for (const auto& id : model.order()) {
    const ResolvedElement& el = model.at(id);
    g.link(id, el.classRef, EdgeKind::InstanceOf);
    if (el.kind == ElementKind::Instance) {
      if (el.decl.parentRef) g.link(id, el.parentRef, EdgeKind::ParentBean);
      g.values(id, el.decl.assignments);
      continue;
    }
    const ClassDef& def = *model.class_def(id);
    if (el.decl.parentRef)
      g.link(id, el.parentRef, EdgeKind::SubclassOf);
    else if (def.parent)
      g.link(id, def.parent, EdgeKind::SubclassOf);
    for (const auto& p : def.ownProperties) {
      if (p.type.isClass())
        g.link(id, p.type.cls, EdgeKind::PropertyType);
      else if (!p.type.isResolved())
        g.link(id, std::nullopt, EdgeKind::PropertyType);
    }
    g.values(id, def.classLevelAssignments);
    if (manifest && !el.isKernel && !def.isDeclarative && manifest->find(id.local))
      g.link(id, native_node(id.local), EdgeKind::NativeBinding);
  }
  return DependencyGraph(std::move(g.nodes), std::move(g.edges));
}

std::vector<Diagnostic> CompileState::flattened() const {
  std::vector<Diagnostic> out;
  for (const auto& [path, unit] : units)
    out.insert(out.end(), unit.parseDiagnostics.begin(), unit.parseDiagnostics.end());
  out.insert(out.end(), globalDiagnostics.begin(), globalDiagnostics.end());
  for (const auto& [id, diags] : diagnosticsByElement) out.insert(out.end(), diags.begin(), diags.end());
  sort_diagnostics(out);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CompiledModel CompileState::compiled() const {
  CompiledModel cm;
  cm.resolved = resolved;
  cm.graph = graph;
  cm.manifest = manifest;
  for (const auto& d : flattened()) {
    if (!d.isError()) continue;
    cm.errorFree = false;
    if (d.element) cm.elementsWithErrors.insert(*d.element);
  }
  return cm;
}

namespace {

std::vector<SourceUnit> sorted_units(const std::map<std::string, SourceUnit>& units) {
  std::vector<SourceUnit> out;
  out.reserve(units.size());
  for (const auto& [path, u] : units) out.push_back(u);
  return out;
}

std::optional<std::uint64_t> hash_of(const NativeManifest* m) {
  if (!m) return std::nullopt;
  return m->hash();
}

// Fills everything except diagnosticsByElement.
void rebuild(CompileState& state, std::shared_ptr<const NativeManifest> manifest) {
  auto rr = resolve(sorted_units(state.units));
  state.resolved = rr.model;
  state.manifest = std::move(manifest);
  state.graph = std::make_shared<DependencyGraph>(build_dependency_graph(*state.resolved, state.manifest.get()));
  state.manifestHash = hash_of(state.manifest.get());
  state.unitOfElement.clear();
  state.contentHashByUnit.clear();
  for (const auto& [path, u] : state.units) state.contentHashByUnit[path] = u.contentHash;
  for (const auto& id : state.resolved->order()) {
    const auto& el = state.resolved->at(id);
    if (!el.isKernel) state.unitOfElement[id] = el.unitPath;
  }
  state.globalDiagnostics = state.resolved->declaration_diagnostics();
  if (state.manifest) {
    auto w = unbound_manifest_entries(*state.resolved, *state.manifest);
    state.globalDiagnostics.insert(state.globalDiagnostics.end(), w.begin(), w.end());
  }
}

}  // namespace

CompileResult compile(const std::vector<SourceUnit>& units, std::shared_ptr<const NativeManifest> manifest) {
  CompileResult result;
  CompileState& state = result.state;
  for (const auto& u : units) state.units[u.path] = u;
  rebuild(state, std::move(manifest));
  for (const auto& id : state.resolved->order())
    state.diagnosticsByElement[id] = validate_element(*state.resolved, id, state.manifest.get());
  result.diagnostics = state.flattened();
  return result;
}

IncrementalResult incremental_compile(const CompileState& prev, const std::vector<SourceUnit>& changedUnits,
                                      const std::vector<std::string>& removedPaths,
                                      std::shared_ptr<const NativeManifest> manifest) {
  IncrementalResult result;
  CompileState& state = result.state;
  state.units = prev.units;

  std::set<std::string> touched;
  for (const auto& u : changedUnits) {
    auto it = prev.units.find(u.path);
    if (it != prev.units.end() && it->second.contentHash == u.contentHash) continue;
    state.units[u.path] = u;
    touched.insert(u.path);
  }
  for (const auto& p : removedPaths)
    if (state.units.erase(p)) touched.insert(p);

  const bool manifestChanged = hash_of(manifest.get()) != prev.manifestHash;
  if (touched.empty() && !manifestChanged) {
    state = prev;
    result.diagnostics = state.flattened();
    return result;
  }

  rebuild(state, std::move(manifest));
  const ResolvedModel& now = *state.resolved;

  std::set<ElementId> seeds;
  if (manifestChanged || !prev.resolved) {
    for (const auto& id : now.order())
      if (!now.at(id).isKernel) seeds.insert(id);
  } else {
    std::set<ElementId> candidates;
    auto collect = [&](const std::map<std::string, SourceUnit>& units, const std::string& path) {
      if (auto it = units.find(path); it != units.end())
        for (const auto& b : it->second.beans) candidates.insert(b.id);
    };
    for (const auto& path : touched) {
      collect(prev.units, path);
      collect(state.units, path);
    }
    for (const auto& id : candidates) {
      const ResolvedElement* before = prev.resolved->find(id);
      const ResolvedElement* after = now.find(id);
      if (!before || !after || before->decl != after->decl || before->unitPath != after->unitPath)
        seeds.insert(id);
    }
  }

  // Everything that transitively depends on a seed, in either graph.
  std::set<ElementId> dirty = seeds;
  std::deque<ElementId> queue(seeds.begin(), seeds.end());
  while (!queue.empty()) {
    ElementId id = queue.front();
    queue.pop_front();
    for (const DependencyGraph* g : {prev.graph.get(), state.graph.get()}) {
      if (!g) continue;
      for (const auto& e : g->incoming(id))
        if (dirty.insert(e.from).second) queue.push_back(e.from);
    }
  }

  for (const auto& id : now.order()) {
    auto old = prev.diagnosticsByElement.find(id);
    if (dirty.count(id) || old == prev.diagnosticsByElement.end()) {
      state.diagnosticsByElement[id] = validate_element(now, id, state.manifest.get());
      result.recompiled.insert(id);
    } else {
      state.diagnosticsByElement[id] = old->second;
    }
  }
  result.diagnostics = state.flattened();
  return result;
}

}  // namespace mtalk
