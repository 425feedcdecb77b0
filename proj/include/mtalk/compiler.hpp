#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtalk/diagnostic.hpp"
#include "mtalk/kernel.hpp"
#include "mtalk/native.hpp"
#include "mtalk/source.hpp"

namespace mtalk {

enum class EdgeKind { InstanceOf, SubclassOf, ParentBean, PropertyType, ValueRef, NativeBinding };

std::string_view to_string(EdgeKind k);

struct DependencyEdge {
  ElementId from;
  ElementId to;
  EdgeKind kind;

  auto operator<=>(const DependencyEdge&) const = default;
  bool operator==(const DependencyEdge&) const = default;
};

/// Typed multigraph: `from` depends on `to`.
class DependencyGraph {
 public:
  DependencyGraph() = default;
  DependencyGraph(std::set<ElementId> nodes, std::vector<DependencyEdge> edges);

  const std::set<ElementId>& nodes() const { return nodes_; }
  const std::vector<DependencyEdge>& edges() const { return edges_; }
  /// Edges leaving `id`, sorted.
  std::vector<DependencyEdge> outgoing(const ElementId& id) const;
  /// Edges entering `id`, sorted.
  std::vector<DependencyEdge> incoming(const ElementId& id) const;
  bool contains(const ElementId& id) const { return nodes_.count(id) > 0; }

 private:
  std::set<ElementId> nodes_;
  std::vector<DependencyEdge> edges_;
  std::unordered_map<ElementId, std::vector<std::size_t>, ElementIdHash> out_;
  std::unordered_map<ElementId, std::vector<std::size_t>, ElementIdHash> in_;
};

DependencyGraph build_dependency_graph(const ResolvedModel& model,
                                       const NativeManifest* manifest = nullptr);

/// All diagnostics of one element at any meta-level.
std::vector<Diagnostic> validate_element(const ResolvedModel& model, const ElementId& id,
                                         const NativeManifest* manifest = nullptr);

/// E006 unless the redeclared type conforms to the inherited one.
std::optional<Diagnostic> check_override(const PropertyDefinition& child,
                                         const PropertyDefinition& ancestor,
                                         const ResolvedModel& model);

/// E007 for one class; empty for instances, metaclasses, declarative and
/// kernel classes.
std::vector<Diagnostic> conformance_diagnostics(const ResolvedModel& model, const ElementId& classId,
                                                const NativeManifest& manifest);
/// Manifest entries without a model class (W001).
std::vector<Diagnostic> unbound_manifest_entries(const ResolvedModel& model,
                                                 const NativeManifest& manifest);
std::vector<Diagnostic> check_conformance(const ResolvedModel& model, const NativeManifest& manifest);

/// Lexical checks for scalar property values.
bool lex_long(std::string_view text, std::int64_t* out = nullptr);
bool lex_double(std::string_view text, double* out = nullptr);
bool lex_boolean(std::string_view text, bool* out = nullptr);

struct CompiledModel {
  std::shared_ptr<const ResolvedModel> resolved;
  std::shared_ptr<const DependencyGraph> graph;
  std::shared_ptr<const NativeManifest> manifest;
  bool errorFree = true;
  std::set<ElementId> elementsWithErrors;
};

struct CompileState {
  std::map<std::string, SourceUnit> units;  // by path
  std::shared_ptr<const ResolvedModel> resolved;
  std::shared_ptr<const DependencyGraph> graph;
  std::shared_ptr<const NativeManifest> manifest;
  std::map<ElementId, std::vector<Diagnostic>> diagnosticsByElement;
  std::vector<Diagnostic> globalDiagnostics;  // E008, E011, W001
  std::map<ElementId, std::string> unitOfElement;
  std::map<std::string, std::uint64_t> contentHashByUnit;
  std::optional<std::uint64_t> manifestHash;

  /// Parse + global + per-element diagnostics, sorted.
  std::vector<Diagnostic> flattened() const;
  CompiledModel compiled() const;
};

struct CompileResult {
  CompileState state;
  std::vector<Diagnostic> diagnostics;
};

struct IncrementalResult {
  CompileState state;
  std::set<ElementId> recompiled;
  std::vector<Diagnostic> diagnostics;
};

CompileResult compile(const std::vector<SourceUnit>& units,
                      std::shared_ptr<const NativeManifest> manifest = nullptr);

/// Revalidates only elements whose declaration changed plus everything that
/// transitively depends on them (over the old and the new graph). The result
/// is equal to a from-scratch compile of the same inputs.
IncrementalResult incremental_compile(const CompileState& prev,
                                      const std::vector<SourceUnit>& changedUnits,
                                      const std::vector<std::string>& removedPaths,
                                      std::shared_ptr<const NativeManifest> manifest = nullptr);

/// Persists the state below `dir` (created if needed). Unit texts are stored
/// so the state can be rebuilt without the workspace.
void save_state(const CompileState& state, const std::map<std::string, std::string>& unitTexts,
                const std::filesystem::path& dir);
struct LoadedState {
  CompileState state;
  std::map<std::string, std::string> unitTexts;
};
/// Returns nullopt when there is no usable state (missing, other version,
/// corrupt).
std::optional<LoadedState> load_state(const std::filesystem::path& dir,
                                      std::shared_ptr<const NativeManifest> manifest);

inline constexpr std::string_view kStateVersion = "mtalk-state-1";

}  // namespace mtalk
