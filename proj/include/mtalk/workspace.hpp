#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mtalk/compiler.hpp"
#include "mtalk/diagnostic.hpp"
#include "mtalk/native.hpp"

namespace mtalk {

// ---------------------------------------------------------------------------
// Rename refactoring

struct Patch {
  std::string path;
  SourceSpan span;
  std::string replacement;

  bool operator==(const Patch&) const = default;
};

struct PatchSet {
  std::vector<Patch> patches;     // sorted by path, then offset
  std::vector<Diagnostic> warnings;  // W002 when the manifest still uses the old name
};

/// Renames the element `target` (id and every reference that resolves to
/// it). Throws Error(NotFound), Error(Collision) or Error(InvalidArgument).
PatchSet rename_element(const CompileState& state, const ElementId& target, const std::string& newName);

/// Renames property `oldName` as seen from class `classId`: the declaration
/// (and redeclarations in subclasses) plus every assignment tag in beans
/// whose class is affected.
PatchSet rename_property(const CompileState& state, const ElementId& classId, const std::string& oldName,
                         const std::string& newName);

/// Applies patches to in-memory texts keyed by path. Throws
/// Error(InvalidArgument) on overlapping or out-of-range patches; the input
/// is left untouched in that case.
std::map<std::string, std::string> apply_patches(const PatchSet& patches,
                                                 const std::map<std::string, std::string>& texts);

/// Applies patches below `root`. Each file is replaced atomically.
void apply_patches_to_disk(const PatchSet& patches, const std::filesystem::path& root);

// ---------------------------------------------------------------------------
// Dependency queries

struct DependencyEntry {
  ElementId id;
  EdgeKind via;  // kind of the edge that first reached the node
};

/// Forward (what `start` depends on) or reverse (what depends on `start`)
/// closure in topological order of the traversal direction; ties broken by
/// id. `start` itself is listed only if it lies on a cycle. Throws
/// Error(NotFound).
std::vector<DependencyEntry> dependency_closure(const DependencyGraph& graph, const ElementId& start,
                                                bool reverse);

// ---------------------------------------------------------------------------
// Synthetic benchmark models

struct BenchmarkSpec {
  int classCount = 0;      // including metaclasses
  int metaclassCount = 1;
  double meanDit = 1.0;    // over model classes; Object has depth 0
  int instancesPerClass = 0;
  std::uint64_t seed = 0;
  double nativeFraction = 0.5;  // share of model classes with a manifest entry
};

struct SyntheticWorkspace {
  std::map<std::string, std::string> files;  // relative path -> model source
  NativeManifest manifest;
};

/// Deterministic for a given spec. Throws Error(InvalidArgument).
SyntheticWorkspace generate_synthetic(const BenchmarkSpec& spec);

inline constexpr std::string_view kManifestFileName = "native-manifest.json";

/// Writes the model files and `native-manifest.json` below `dir`.
void write_workspace(const SyntheticWorkspace& ws, const std::filesystem::path& dir);

/// Superclass-chain length to Object, averaged over user model classes.
double mean_dit(const ResolvedModel& model);

// ---------------------------------------------------------------------------
// Compile driver

struct DriverOptions {
  std::filesystem::path root = ".";
  std::optional<std::filesystem::path> manifestPath;  // default: <root>/native-manifest.json if present
  std::optional<std::filesystem::path> stateDir;      // default: $MTALK_STATE or <root>/.mtalk
  bool useCache = true;
};

struct DriverResult {
  CompileState state;
  std::vector<Diagnostic> diagnostics;  // sorted
  std::set<ElementId> recompiled;
  bool incremental = false;
  std::map<std::string, std::string> unitTexts;
};

std::filesystem::path state_dir_for(const DriverOptions& options);

/// Loads the manifest the options select, or nullptr. Throws Error(Io|Parse).
std::shared_ptr<const NativeManifest> load_selected_manifest(const DriverOptions& options);

/// Compiles the workspace, incrementally when a usable state exists, and
/// persists the new state. Throws Error(Io) if the root is not a directory.
DriverResult run_compile(const DriverOptions& options);

struct WatchEvent {
  std::size_t recompiledCount = 0;
  double millis = 0;
  std::vector<Diagnostic> added;
  std::vector<Diagnostic> cleared;
  std::vector<Diagnostic> diagnostics;  // full current set
};

/// Polling watcher. Any change of a file's size or timestamp, or a file
/// appearing or disappearing, triggers an incremental compile.
class WatchSession {
 public:
  explicit WatchSession(DriverOptions options);

  /// Initial compile.
  const DriverResult& start();
  /// Returns an event if the workspace changed since the last call.
  std::optional<WatchEvent> poll();
  const DriverResult& current() const { return current_; }

 private:
  struct Stamp {
    std::filesystem::file_time_type time;
    std::uintmax_t size = 0;
    bool operator==(const Stamp&) const = default;
  };
  std::map<std::string, Stamp> scan() const;

  DriverOptions options_;
  std::shared_ptr<const NativeManifest> manifest_;
  DriverResult current_;
  std::map<std::string, Stamp> stamps_;
};

}  // namespace mtalk
