// mtalk: command-line front end for model workspaces.
//
// Exit codes: 0 success, 1 model errors or a failed request, 2 I/O or usage
// problems.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mtalk/error.hpp"
#include "mtalk/schema.hpp"
#include "mtalk/vm.hpp"
#include "mtalk/workspace.hpp"

namespace {

using namespace mtalk;

std::atomic<bool> gStop{false};

void on_sigint(int) { gStop = true; }

struct CommonFlags {
  std::string root = ".";
  std::string manifest;
  std::string state;
  bool noCache = false;
  bool json = false;

  DriverOptions options() const {
    DriverOptions o;
    o.root = root;
    if (!manifest.empty()) o.manifestPath = manifest;
    if (!state.empty()) o.stateDir = state;
    o.useCache = !noCache;
    return o;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f, bool rootPositional) {
  if (rootPositional)
    cmd->add_option("dir", f.root, "Workspace root")->capture_default_str();
  else
    cmd->add_option("--root,-C", f.root, "Workspace root")->capture_default_str();
  cmd->add_option("--manifest", f.manifest, "Native manifest (default: <root>/native-manifest.json)");
  cmd->add_option("--state", f.state, "Compile state directory (default: $MTALK_STATE or <root>/.mtalk)");
  cmd->add_flag("--no-cache", f.noCache, "Ignore and do not write the compile state");
  cmd->add_flag("--json", f.json, "Print diagnostics as JSON");
}

void print_diagnostics(const std::vector<Diagnostic>& diags, bool json, std::FILE* out = stdout) {
  if (json) {
    std::fputs((render_json(diags) + "\n").c_str(), out);
    return;
  }
  for (const auto& d : diags) std::fputs((render_line(d) + "\n").c_str(), out);
}

int fail(const std::string& message, int code) {
  std::fputs(("mtalk: " + message + "\n").c_str(), stderr);
  return code;
}

// Compiles and refuses to continue if there are errors.
std::optional<DriverResult> compile_clean(const CommonFlags& f, int& exitCode) {
  DriverResult r = run_compile(f.options());
  if (has_errors(r.diagnostics)) {
    print_diagnostics(r.diagnostics, f.json, stderr);
    exitCode = 1;
    return std::nullopt;
  }
  return r;
}

int cmd_compile(const CommonFlags& f) {
  DriverResult r = run_compile(f.options());
  print_diagnostics(r.diagnostics, f.json);
  return has_errors(r.diagnostics) ? 1 : 0;
}

int cmd_get(const CommonFlags& f, const std::string& id, bool meta) {
  int code = 0;
  auto r = compile_clean(f, code);
  if (!r) return code;
  ModelVm vm(r->state.compiled());
  try {
    InstancePtr inst;
    const ResolvedElement* el = r->state.resolved->find(ElementId::parse(id));
    if (el && el->kind != ElementKind::Instance && meta)
      inst = vm.get_class(ElementId::parse(id));
    else
      inst = vm.get_instance(id);
    if (meta && !inst->isMetaView()) inst = vm.get_class(*inst);
    std::puts(dump_instance(*inst).c_str());
    return 0;
  } catch (const Error& e) {
    return fail(e.what(), 1);
  }
}

int cmd_deps(const CommonFlags& f, const std::string& id, bool reverse) {
  DriverResult r = run_compile(f.options());
  try {
    for (const auto& e : dependency_closure(*r.state.graph, ElementId::parse(id), reverse))
      std::printf("%s (%s)\n", e.id.str().c_str(), std::string(to_string(e.via)).c_str());
    return 0;
  } catch (const Error& e) {
    return fail(e.what(), 1);
  }
}

int cmd_schema(const CommonFlags& f, const std::string& out) {
  DriverResult r = run_compile(f.options());
  std::filesystem::path path(out);
  SchemaDoc schema = generate_schema(r.state.compiled(), path.filename().string());
  write_schema(schema, path);
  for (const auto& file : schema.files(path.filename().string()))
    std::printf("wrote %s\n", (path.parent_path() / file.fileName).generic_string().c_str());
  return 0;
}

int cmd_rename(const CommonFlags& f, const std::string& oldName, const std::string& newName,
               const std::string& propertyOf, bool dryRun) {
  DriverResult r = run_compile(f.options());
  PatchSet patches;
  try {
    patches = propertyOf.empty()
                  ? rename_element(r.state, ElementId::parse(oldName), newName)
                  : rename_property(r.state, ElementId::parse(propertyOf), oldName, newName);
  } catch (const Error& e) {
    return fail(e.what(), 1);
  }
  for (const auto& p : patches.patches)
    std::printf("%s:%d:%d: -> %s\n", p.path.c_str(), p.span.line, p.span.column, p.replacement.c_str());
  print_diagnostics(patches.warnings, false);
  if (!dryRun) apply_patches_to_disk(patches, f.root);
  std::printf("%zu patch%s%s\n", patches.patches.size(), patches.patches.size() == 1 ? "" : "es",
              dryRun ? " (dry run)" : " applied");
  return 0;
}

int cmd_watch(const CommonFlags& f, int intervalMs, int maxEvents, int exitAfterMs) {
  std::signal(SIGINT, on_sigint);
  WatchSession session(f.options());
  const DriverResult& first = session.start();
  print_diagnostics(first.diagnostics, f.json);
  std::printf("watching %s (%zu diagnostics)\n", f.root.c_str(), first.diagnostics.size());
  std::fflush(stdout);
  auto began = std::chrono::steady_clock::now();
  int events = 0;
  while (!gStop) {
    if (exitAfterMs > 0 && std::chrono::steady_clock::now() - began > std::chrono::milliseconds(exitAfterMs)) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(intervalMs));
    auto ev = session.poll();
    if (!ev) continue;
    for (const auto& d : ev->cleared) std::printf("- %s\n", render_line(d).c_str());
    for (const auto& d : ev->added) std::printf("+ %s\n", render_line(d).c_str());
    std::printf("recompiled: %zu elements in %.1f ms\n", ev->recompiledCount, ev->millis);
    std::fflush(stdout);
    if (maxEvents > 0 && ++events >= maxEvents) break;
  }
  return 0;
}

int cmd_gen(const BenchmarkSpec& spec, const std::string& out) {
  SyntheticWorkspace ws = generate_synthetic(spec);
  write_workspace(ws, out);
  std::printf("wrote %zu model files and %zu manifest entries to %s\n", ws.files.size(), ws.manifest.order.size(),
              out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mtalk: compile, run and refactor executable models"};
  app.require_subcommand(1);

  CommonFlags compileFlags;
  auto* compileCmd = app.add_subcommand("compile", "Compile a workspace and print diagnostics");
  add_common(compileCmd, compileFlags, true);

  CommonFlags getFlags;
  std::string getId;
  bool getMeta = false;
  auto* getCmd = app.add_subcommand("get", "Instantiate a bean and print it as JSON");
  getCmd->add_option("id", getId, "Bean id")->required();
  getCmd->add_flag("--dump", "Print the instance (default)");
  getCmd->add_flag("--meta", getMeta, "Print the reified class instead");
  add_common(getCmd, getFlags, false);

  CommonFlags depsFlags;
  std::string depsId;
  bool depsReverse = false;
  auto* depsCmd = app.add_subcommand("deps", "Print the dependency closure of an element");
  depsCmd->add_option("id", depsId, "Element id")->required();
  depsCmd->add_flag("--reverse,-r", depsReverse, "Elements depending on the given one");
  add_common(depsCmd, depsFlags, false);

  CommonFlags schemaFlags;
  std::string schemaOut;
  auto* schemaCmd = app.add_subcommand("schema", "Generate XML Schema documents for editors");
  schemaCmd->add_option("-o,--output", schemaOut, "Root schema file")->required();
  add_common(schemaCmd, schemaFlags, false);

  CommonFlags renameFlags;
  std::string renameOld, renameNew, renameProperty;
  bool renameDry = false;
  auto* renameCmd = app.add_subcommand("rename", "Rename an element or a property everywhere");
  renameCmd->add_option("old", renameOld, "Current element id (or property name with --property)")->required();
  renameCmd->add_option("new", renameNew, "New name")->required();
  renameCmd->add_option("--property", renameProperty, "Rename a property of this class");
  renameCmd->add_flag("--dry-run", renameDry, "Print patches without writing");
  add_common(renameCmd, renameFlags, false);

  CommonFlags watchFlags;
  int watchInterval = 200, watchMaxEvents = 0, watchExitAfter = 0;
  auto* watchCmd = app.add_subcommand("watch", "Recompile incrementally whenever model files change");
  add_common(watchCmd, watchFlags, true);
  watchCmd->add_option("--interval", watchInterval, "Polling interval in ms")->capture_default_str();
  watchCmd->add_option("--max-events", watchMaxEvents, "Stop after this many recompiles");
  watchCmd->add_option("--exit-after", watchExitAfter, "Stop after this many ms");

  BenchmarkSpec spec;
  spec.classCount = 4800;
  spec.metaclassCount = 200;
  spec.meanDit = 4.75;
  spec.instancesPerClass = 4;
  spec.seed = 42;
  std::string genOut;
  auto* genCmd = app.add_subcommand("gen", "Generate a synthetic benchmark workspace");
  genCmd->add_option("-o,--output", genOut, "Output directory")->required();
  genCmd->add_option("--classes", spec.classCount, "Classes including metaclasses")->capture_default_str();
  genCmd->add_option("--metaclasses", spec.metaclassCount)->capture_default_str();
  genCmd->add_option("--dit", spec.meanDit, "Target mean depth of inheritance")->capture_default_str();
  genCmd->add_option("--instances", spec.instancesPerClass, "Instances per class")->capture_default_str();
  genCmd->add_option("--seed", spec.seed)->capture_default_str();
  genCmd->add_option("--native-fraction", spec.nativeFraction)->capture_default_str();

  auto* kernelCmd = app.add_subcommand("kernel", "Print the built-in kernel model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*compileCmd) return cmd_compile(compileFlags);
    if (*getCmd) return cmd_get(getFlags, getId, getMeta);
    if (*depsCmd) return cmd_deps(depsFlags, depsId, depsReverse);
    if (*schemaCmd) return cmd_schema(schemaFlags, schemaOut);
    if (*renameCmd) return cmd_rename(renameFlags, renameOld, renameNew, renameProperty, renameDry);
    if (*watchCmd) return cmd_watch(watchFlags, watchInterval, watchMaxEvents, watchExitAfter);
    if (*genCmd) return cmd_gen(spec, genOut);
    if (*kernelCmd) {
      std::fputs(std::string(kernel_source()).c_str(), stdout);
      return 0;
    }
  } catch (const Error& e) {
    bool io = e.kind() == ErrorKind::Io || e.kind() == ErrorKind::Parse;
    return fail(e.what(), io ? 2 : 1);
  } catch (const std::exception& e) {
    return fail(e.what(), 2);
  }
  return 2;
}
