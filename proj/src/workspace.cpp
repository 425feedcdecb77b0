#include "mtalk/workspace.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mtalk/error.hpp"

namespace mtalk {

namespace fs = std::filesystem;

fs::path state_dir_for(const DriverOptions& options) {
  if (options.stateDir) return *options.stateDir;
  if (const char* env = std::getenv("MTALK_STATE"); env && *env) return env;
  return options.root / ".mtalk";
}

std::shared_ptr<const NativeManifest> load_selected_manifest(const DriverOptions& options) {
  fs::path path;
  if (options.manifestPath) {
    path = *options.manifestPath;
  } else {
    path = options.root / kManifestFileName;
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) return nullptr;
  }
  auto manifest = load_manifest(path);
  std::error_code ec;
  auto rel = fs::relative(path, options.root, ec);
  if (!ec && !rel.empty() && rel.native()[0] != '.') manifest.sourcePath = rel.generic_string();
  return std::make_shared<const NativeManifest>(std::move(manifest));
}

namespace {

struct LoadedFiles {
  std::map<std::string, std::string> texts;
  std::vector<Diagnostic> unreadable;
};

LoadedFiles read_workspace(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw Error(ErrorKind::Io, fmt::format("'{}' is not a directory", root.string()));
  LoadedFiles out;
  for (const auto& file : discover_model_files(root)) {
    std::string rel = file.generic_string();
    std::ifstream in(root / file, std::ios::binary);
    std::ostringstream buf;
    if (in) buf << in.rdbuf();
    if (!in) {
      out.unreadable.push_back(
          make_error(codes::Unreadable, "cannot read file", SourceSpan{rel, 1, 1, 1, 1, 0, 0}));
      continue;
    }
    out.texts[rel] = buf.str();
  }
  return out;
}

}  // namespace

DriverResult run_compile(const DriverOptions& options) {
  LoadedFiles files = read_workspace(options.root);
  auto manifest = load_selected_manifest(options);
  fs::path stateDir = state_dir_for(options);

  DriverResult result;
  result.unitTexts = files.texts;
  std::optional<LoadedState> previous;
  if (options.useCache) previous = load_state(stateDir, manifest);

  if (previous) {
    std::vector<SourceUnit> changed;
    std::vector<std::string> removed;
    for (const auto& [path, text] : files.texts) {
      auto it = previous->unitTexts.find(path);
      if (it == previous->unitTexts.end() || it->second != text) changed.push_back(parse_unit(text, path));
    }
    for (const auto& [path, _] : previous->unitTexts)
      if (!files.texts.count(path)) removed.push_back(path);
    auto inc = incremental_compile(previous->state, changed, removed, manifest);
    result.state = std::move(inc.state);
    result.recompiled = std::move(inc.recompiled);
    result.diagnostics = std::move(inc.diagnostics);
    result.incremental = true;
  } else {
    std::vector<SourceUnit> units;
    for (const auto& [path, text] : files.texts) units.push_back(parse_unit(text, path));
    auto full = compile(units, manifest);
    result.state = std::move(full.state);
    result.diagnostics = std::move(full.diagnostics);
    for (const auto& id : result.state.resolved->order())
      if (!result.state.resolved->at(id).isKernel) result.recompiled.insert(id);
  }
  result.diagnostics.insert(result.diagnostics.end(), files.unreadable.begin(), files.unreadable.end());
  sort_diagnostics(result.diagnostics);

  if (options.useCache) {
    try {
      save_state(result.state, files.texts, stateDir);
    } catch (const std::exception&) {
      // A cache that cannot be written only costs time on the next run.
    }
  }
  return result;
}

WatchSession::WatchSession(DriverOptions options) : options_(std::move(options)) {}

std::map<std::string, WatchSession::Stamp> WatchSession::scan() const {
  std::map<std::string, Stamp> out;
  std::error_code ec;
  for (const auto& file : discover_model_files(options_.root)) {
    Stamp s;
    s.time = fs::last_write_time(options_.root / file, ec);
    s.size = fs::file_size(options_.root / file, ec);
    out[file.generic_string()] = s;
  }
  return out;
}

const DriverResult& WatchSession::start() {
  manifest_ = load_selected_manifest(options_);
  stamps_ = scan();
  current_ = run_compile(options_);
  return current_;
}

std::optional<WatchEvent> WatchSession::poll() {
  auto stamps = scan();
  if (stamps == stamps_) return std::nullopt;
  auto begin = std::chrono::steady_clock::now();

  std::vector<SourceUnit> changed;
  std::vector<std::string> removed;
  std::map<std::string, std::string> texts = current_.unitTexts;
  std::vector<Diagnostic> unreadable;
  for (const auto& [path, stamp] : stamps) {
    auto old = stamps_.find(path);
    if (old != stamps_.end() && old->second == stamp) continue;
    std::ifstream in(options_.root / path, std::ios::binary);
    std::ostringstream buf;
    if (in) buf << in.rdbuf();
    if (!in) continue;  // vanished between scan and read; picked up next poll
    std::string text = buf.str();
    auto it = texts.find(path);
    if (it != texts.end() && it->second == text) continue;
    texts[path] = text;
    changed.push_back(parse_unit(text, path));
  }
  for (const auto& [path, _] : stamps_)
    if (!stamps.count(path)) {
      removed.push_back(path);
      texts.erase(path);
    }
  stamps_ = std::move(stamps);

  auto inc = incremental_compile(current_.state, changed, removed, manifest_);
  WatchEvent ev;
  ev.recompiledCount = inc.recompiled.size();
  ev.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin).count();

  std::vector<Diagnostic> before = current_.diagnostics;
  current_.state = std::move(inc.state);
  current_.recompiled = std::move(inc.recompiled);
  current_.diagnostics = std::move(inc.diagnostics);
  current_.incremental = true;
  current_.unitTexts = std::move(texts);
  if (options_.useCache) {
    try {
      save_state(current_.state, current_.unitTexts, state_dir_for(options_));
    } catch (const std::exception&) {
    }
  }

  std::set_difference(current_.diagnostics.begin(), current_.diagnostics.end(), before.begin(), before.end(),
                      std::back_inserter(ev.added), diagnostic_less);
  std::set_difference(before.begin(), before.end(), current_.diagnostics.begin(), current_.diagnostics.end(),
                      std::back_inserter(ev.cleared), diagnostic_less);
  ev.diagnostics = current_.diagnostics;
  return ev;
}

}  // namespace mtalk
