#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mtalk/compiler.hpp"
#include "mtalk/error.hpp"

namespace mtalk {

namespace {

using json = nlohmann::json;

json to_json(const ElementId& id) { return json{{"ns", id.ns}, {"local", id.local}}; }
ElementId id_from_json(const json& j) { return {j.at("ns").get<std::string>(), j.at("local").get<std::string>()}; }

json to_json(const Diagnostic& d) {
  const auto& s = d.span;
  return json{{"severity", d.isError() ? "error" : "warning"},
              {"code", d.code},
              {"message", d.message},
              {"element", d.element ? to_json(*d.element) : json()},
              {"span",
               {{"path", s.path},
                {"line", s.line},
                {"column", s.column},
                {"endLine", s.endLine},
                {"endColumn", s.endColumn},
                {"offset", s.offset},
                {"endOffset", s.endOffset}}}};
}

Diagnostic diagnostic_from_json(const json& j) {
  Diagnostic d;
  d.severity = j.at("severity") == "error" ? Severity::Error : Severity::Warning;
  d.code = j.at("code").get<std::string>();
  d.message = j.at("message").get<std::string>();
  if (!j.at("element").is_null()) d.element = id_from_json(j.at("element"));
  const auto& s = j.at("span");
  d.span = SourceSpan{s.at("path").get<std::string>(), s.at("line").get<int>(),
                      s.at("column").get<int>(), s.at("endLine").get<int>(),
                      s.at("endColumn").get<int>(), s.at("offset").get<std::size_t>(),
                      s.at("endOffset").get<std::size_t>()};
  return d;
}

json to_json(const std::vector<Diagnostic>& list) {
  json out = json::array();
  for (const auto& d : list) out.push_back(to_json(d));
  return out;
}

std::vector<Diagnostic> diagnostics_from_json(const json& j) {
  std::vector<Diagnostic> out;
  for (const auto& d : j) out.push_back(diagnostic_from_json(d));
  return out;
}

constexpr const char* kStateFile = "state";

}  // namespace

void save_state(const CompileState& state, const std::map<std::string, std::string>& unitTexts,
                const std::filesystem::path& dir) {
  json doc;
  doc["version"] = std::string(kStateVersion);
  doc["manifestHash"] = state.manifestHash ? json(fmt::format("{:016x}", *state.manifestHash)) : json();
  json units = json::array();
  for (const auto& [path, unit] : state.units) {
    auto it = unitTexts.find(path);
    if (it == unitTexts.end())
      throw Error(ErrorKind::InvalidArgument, fmt::format("no text for unit '{}'", path));
    units.push_back({{"path", path}, {"text", it->second}});
  }
  doc["units"] = std::move(units);
  doc["global"] = to_json(state.globalDiagnostics);
  json elements = json::array();
  for (const auto& [id, diags] : state.diagnosticsByElement)
    elements.push_back({{"id", to_json(id)}, {"diagnostics", to_json(diags)}});
  doc["elements"] = std::move(elements);

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto target = dir / kStateFile;
  auto tmp = dir / (std::string(kStateFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", tmp.string()));
    out << doc.dump();
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorKind::Io, fmt::format("cannot write '{}': {}", target.string(), ec.message()));
}

std::optional<LoadedState> load_state(const std::filesystem::path& dir,
                                      std::shared_ptr<const NativeManifest> manifest) {
  std::ifstream in(dir / kStateFile, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    json doc = json::parse(buf.str());
    if (doc.at("version") != std::string(kStateVersion)) return std::nullopt;
    LoadedState loaded;
    std::vector<SourceUnit> units;
    for (const auto& u : doc.at("units")) {
      auto path = u.at("path").get<std::string>();
      auto text = u.at("text").get<std::string>();
      units.push_back(parse_unit(text, path));
      loaded.unitTexts[path] = std::move(text);
    }
    // The rebuilt model uses the current manifest for its native edges; the
    // stored hash makes the next incremental compile notice a change.
    CompileState& state = loaded.state;
    for (auto& u : units) state.units[u.path] = std::move(u);
    auto rr = resolve([&] {
      std::vector<SourceUnit> v;
      for (const auto& [p, u] : state.units) v.push_back(u);
      return v;
    }());
    state.resolved = rr.model;
    state.manifest = manifest;
    state.graph = std::make_shared<DependencyGraph>(build_dependency_graph(*state.resolved, manifest.get()));
    for (const auto& [path, u] : state.units) state.contentHashByUnit[path] = u.contentHash;
    for (const auto& id : state.resolved->order()) {
      const auto& el = state.resolved->at(id);
      if (!el.isKernel) state.unitOfElement[id] = el.unitPath;
    }
    if (!doc.at("manifestHash").is_null())
      state.manifestHash = std::stoull(doc.at("manifestHash").get<std::string>(), nullptr, 16);
    state.globalDiagnostics = diagnostics_from_json(doc.at("global"));
    for (const auto& e : doc.at("elements")) {
      ElementId id = id_from_json(e.at("id"));
      if (!state.resolved->find(id)) return std::nullopt;
      state.diagnosticsByElement[id] = diagnostics_from_json(e.at("diagnostics"));
    }
    if (state.diagnosticsByElement.size() != state.resolved->order().size()) return std::nullopt;
    return loaded;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace mtalk
