#include "mtalk/native.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mtalk/error.hpp"
#include "mtalk/hash.hpp"

namespace mtalk {

const NativeField* NativeClassSig::field(std::string_view fieldName) const {
  for (const auto& f : fields)
    if (f.name == fieldName) return &f;
  return nullptr;
}

const NativeClassSig* NativeManifest::find(std::string_view name) const {
  auto it = entries.find(std::string(name));
  return it == entries.end() ? nullptr : &it->second;
}

std::uint64_t NativeManifest::hash() const { return fnv1a(serialize_manifest(*this)); }

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw Error(ErrorKind::Parse, fmt::format("{}: missing \"{}\"", where, key));
  return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw Error(ErrorKind::Parse, fmt::format("{}: \"{}\" must be a string", where, key));
  return v.get<std::string>();
}

}  // namespace

NativeManifest parse_manifest(std::string_view text, const std::string& sourcePath) {
  NativeManifest manifest;
  manifest.sourcePath = sourcePath;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return manifest;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", sourcePath, e.what()));
  }
  if (!doc.is_object()) throw Error(ErrorKind::Parse, fmt::format("{}: expected an object", sourcePath));
  const auto& classes = require(doc, "classes", sourcePath);
  if (!classes.is_array()) throw Error(ErrorKind::Parse, fmt::format("{}: \"classes\" must be an array", sourcePath));
  for (const auto& c : classes) {
    if (!c.is_object()) throw Error(ErrorKind::Parse, fmt::format("{}: class entries must be objects", sourcePath));
    NativeClassSig sig;
    sig.name = require_string(c, "name", sourcePath);
    std::string where = fmt::format("{}: class {}", sourcePath, sig.name);
    if (auto p = c.find("parent"); p != c.end() && !p->is_null()) {
      if (!p->is_string()) throw Error(ErrorKind::Parse, fmt::format("{}: \"parent\" must be a string or null", where));
      sig.parent = p->get<std::string>();
    }
    if (auto f = c.find("fields"); f != c.end()) {
      if (!f->is_array()) throw Error(ErrorKind::Parse, fmt::format("{}: \"fields\" must be an array", where));
      for (const auto& field : *f) {
        if (!field.is_object()) throw Error(ErrorKind::Parse, fmt::format("{}: fields must be objects", where));
        NativeField nf{require_string(field, "name", where), require_string(field, "type", where)};
        if (sig.field(nf.name))
          throw Error(ErrorKind::Duplicate, fmt::format("{}: duplicate field '{}'", where, nf.name));
        sig.fields.push_back(std::move(nf));
      }
    }
    if (manifest.entries.count(sig.name))
      throw Error(ErrorKind::Duplicate, fmt::format("{}: duplicate class '{}'", sourcePath, sig.name));
    manifest.order.push_back(sig.name);
    manifest.entries.emplace(sig.name, std::move(sig));
  }
  return manifest;
}

NativeManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot read manifest '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.generic_string());
}

std::string serialize_manifest(const NativeManifest& manifest) {
  nlohmann::ordered_json doc;
  auto classes = nlohmann::ordered_json::array();
  for (const auto& name : manifest.order) {
    const auto& sig = manifest.entries.at(name);
    nlohmann::ordered_json c;
    c["name"] = sig.name;
    c["parent"] = sig.parent ? nlohmann::ordered_json(*sig.parent) : nlohmann::ordered_json();
    auto fields = nlohmann::ordered_json::array();
    for (const auto& f : sig.fields) fields.push_back({{"name", f.name}, {"type", f.type}});
    c["fields"] = std::move(fields);
    classes.push_back(std::move(c));
  }
  doc["classes"] = std::move(classes);
  return doc.dump(2) + "\n";
}

RuntimeValue NativeObject::invoke(const std::string& name, std::span<const RuntimeValue> args) const {
  auto it = behaviors.find(name);
  if (it == behaviors.end())
    throw Error(ErrorKind::NotFound, fmt::format("native object has no behavior '{}'", name));
  return it->second(args);
}

void NativeRegistry::add(std::string name, NativeFactory factory) {
  bindings_[std::move(name)] = std::move(factory);
}

const NativeFactory* NativeRegistry::find(std::string_view name) const {
  auto it = bindings_.find(name);
  return it == bindings_.end() ? nullptr : &it->second;
}

std::vector<std::string> NativeRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : bindings_) out.push_back(name);
  return out;
}

std::vector<Diagnostic> bind(const NativeRegistry& registry, const NativeManifest& manifest) {
  std::vector<Diagnostic> out;
  for (const auto& name : registry.names()) {
    if (manifest.find(name)) continue;
    out.push_back(make_error(codes::BindingWithoutEntry,
                             fmt::format("native binding '{}' has no manifest entry", name),
                             SourceSpan{manifest.sourcePath, 1, 1, 1, 1, 0, 0}));
  }
  return out;
}

}  // namespace mtalk
