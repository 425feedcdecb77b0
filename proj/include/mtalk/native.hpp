#pragma once

#include <any>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtalk/diagnostic.hpp"

namespace mtalk {

struct NativeField {
  std::string name;
  std::string type;
  bool operator==(const NativeField&) const = default;
};

/// Structural signature of a host-provided class.
struct NativeClassSig {
  std::string name;
  std::optional<std::string> parent;
  std::vector<NativeField> fields;

  const NativeField* field(std::string_view fieldName) const;
  bool operator==(const NativeClassSig&) const = default;
};

struct NativeManifest {
  std::map<std::string, NativeClassSig> entries;
  std::vector<std::string> order;  // declaration order, for serialization
  std::string sourcePath;

  const NativeClassSig* find(std::string_view name) const;
  std::uint64_t hash() const;
};

/// Parses `{ "classes": [ { "name", "parent", "fields": [ {"name","type"} ] } ] }`.
/// Throws Error(Parse) on malformed input and Error(Duplicate) on repeated
/// class or field names.
NativeManifest parse_manifest(std::string_view text, const std::string& sourcePath = "");
NativeManifest load_manifest(const std::filesystem::path& path);
std::string serialize_manifest(const NativeManifest& manifest);

struct RuntimeInstance;
using InstancePtr = std::shared_ptr<const RuntimeInstance>;
using RuntimeValue = std::variant<std::int64_t, double, bool, std::string, InstancePtr>;

/// What a native factory hands back: opaque state plus named behaviors.
struct NativeObject {
  using Behavior = std::function<RuntimeValue(std::span<const RuntimeValue>)>;

  std::any state;
  std::map<std::string, Behavior> behaviors;

  RuntimeValue invoke(const std::string& name, std::span<const RuntimeValue> args = {}) const;
};

/// Receives the fully injected instance. Must be safe to call concurrently.
using NativeFactory = std::function<std::shared_ptr<NativeObject>(const RuntimeInstance&)>;

class NativeRegistry {
 public:
  void add(std::string name, NativeFactory factory);
  const NativeFactory* find(std::string_view name) const;
  std::vector<std::string> names() const;
  bool empty() const { return bindings_.empty(); }

 private:
  std::map<std::string, NativeFactory, std::less<>> bindings_;
};

/// Every registered binding needs a manifest entry (N001 otherwise).
std::vector<Diagnostic> bind(const NativeRegistry& registry, const NativeManifest& manifest);

}  // namespace mtalk
