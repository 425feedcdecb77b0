#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtalk/compiler.hpp"
#include "mtalk/native.hpp"

namespace mtalk {

/// An injected object. Immutable once published by the VM.
struct RuntimeInstance {
  ElementId classId;
  std::optional<std::string> nativeBinding;
  std::vector<std::pair<std::string, RuntimeValue>> values;  // injection order
  /// Set when this is a reified class: the class it describes.
  std::optional<ElementId> reifies;
  /// Produced by the registered factory for `nativeBinding`, if any.
  std::shared_ptr<NativeObject> native;

  const RuntimeValue* value(std::string_view name) const;
  bool isMetaView() const { return reifies.has_value(); }
};

/// Runs an error-free compiled model. Reads may come from any thread;
/// reload() swaps the whole snapshot at once.
class ModelVm {
 public:
  /// Throws Error(Refused) if the model has errors.
  ModelVm(CompiledModel compiled, NativeRegistry registry = {});
  ~ModelVm();

  ModelVm(const ModelVm&) = delete;
  ModelVm& operator=(const ModelVm&) = delete;

  /// Own assignments merged with those of the parent-bean chain; the nearest
  /// declaration wins.
  std::map<std::string, ValueExpr> effective_values(const ElementId& beanId) const;

  /// Named beans are built once per snapshot and shared.
  InstancePtr get_instance(const ElementId& beanId) const;
  InstancePtr get_instance(std::string_view beanId) const { return get_instance(ElementId::parse(beanId)); }

  /// Nearest class in the lineage that is not declarative and has a
  /// manifest entry.
  std::optional<std::string> resolve_native(const ElementId& classId) const;

  /// The class of `instance` reified as an instance of its metaclass.
  InstancePtr get_class(const RuntimeInstance& instance) const;
  InstancePtr get_class(const ElementId& classId) const;

  bool is_instance_of(const RuntimeInstance& instance, const ElementId& classId) const;
  std::vector<PropertyDefinition> reflect_properties(const ElementId& classId) const;

  /// Throws Error(Refused) and keeps serving the old model if `next` has errors.
  void reload(CompiledModel next);

  CompiledModel current() const;
  std::uint64_t generation() const;

  /// Injection soundness: problems found walking `instance` (empty if sound).
  std::vector<std::string> audit(const RuntimeInstance& instance) const;

 private:
  struct Snapshot;
  std::shared_ptr<Snapshot> snapshot() const;

  mutable std::mutex mutex_;
  std::shared_ptr<Snapshot> current_;
  NativeRegistry registry_;
  std::uint64_t generation_ = 0;
};

/// `{ "class": ..., "native": ...|null, "values": {...} }`, keys in injection
/// order.
std::string dump_instance(const RuntimeInstance& instance, int indent = 2);

}  // namespace mtalk
