#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mtalk/diagnostic.hpp"
#include "mtalk/element_id.hpp"
#include "mtalk/source.hpp"

namespace mtalk {

enum class BuiltinScalar { String, Long, Boolean, Double };

std::string_view to_string(BuiltinScalar s);
std::optional<BuiltinScalar> builtin_scalar(std::string_view name);

struct TypeRef {
  enum class Kind { Scalar, Class, Unresolved };

  Kind kind = Kind::Unresolved;
  BuiltinScalar scalar = BuiltinScalar::String;
  ElementId cls;
  std::string text;  // as written, for messages

  static TypeRef of(BuiltinScalar s);
  static TypeRef of(ElementId cls);

  bool isScalar() const { return kind == Kind::Scalar; }
  bool isClass() const { return kind == Kind::Class; }
  bool isResolved() const { return kind != Kind::Unresolved; }
  /// Builtin name or the class id rendering.
  std::string render() const;

  bool operator==(const TypeRef& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Scalar) return scalar == o.scalar;
    if (kind == Kind::Class) return cls == o.cls;
    return text == o.text;
  }
};

struct PropertyDefinition {
  std::string name;
  TypeRef type;
  std::string description;
  ElementId declaredBy;
  SourceSpan span;

  bool operator==(const PropertyDefinition&) const = default;
};

enum class ElementKind { Metaclass, ModelClass, Instance };

std::string_view to_string(ElementKind k);

struct ClassDef {
  ElementId id;
  ElementId metaclass;              // the bean's classRef (may be unresolved)
  std::optional<ElementId> parent;  // superclass; Object when omitted
  std::vector<PropertyDefinition> ownProperties;
  std::vector<Assignment> classLevelAssignments;
  bool isDeclarative = false;
  bool isAbstract = false;
};

struct ResolvedElement {
  BeanDecl decl;
  ElementKind kind = ElementKind::Instance;
  std::string unitPath;
  bool isKernel = false;
  std::optional<ElementId> classRef;   // resolved target of `class`
  std::optional<ElementId> parentRef;  // resolved target of `parent`
};

inline const ElementId kObjectId{"", "Object"};
inline const ElementId kClassId{"", "Class"};

/// Immutable snapshot of a resolved workspace. All derived tables (lineages,
/// effective properties, construction cycles) are computed eagerly so that the
/// snapshot can be shared across threads without synchronization.
class ResolvedModel {
 public:
  const ResolvedElement* find(const ElementId& id) const;
  const ResolvedElement& at(const ElementId& id) const;  // throws Error(NotFound)
  const ClassDef* class_def(const ElementId& id) const;

  /// Kernel elements first, then user elements in (unit path, position) order.
  const std::vector<ElementId>& order() const { return order_; }
  const std::set<ElementId>& kernel_ids() const { return kernelIds_; }

  /// Looks `ref` up: exact id first, then the empty namespace for
  /// unqualified names.
  std::optional<ElementId> lookup(const NameRef& ref) const;
  /// Resolves a `<type>` reference: builtin scalar names win for unqualified
  /// names.
  TypeRef resolve_type(const NameRef& ref) const;

  const std::vector<ElementId>& lineage_of(const ElementId& classId) const;
  bool lineage_has_cycle(const ElementId& classId) const;
  /// Parent-attribute chain of any bean repeats.
  bool parent_chain_has_cycle(const ElementId& id) const;
  const std::vector<PropertyDefinition>& effective_properties_of(const ElementId& classId) const;
  const PropertyDefinition* effective_property(const ElementId& classId, std::string_view name) const;
  /// Set when constructing the element at runtime would recurse forever;
  /// holds an element on the offending cycle.
  std::optional<ElementId> construction_cycle(const ElementId& id) const;

  /// Diagnostics that are not tied to one surviving element (E008, E011).
  const std::vector<Diagnostic>& declaration_diagnostics() const { return declarationDiags_; }
  std::uint64_t source_hash() const { return sourceHash_; }
  std::size_t size() const { return elements_.size(); }

 private:
  friend class ModelBuilder;

  std::unordered_map<ElementId, ResolvedElement, ElementIdHash> elements_;
  std::unordered_map<ElementId, ClassDef, ElementIdHash> classes_;
  std::unordered_map<ElementId, std::vector<ElementId>, ElementIdHash> lineages_;
  std::set<ElementId> cyclicLineages_;
  std::set<ElementId> cyclicParentChains_;
  std::unordered_map<ElementId, std::vector<PropertyDefinition>, ElementIdHash> effective_;
  std::unordered_map<ElementId, ElementId, ElementIdHash> constructionCycles_;
  std::vector<ElementId> order_;
  std::set<ElementId> kernelIds_;
  std::vector<Diagnostic> declarationDiags_;
  std::uint64_t sourceHash_ = 0;
};

struct ResolveResult {
  std::shared_ptr<const ResolvedModel> model;
  std::vector<Diagnostic> diagnostics;
};

/// The built-in model source defining Object and Class.
std::string_view kernel_source();
inline constexpr std::string_view kKernelPath = "<kernel>";

/// Kernel alone, compiled through the ordinary pipeline.
std::shared_ptr<const ResolvedModel> bootstrap_kernel();

/// Merges the kernel with `units` (in the given order; earlier declarations
/// win on duplicate ids), resolves names and classifies every bean. Never
/// aborts: unresolved names are reported and resolution continues.
ResolveResult resolve(const std::vector<SourceUnit>& units);

ElementKind classify(const ResolvedModel& model, const ElementId& id);
std::vector<ElementId> lineage(const ResolvedModel& model, const ElementId& classId);
std::vector<PropertyDefinition> effective_properties(const ResolvedModel& model,
                                                     const ElementId& classId);
bool conforms(const ResolvedModel& model, const TypeRef& t, const TypeRef& u);

/// Name-resolution problems of a single element: E001, E004, E009, E012,
/// E013.
std::vector<Diagnostic> resolution_diagnostics(const ResolvedModel& model, const ElementId& id);

}  // namespace mtalk
