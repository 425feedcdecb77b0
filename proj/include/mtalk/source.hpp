#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtalk/diagnostic.hpp"
#include "mtalk/element_id.hpp"

namespace mtalk {

/// A name written in a model source: `class`, `parent`, `ref` attributes and
/// `<type>` texts. Unqualified names carry the unit namespace in `id` and fall
/// back to the empty namespace during lookup.
struct NameRef {
  ElementId id;
  bool qualified = false;
  std::string text;  // as written
  SourceSpan span;   // raw text of the name

  bool operator==(const NameRef&) const = default;
};

struct Assignment;

struct ScalarLiteral {
  std::string text;  // raw; typed during validation
  bool operator==(const ScalarLiteral&) const = default;
};

struct Reference {
  NameRef target;
  bool operator==(const Reference&) const = default;
};

/// Anonymous nested bean, e.g. `<cache class="StandardCache">...</cache>`.
struct InlineBean {
  NameRef classRef;
  std::vector<Assignment> assignments;
  bool operator==(const InlineBean& other) const;
};

struct ValueExpr {
  std::variant<ScalarLiteral, Reference, InlineBean> value;
  SourceSpan span;

  const ScalarLiteral* scalar() const { return std::get_if<ScalarLiteral>(&value); }
  const Reference* reference() const { return std::get_if<Reference>(&value); }
  const InlineBean* inlineBean() const { return std::get_if<InlineBean>(&value); }
  bool operator==(const ValueExpr&) const = default;
};

/// One tag-named property value. Tag spans are kept for rename.
struct Assignment {
  std::string name;
  ValueExpr value;
  SourceSpan openTagSpan;
  std::optional<SourceSpan> closeTagSpan;
  SourceSpan span;

  bool operator==(const Assignment&) const = default;
};

const Assignment* find_assignment(const std::vector<Assignment>& list, std::string_view name);

struct RawPropertyDef {
  std::string name;
  SourceSpan nameSpan;
  NameRef typeRef;
  std::string description;
  SourceSpan span;

  bool operator==(const RawPropertyDef&) const = default;
};

struct BeanDecl {
  ElementId id;
  SourceSpan idSpan;
  NameRef classRef;
  std::optional<NameRef> parentRef;
  bool isAbstract = false;
  bool isDeclarative = false;
  std::vector<Assignment> assignments;
  std::optional<std::vector<RawPropertyDef>> propertyDefs;
  SourceSpan span;

  bool operator==(const BeanDecl&) const = default;
};

struct SourceUnit {
  std::string path;
  std::string ns;
  std::vector<BeanDecl> beans;
  std::vector<Diagnostic> parseDiagnostics;
  std::uint64_t contentHash = 0;

  const BeanDecl* find(const ElementId& id) const;
};

/// Parses one model file. Never throws; problems become diagnostics and a
/// malformed bean is dropped without affecting its siblings.
SourceUnit parse_unit(std::string_view text, const std::string& path);

struct WorkspaceParse {
  std::vector<SourceUnit> units;
  std::vector<Diagnostic> diagnostics;  // unreadable files, cross-unit E008
};

/// Recursively loads `*.model.xml` below `root` in sorted path order. Unit
/// paths are relative to `root` with '/' separators.
WorkspaceParse parse_workspace(const std::filesystem::path& root);

std::vector<std::filesystem::path> discover_model_files(const std::filesystem::path& root);

/// Span of the declaration of `id`. Throws Error(NotFound).
SourceSpan span_of(const SourceUnit& unit, const ElementId& id);

/// Serializes beans back to the model dialect (used by generators and edit
/// scripts). Spans of the input are ignored.
std::string write_unit(const std::string& ns, const std::vector<BeanDecl>& beans);

/// Builds an unqualified or qualified reference for programmatic bean
/// construction.
NameRef make_ref(std::string_view text, const std::string& unitNs);

inline constexpr std::string_view kModelFileSuffix = ".model.xml";

}  // namespace mtalk
