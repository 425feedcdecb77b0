#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mtalk/element_id.hpp"

namespace mtalk {

/// A region of a source file. Lines and columns are 1-based and count bytes;
/// offsets are 0-based byte offsets into the file, end-exclusive.
struct SourceSpan {
  std::string path;
  int line = 1;
  int column = 1;
  int endLine = 1;
  int endColumn = 1;
  std::size_t offset = 0;
  std::size_t endOffset = 0;

  bool operator==(const SourceSpan&) const = default;
  std::strong_ordering operator<=>(const SourceSpan& other) const;

  bool contains(const SourceSpan& inner) const {
    return inner.path == path && inner.offset >= offset && inner.endOffset <= endOffset;
  }
};

enum class Severity { Error, Warning };

std::string_view to_string(Severity s);

// Codes are stable. E-codes are model errors, W-codes warnings,
// P-codes parse problems, S-codes schema validation failures.
namespace codes {
inline constexpr const char* UnresolvedClass = "E001";
inline constexpr const char* UnknownProperty = "E002";
inline constexpr const char* TypeMismatch = "E003";
inline constexpr const char* InheritanceCycle = "E004";
inline constexpr const char* AbstractInstantiation = "E005";
inline constexpr const char* CovarianceViolation = "E006";
inline constexpr const char* NativeMismatch = "E007";
inline constexpr const char* DuplicateId = "E008";
inline constexpr const char* UnresolvedParent = "E009";
inline constexpr const char* IncompatibleParent = "E010";
inline constexpr const char* ReservedName = "E011";
inline constexpr const char* UnresolvedPropertyType = "E012";
inline constexpr const char* PropertiesOnInstance = "E013";
inline constexpr const char* ReferenceCycle = "E014";
inline constexpr const char* UnboundNativeClass = "W001";
inline constexpr const char* ManifestNotRenamed = "W002";
inline constexpr const char* XmlSyntax = "P001";
inline constexpr const char* BadBeanAttribute = "P002";
inline constexpr const char* UnexpectedElement = "P003";
inline constexpr const char* BadValue = "P004";
inline constexpr const char* Unreadable = "P005";
inline constexpr const char* BindingWithoutEntry = "N001";
inline constexpr const char* SchemaViolation = "S001";
}  // namespace codes

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::optional<ElementId> element;
  SourceSpan span;

  bool isError() const { return severity == Severity::Error; }
  bool operator==(const Diagnostic&) const = default;
};

/// Total order: path, position, code, message, element.
bool diagnostic_less(const Diagnostic& a, const Diagnostic& b);
void sort_diagnostics(std::vector<Diagnostic>& diags);
bool has_errors(const std::vector<Diagnostic>& diags);

Diagnostic make_error(std::string code, std::string message, SourceSpan span,
                      std::optional<ElementId> element = std::nullopt);
Diagnostic make_warning(std::string code, std::string message, SourceSpan span,
                        std::optional<ElementId> element = std::nullopt);

/// `path:line:col: severity[code] message (element)`
std::string render_line(const Diagnostic& d);
/// JSON array with one object per diagnostic.
std::string render_json(const std::vector<Diagnostic>& diags);

}  // namespace mtalk
