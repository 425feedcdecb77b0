#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mtalk/compiler.hpp"
#include "mtalk/diagnostic.hpp"

namespace mtalk {

/// One XSD 1.0 document per target namespace.
struct SchemaFile {
  std::string targetNamespace;  // empty for the root document
  std::string fileName;         // relative to the root document
  std::string text;
};

/// Generated schema set. `text` is the root document: the definitions for
/// the empty namespace plus an xs:import for every other namespace.
struct SchemaDoc {
  std::string text;
  std::vector<SchemaFile> imports;
  std::uint64_t generatedFrom = 0;

  /// Root first, then the imports.
  std::vector<SchemaFile> files(const std::string& rootFileName) const;
};

/// Deterministic for a given model. Broken classes degrade to open content.
/// `rootFileName` determines the names of the imported documents
/// (`schema.xsd` -> `schema.1.xsd`, ...).
SchemaDoc generate_schema(const CompiledModel& compiled, const std::string& rootFileName = "schema.xsd");

/// Writes the root document to `path` and the imports next to it.
void write_schema(const SchemaDoc& schema, const std::filesystem::path& path);

/// Validates one model unit against the schema for its root namespace.
/// Violations are S001 diagnostics. Throws Error(Parse) if a schema document
/// cannot be read.
std::vector<Diagnostic> validate_with_schema(const SchemaDoc& schema, std::string_view unitText,
                                             const std::string& path = "");

}  // namespace mtalk
