#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtalk/diagnostic.hpp"

// A small non-validating XML reader that keeps byte-accurate spans for every
// name, attribute value and text run, and recovers from errors so that one
// broken element does not take its siblings down with it.
namespace mtalk::xml {

struct Problem {
  std::string message;
  SourceSpan span;
};

struct Attribute {
  std::string name;
  std::string value;  // entity-decoded
  SourceSpan nameSpan;
  SourceSpan valueSpan;  // raw text between the quotes
};

struct Text {
  std::string value;  // entity-decoded
  SourceSpan span;
};

struct Element {
  std::string name;  // qualified name as written
  std::string localName;
  std::string nsUri;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  std::vector<Text> texts;
  SourceSpan span;      // '<' of the start tag through '>' of the end tag
  SourceSpan nameSpan;  // name inside the start tag
  std::optional<SourceSpan> closeNameSpan;  // name inside the end tag
  bool malformed = false;
  std::optional<Problem> firstProblem;

  const Attribute* attribute(std::string_view attrName) const;
  std::string text() const;
  bool hasNonWhitespaceText() const;
};

struct Document {
  std::optional<Element> root;
  // Problems outside any child of the root. Problems inside a child are
  // recorded on that child (and its open ancestors) instead.
  std::vector<Problem> problems;
};

struct ParseOptions {
  // Start tags with these names may only appear directly under the root; if
  // one shows up deeper, the open elements are closed (and marked malformed)
  // so the new element starts at depth one.
  std::vector<std::string> resyncAtDepthOne;
};

Document parse(std::string_view text, const std::string& path, const ParseOptions& options = {});

std::string escape_text(std::string_view raw);
std::string escape_attribute(std::string_view raw);
bool is_xml_whitespace(char c);
std::string_view trim_xml_whitespace(std::string_view s);
bool is_ncname(std::string_view s);

}  // namespace mtalk::xml
