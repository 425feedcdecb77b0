#include "mtalk/diagnostic.hpp"

#include <algorithm>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mtalk/error.hpp"

namespace mtalk {

// ---------------------------------------------------------------------------
// ElementId

ElementId ElementId::parse(std::string_view text) {
  auto pos = text.rfind(':');
  if (pos == std::string_view::npos) return ElementId{"", std::string(text)};
  return ElementId{std::string(text.substr(0, pos)), std::string(text.substr(pos + 1))};
}

std::string ElementId::str() const {
  if (ns == "#") return local;
  if (ns.empty()) return local;
  return ns + ":" + local;
}

bool is_valid_local_name(std::string_view name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return c == ':' || c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
}

const ElementId& unresolved_node() {
  static const ElementId id{"#", "\xe2\x8a\xa5unresolved"};
  return id;
}

ElementId native_node(std::string_view className) {
  return ElementId{"#native", std::string(className)};
}

bool is_native_node(const ElementId& id) { return id.ns == "#native"; }

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::WrongKind: return "wrong-kind";
    case ErrorKind::AbstractInstantiation: return "E005";
    case ErrorKind::Refused: return "refused";
    case ErrorKind::Instantiation: return "instantiation";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Duplicate: return "duplicate";
    case ErrorKind::Collision: return "collision";
    case ErrorKind::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Spans and diagnostics

std::strong_ordering SourceSpan::operator<=>(const SourceSpan& o) const {
  return std::tie(path, line, column, endLine, endColumn, offset, endOffset) <=>
         std::tie(o.path, o.line, o.column, o.endLine, o.endColumn, o.offset, o.endOffset);
}

std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

bool diagnostic_less(const Diagnostic& a, const Diagnostic& b) {
  if (auto c = a.span <=> b.span; c != 0) return c < 0;
  if (a.code != b.code) return a.code < b.code;
  if (a.message != b.message) return a.message < b.message;
  if (a.severity != b.severity) return a.severity < b.severity;
  return a.element < b.element;
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::sort(diags.begin(), diags.end(), diagnostic_less);
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.isError(); });
}

Diagnostic make_error(std::string code, std::string message, SourceSpan span,
                      std::optional<ElementId> element) {
  return Diagnostic{Severity::Error, std::move(code), std::move(message), std::move(element),
                    std::move(span)};
}

Diagnostic make_warning(std::string code, std::string message, SourceSpan span,
                        std::optional<ElementId> element) {
  return Diagnostic{Severity::Warning, std::move(code), std::move(message), std::move(element),
                    std::move(span)};
}

std::string render_line(const Diagnostic& d) {
  std::string out = fmt::format("{}:{}:{}: {}[{}] {}", d.span.path, d.span.line, d.span.column,
                                to_string(d.severity), d.code, d.message);
  if (d.element) out += fmt::format(" ({})", d.element->str());
  return out;
}

std::string render_json(const std::vector<Diagnostic>& diags) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& d : diags) {
    nlohmann::ordered_json j;
    j["severity"] = to_string(d.severity);
    j["code"] = d.code;
    j["message"] = d.message;
    j["element"] = d.element ? nlohmann::ordered_json(d.element->str()) : nlohmann::ordered_json();
    j["span"] = {{"path", d.span.path},
                 {"line", d.span.line},
                 {"column", d.span.column},
                 {"endLine", d.span.endLine},
                 {"endColumn", d.span.endColumn}};
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

}  // namespace mtalk
