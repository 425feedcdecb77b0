#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

#include <fmt/format.h>

#include "mtalk/compiler.hpp"
#include "mtalk/xml.hpp"

namespace mtalk {

// ---------------------------------------------------------------------------
// Scalar lexing. Surrounding XML whitespace is ignored for non-string types,
// matching the whitespace collapsing of the corresponding schema types.

bool lex_long(std::string_view text, std::int64_t* out) {
  std::string_view s = xml::trim_xml_whitespace(text);
  bool negative = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return false;
  std::string digits = negative ? "-" + std::string(s) : std::string(s);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return false;
  if (out) *out = value;
  return true;
}

bool lex_double(std::string_view text, double* out) {
  std::string_view s = xml::trim_xml_whitespace(text);
  std::size_t i = 0;
  auto digits = [&] {
    std::size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    return i - start;
  };
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t intDigits = digits();
  std::size_t fracDigits = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    fracDigits = digits();
  }
  if (intDigits + fracDigits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    if (digits() == 0) return false;
  }
  if (i != s.size()) return false;
  std::string copy(s);
  double value = std::strtod(copy.c_str(), nullptr);
  if (!std::isfinite(value)) return false;
  if (out) *out = value;
  return true;
}

bool lex_boolean(std::string_view text, bool* out) {
  std::string_view s = xml::trim_xml_whitespace(text);
  if (s == "true" || s == "false") {
    if (out) *out = s == "true";
    return true;
  }
  return false;
}

namespace {

bool lexes_as(BuiltinScalar type, std::string_view text) {
  switch (type) {
    case BuiltinScalar::String: return true;
    case BuiltinScalar::Long: return lex_long(text);
    case BuiltinScalar::Double: return lex_double(text);
    case BuiltinScalar::Boolean: return lex_boolean(text);
  }
  return false;
}

class Validator {
 public:
  Validator(const ResolvedModel& model, const ElementId& id, std::vector<Diagnostic>& out)
      : m_(model), id_(id), out_(out) {}

  void check_assignments(const std::vector<Assignment>& list, const ElementId& cls);
  void check_value(const Assignment& a, const PropertyDefinition& def);
  /// Class of a bean-valued expression, if it resolves to a usable class.
  std::optional<ElementId> value_class(const ValueExpr& v) const;
  /// Reason why an inherited value does not fit `type`, if it does not.
  std::optional<std::string> shallow_mismatch(const ValueExpr& v, const TypeRef& type) const;

  void error(const char* code, std::string message, const SourceSpan& span) {
    out_.push_back(make_error(code, std::move(message), span, id_));
  }

 private:
  const ResolvedModel& m_;
  const ElementId& id_;
  std::vector<Diagnostic>& out_;
};

std::optional<ElementId> Validator::value_class(const ValueExpr& v) const {
  if (const auto* r = v.reference()) {
    auto target = m_.lookup(r->target);
    if (!target) return std::nullopt;
    return m_.at(*target).classRef;
  }
  if (const auto* b = v.inlineBean()) {
    auto cls = m_.lookup(b->classRef);
    if (!cls || m_.at(*cls).kind != ElementKind::ModelClass) return std::nullopt;
    return cls;
  }
  return std::nullopt;
}

std::optional<std::string> Validator::shallow_mismatch(const ValueExpr& v, const TypeRef& type) const {
  if (!type.isResolved()) return std::nullopt;
  if (type.isScalar()) {
    const auto* s = v.scalar();
    if (!s) return fmt::format("a bean value where {} is required", type.render());
    if (!lexes_as(type.scalar, s->text)) return fmt::format("'{}', which is not a valid {}", s->text, type.render());
    return std::nullopt;
  }
  if (v.scalar()) return fmt::format("text where a {} object is required", type.render());
  auto cls = value_class(v);
  if (!cls) return std::nullopt;  // reported where the value is declared
  if (!conforms(m_, TypeRef::of(*cls), type))
    return fmt::format("type {}, which does not conform to required {}", cls->str(), type.render());
  return std::nullopt;
}

void Validator::check_value(const Assignment& a, const PropertyDefinition& def) {
  const TypeRef& type = def.type;
  if (!type.isResolved()) return;
  const ValueExpr& v = a.value;
  if (type.isScalar()) {
    if (const auto* s = v.scalar()) {
      if (!lexes_as(type.scalar, s->text))
        error(codes::TypeMismatch,
              fmt::format("'{}' is not a valid {} for property '{}'", s->text, type.render(), a.name),
              v.span);
    } else {
      error(codes::TypeMismatch,
            fmt::format("property '{}' expects {}, found a bean value", a.name, type.render()), v.span);
    }
    return;
  }
  if (v.scalar()) {
    error(codes::TypeMismatch,
          fmt::format("property '{}' expects a {} object, found text", a.name, type.render()), v.span);
    return;
  }
  if (const auto* r = v.reference()) {
    auto target = m_.lookup(r->target);
    if (!target) {
      error(codes::UnresolvedClass, fmt::format("unresolved reference '{}'", r->target.text), r->target.span);
      return;
    }
    const auto& el = m_.at(*target);
    if (el.kind == ElementKind::Instance && el.decl.isAbstract) {
      error(codes::AbstractInstantiation,
            fmt::format("'{}' is abstract and cannot be injected into '{}'", r->target.text, a.name),
            r->target.span);
    }
    if (!el.classRef) return;
    if (!conforms(m_, TypeRef::of(*el.classRef), type))
      error(codes::TypeMismatch,
            fmt::format("value type {} does not conform to required {} for property '{}'",
                        el.classRef->str(), type.render(), a.name),
            r->target.span);
    return;
  }
  const auto* b = v.inlineBean();
  auto cls = m_.lookup(b->classRef);
  if (!cls) {
    error(codes::UnresolvedClass, fmt::format("unresolved class '{}'", b->classRef.text), b->classRef.span);
    return;
  }
  if (m_.at(*cls).kind != ElementKind::ModelClass) {
    error(codes::UnresolvedClass, fmt::format("'{}' is not a model class", b->classRef.text),
          b->classRef.span);
    return;
  }
  if (!conforms(m_, TypeRef::of(*cls), type))
    error(codes::TypeMismatch,
          fmt::format("value type {} does not conform to required {} for property '{}'", cls->str(),
                      type.render(), a.name),
          b->classRef.span);
  check_assignments(b->assignments, *cls);
}

void Validator::check_assignments(const std::vector<Assignment>& list, const ElementId& cls) {
  for (const auto& a : list) {
    const PropertyDefinition* def = m_.effective_property(cls, a.name);
    if (!def) {
      error(codes::UnknownProperty, fmt::format("unknown property '{}' for class {}", a.name, cls.str()),
            a.openTagSpan);
      continue;
    }
    check_value(a, *def);
  }
}

}  // namespace

std::optional<Diagnostic> check_override(const PropertyDefinition& child,
                                         const PropertyDefinition& ancestor,
                                         const ResolvedModel& model) {
  if (!child.type.isResolved() || !ancestor.type.isResolved()) return std::nullopt;
  if (conforms(model, child.type, ancestor.type)) return std::nullopt;
  return make_error(codes::CovarianceViolation,
                    fmt::format("property '{}' is redeclared in {} with type {}, which does not conform "
                                "to {} declared in {}",
                                child.name, child.declaredBy.str(), child.type.render(),
                                ancestor.type.render(), ancestor.declaredBy.str()),
                    child.span, child.declaredBy);
}

std::vector<Diagnostic> conformance_diagnostics(const ResolvedModel& model, const ElementId& classId,
                                                const NativeManifest& manifest) {
  std::vector<Diagnostic> out;
  const auto* el = model.find(classId);
  const auto* def = model.class_def(classId);
  if (!el || !def || el->kind != ElementKind::ModelClass || el->isKernel || def->isDeclarative) return out;
  const NativeClassSig* sig = manifest.find(classId.local);
  if (!sig) {
    out.push_back(make_error(codes::NativeMismatch,
                             fmt::format("no native class '{}' in the manifest (mark the class declarative "
                                         "if it has no native counterpart)",
                                         classId.local),
                             el->decl.idSpan, classId));
    return out;
  }
  for (const auto& p : def->ownProperties) {
    if (!p.type.isResolved()) continue;
    std::string expected = p.type.isScalar() ? p.type.render() : p.type.cls.local;
    const NativeField* f = sig->field(p.name);
    if (!f) {
      out.push_back(make_error(codes::NativeMismatch,
                               fmt::format("native class '{}' lacks field '{}' of type {}", sig->name,
                                           p.name, expected),
                               p.span, classId));
    } else if (f->type != expected) {
      out.push_back(make_error(codes::NativeMismatch,
                               fmt::format("native field '{}.{}' has type {}, but the model declares {}",
                                           sig->name, p.name, f->type, expected),
                               p.span, classId));
    }
  }
  return out;
}

std::vector<Diagnostic> unbound_manifest_entries(const ResolvedModel& model,
                                                 const NativeManifest& manifest) {
  std::set<std::string> classNames;
  for (const auto& id : model.order()) {
    if (model.find(id)->kind != ElementKind::Instance) classNames.insert(id.local);
  }
  std::vector<Diagnostic> out;
  for (const auto& name : manifest.order) {
    if (classNames.count(name)) continue;
    out.push_back(make_warning(codes::UnboundNativeClass,
                               fmt::format("manifest class '{}' has no model class", name),
                               SourceSpan{manifest.sourcePath, 1, 1, 1, 1, 0, 0}));
  }
  return out;
}

std::vector<Diagnostic> check_conformance(const ResolvedModel& model, const NativeManifest& manifest) {
  std::vector<Diagnostic> out;
  for (const auto& id : model.order()) {
    auto d = conformance_diagnostics(model, id, manifest);
    out.insert(out.end(), d.begin(), d.end());
  }
  auto w = unbound_manifest_entries(model, manifest);
  out.insert(out.end(), w.begin(), w.end());
  return out;
}

std::vector<Diagnostic> validate_element(const ResolvedModel& model, const ElementId& id,
                                         const NativeManifest* manifest) {
  std::vector<Diagnostic> out = resolution_diagnostics(model, id);
  const ResolvedElement& el = model.at(id);
  const BeanDecl& decl = el.decl;
  Validator v(model, id, out);

  if (el.kind == ElementKind::Instance) {
    const bool classOk = el.classRef && model.at(*el.classRef).kind == ElementKind::ModelClass;
    if (classOk) v.check_assignments(decl.assignments, *el.classRef);
    if (el.parentRef && !model.parent_chain_has_cycle(id)) {
      const ResolvedElement& parent = model.at(*el.parentRef);
      bool compatible = false;
      if (parent.kind != ElementKind::Instance) {
        v.error(codes::IncompatibleParent,
                fmt::format("parent bean '{}' is a {}, not an instance", decl.parentRef->text,
                            to_string(parent.kind)),
                decl.parentRef->span);
      } else if (classOk && parent.classRef) {
        const auto& chain = model.lineage_of(*el.classRef);
        compatible = std::find(chain.begin(), chain.end(), *parent.classRef) != chain.end();
        if (!compatible)
          v.error(codes::IncompatibleParent,
                  fmt::format("parent bean '{}' has class {}, which is not {} or one of its superclasses",
                              decl.parentRef->text, parent.classRef->str(), el.classRef->str()),
                  decl.parentRef->span);
      }
      if (compatible) {
        // Values merged in from the parent chain must fit this bean's class.
        std::set<std::string> seen;
        for (const auto& a : decl.assignments) seen.insert(a.name);
        std::optional<ElementId> cur = el.parentRef;
        while (cur) {
          const ResolvedElement& p = model.at(*cur);
          for (const auto& a : p.decl.assignments) {
            if (!seen.insert(a.name).second) continue;
            const PropertyDefinition* def = model.effective_property(*el.classRef, a.name);
            if (!def) continue;
            if (auto why = v.shallow_mismatch(a.value, def->type))
              v.error(codes::TypeMismatch,
                      fmt::format("value of '{}' inherited from '{}' is {}", a.name, cur->str(), *why),
                      decl.parentRef->span);
          }
          cur = p.parentRef;
        }
      }
    }
  } else {
    const ClassDef& def = *model.class_def(id);
    const bool metaOk = el.classRef && model.at(*el.classRef).kind == ElementKind::Metaclass;
    // Classes are instances of their metaclass: the same routine applies.
    if (metaOk) v.check_assignments(def.classLevelAssignments, *el.classRef);
    if (el.kind == ElementKind::ModelClass && el.parentRef &&
        model.at(*el.parentRef).kind == ElementKind::Instance) {
      v.error(codes::IncompatibleParent,
              fmt::format("superclass '{}' is an instance, not a class", decl.parentRef->text),
              decl.parentRef->span);
    }
    const auto& chain = model.lineage_of(id);
    for (const auto& p : def.ownProperties) {
      for (std::size_t i = 1; i < chain.size(); ++i) {
        const ClassDef* anc = model.class_def(chain[i]);
        auto it = std::find_if(anc->ownProperties.begin(), anc->ownProperties.end(),
                               [&](const PropertyDefinition& q) { return q.name == p.name; });
        if (it == anc->ownProperties.end()) continue;
        if (auto d = check_override(p, *it, model)) out.push_back(std::move(*d));
        break;
      }
    }
    if (metaOk) {
      // Class-level values inherited along the superclass chain.
      std::set<std::string> seen;
      for (const auto& a : def.classLevelAssignments) seen.insert(a.name);
      for (std::size_t i = 1; i < chain.size(); ++i) {
        const ClassDef* anc = model.class_def(chain[i]);
        for (const auto& a : anc->classLevelAssignments) {
          const PropertyDefinition* mp = model.effective_property(*el.classRef, a.name);
          if (!mp || !seen.insert(a.name).second) continue;
          if (auto why = v.shallow_mismatch(a.value, mp->type))
            v.error(codes::TypeMismatch,
                    fmt::format("class-level value of '{}' inherited from {} is {}", a.name,
                                chain[i].str(), *why),
                    decl.parentRef ? decl.parentRef->span : decl.idSpan);
        }
      }
    }
    if (manifest) {
      auto d = conformance_diagnostics(model, id, *manifest);
      out.insert(out.end(), d.begin(), d.end());
    }
  }

  if (auto cyc = model.construction_cycle(id)) {
    v.error(codes::ReferenceCycle,
            fmt::format("building this bean never terminates: reference cycle through '{}'", cyc->str()),
            decl.idSpan);
  }
  return out;
}

}  // namespace mtalk
