// Validator for the XSD 1.0 subset that generate_schema emits: global
// elements, named and anonymous complex types with sequence/choice/all/any
// particles, attributes with anyAttribute, simple types restricting a builtin
// by enumeration or pattern, and xs:import between the generated documents.

#include <charconv>
#include <map>
#include <optional>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "mtalk/error.hpp"
#include "mtalk/schema.hpp"
#include "mtalk/xml.hpp"

namespace mtalk {

namespace {

constexpr std::string_view kXs = "http://www.w3.org/2001/XMLSchema";

std::string key(std::string_view ns, std::string_view local) { return fmt::format("{{{}}}{}", ns, local); }

struct SimpleType {
  std::string builtin;  // long, double, boolean, string
  std::set<std::string> enumeration;
  std::vector<std::regex> patterns;
};

struct Particle {
  enum class Kind { Element, Any, Sequence, Choice, All };
  Kind kind = Kind::Element;
  int min = 1;
  int max = 1;  // -1: unbounded
  std::string name;
  std::string ns;
  std::string type;  // key of the element type
  std::vector<Particle> children;
};

struct AttributeDecl {
  std::string name;
  std::string type;
  bool required = false;
};

struct ComplexType {
  bool mixed = false;
  std::optional<Particle> content;
  std::vector<AttributeDecl> attributes;
  bool anyAttribute = false;
};

struct ElementDecl {
  std::string name;
  std::string type;
};

struct SchemaSet {
  std::map<std::string, ElementDecl> globals;  // by key
  std::map<std::string, ComplexType> complexTypes;
  std::map<std::string, SimpleType> simpleTypes;
};

// ---------------------------------------------------------------------------
// Loading

class Loader {
 public:
  Loader(SchemaSet& set, const xml::Element& root, const std::string& fileName)
      : set_(set), file_(fileName) {
    if (root.localName != "schema" || root.nsUri != kXs) fail("root element is not xs:schema");
    if (const auto* tn = root.attribute("targetNamespace")) target_ = tn->value;
    for (const auto& a : root.attributes) {
      if (a.name == "xmlns") prefixes_[""] = a.value;
      else if (a.name.rfind("xmlns:", 0) == 0) prefixes_[a.name.substr(6)] = a.value;
    }
    if (const auto* f = root.attribute("elementFormDefault")) qualified_ = f->value == "qualified";
    for (const auto& c : root.children) top_level(c);
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorKind::Parse, fmt::format("schema {}: {}", file_, why));
  }

  std::string qname(std::string_view text) const {
    auto colon = text.find(':');
    std::string prefix = colon == std::string_view::npos ? "" : std::string(text.substr(0, colon));
    std::string local(colon == std::string_view::npos ? text : text.substr(colon + 1));
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) {
      if (!prefix.empty()) fail(fmt::format("undeclared prefix in '{}'", text));
      return key("", local);
    }
    return key(it->second, local);
  }

  const std::string& required(const xml::Element& e, const char* attr) const {
    const auto* a = e.attribute(attr);
    if (!a) fail(fmt::format("<{}> lacks '{}'", e.name, attr));
    return a->value;
  }

  bool is_xs(const xml::Element& e, std::string_view local) const {
    return e.nsUri == kXs && e.localName == local;
  }

  void top_level(const xml::Element& e) {
    if (e.nsUri != kXs) fail(fmt::format("unexpected <{}>", e.name));
    if (e.localName == "annotation" || e.localName == "import") return;
    if (e.localName == "element") {
      ElementDecl d{required(e, "name"), element_type(e)};
      set_.globals[key(target_, d.name)] = d;
    } else if (e.localName == "complexType") {
      set_.complexTypes[key(target_, required(e, "name"))] = complex_type(e);
    } else if (e.localName == "simpleType") {
      set_.simpleTypes[key(target_, required(e, "name"))] = simple_type(e);
    } else {
      fail(fmt::format("unsupported <{}>", e.name));
    }
  }

  std::string element_type(const xml::Element& e) {
    if (const auto* t = e.attribute("type")) return qname(t->value);
    for (const auto& c : e.children) {
      std::string anon = fmt::format("#anon{}", set_.complexTypes.size() + set_.simpleTypes.size());
      if (is_xs(c, "complexType")) {
        set_.complexTypes[anon] = complex_type(c);
        return anon;
      }
      if (is_xs(c, "simpleType")) {
        set_.simpleTypes[anon] = simple_type(c);
        return anon;
      }
    }
    return key(kXs, "anyType");
  }

  static int occurs(const xml::Element& e, const char* attr) {
    const auto* a = e.attribute(attr);
    if (!a) return 1;
    if (a->value == "unbounded") return -1;
    return std::stoi(a->value);
  }

  Particle particle(const xml::Element& e) {
    Particle p;
    p.min = occurs(e, "minOccurs");
    p.max = occurs(e, "maxOccurs");
    if (is_xs(e, "element")) {
      p.kind = Particle::Kind::Element;
      if (const auto* ref = e.attribute("ref")) {
        std::string k = qname(ref->value);
        p.name = k.substr(k.find('}') + 1);
        p.ns = k.substr(1, k.find('}') - 1);
        refs_.emplace_back(k);
        p.type = "#ref:" + k;
      } else {
        p.name = required(e, "name");
        p.ns = qualified_ ? target_ : "";
        p.type = element_type(e);
      }
    } else if (is_xs(e, "any")) {
      p.kind = Particle::Kind::Any;
    } else if (is_xs(e, "sequence") || is_xs(e, "choice") || is_xs(e, "all")) {
      p.kind = e.localName == "sequence" ? Particle::Kind::Sequence
               : e.localName == "choice" ? Particle::Kind::Choice
                                         : Particle::Kind::All;
      for (const auto& c : e.children) {
        if (is_xs(c, "annotation")) continue;
        p.children.push_back(particle(c));
      }
    } else {
      fail(fmt::format("unsupported particle <{}>", e.name));
    }
    return p;
  }

  ComplexType complex_type(const xml::Element& e) {
    ComplexType t;
    if (const auto* m = e.attribute("mixed")) t.mixed = m->value == "true" || m->value == "1";
    for (const auto& c : e.children) {
      if (is_xs(c, "annotation")) continue;
      if (is_xs(c, "attribute")) {
        const auto* use = c.attribute("use");
        t.attributes.push_back({required(c, "name"),
                                c.attribute("type") ? qname(c.attribute("type")->value) : key(kXs, "string"),
                                use && use->value == "required"});
      } else if (is_xs(c, "anyAttribute")) {
        t.anyAttribute = true;
      } else {
        t.content = particle(c);
      }
    }
    return t;
  }

  SimpleType simple_type(const xml::Element& e) {
    SimpleType t;
    t.builtin = "string";
    for (const auto& r : e.children) {
      if (!is_xs(r, "restriction")) continue;
      std::string base = qname(required(r, "base"));
      if (base.rfind(key(kXs, ""), 0) != 0) fail("only builtin restriction bases are supported");
      t.builtin = base.substr(key(kXs, "").size());
      for (const auto& f : r.children) {
        if (is_xs(f, "enumeration")) t.enumeration.insert(required(f, "value"));
        else if (is_xs(f, "pattern")) t.patterns.emplace_back(required(f, "value"));
      }
    }
    return t;
  }

  SchemaSet& set_;
  std::string file_;
  std::string target_;
  bool qualified_ = false;
  std::map<std::string, std::string> prefixes_;
  std::vector<std::string> refs_;
};

// ---------------------------------------------------------------------------
// Validation

bool builtin_ok(const std::string& builtin, std::string_view raw) {
  if (builtin == "string" || builtin == "anySimpleType") return true;
  // Everything else collapses whitespace; none of them allow inner spaces.
  std::string_view v = xml::trim_xml_whitespace(raw);
  if (builtin == "boolean") return v == "true" || v == "false" || v == "1" || v == "0";
  if (builtin == "long") {
    static const std::regex re("[+-]?[0-9]+");
    if (!std::regex_match(v.begin(), v.end(), re)) return false;
    std::string digits(v[0] == '+' ? v.substr(1) : v);
    std::int64_t x;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), x);
    return ec == std::errc() && ptr == digits.data() + digits.size();
  }
  if (builtin == "double") {
    static const std::regex re("[+-]?([0-9]+(\\.[0-9]*)?|\\.[0-9]+)([Ee][+-]?[0-9]+)?|-?INF|NaN");
    return std::regex_match(v.begin(), v.end(), re);
  }
  return true;
}

class Checker {
 public:
  Checker(const SchemaSet& set, std::vector<Diagnostic>& out) : set_(set), out_(out) {}

  void element(const xml::Element& e, const std::string& type);

 private:
  void violation(std::string message, const SourceSpan& span) {
    out_.push_back(make_error(codes::SchemaViolation, std::move(message), span));
  }
  bool simple_ok(const std::string& type, std::string_view value) const;
  void complex(const xml::Element& e, const ComplexType& t);
  std::set<std::size_t> match(const Particle& p, const std::vector<xml::Element>& kids,
                              const std::set<std::size_t>& from) const;
  std::set<std::size_t> match_once(const Particle& p, const std::vector<xml::Element>& kids,
                                   const std::set<std::size_t>& from) const;
  const Particle* find_decl(const Particle& p, const xml::Element& e) const;

  const SchemaSet& set_;
  std::vector<Diagnostic>& out_;
};

bool Checker::simple_ok(const std::string& type, std::string_view value) const {
  auto xsPrefix = key(kXs, "");
  if (type.rfind(xsPrefix, 0) == 0) return builtin_ok(type.substr(xsPrefix.size()), value);
  const SimpleType& t = set_.simpleTypes.at(type);
  if (!builtin_ok(t.builtin, value)) return false;
  std::string v(t.builtin == "string" ? value : xml::trim_xml_whitespace(value));
  if (!t.enumeration.empty() && !t.enumeration.count(v)) return false;
  for (const auto& re : t.patterns)
    if (!std::regex_match(v, re)) return false;
  return true;
}

bool matches_name(const Particle& p, const xml::Element& e) {
  if (p.kind == Particle::Kind::Any) return true;
  return p.kind == Particle::Kind::Element && e.localName == p.name && e.nsUri == p.ns;
}

std::set<std::size_t> Checker::match_once(const Particle& p, const std::vector<xml::Element>& kids,
                                          const std::set<std::size_t>& from) const {
  std::set<std::size_t> out;
  switch (p.kind) {
    case Particle::Kind::Element:
    case Particle::Kind::Any:
      for (auto s : from)
        if (s < kids.size() && matches_name(p, kids[s])) out.insert(s + 1);
      return out;
    case Particle::Kind::Sequence: {
      std::set<std::size_t> cur = from;
      for (const auto& c : p.children) cur = match(c, kids, cur);
      return cur;
    }
    case Particle::Kind::Choice:
      for (const auto& c : p.children) {
        auto r = match(c, kids, from);
        out.insert(r.begin(), r.end());
      }
      return out;
    case Particle::Kind::All:
      for (auto s : from) {
        std::map<const Particle*, int> seen;
        std::size_t i = s;
        for (; i < kids.size(); ++i) {
          const Particle* hit = nullptr;
          for (const auto& c : p.children)
            if (matches_name(c, kids[i])) hit = &c;
          if (!hit || seen[hit] == 1) break;
          seen[hit] = 1;
        }
        bool complete = true;
        for (const auto& c : p.children)
          if (c.min > 0 && !seen.count(&c)) complete = false;
        if (complete) out.insert(i);
      }
      return out;
  }
  return out;
}

std::set<std::size_t> Checker::match(const Particle& p, const std::vector<xml::Element>& kids,
                                     const std::set<std::size_t>& from) const {
  std::set<std::size_t> result;
  if (p.min == 0) result = from;
  std::set<std::size_t> cur = from;
  for (int k = 1; p.max < 0 || k <= p.max; ++k) {
    cur = match_once(p, kids, cur);
    if (cur.empty()) break;
    if (k >= p.min) {
      std::size_t before = result.size();
      result.insert(cur.begin(), cur.end());
      if (result.size() == before) break;  // no new positions: fixpoint
    }
  }
  return result;
}

const Particle* Checker::find_decl(const Particle& p, const xml::Element& e) const {
  if (p.kind == Particle::Kind::Element) return matches_name(p, e) ? &p : nullptr;
  for (const auto& c : p.children)
    if (const Particle* d = find_decl(c, e)) return d;
  return nullptr;
}

void Checker::complex(const xml::Element& e, const ComplexType& t) {
  std::set<std::string> present;
  for (const auto& a : e.attributes) {
    if (a.name == "xmlns" || a.name.rfind("xmlns:", 0) == 0) continue;
    present.insert(a.name);
    auto decl = std::find_if(t.attributes.begin(), t.attributes.end(),
                             [&](const AttributeDecl& d) { return d.name == a.name; });
    if (decl == t.attributes.end()) {
      if (!t.anyAttribute)
        violation(fmt::format("attribute '{}' is not allowed on <{}>", a.name, e.name), a.nameSpan);
      continue;
    }
    if (!simple_ok(decl->type, a.value))
      violation(fmt::format("'{}' is not a valid value for attribute '{}'", a.value, a.name), a.valueSpan);
  }
  for (const auto& d : t.attributes)
    if (d.required && !present.count(d.name))
      violation(fmt::format("<{}> requires attribute '{}'", e.name, d.name), e.nameSpan);
  if (!t.mixed && e.hasNonWhitespaceText())
    violation(fmt::format("text is not allowed inside <{}>", e.name), e.nameSpan);

  const auto& kids = e.children;
  if (!t.content) {
    if (!kids.empty()) violation(fmt::format("<{}> must be empty", e.name), kids.front().nameSpan);
    return;
  }
  auto ends = match(*t.content, kids, {0});
  if (!ends.count(kids.size())) {
    // Report at the child after the longest prefix that forms a complete
    // match; for the generated content models that is the offending child.
    std::size_t reach = 0;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      std::vector<xml::Element> prefix(kids.begin(), kids.begin() + static_cast<std::ptrdiff_t>(i + 1));
      if (match(*t.content, prefix, {0}).count(i + 1)) reach = i + 1;
    }
    if (reach < kids.size()) {
      violation(fmt::format("element <{}> is not allowed here", kids[reach].name), kids[reach].nameSpan);
    } else {
      violation(fmt::format("<{}> is missing required content", e.name), e.nameSpan);
    }
  }
  for (const auto& k : kids) {
    const Particle* d = find_decl(*t.content, k);
    if (!d) continue;  // matched by a wildcard or already reported
    std::string type = d->type;
    if (type.rfind("#ref:", 0) == 0) {
      auto g = set_.globals.find(type.substr(5));
      if (g == set_.globals.end()) continue;
      type = g->second.type;
    }
    element(k, type);
  }
}

void Checker::element(const xml::Element& e, const std::string& type) {
  if (type == key(kXs, "anyType")) return;
  if (auto it = set_.complexTypes.find(type); it != set_.complexTypes.end()) {
    complex(e, it->second);
    return;
  }
  if (!e.children.empty()) {
    violation(fmt::format("<{}> may only contain text", e.name), e.children.front().nameSpan);
    return;
  }
  for (const auto& a : e.attributes) {
    if (a.name == "xmlns" || a.name.rfind("xmlns:", 0) == 0) continue;
    violation(fmt::format("attribute '{}' is not allowed on <{}>", a.name, e.name), a.nameSpan);
  }
  if (!simple_ok(type, e.text())) {
    SourceSpan span = e.texts.empty() ? e.nameSpan : e.texts.front().span;
    violation(fmt::format("'{}' is not a valid value for <{}>", e.text(), e.name), span);
  }
}

void collect_syntax(const xml::Element& e, std::vector<Diagnostic>& out) {
  if (e.firstProblem) {
    out.push_back(make_error(codes::SchemaViolation, "not well-formed: " + e.firstProblem->message,
                             e.firstProblem->span));
    return;
  }
  for (const auto& c : e.children) collect_syntax(c, out);
}

}  // namespace

std::vector<Diagnostic> validate_with_schema(const SchemaDoc& schema, std::string_view unitText,
                                             const std::string& path) {
  SchemaSet set;
  for (const auto& f : schema.files("schema.xsd")) {
    auto doc = xml::parse(f.text, f.fileName);
    if (!doc.root || !doc.problems.empty())
      throw Error(ErrorKind::Parse, fmt::format("schema {} is not well-formed", f.fileName));
    Loader(set, *doc.root, f.fileName);
  }

  std::vector<Diagnostic> out;
  auto doc = xml::parse(unitText, path);
  for (const auto& p : doc.problems)
    out.push_back(make_error(codes::SchemaViolation, "not well-formed: " + p.message, p.span));
  if (doc.root) collect_syntax(*doc.root, out);
  if (!out.empty() || !doc.root) {
    sort_diagnostics(out);
    return out;
  }
  const xml::Element& root = *doc.root;
  auto g = set.globals.find(key(root.nsUri, root.localName));
  if (g == set.globals.end()) {
    out.push_back(make_error(codes::SchemaViolation,
                             fmt::format("no declaration for root element <{}>", root.name), root.nameSpan));
    return out;
  }
  Checker(set, out).element(root, g->second.type);
  sort_diagnostics(out);
  return out;
}

}  // namespace mtalk
