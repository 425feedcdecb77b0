#include "mtalk/source.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "mtalk/error.hpp"
#include "mtalk/hash.hpp"
#include "mtalk/xml.hpp"

namespace mtalk {

bool InlineBean::operator==(const InlineBean& other) const {
  return classRef == other.classRef && assignments == other.assignments;
}

const Assignment* find_assignment(const std::vector<Assignment>& list, std::string_view name) {
  for (const auto& a : list)
    if (a.name == name) return &a;
  return nullptr;
}

const BeanDecl* SourceUnit::find(const ElementId& id) const {
  for (const auto& b : beans)
    if (b.id == id) return &b;
  return nullptr;
}

NameRef make_ref(std::string_view text, const std::string& unitNs) {
  NameRef ref;
  ref.text = std::string(text);
  if (text.find(':') != std::string_view::npos) {
    ref.qualified = true;
    ref.id = ElementId::parse(text);
  } else {
    ref.id = ElementId{unitNs, std::string(text)};
  }
  return ref;
}

namespace {

bool is_namespace_attribute(std::string_view name) {
  return name == "xmlns" || name.rfind("xmlns:", 0) == 0 || name.rfind("xsi:", 0) == 0;
}

// Span of the non-whitespace part of [span.offset, span.endOffset) in `text`.
SourceSpan trimmed_span(std::string_view text, SourceSpan span) {
  std::size_t b = span.offset;
  std::size_t e = std::min(span.endOffset, text.size());
  int line = span.line;
  int col = span.column;
  while (b < e && xml::is_xml_whitespace(text[b])) {
    if (text[b] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++b;
  }
  while (e > b && xml::is_xml_whitespace(text[e - 1])) --e;
  int endLine = line;
  int endCol = col;
  for (std::size_t i = b; i < e; ++i) {
    if (text[i] == '\n') {
      ++endLine;
      endCol = 1;
    } else {
      ++endCol;
    }
  }
  return SourceSpan{span.path, line, col, endLine, endCol, b, e};
}

SourceSpan text_span(std::string_view source, const xml::Element& el) {
  if (el.texts.empty()) {
    // empty content: zero-width span just after the start tag name
    SourceSpan s = el.nameSpan;
    s.line = s.endLine;
    s.column = s.endColumn;
    s.offset = s.endOffset;
    return s;
  }
  SourceSpan s = el.texts.front().span;
  const SourceSpan& last = el.texts.back().span;
  s.endLine = last.endLine;
  s.endColumn = last.endColumn;
  s.endOffset = last.endOffset;
  return trimmed_span(source, s);
}

class UnitParser {
 public:
  UnitParser(std::string_view text, SourceUnit& unit) : text_(text), unit_(unit) {}

  void run();

 private:
  std::optional<BeanDecl> parse_bean(const xml::Element& el);
  bool parse_value(const xml::Element& el, ValueExpr& out, int depth);
  bool parse_assignments(const xml::Element& parent, std::vector<Assignment>& out, int depth);
  bool parse_properties(const xml::Element& el, std::vector<RawPropertyDef>& out);
  std::optional<NameRef> parse_name(const xml::Attribute& attr);

  void diag(const char* code, std::string message, const SourceSpan& span,
            std::optional<ElementId> element = std::nullopt) {
    beanDiags_.push_back(make_error(code, std::move(message), span, std::move(element)));
  }

  std::string_view text_;
  SourceUnit& unit_;
  std::vector<Diagnostic> beanDiags_;
  std::optional<ElementId> currentBean_;
};

std::optional<NameRef> UnitParser::parse_name(const xml::Attribute& attr) {
  NameRef ref = make_ref(attr.value, unit_.ns);
  ref.span = attr.valueSpan;
  if (!is_valid_local_name(ref.id.local)) {
    diag(codes::BadBeanAttribute, fmt::format("'{}' is not a valid element name", attr.value),
         attr.valueSpan, currentBean_);
    return std::nullopt;
  }
  return ref;
}

bool UnitParser::parse_properties(const xml::Element& el, std::vector<RawPropertyDef>& out) {
  bool ok = true;
  if (el.hasNonWhitespaceText()) {
    diag(codes::BadValue, "unexpected text in <properties>", el.span, currentBean_);
    ok = false;
  }
  for (const auto& a : el.attributes) {
    if (is_namespace_attribute(a.name)) continue;
    diag(codes::BadValue, fmt::format("unexpected attribute '{}' on <properties>", a.name),
         a.nameSpan, currentBean_);
    ok = false;
  }
  for (const auto& p : el.children) {
    if (p.localName != "property" || p.nsUri != unit_.ns) {
      diag(codes::BadValue, fmt::format("expected <property>, found <{}>", p.name), p.nameSpan,
           currentBean_);
      ok = false;
      continue;
    }
    RawPropertyDef def;
    def.span = p.span;
    const xml::Element* nameEl = nullptr;
    const xml::Element* typeEl = nullptr;
    const xml::Element* descEl = nullptr;
    for (const auto& a : p.attributes) {
      if (is_namespace_attribute(a.name)) continue;
      diag(codes::BadValue, fmt::format("unexpected attribute '{}' on <property>", a.name),
           a.nameSpan, currentBean_);
      ok = false;
    }
    if (p.hasNonWhitespaceText()) {
      diag(codes::BadValue, "unexpected text in <property>", p.span, currentBean_);
      ok = false;
    }
    for (const auto& c : p.children) {
      const xml::Element** slot = nullptr;
      if (c.nsUri == unit_.ns) {
        if (c.localName == "name") slot = &nameEl;
        else if (c.localName == "type") slot = &typeEl;
        else if (c.localName == "description") slot = &descEl;
      }
      if (!slot) {
        diag(codes::BadValue, fmt::format("unexpected <{}> in <property>", c.name), c.nameSpan,
             currentBean_);
        ok = false;
        continue;
      }
      if (*slot) {
        diag(codes::BadValue, fmt::format("duplicate <{}> in <property>", c.name), c.nameSpan,
             currentBean_);
        ok = false;
        continue;
      }
      if (!c.children.empty() || !c.attributes.empty()) {
        diag(codes::BadValue, fmt::format("<{}> must contain only text", c.name), c.nameSpan,
             currentBean_);
        ok = false;
        continue;
      }
      *slot = &c;
    }
    if (!nameEl || !typeEl) {
      diag(codes::BadValue, "<property> requires <name> and <type>", p.nameSpan, currentBean_);
      ok = false;
      continue;
    }
    def.name = std::string(xml::trim_xml_whitespace(nameEl->text()));
    def.nameSpan = text_span(text_, *nameEl);
    if (!xml::is_ncname(def.name) || def.name == "properties") {
      diag(codes::BadValue, fmt::format("'{}' is not a valid property name", def.name),
           def.nameSpan, currentBean_);
      ok = false;
      continue;
    }
    std::string typeText(xml::trim_xml_whitespace(typeEl->text()));
    def.typeRef = make_ref(typeText, unit_.ns);
    def.typeRef.span = text_span(text_, *typeEl);
    if (!is_valid_local_name(def.typeRef.id.local)) {
      diag(codes::BadValue, fmt::format("'{}' is not a valid type name", typeText),
           def.typeRef.span, currentBean_);
      ok = false;
      continue;
    }
    if (descEl) def.description = std::string(xml::trim_xml_whitespace(descEl->text()));
    if (std::any_of(out.begin(), out.end(), [&](const RawPropertyDef& d) { return d.name == def.name; })) {
      diag(codes::BadValue, fmt::format("property '{}' is defined twice", def.name), def.nameSpan,
           currentBean_);
      ok = false;
      continue;
    }
    out.push_back(std::move(def));
  }
  return ok;
}

bool UnitParser::parse_value(const xml::Element& el, ValueExpr& out, int depth) {
  out.span = el.span;
  const xml::Attribute* ref = nullptr;
  const xml::Attribute* cls = nullptr;
  bool ok = true;
  for (const auto& a : el.attributes) {
    if (is_namespace_attribute(a.name)) continue;
    if (a.name == "ref") ref = &a;
    else if (a.name == "class") cls = &a;
    else {
      diag(codes::BadValue, fmt::format("unexpected attribute '{}' on <{}>", a.name, el.name),
           a.nameSpan, currentBean_);
      ok = false;
    }
  }
  if (!ok) return false;
  if (ref && cls) {
    diag(codes::BadValue, fmt::format("<{}> cannot have both 'ref' and 'class'", el.name),
         el.nameSpan, currentBean_);
    return false;
  }
  if (ref) {
    if (!el.children.empty() || el.hasNonWhitespaceText()) {
      diag(codes::BadValue, fmt::format("<{}> with 'ref' must be empty", el.name), el.nameSpan,
           currentBean_);
      return false;
    }
    auto name = parse_name(*ref);
    if (!name) return false;
    out.value = Reference{std::move(*name)};
    return true;
  }
  if (cls) {
    if (el.hasNonWhitespaceText()) {
      diag(codes::BadValue, fmt::format("unexpected text in nested bean <{}>", el.name),
           el.nameSpan, currentBean_);
      return false;
    }
    auto name = parse_name(*cls);
    if (!name) return false;
    InlineBean bean;
    bean.classRef = std::move(*name);
    if (!parse_assignments(el, bean.assignments, depth + 1)) return false;
    out.value = std::move(bean);
    return true;
  }
  if (!el.children.empty()) {
    diag(codes::BadValue,
         fmt::format("<{}> contains elements but has no 'class' attribute", el.name),
         el.children.front().nameSpan, currentBean_);
    return false;
  }
  out.value = ScalarLiteral{el.text()};
  return true;
}

bool UnitParser::parse_assignments(const xml::Element& parent, std::vector<Assignment>& out,
                                   int depth) {
  bool ok = true;
  for (const auto& c : parent.children) {
    if (c.nsUri != unit_.ns) {
      diag(codes::UnexpectedElement, fmt::format("element <{}> is in a foreign namespace", c.name),
           c.nameSpan, currentBean_);
      ok = false;
      continue;
    }
    if (c.localName == "properties") {
      diag(codes::BadValue, "<properties> is only allowed directly inside <bean>", c.nameSpan,
           currentBean_);
      ok = false;
      continue;
    }
    if (find_assignment(out, c.localName)) {
      diag(codes::BadValue, fmt::format("property '{}' is assigned twice", c.localName),
           c.nameSpan, currentBean_);
      ok = false;
      continue;
    }
    Assignment a;
    a.name = c.localName;
    a.openTagSpan = c.nameSpan;
    a.closeTagSpan = c.closeNameSpan;
    a.span = c.span;
    if (!parse_value(c, a.value, depth)) {
      ok = false;
      continue;
    }
    out.push_back(std::move(a));
  }
  return ok;
}

std::optional<BeanDecl> UnitParser::parse_bean(const xml::Element& el) {
  BeanDecl bean;
  bean.span = el.span;
  const xml::Attribute* idAttr = el.attribute("id");
  const xml::Attribute* classAttr = el.attribute("class");
  currentBean_.reset();
  if (idAttr && is_valid_local_name(idAttr->value)) currentBean_ = ElementId{unit_.ns, idAttr->value};

  bool ok = true;
  if (el.malformed) {
    const auto& p = *el.firstProblem;
    diag(codes::XmlSyntax, p.message, p.span, currentBean_);
    return std::nullopt;
  }
  if (!idAttr) {
    diag(codes::BadBeanAttribute, "<bean> requires an 'id' attribute", el.nameSpan);
    ok = false;
  } else if (!is_valid_local_name(idAttr->value)) {
    diag(codes::BadBeanAttribute, fmt::format("'{}' is not a valid bean id", idAttr->value),
         idAttr->valueSpan);
    ok = false;
  } else {
    bean.id = ElementId{unit_.ns, idAttr->value};
    bean.idSpan = idAttr->valueSpan;
  }
  if (!classAttr) {
    diag(codes::BadBeanAttribute, "<bean> requires a 'class' attribute", el.nameSpan,
         currentBean_);
    ok = false;
  } else if (auto ref = parse_name(*classAttr)) {
    bean.classRef = std::move(*ref);
  } else {
    ok = false;
  }
  for (const auto& a : el.attributes) {
    if (a.name == "id" || a.name == "class" || is_namespace_attribute(a.name)) continue;
    if (a.name == "parent") {
      if (auto ref = parse_name(a)) bean.parentRef = std::move(*ref);
      else ok = false;
    } else if (a.name == "abstract" || a.name == "declarative") {
      bool value = false;
      if (a.value == "true") value = true;
      else if (a.value != "false") {
        diag(codes::BadBeanAttribute,
             fmt::format("'{}' must be 'true' or 'false', found '{}'", a.name, a.value),
             a.valueSpan, currentBean_);
        ok = false;
      }
      (a.name == "abstract" ? bean.isAbstract : bean.isDeclarative) = value;
    } else {
      diag(codes::BadBeanAttribute, fmt::format("unknown bean attribute '{}'", a.name),
           a.nameSpan, currentBean_);
      ok = false;
    }
  }
  if (el.hasNonWhitespaceText()) {
    diag(codes::BadValue, "unexpected text inside <bean>", el.span, currentBean_);
    ok = false;
  }

  xml::Element valueHost;  // children other than <properties>
  for (const auto& c : el.children) {
    if (c.localName == "properties" && c.nsUri == unit_.ns) {
      if (bean.propertyDefs) {
        diag(codes::BadValue, "duplicate <properties> block", c.nameSpan, currentBean_);
        ok = false;
        continue;
      }
      std::vector<RawPropertyDef> defs;
      if (!parse_properties(c, defs)) ok = false;
      bean.propertyDefs = std::move(defs);
    } else {
      valueHost.children.push_back(c);
    }
  }
  if (!parse_assignments(valueHost, bean.assignments, 0)) ok = false;
  if (!ok) return std::nullopt;
  return bean;
}

void UnitParser::run() {
  xml::ParseOptions options;
  options.resyncAtDepthOne = {"bean"};
  // Bean tags are unprefixed in this dialect, so resync on the written name.
  xml::Document doc = xml::parse(text_, unit_.path, options);
  for (const auto& p : doc.problems)
    unit_.parseDiagnostics.push_back(make_error(codes::XmlSyntax, p.message, p.span));
  if (!doc.root) return;
  const xml::Element& root = *doc.root;
  unit_.ns = root.nsUri;
  if (root.localName != "model")
    unit_.parseDiagnostics.push_back(make_error(
        codes::UnexpectedElement,
        fmt::format("root element must be <model>, found <{}>", root.name), root.nameSpan));
  for (const auto& a : root.attributes) {
    if (is_namespace_attribute(a.name)) continue;
    unit_.parseDiagnostics.push_back(make_error(
        codes::BadBeanAttribute, fmt::format("unexpected attribute '{}' on <model>", a.name),
        a.nameSpan));
  }
  for (const auto& t : root.texts) {
    if (!xml::trim_xml_whitespace(t.value).empty())
      unit_.parseDiagnostics.push_back(
          make_error(codes::UnexpectedElement, "unexpected text inside <model>", t.span));
  }
  for (const auto& child : root.children) {
    if (child.localName != "bean" || child.nsUri != unit_.ns) {
      unit_.parseDiagnostics.push_back(make_error(
          codes::UnexpectedElement, fmt::format("unexpected element <{}>; expected <bean>", child.name),
          child.nameSpan));
      continue;
    }
    beanDiags_.clear();
    auto bean = parse_bean(child);
    for (auto& d : beanDiags_) unit_.parseDiagnostics.push_back(std::move(d));
    if (!bean) continue;
    if (const BeanDecl* first = unit_.find(bean->id)) {
      unit_.parseDiagnostics.push_back(make_error(
          codes::DuplicateId,
          fmt::format("duplicate bean id '{}' (first declared at {}:{}:{})", bean->id.str(),
                      first->span.path, first->span.line, first->span.column),
          bean->idSpan, bean->id));
      continue;
    }
    unit_.beans.push_back(std::move(*bean));
  }
}

}  // namespace

SourceUnit parse_unit(std::string_view text, const std::string& path) {
  SourceUnit unit;
  unit.path = path;
  unit.contentHash = fnv1a(text);
  UnitParser parser(text, unit);
  parser.run();
  return unit;
}

std::vector<std::filesystem::path> discover_model_files(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec), end;
       !ec && it != end; it.increment(ec)) {
    const auto& p = it->path();
    if (it->is_directory(ec) && p.filename().string().rfind('.', 0) == 0) {
      it.disable_recursion_pending();
      continue;
    }
    std::string name = p.filename().string();
    if (name.size() > kModelFileSuffix.size() &&
        name.compare(name.size() - kModelFileSuffix.size(), kModelFileSuffix.size(), kModelFileSuffix) == 0 &&
        !it->is_directory(ec))
      files.push_back(fs::relative(p, root, ec));
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
  return files;
}

WorkspaceParse parse_workspace(const std::filesystem::path& root) {
  WorkspaceParse out;
  std::map<ElementId, SourceSpan> seen;
  for (const auto& rel : discover_model_files(root)) {
    std::string relPath = rel.generic_string();
    std::ifstream in(root / rel, std::ios::binary);
    std::ostringstream buf;
    if (in) buf << in.rdbuf();
    if (!in || in.bad()) {
      out.diagnostics.push_back(
          make_error(codes::Unreadable, "cannot read file", SourceSpan{relPath, 1, 1, 1, 1, 0, 0}));
      continue;
    }
    SourceUnit unit = parse_unit(buf.str(), relPath);
    for (const auto& bean : unit.beans) {
      auto [it, inserted] = seen.emplace(bean.id, bean.span);
      if (!inserted) {
        out.diagnostics.push_back(make_error(
            codes::DuplicateId,
            fmt::format("duplicate bean id '{}' (first declared at {}:{}:{})", bean.id.str(),
                        it->second.path, it->second.line, it->second.column),
            bean.idSpan, bean.id));
      }
    }
    out.units.push_back(std::move(unit));
  }
  return out;
}

SourceSpan span_of(const SourceUnit& unit, const ElementId& id) {
  if (const BeanDecl* b = unit.find(id)) return b->span;
  throw Error(ErrorKind::NotFound, fmt::format("no bean '{}' in {}", id.str(), unit.path));
}

namespace {

void write_assignments(std::string& out, const std::vector<Assignment>& list, int indent);

void write_value(std::string& out, const Assignment& a, int indent) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  if (const auto* s = a.value.scalar()) {
    out += fmt::format("{}<{}>{}</{}>\n", pad, a.name, xml::escape_text(s->text), a.name);
  } else if (const auto* r = a.value.reference()) {
    out += fmt::format("{}<{} ref=\"{}\"/>\n", pad, a.name, xml::escape_attribute(r->target.text));
  } else if (const auto* b = a.value.inlineBean()) {
    if (b->assignments.empty()) {
      out += fmt::format("{}<{} class=\"{}\"/>\n", pad, a.name, xml::escape_attribute(b->classRef.text));
    } else {
      out += fmt::format("{}<{} class=\"{}\">\n", pad, a.name, xml::escape_attribute(b->classRef.text));
      write_assignments(out, b->assignments, indent + 2);
      out += fmt::format("{}</{}>\n", pad, a.name);
    }
  }
}

void write_assignments(std::string& out, const std::vector<Assignment>& list, int indent) {
  for (const auto& a : list) write_value(out, a, indent);
}

}  // namespace

std::string write_unit(const std::string& ns, const std::vector<BeanDecl>& beans) {
  std::string out = ns.empty() ? "<model>\n" : fmt::format("<model xmlns=\"{}\">\n", xml::escape_attribute(ns));
  for (const auto& b : beans) {
    out += fmt::format("  <bean id=\"{}\" class=\"{}\"", xml::escape_attribute(b.id.local),
                       xml::escape_attribute(b.classRef.text));
    if (b.parentRef) out += fmt::format(" parent=\"{}\"", xml::escape_attribute(b.parentRef->text));
    if (b.isAbstract) out += " abstract=\"true\"";
    if (b.isDeclarative) out += " declarative=\"true\"";
    if (b.assignments.empty() && !b.propertyDefs) {
      out += "/>\n";
      continue;
    }
    out += ">\n";
    if (b.propertyDefs) {
      out += "    <properties>\n";
      for (const auto& p : *b.propertyDefs) {
        out += "      <property>\n";
        out += fmt::format("        <name>{}</name>\n", xml::escape_text(p.name));
        out += fmt::format("        <type>{}</type>\n", xml::escape_text(p.typeRef.text));
        if (!p.description.empty())
          out += fmt::format("        <description>{}</description>\n", xml::escape_text(p.description));
        out += "      </property>\n";
      }
      out += "    </properties>\n";
    }
    write_assignments(out, b.assignments, 4);
    out += "  </bean>\n";
  }
  out += "</model>\n";
  return out;
}

}  // namespace mtalk
