#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "mtalk/error.hpp"
#include "mtalk/schema.hpp"
#include "mtalk/xml.hpp"

namespace mtalk {

std::vector<SchemaFile> SchemaDoc::files(const std::string& rootFileName) const {
  std::vector<SchemaFile> out{{"", rootFileName, text}};
  out.insert(out.end(), imports.begin(), imports.end());
  return out;
}

namespace {

// What a property element may contain, merged over every class declaring a
// property of that name.
enum class ValueShape { Long, Double, Boolean, String, Bean, Any };

ValueShape shape_of(const TypeRef& t) {
  if (!t.isResolved()) return ValueShape::Any;
  if (t.isClass()) return ValueShape::Bean;
  switch (t.scalar) {
    case BuiltinScalar::Long: return ValueShape::Long;
    case BuiltinScalar::Double: return ValueShape::Double;
    case BuiltinScalar::Boolean: return ValueShape::Boolean;
    case BuiltinScalar::String: return ValueShape::String;
  }
  return ValueShape::Any;
}

std::string type_name(ValueShape s) {
  switch (s) {
    case ValueShape::Long: return "xs:long";
    case ValueShape::Double: return "xs:double";
    case ValueShape::Boolean: return "xs:boolean";
    case ValueShape::String: return "xs:string";
    case ValueShape::Bean: return "t:BeanValue";
    case ValueShape::Any: return "t:AnyValue";
  }
  return "t:AnyValue";
}

std::string ncname_for(std::string_view text) {
  std::string out;
  for (char c : text) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
              c == '-' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

bool is_broken(const ResolvedModel& m, const ElementId& cls) {
  if (m.lineage_has_cycle(cls)) return true;
  const auto* el = m.find(cls);
  if (!el || !el->classRef) return true;
  for (const auto& p : m.effective_properties_of(cls))
    if (!p.type.isResolved()) return true;
  return false;
}

class Generator {
 public:
  explicit Generator(const ResolvedModel& m) : m_(m) {
    for (const auto& id : m_.order()) {
      const auto& el = m_.at(id);
      namespaces_.insert(id.ns);
      if (el.kind == ElementKind::Instance) continue;
      classes_.push_back(id);
      const bool broken = is_broken(m_, id);
      anyBroken_ = anyBroken_ || broken;
      for (const auto& p : m_.effective_properties_of(id)) {
        if (!xml::is_ncname(p.name) || p.name == "properties") continue;
        ValueShape s = broken ? ValueShape::Any : shape_of(p.type);
        auto [it, fresh] = shapes_.emplace(p.name, s);
        if (!fresh && it->second != s) it->second = ValueShape::Any;
      }
    }
  }

  const std::set<std::string>& namespaces() const { return namespaces_; }

  std::string document(const std::string& ns, const std::vector<std::pair<std::string, std::string>>& imports);

 private:
  void class_names(std::string& out, const std::string& ns) const;
  void property_elements(std::string& out, const std::string& indent) const;
  void bean_attributes(std::string& out, const std::string& indent, bool valueForm) const;
  void class_type(std::string& out, const ElementId& cls, std::set<std::string>& used) const;

  const ResolvedModel& m_;
  std::set<std::string> namespaces_;
  std::vector<ElementId> classes_;
  std::map<std::string, ValueShape> shapes_;
  bool anyBroken_ = false;
};

void Generator::class_names(std::string& out, const std::string& ns) const {
  std::set<std::string> spellings;
  for (const auto& c : classes_) {
    if (c.ns == ns || c.ns.empty()) spellings.insert(c.local);
    spellings.insert(c.ns + ":" + c.local);
  }
  out += "  <xs:simpleType name=\"ClassName\">\n    <xs:restriction base=\"xs:string\">\n";
  for (const auto& s : spellings)
    out += fmt::format("      <xs:enumeration value=\"{}\"/>\n", xml::escape_attribute(s));
  out += "    </xs:restriction>\n  </xs:simpleType>\n";
}

void Generator::property_elements(std::string& out, const std::string& indent) const {
  for (const auto& [name, shape] : shapes_)
    out += fmt::format("{}<xs:element name=\"{}\" type=\"{}\" minOccurs=\"0\"/>\n", indent, name, type_name(shape));
}

void Generator::bean_attributes(std::string& out, const std::string& indent, bool valueForm) const {
  if (valueForm) {
    out += indent + "<xs:attribute name=\"class\" type=\"t:ClassName\"/>\n";
    out += indent + "<xs:attribute name=\"ref\" type=\"t:Name\"/>\n";
    return;
  }
  out += indent + "<xs:attribute name=\"id\" type=\"t:Id\" use=\"required\"/>\n";
  out += indent + "<xs:attribute name=\"class\" type=\"t:ClassName\" use=\"required\"/>\n";
  out += indent + "<xs:attribute name=\"parent\" type=\"t:Name\"/>\n";
  out += indent + "<xs:attribute name=\"abstract\" type=\"xs:boolean\"/>\n";
  out += indent + "<xs:attribute name=\"declarative\" type=\"xs:boolean\"/>\n";
}

void Generator::class_type(std::string& out, const ElementId& cls, std::set<std::string>& used) const {
  std::string name = "Class." + ncname_for(cls.str());
  for (int i = 2; !used.insert(name).second; ++i) name = fmt::format("Class.{}.{}", ncname_for(cls.str()), i);
  const auto& el = m_.at(cls);
  out += fmt::format("  <xs:complexType name=\"{}\">\n    <xs:annotation>\n      <xs:documentation>", name);
  if (is_broken(m_, cls)) {
    out += xml::escape_text(fmt::format(
        "{} could not be fully resolved; any content is accepted for its beans.", cls.str()));
    out += "</xs:documentation>\n    </xs:annotation>\n";
    out += "    <xs:sequence>\n      <xs:any processContents=\"skip\" minOccurs=\"0\" maxOccurs=\"unbounded\"/>\n";
    out += "    </xs:sequence>\n    <xs:anyAttribute processContents=\"skip\"/>\n  </xs:complexType>\n";
    return;
  }
  out += xml::escape_text(fmt::format("Beans of class {} ({}).", cls.str(), to_string(el.kind)));
  out += "</xs:documentation>\n    </xs:annotation>\n";
  out += "    <xs:all>\n";
  // Instances of a metaclass are classes and may declare properties.
  if (el.kind == ElementKind::Metaclass)
    out += "      <xs:element name=\"properties\" type=\"t:Properties\" minOccurs=\"0\"/>\n";
  for (const auto& p : m_.effective_properties_of(cls)) {
    if (!xml::is_ncname(p.name) || p.name == "properties") continue;
    out += fmt::format("      <xs:element name=\"{}\" type=\"{}\" minOccurs=\"0\"", p.name,
                       type_name(shapes_.at(p.name)));
    if (p.description.empty()) {
      out += "/>\n";
    } else {
      out += fmt::format(">\n        <xs:annotation><xs:documentation>{}</xs:documentation></xs:annotation>\n"
                         "      </xs:element>\n",
                         xml::escape_text(p.description));
    }
  }
  out += "    </xs:all>\n";
  bean_attributes(out, "    ", false);
  out += "  </xs:complexType>\n";
}

std::string Generator::document(const std::string& ns,
                                const std::vector<std::pair<std::string, std::string>>& imports) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\"";
  if (!ns.empty()) out += fmt::format(" xmlns:t=\"{0}\" targetNamespace=\"{0}\"", xml::escape_attribute(ns));
  out += " elementFormDefault=\"qualified\">\n";
  for (const auto& [importNs, location] : imports)
    out += fmt::format("  <xs:import namespace=\"{}\" schemaLocation=\"{}\"/>\n", xml::escape_attribute(importNs),
                       xml::escape_attribute(location));

  out += "  <xs:element name=\"model\">\n    <xs:complexType>\n      <xs:sequence>\n";
  out += "        <xs:element name=\"bean\" type=\"t:Bean\" minOccurs=\"0\" maxOccurs=\"unbounded\"/>\n";
  out += "      </xs:sequence>\n    </xs:complexType>\n  </xs:element>\n";

  // XSD 1.0 cannot pick a content model from the `class` attribute, so beans
  // share one content model over every known property name. A broken class
  // makes it open, since its beans may carry anything.
  if (anyBroken_) {
    out += "  <xs:complexType name=\"Bean\" mixed=\"true\">\n    <xs:annotation>\n      <xs:documentation>";
    out += "Some classes could not be resolved; bean content is not checked.";
    out += "</xs:documentation>\n    </xs:annotation>\n    <xs:sequence>\n";
    out += "      <xs:any processContents=\"skip\" minOccurs=\"0\" maxOccurs=\"unbounded\"/>\n";
    out += "    </xs:sequence>\n";
    bean_attributes(out, "    ", false);
    out += "  </xs:complexType>\n";
    out += "  <xs:complexType name=\"BeanValue\" mixed=\"true\">\n    <xs:sequence>\n";
    out += "      <xs:any processContents=\"skip\" minOccurs=\"0\" maxOccurs=\"unbounded\"/>\n";
    out += "    </xs:sequence>\n";
    bean_attributes(out, "    ", true);
    out += "  </xs:complexType>\n";
  } else {
    out += "  <xs:complexType name=\"Bean\">\n    <xs:all>\n";
    out += "      <xs:element name=\"properties\" type=\"t:Properties\" minOccurs=\"0\"/>\n";
    property_elements(out, "      ");
    out += "    </xs:all>\n";
    bean_attributes(out, "    ", false);
    out += "  </xs:complexType>\n";
    out += "  <xs:complexType name=\"BeanValue\">\n    <xs:all>\n";
    property_elements(out, "      ");
    out += "    </xs:all>\n";
    bean_attributes(out, "    ", true);
    out += "  </xs:complexType>\n";
  }

  out += "  <xs:complexType name=\"AnyValue\" mixed=\"true\">\n    <xs:sequence>\n";
  out += "      <xs:any processContents=\"skip\" minOccurs=\"0\" maxOccurs=\"unbounded\"/>\n";
  out += "    </xs:sequence>\n    <xs:anyAttribute processContents=\"skip\"/>\n  </xs:complexType>\n";

  out += "  <xs:complexType name=\"Properties\">\n    <xs:sequence>\n";
  out += "      <xs:element name=\"property\" type=\"t:Property\" minOccurs=\"0\" maxOccurs=\"unbounded\"/>\n";
  out += "    </xs:sequence>\n  </xs:complexType>\n";
  out += "  <xs:complexType name=\"Property\">\n    <xs:all>\n";
  out += "      <xs:element name=\"name\" type=\"xs:string\"/>\n";
  out += "      <xs:element name=\"type\" type=\"xs:string\"/>\n";
  out += "      <xs:element name=\"description\" type=\"xs:string\" minOccurs=\"0\"/>\n";
  out += "    </xs:all>\n  </xs:complexType>\n";

  out += "  <xs:simpleType name=\"Id\">\n    <xs:restriction base=\"xs:string\">\n";
  out += "      <xs:pattern value=\"[^\\s:]+\"/>\n    </xs:restriction>\n  </xs:simpleType>\n";
  out += "  <xs:simpleType name=\"Name\">\n    <xs:restriction base=\"xs:string\">\n";
  out += "      <xs:pattern value=\"\\S+\"/>\n    </xs:restriction>\n  </xs:simpleType>\n";
  class_names(out, ns);

  std::set<std::string> used;
  for (const auto& c : classes_)
    if (c.ns == ns) class_type(out, c, used);
  out += "</xs:schema>\n";
  // Without a target namespace the definitions live in no namespace and are
  // referenced by their bare names.
  if (ns.empty()) {
    const std::string qualified = "type=\"t:";
    for (auto pos = out.find(qualified); pos != std::string::npos; pos = out.find(qualified, pos))
      out.replace(pos, qualified.size(), "type=\"");
  }
  return out;
}

std::string import_file_name(const std::string& rootFileName, std::size_t index) {
  std::filesystem::path p(rootFileName);
  std::string stem = p.stem().string();
  std::string ext = p.extension().string();
  if (ext.empty()) ext = ".xsd";
  return fmt::format("{}.{}{}", stem, index, ext);
}

}  // namespace

SchemaDoc generate_schema(const CompiledModel& compiled, const std::string& rootFileName) {
  SchemaDoc doc;
  const ResolvedModel& m = *compiled.resolved;
  doc.generatedFrom = m.source_hash();
  Generator g(m);
  std::vector<std::pair<std::string, std::string>> imports;
  std::size_t index = 1;
  for (const auto& ns : g.namespaces()) {
    if (ns.empty()) continue;
    imports.emplace_back(ns, import_file_name(std::filesystem::path(rootFileName).filename().string(), index++));
  }
  doc.text = g.document("", imports);
  for (const auto& [ns, file] : imports) doc.imports.push_back({ns, file, g.document(ns, {})});
  return doc;
}

void write_schema(const SchemaDoc& schema, const std::filesystem::path& path) {
  auto dir = path.parent_path();
  std::error_code ec;
  if (!dir.empty()) std::filesystem::create_directories(dir, ec);
  for (const auto& f : schema.files(path.filename().string())) {
    auto target = dir / f.fileName;
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    out << f.text;
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", target.string()));
  }
}

}  // namespace mtalk
