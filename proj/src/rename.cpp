#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>

#include <fmt/format.h>

#include "mtalk/error.hpp"
#include "mtalk/workspace.hpp"
#include "mtalk/xml.hpp"

namespace mtalk {

namespace {

enum class RefSite { Class, Parent, Type, Value, InlineClass };

// Calls `f` for every name written in `unit`.
void for_each_ref(const SourceUnit& unit, const std::function<void(const NameRef&, RefSite)>& f) {
  std::function<void(const std::vector<Assignment>&)> values = [&](const std::vector<Assignment>& list) {
    for (const auto& a : list) {
      if (const auto* r = a.value.reference()) {
        f(r->target, RefSite::Value);
      } else if (const auto* b = a.value.inlineBean()) {
        f(b->classRef, RefSite::InlineClass);
        values(b->assignments);
      }
    }
  };
  for (const auto& bean : unit.beans) {
    f(bean.classRef, RefSite::Class);
    if (bean.parentRef) f(*bean.parentRef, RefSite::Parent);
    if (bean.propertyDefs)
      for (const auto& p : *bean.propertyDefs) f(p.typeRef, RefSite::Type);
    values(bean.assignments);
  }
}

std::optional<ElementId> target_of(const ResolvedModel& m, const NameRef& ref, RefSite site) {
  if (site == RefSite::Type) {
    TypeRef t = m.resolve_type(ref);
    if (t.isClass()) return t.cls;
    return std::nullopt;
  }
  return m.lookup(ref);
}

std::string renamed_text(const NameRef& ref, const std::string& newName) {
  if (!ref.qualified) return newName;
  return ref.text.substr(0, ref.text.rfind(':') + 1) + newName;
}

void sort_patches(std::vector<Patch>& patches) {
  std::sort(patches.begin(), patches.end(), [](const Patch& a, const Patch& b) {
    return std::tie(a.path, a.span.offset) < std::tie(b.path, b.span.offset);
  });
  patches.erase(std::unique(patches.begin(), patches.end()), patches.end());
}

void check_new_name(const std::string& newName) {
  if (!xml::is_ncname(newName))
    throw Error(ErrorKind::InvalidArgument, fmt::format("'{}' is not a valid name", newName));
}

SourceSpan manifest_span(const NativeManifest& manifest) {
  return SourceSpan{manifest.sourcePath, 1, 1, 1, 1, 0, 0};
}

}  // namespace

PatchSet rename_element(const CompileState& state, const ElementId& target, const std::string& newName) {
  const ResolvedModel& m = *state.resolved;
  const ResolvedElement* el = m.find(target);
  if (!el) throw Error(ErrorKind::NotFound, fmt::format("no element '{}'", target.str()));
  if (el->isKernel) throw Error(ErrorKind::InvalidArgument, fmt::format("'{}' is part of the kernel", target.str()));
  check_new_name(newName);
  if (builtin_scalar(newName))
    throw Error(ErrorKind::Collision, fmt::format("'{}' is a reserved type name", newName));
  ElementId renamed{target.ns, newName};
  if (renamed == target) return {};
  if (m.find(renamed)) throw Error(ErrorKind::Collision, fmt::format("'{}' already exists", renamed.str()));

  PatchSet out;
  for (const auto& [path, unit] : state.units) {
    if (unit.ns == target.ns)
      for (const auto& bean : unit.beans)
        if (bean.id == target) out.patches.push_back({path, bean.idSpan, newName});
    for_each_ref(unit, [&](const NameRef& ref, RefSite site) {
      auto resolved = target_of(m, ref, site);
      if (resolved == target) {
        // An unqualified name from another namespace falls back to the
        // empty namespace; a local element with the new name would capture it.
        if (!ref.qualified && ref.id.ns != target.ns && m.find(ElementId{ref.id.ns, newName}))
          throw Error(ErrorKind::Collision,
                      fmt::format("'{}' would resolve to {}:{} in {}", newName, ref.id.ns, newName, path));
        out.patches.push_back({path, ref.span, renamed_text(ref, newName)});
        return;
      }
      // A dangling name that would start to resolve changes the meaning.
      if (!resolved && ref.id.local == newName && (ref.id.ns == target.ns || (!ref.qualified && target.ns.empty())))
        throw Error(ErrorKind::Collision,
                    fmt::format("unresolved name '{}' in {} would resolve after the rename", ref.text, path));
    });
  }
  sort_patches(out.patches);

  if (state.manifest && el->kind != ElementKind::Instance) {
    if (state.manifest->find(target.local))
      out.warnings.push_back(make_warning(
          codes::ManifestNotRenamed,
          fmt::format("native manifest still names '{}'; rename the host class to '{}' as well", target.local,
                      newName),
          manifest_span(*state.manifest)));
  }
  return out;
}

PatchSet rename_property(const CompileState& state, const ElementId& classId, const std::string& oldName,
                         const std::string& newName) {
  const ResolvedModel& m = *state.resolved;
  const ResolvedElement* el = m.find(classId);
  if (!el) throw Error(ErrorKind::NotFound, fmt::format("no element '{}'", classId.str()));
  if (el->kind == ElementKind::Instance)
    throw Error(ErrorKind::WrongKind, fmt::format("'{}' is not a class", classId.str()));
  check_new_name(newName);
  if (newName == "properties")
    throw Error(ErrorKind::InvalidArgument, "'properties' cannot be used as a property name");

  // The declaring class: nearest in the lineage with its own declaration.
  std::optional<ElementId> root;
  for (const auto& c : m.lineage_of(classId)) {
    const auto& own = m.class_def(c)->ownProperties;
    if (std::any_of(own.begin(), own.end(), [&](const PropertyDefinition& p) { return p.name == oldName; })) {
      root = c;
      break;
    }
  }
  if (!root) throw Error(ErrorKind::NotFound, fmt::format("{} has no property '{}'", classId.str(), oldName));
  if (oldName == newName) return {};

  // The declaring class and all of its subclasses.
  std::set<ElementId> affected;
  for (const auto& id : m.order()) {
    if (m.at(id).kind == ElementKind::Instance) continue;
    const auto& chain = m.lineage_of(id);
    if (std::find(chain.begin(), chain.end(), *root) != chain.end()) affected.insert(id);
  }
  for (const auto& c : affected)
    if (m.effective_property(c, newName))
      throw Error(ErrorKind::Collision, fmt::format("{} already has a property '{}'", c.str(), newName));

  PatchSet out;
  auto tags = [&](const std::string& path, const Assignment& a) {
    out.patches.push_back({path, a.openTagSpan, newName});
    if (a.closeTagSpan) out.patches.push_back({path, *a.closeTagSpan, newName});
  };
  std::function<void(const std::string&, const std::vector<Assignment>&, std::optional<ElementId>)> walk =
      [&](const std::string& path, const std::vector<Assignment>& list, std::optional<ElementId> cls) {
        const bool hit = cls && affected.count(*cls);
        for (const auto& a : list) {
          if (hit && a.name == oldName) {
            if (find_assignment(list, newName))
              throw Error(ErrorKind::Collision, fmt::format("{} already assigns '{}'", path, newName));
            tags(path, a);
          }
          if (const auto* b = a.value.inlineBean()) walk(path, b->assignments, m.lookup(b->classRef));
        }
      };

  for (const auto& [path, unit] : state.units) {
    for (const auto& bean : unit.beans) {
      // Assignments of a bean are checked against its class (for instances)
      // or its metaclass (for classes); either way, the `class` attribute.
      walk(path, bean.assignments, m.lookup(bean.classRef));
      if (bean.propertyDefs && affected.count(bean.id) && m.find(bean.id) &&
          m.at(bean.id).unitPath == path) {
        for (const auto& p : *bean.propertyDefs)
          if (p.name == oldName) out.patches.push_back({path, p.nameSpan, newName});
      }
    }
  }
  sort_patches(out.patches);

  if (state.manifest) {
    for (const auto& c : affected) {
      const auto* sig = state.manifest->find(c.local);
      if (!sig || !sig->field(oldName) || m.class_def(c)->isDeclarative) continue;
      out.warnings.push_back(make_warning(
          codes::ManifestNotRenamed,
          fmt::format("native manifest still names field '{}.{}'; rename it to '{}' as well", c.local, oldName,
                      newName),
          manifest_span(*state.manifest)));
    }
  }
  return out;
}

std::map<std::string, std::string> apply_patches(const PatchSet& patches,
                                                 const std::map<std::string, std::string>& texts) {
  std::map<std::string, std::vector<const Patch*>> byPath;
  for (const auto& p : patches.patches) byPath[p.path].push_back(&p);
  std::map<std::string, std::string> out = texts;
  for (auto& [path, list] : byPath) {
    auto it = out.find(path);
    if (it == out.end()) throw Error(ErrorKind::InvalidArgument, fmt::format("no text for '{}'", path));
    std::sort(list.begin(), list.end(),
              [](const Patch* a, const Patch* b) { return a->span.offset < b->span.offset; });
    const std::string& src = texts.at(path);
    std::string result;
    std::size_t pos = 0;
    for (const Patch* p : list) {
      if (p->span.offset < pos || p->span.endOffset < p->span.offset || p->span.endOffset > src.size())
        throw Error(ErrorKind::InvalidArgument, fmt::format("overlapping or invalid patch in '{}'", path));
      result.append(src, pos, p->span.offset - pos);
      result += p->replacement;
      pos = p->span.endOffset;
    }
    result.append(src, pos, std::string::npos);
    it->second = std::move(result);
  }
  return out;
}

void apply_patches_to_disk(const PatchSet& patches, const std::filesystem::path& root) {
  std::map<std::string, std::string> texts;
  for (const auto& p : patches.patches) {
    if (texts.count(p.path)) continue;
    std::ifstream in(root / p.path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot read '{}'", p.path));
    texts[p.path] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  auto updated = apply_patches(patches, texts);
  for (const auto& [path, text] : updated) {
    auto target = root / path;
    auto tmp = target;
    tmp += ".mtalk-tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << text;
      if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", tmp.string()));
    }
    std::filesystem::rename(tmp, target);
  }
}

}  // namespace mtalk
