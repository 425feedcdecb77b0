#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace mtalk {

/// Identity of a model element: the declaring unit's XML namespace plus the
/// bean's `id`. Rendered `namespace:local`, or just `local` when the
/// namespace is empty. Namespaces may themselves contain ':' (URIs), so the
/// rendered form is split at the last ':'.
struct ElementId {
  std::string ns;
  std::string local;

  static ElementId parse(std::string_view text);

  std::string str() const;
  bool empty() const { return local.empty(); }

  auto operator<=>(const ElementId&) const = default;
  bool operator==(const ElementId&) const = default;
};

/// Non-empty, no whitespace, no ':'.
bool is_valid_local_name(std::string_view name);

/// Distinguished target for edges whose reference did not resolve.
const ElementId& unresolved_node();
/// Graph node standing for a native manifest entry.
ElementId native_node(std::string_view className);
bool is_native_node(const ElementId& id);

struct ElementIdHash {
  std::size_t operator()(const ElementId& id) const noexcept {
    std::size_t h = std::hash<std::string>{}(id.ns);
    return h ^ (std::hash<std::string>{}(id.local) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

}  // namespace mtalk
