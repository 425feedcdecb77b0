#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <queue>
#include <set>

#include <fmt/format.h>

#include "mtalk/error.hpp"
#include "mtalk/workspace.hpp"

namespace mtalk {

std::vector<DependencyEntry> dependency_closure(const DependencyGraph& graph, const ElementId& start,
                                                bool reverse) {
  if (!graph.contains(start)) throw Error(ErrorKind::NotFound, fmt::format("no element '{}'", start.str()));
  auto next = [&](const ElementId& id) {
    std::vector<std::pair<ElementId, EdgeKind>> out;
    for (const auto& e : reverse ? graph.incoming(id) : graph.outgoing(id))
      out.emplace_back(reverse ? e.from : e.to, e.kind);
    return out;
  };

  // Breadth-first discovery; remembers how each node was first reached.
  std::map<ElementId, EdgeKind> via;
  bool cyclic = false;
  std::deque<ElementId> queue{start};
  while (!queue.empty()) {
    ElementId id = queue.front();
    queue.pop_front();
    for (const auto& [n, kind] : next(id)) {
      if (n == start) cyclic = true;
      if (n == start || via.count(n)) continue;
      via.emplace(n, kind);
      queue.push_back(n);
    }
  }

  std::vector<ElementId> nodes{start};
  for (const auto& [id, _] : via) nodes.push_back(id);
  std::sort(nodes.begin(), nodes.end());
  std::map<ElementId, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = i;
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (const auto& [n, kind] : next(nodes[i]))
      if (auto it = index.find(n); it != index.end()) adj[i].push_back(it->second);

  // Strongly connected components (iterative Tarjan).
  const std::size_t none = SIZE_MAX;
  std::vector<std::size_t> low(nodes.size()), order(nodes.size(), none), comp(nodes.size(), none);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, comps = 0;
  for (std::size_t root = 0; root < nodes.size(); ++root) {
    if (order[root] != none) continue;
    std::vector<std::pair<std::size_t, std::size_t>> work{{root, 0}};
    order[root] = low[root] = counter++;
    stack.push_back(root);
    while (!work.empty()) {
      auto& [v, edge] = work.back();
      if (edge < adj[v].size()) {
        std::size_t w = adj[v][edge++];
        if (order[w] == none) {
          order[w] = low[w] = counter++;
          stack.push_back(w);
          work.emplace_back(w, 0);
        } else if (comp[w] == none) {
          low[v] = std::min(low[v], order[w]);
        }
        continue;
      }
      std::size_t done = v;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
      if (low[done] == order[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          comp[w] = comps;
        } while (w != done);
        ++comps;
      }
    }
  }

  // Kahn over the condensation; ties go to the component holding the
  // smallest id, members of a component are listed by id.
  std::vector<std::vector<std::size_t>> members(comps);
  for (std::size_t i = 0; i < nodes.size(); ++i) members[comp[i]].push_back(i);
  std::vector<int> indegree(comps, 0);
  std::vector<std::set<std::size_t>> succ(comps);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j : adj[i])
      if (comp[i] != comp[j] && succ[comp[i]].insert(comp[j]).second) ++indegree[comp[j]];
  auto key = [&](std::size_t c) { return members[c].front(); };
  std::priority_queue<std::pair<std::size_t, std::size_t>, std::vector<std::pair<std::size_t, std::size_t>>,
                      std::greater<>>
      ready;
  for (std::size_t c = 0; c < comps; ++c)
    if (indegree[c] == 0) ready.emplace(key(c), c);

  // When start lies on a cycle it is listed with the edge closing the cycle.
  const EdgeKind startVia = [&] {
    for (const auto& id : nodes)
      for (const auto& [n, kind] : next(id))
        if (n == start) return kind;
    return EdgeKind::InstanceOf;
  }();
  std::vector<DependencyEntry> out;
  while (!ready.empty()) {
    std::size_t c = ready.top().second;
    ready.pop();
    for (std::size_t i : members[c]) {
      const ElementId& id = nodes[i];
      if (id != start) out.push_back({id, via.at(id)});
      else if (cyclic) out.push_back({id, startVia});
    }
    for (std::size_t d : succ[c])
      if (--indegree[d] == 0) ready.emplace(key(d), d);
  }
  return out;
}

}  // namespace mtalk
