#include <deque>

#include <gtest/gtest.h>

#include "mtalk/error.hpp"
#include "mtalk/workspace.hpp"
#include "support.hpp"

namespace {

using namespace mtalk;
using namespace mtalk::test;

const ElementId id(const char* s) { return ElementId::parse(s); }

bool has_edge(const DependencyGraph& g, const ElementId& from, const ElementId& to, EdgeKind kind) {
  auto out = g.outgoing(from);
  return std::find(out.begin(), out.end(), DependencyEdge{from, to, kind}) != out.end();
}

TEST(Graph, GoldenEdgesByKind) {
  auto r = compile_golden();
  const auto& g = *r.state.graph;
  EXPECT_TRUE(has_edge(g, id("CNN_NewsRetriever"), id("NewsRetriever"), EdgeKind::InstanceOf));
  EXPECT_TRUE(has_edge(g, id("CNN_NewsRetriever"), id("FastHTTP_Client"), EdgeKind::ParentBean));
  EXPECT_TRUE(has_edge(g, id("NewsRetriever"), id("HTTP_Client"), EdgeKind::SubclassOf));
  EXPECT_TRUE(has_edge(g, id("HTTP_Client"), kObjectId, EdgeKind::SubclassOf));
  EXPECT_TRUE(has_edge(g, id("NewsRetriever"), id("StandardCache"), EdgeKind::InstanceOf));
  EXPECT_TRUE(has_edge(g, id("MetaCache"), id("CacheManager"), EdgeKind::PropertyType));
  EXPECT_TRUE(has_edge(g, id("HTTP_Client"), native_node("HTTP_Client"), EdgeKind::NativeBinding));
  EXPECT_FALSE(has_edge(g, id("PictureRetriever"), native_node("PictureRetriever"), EdgeKind::NativeBinding));
  for (const auto& e : g.edges()) EXPECT_NE(e.to, unresolved_node());
  auto in = g.incoming(id("FastHTTP_Client"));
  std::set<ElementId> from;
  for (const auto& e : in) from.insert(e.from);
  EXPECT_EQ(from, (std::set<ElementId>{id("CNN_NewsRetriever"), id("PontisLogoRetriever")}));
}

TEST(Graph, ReferenceValuesAndDanglingNames) {
  auto r = compile_texts({{"x.model.xml", model(R"(
<bean id="Node" class="Class"><properties><property><name>next</name><type>Node</type></property></properties></bean>
<bean id="a" class="Node"/>
<bean id="b" class="Node"><next ref="a"/></bean>
<bean id="c" class="Ghost"/>)")}});
  const auto& g = *r.state.graph;
  EXPECT_TRUE(has_edge(g, id("b"), id("a"), EdgeKind::ValueRef));
  EXPECT_TRUE(has_edge(g, id("c"), unresolved_node(), EdgeKind::InstanceOf));
}

// Oracle: plain BFS sets over the raw edge list.
std::set<ElementId> reach(const DependencyGraph& g, const ElementId& start, bool reverse) {
  std::set<ElementId> seen;
  std::deque<ElementId> q{start};
  while (!q.empty()) {
    auto cur = q.front();
    q.pop_front();
    for (const auto& e : g.edges()) {
      const ElementId& from = reverse ? e.to : e.from;
      const ElementId& to = reverse ? e.from : e.to;
      if (from == cur && seen.insert(to).second) q.push_back(to);
    }
  }
  return seen;
}

TEST(Closure, MatchesOracleAndIsTopological) {
  auto r = compile_golden();
  const auto& g = *r.state.graph;
  for (const auto& start : r.state.resolved->order()) {
    for (bool reverse : {false, true}) {
      auto list = dependency_closure(g, start, reverse);
      std::set<ElementId> got;
      std::map<ElementId, std::size_t> index;
      for (const auto& e : list) {
        EXPECT_TRUE(got.insert(e.id).second) << "listed twice: " << e.id.str();
        index[e.id] = index.size();
      }
      auto expected = reach(g, start, reverse);
      EXPECT_EQ(got, expected) << start.str() << (reverse ? " reverse" : "");
      // Dependents come before what they depend on (forward) and vice versa.
      for (const auto& e : g.edges()) {
        const ElementId& a = reverse ? e.to : e.from;
        const ElementId& b = reverse ? e.from : e.to;
        if (a == start || b == start || !index.count(a) || !index.count(b)) continue;
        if (reach(g, b, reverse).count(a)) continue;  // on a cycle
        EXPECT_LT(index[a], index[b]) << a.str() << " -> " << b.str();
      }
    }
  }
}

TEST(Closure, ReportsHowEachNodeWasReached) {
  auto r = compile_golden();
  auto list = dependency_closure(*r.state.graph, id("FastHTTP_Client"), true);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0].id, id("CNN_NewsRetriever"));
  EXPECT_EQ(list[0].via, EdgeKind::ParentBean);
  EXPECT_EQ(list[1].id, id("PontisLogoRetriever"));
  EXPECT_THROW(dependency_closure(*r.state.graph, id("Nope"), false), Error);
}

TEST(Closure, StartIsListedOnlyOnACycle) {
  auto r = compile_golden();
  for (const auto& e : dependency_closure(*r.state.graph, id("CNN_NewsRetriever"), false))
    EXPECT_NE(e.id, id("CNN_NewsRetriever"));
  // Object and Class depend on each other through instance-of and subclass-of.
  auto list = dependency_closure(*r.state.graph, kClassId, false);
  bool listed = std::any_of(list.begin(), list.end(), [](const DependencyEntry& e) { return e.id == kClassId; });
  EXPECT_TRUE(listed);
}

TEST(Graph, EdgeKindNames) {
  EXPECT_EQ(to_string(EdgeKind::InstanceOf), "instance-of");
  EXPECT_EQ(to_string(EdgeKind::SubclassOf), "subclass-of");
  EXPECT_EQ(to_string(EdgeKind::ParentBean), "parent-bean");
  EXPECT_EQ(to_string(EdgeKind::PropertyType), "property-type");
  EXPECT_EQ(to_string(EdgeKind::ValueRef), "value-ref");
  EXPECT_EQ(to_string(EdgeKind::NativeBinding), "native-binding");
}

}  // namespace
