#include <gtest/gtest.h>

#include "mtalk/error.hpp"
#include "support.hpp"

namespace {

using namespace mtalk;
using namespace mtalk::test;

TEST(Source, ParsesGoldenHttpUnit) {
  auto unit = parse_unit(read_file(golden_dir() / "http.model.xml"), "http.model.xml");
  EXPECT_TRUE(unit.parseDiagnostics.empty());
  ASSERT_EQ(unit.beans.size(), 4u);
  const BeanDecl& http = unit.beans[0];
  EXPECT_EQ(http.id, (ElementId{"", "HTTP_Client"}));
  EXPECT_EQ(http.classRef.text, "MetaCache");
  ASSERT_TRUE(http.propertyDefs);
  ASSERT_EQ(http.propertyDefs->size(), 3u);
  EXPECT_EQ((*http.propertyDefs)[2].name, "URL");
  EXPECT_EQ((*http.propertyDefs)[2].typeRef.text, "String");
  EXPECT_EQ((*http.propertyDefs)[0].description, "Number of retries");
  ASSERT_EQ(http.assignments.size(), 1u);
  const auto* cache = http.assignments[0].value.inlineBean();
  ASSERT_NE(cache, nullptr);
  EXPECT_EQ(cache->classRef.text, "StandardCache");
  ASSERT_EQ(cache->assignments.size(), 2u);
  EXPECT_EQ(cache->assignments[0].value.scalar()->text, "60");

  const BeanDecl& robust = unit.beans[1];
  EXPECT_TRUE(robust.isAbstract);
  EXPECT_FALSE(robust.propertyDefs);
  const BeanDecl& pontis = unit.beans[3];
  ASSERT_TRUE(pontis.parentRef);
  EXPECT_EQ(pontis.parentRef->text, "FastHTTP_Client");
  EXPECT_EQ(pontis.assignments[0].value.scalar()->text, "www.pontis.com/logo.bmp");
}

TEST(Source, ReferenceValuesAndNamespaces) {
  auto unit = parse_unit(model(R"(<bean id="a" class="X"><peer ref="b"/><other ref="urn:o:c"/></bean>)", "urn:m"),
                         "m.model.xml");
  EXPECT_TRUE(unit.parseDiagnostics.empty());
  EXPECT_EQ(unit.ns, "urn:m");
  const auto& bean = unit.beans.at(0);
  EXPECT_EQ(bean.id, (ElementId{"urn:m", "a"}));
  const auto* peer = bean.assignments[0].value.reference();
  ASSERT_NE(peer, nullptr);
  EXPECT_FALSE(peer->target.qualified);
  EXPECT_EQ(peer->target.id, (ElementId{"urn:m", "b"}));
  const auto* other = bean.assignments[1].value.reference();
  ASSERT_NE(other, nullptr);
  EXPECT_TRUE(other->target.qualified);
  EXPECT_EQ(other->target.id, (ElementId{"urn:o", "c"}));
}

TEST(Source, AttributeSpansPointAtTheName) {
  std::string text = model(R"(<bean id="a" class="Klass" parent="p"/>)");
  auto unit = parse_unit(text, "x.model.xml");
  const auto& b = unit.beans.at(0);
  auto slice = [&](const SourceSpan& s) { return text.substr(s.offset, s.endOffset - s.offset); };
  EXPECT_EQ(slice(b.idSpan), "a");
  EXPECT_EQ(slice(b.classRef.span), "Klass");
  EXPECT_EQ(slice(b.parentRef->span), "p");
  EXPECT_EQ(span_of(unit, b.id).line, 2);
  EXPECT_THROW(span_of(unit, ElementId{"", "zz"}), Error);
}

TEST(Source, BeanLevelProblemsUseParseCodes) {
  struct Case {
    std::string body;
    std::string code;
  };
  std::vector<Case> cases = {
      {R"(<bean class="X"/>)", codes::BadBeanAttribute},
      {R"(<bean id="a"/>)", codes::BadBeanAttribute},
      {R"(<bean id="a b" class="X"/>)", codes::BadBeanAttribute},
      {R"(<bean id="a" class="X" abstract="maybe"/>)", codes::BadBeanAttribute},
      {R"(<bean id="a" class="X" colour="red"/>)", codes::BadBeanAttribute},
      {R"(<bean id="a" class="X"><p ref="b" class="C"/></bean>)", codes::BadValue},
      {R"(<bean id="a" class="X"><p>1</p><p>2</p></bean>)", codes::BadValue},
      {R"(<bean id="a" class="X"><properties><property><name>n</name></property></properties></bean>)",
       codes::BadValue},
      {R"(<thing/>)", codes::UnexpectedElement},
      {R"(<bean id="a" class="X"><x></bean>)", codes::XmlSyntax},
  };
  for (const auto& c : cases) {
    auto unit = parse_unit(model(c.body), "x.model.xml");
    ASSERT_FALSE(unit.parseDiagnostics.empty()) << c.body;
    EXPECT_EQ(unit.parseDiagnostics[0].code, c.code) << c.body;
    EXPECT_TRUE(unit.parseDiagnostics[0].isError());
  }
}

TEST(Source, DuplicateIdInOneUnitKeepsTheFirst) {
  auto unit = parse_unit(model(R"(<bean id="a" class="X"/><bean id="a" class="Y"/>)"), "x.model.xml");
  ASSERT_EQ(unit.beans.size(), 1u);
  EXPECT_EQ(unit.beans[0].classRef.text, "X");
  EXPECT_EQ(with_code(unit.parseDiagnostics, codes::DuplicateId).size(), 1u);
}

// A broken bean never takes well-formed siblings with it.
TEST(Source, RecoveryIsMonotone) {
  const std::string good = R"(<bean id="a" class="X"><v>1</v></bean>
<bean id="b" class="X"><v>2</v></bean>
<bean id="c" class="X"><w ref="a"/></bean>)";
  auto clean = parse_unit(model(good), "x.model.xml");
  ASSERT_EQ(clean.beans.size(), 3u);
  std::vector<std::string> breakers = {
      R"(<bean id="z" class="X"><v>1</w></bean>)",
      R"(<bean id="z" class="X"><v>1</v>)",
      R"(<bean id="z" class="X"><v>&oops;</v></bean>)",
      R"(<bean id="z" class="X" abstract="nah"/>)",
      R"(<bean id="z" class="X"><v ref="q" class="C"/></bean>)",
      R"(<bean id="z" class="X"><<</bean>)",
  };
  for (const auto& broken : breakers) {
    for (std::size_t at : {std::size_t{0}, good.find("<bean id=\"b\""), good.size()}) {
      std::string body = good.substr(0, at) + "\n" + broken + "\n" + good.substr(at);
      auto unit = parse_unit(model(body), "x.model.xml");
      EXPECT_FALSE(unit.parseDiagnostics.empty()) << body;
      for (const auto& bean : clean.beans) {
        const BeanDecl* again = unit.find(bean.id);
        ASSERT_NE(again, nullptr) << broken << " at " << at << " dropped " << bean.id.str();
        ASSERT_EQ(again->assignments.size(), bean.assignments.size());
        for (std::size_t i = 0; i < bean.assignments.size(); ++i)
          EXPECT_EQ(again->assignments[i].name, bean.assignments[i].name);
      }
    }
  }
}

TEST(Source, WriteUnitRoundTripsStructure) {
  auto original = parse_texts(golden_texts());
  for (const auto& unit : original) {
    std::string written = write_unit(unit.ns, unit.beans);
    auto again = parse_unit(written, unit.path);
    EXPECT_TRUE(again.parseDiagnostics.empty()) << written;
    ASSERT_EQ(again.beans.size(), unit.beans.size());
    for (std::size_t i = 0; i < unit.beans.size(); ++i) {
      const auto& a = unit.beans[i];
      const auto& b = again.beans[i];
      EXPECT_EQ(a.id, b.id);
      EXPECT_EQ(a.classRef.id, b.classRef.id);
      EXPECT_EQ(a.isAbstract, b.isAbstract);
      EXPECT_EQ(a.isDeclarative, b.isDeclarative);
      EXPECT_EQ(a.parentRef.has_value(), b.parentRef.has_value());
      EXPECT_EQ(a.assignments.size(), b.assignments.size());
      EXPECT_EQ(a.propertyDefs.has_value(), b.propertyDefs.has_value());
      if (a.propertyDefs && b.propertyDefs) {
        ASSERT_EQ(a.propertyDefs->size(), b.propertyDefs->size());
        for (std::size_t j = 0; j < a.propertyDefs->size(); ++j) {
          EXPECT_EQ((*a.propertyDefs)[j].name, (*b.propertyDefs)[j].name);
          EXPECT_EQ((*a.propertyDefs)[j].typeRef.text, (*b.propertyDefs)[j].typeRef.text);
        }
      }
    }
  }
}

TEST(Source, ContentHashFollowsText) {
  auto a = parse_unit(model(R"(<bean id="a" class="X"/>)"), "x.model.xml");
  auto b = parse_unit(model(R"(<bean id="a" class="X"/>)"), "x.model.xml");
  auto c = parse_unit(model(R"(<bean id="a" class="Y"/>)"), "x.model.xml");
  EXPECT_EQ(a.contentHash, b.contentHash);
  EXPECT_NE(a.contentHash, c.contentHash);
}

TEST(Source, WorkspaceDiscoveryIsRecursiveAndSorted) {
  TempDir dir;
  write_file(dir.path() / "b.model.xml", model(R"(<bean id="b" class="Class"/>)"));
  write_file(dir.path() / "sub/a.model.xml", model(R"(<bean id="a" class="Class"/>)"));
  write_file(dir.path() / "ignored.xml", "<nope/>");
  auto files = discover_model_files(dir.path());
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].generic_string(), "b.model.xml");
  EXPECT_EQ(files[1].generic_string(), "sub/a.model.xml");
  auto ws = parse_workspace(dir.path());
  ASSERT_EQ(ws.units.size(), 2u);
  EXPECT_EQ(ws.units[1].path, "sub/a.model.xml");
}

TEST(Source, DuplicateIdsAcrossUnitsAreReported) {
  TempDir dir;
  write_file(dir.path() / "a.model.xml", model(R"(<bean id="dup" class="Class"/>)"));
  write_file(dir.path() / "b.model.xml", model(R"(<bean id="dup" class="Class"/>)"));
  auto ws = parse_workspace(dir.path());
  auto dups = with_code(ws.diagnostics, codes::DuplicateId);
  ASSERT_EQ(dups.size(), 1u);
  EXPECT_EQ(dups[0].span.path, "b.model.xml");
}

TEST(Source, MakeRefSplitsQualifiedNames) {
  auto plain = make_ref("Foo", "urn:x");
  EXPECT_FALSE(plain.qualified);
  EXPECT_EQ(plain.id, (ElementId{"urn:x", "Foo"}));
  auto q = make_ref("urn:y:Bar", "urn:x");
  EXPECT_TRUE(q.qualified);
  EXPECT_EQ(q.id, (ElementId{"urn:y", "Bar"}));
}

TEST(ElementIdTest, ParseAndRenderSplitAtLastColon) {
  auto id = ElementId::parse("http://a.b/c:Name");
  EXPECT_EQ(id.ns, "http://a.b/c");
  EXPECT_EQ(id.local, "Name");
  EXPECT_EQ(id.str(), "http://a.b/c:Name");
  EXPECT_EQ(ElementId::parse("Plain").str(), "Plain");
  EXPECT_TRUE(is_native_node(native_node("X")));
  EXPECT_FALSE(is_native_node(ElementId{"", "X"}));
}

}  // namespace
