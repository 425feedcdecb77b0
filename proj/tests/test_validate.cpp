#include <gtest/gtest.h>

#include "support.hpp"

namespace {

using namespace mtalk;
using namespace mtalk::test;

std::vector<Diagnostic> errors(const std::vector<Diagnostic>& diags) {
  std::vector<Diagnostic> out;
  for (const auto& d : diags)
    if (d.isError()) out.push_back(d);
  return out;
}

CompileResult golden_with(const std::string& file, const std::string& from, const std::string& to,
                          bool withManifest = true) {
  auto texts = golden_texts();
  texts[file] = replace_once(texts[file], from, to);
  return compile_texts(texts, withManifest ? golden_manifest() : nullptr);
}

TEST(Validate, GoldenWorkspaceIsClean) {
  auto r = compile_golden();
  EXPECT_TRUE(r.diagnostics.empty()) << render_json(r.diagnostics);
  auto compiled = r.state.compiled();
  EXPECT_TRUE(compiled.errorFree);
  EXPECT_TRUE(compiled.elementsWithErrors.empty());
}

TEST(Validate, CovariantMetaclassRejectsBaseCacheInstance) {
  auto r = golden_with("retrievers.model.xml", R"(<cache class="SecuredCacheManager">)",
                       R"(<cache class="StandardCache">)");
  auto errs = errors(r.diagnostics);
  ASSERT_EQ(errs.size(), 1u) << render_json(r.diagnostics);
  EXPECT_EQ(errs[0].code, codes::TypeMismatch);
  EXPECT_NE(errs[0].message.find("SecuredCacheManager"), std::string::npos);
  EXPECT_EQ(errs[0].element, ElementId::parse("BankBalanceRetriever"));
  EXPECT_EQ(errs[0].span.path, "retrievers.model.xml");
}

TEST(Validate, ScalarLexicalErrors) {
  auto r = golden_with("http.model.xml", "<timeout>15</timeout>", "<timeout>fifteen</timeout>");
  auto errs = errors(r.diagnostics);
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0].code, codes::TypeMismatch);
  EXPECT_EQ(errs[0].message, "'fifteen' is not a valid Long for property 'timeout'");
  EXPECT_EQ(errs[0].element, ElementId::parse("RobustHTTP_Client"));
}

TEST(Validate, UnknownPropertyOnInstanceAndInlineBean) {
  auto r = golden_with("http.model.xml", "<URL>www.pontis.com/logo.bmp</URL>", "<URI>x</URI>");
  auto errs = errors(r.diagnostics);
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0].code, codes::UnknownProperty);
  EXPECT_EQ(errs[0].message, "unknown property 'URI' for class HTTP_Client");

  auto r2 = golden_with("http.model.xml", "<timeToLive>60</timeToLive>", "<ttl>60</ttl>");
  ASSERT_EQ(errors(r2.diagnostics).size(), 1u);
  EXPECT_EQ(errors(r2.diagnostics)[0].code, codes::UnknownProperty);
  EXPECT_EQ(errors(r2.diagnostics)[0].element, ElementId::parse("HTTP_Client"));
}

TEST(Validate, CovarianceViolationOnRedeclaration) {
  auto bad = golden_with("cache.model.xml", "<type>SecuredCacheManager</type>", "<type>Long</type>");
  auto e006 = with_code(bad.diagnostics, codes::CovarianceViolation);
  ASSERT_EQ(e006.size(), 1u);
  EXPECT_EQ(e006[0].element, ElementId::parse("MetaSecuredCache"));

  auto widened = golden_with("cache.model.xml", "<type>SecuredCacheManager</type>", "<type>Object</type>");
  EXPECT_EQ(with_code(widened.diagnostics, codes::CovarianceViolation).size(), 1u);

  auto sibling = golden_with("cache.model.xml", "<type>SecuredCacheManager</type>", "<type>StandardCache</type>");
  EXPECT_TRUE(with_code(sibling.diagnostics, codes::CovarianceViolation).empty());
}

TEST(Validate, NativeConformance) {
  auto texts = golden_texts();
  auto base = golden_manifest();

  NativeManifest missingField = *base;
  missingField.entries["HTTP_Client"].fields.pop_back();
  auto r = compile_texts(texts, std::make_shared<NativeManifest>(missingField));
  auto e007 = with_code(r.diagnostics, codes::NativeMismatch);
  ASSERT_EQ(e007.size(), 1u);
  EXPECT_NE(e007[0].message.find("URL"), std::string::npos);

  NativeManifest wrongType = *base;
  wrongType.entries["HTTP_Client"].fields[1].type = "String";
  r = compile_texts(texts, std::make_shared<NativeManifest>(wrongType));
  ASSERT_EQ(with_code(r.diagnostics, codes::NativeMismatch).size(), 1u);

  // A declarative class has no counterpart; a native one must have it.
  NativeManifest noHttp = *base;
  noHttp.entries.erase("HTTP_Client");
  noHttp.order.erase(std::find(noHttp.order.begin(), noHttp.order.end(), "HTTP_Client"));
  r = compile_texts(texts, std::make_shared<NativeManifest>(noHttp));
  e007 = with_code(r.diagnostics, codes::NativeMismatch);
  ASSERT_EQ(e007.size(), 1u);
  EXPECT_EQ(e007[0].element, ElementId::parse("HTTP_Client"));

  NativeManifest extra = *base;
  extra.entries["Ghost"] = NativeClassSig{"Ghost", std::nullopt, {}};
  extra.order.push_back("Ghost");
  r = compile_texts(texts, std::make_shared<NativeManifest>(extra));
  EXPECT_FALSE(has_errors(r.diagnostics));
  ASSERT_EQ(with_code(r.diagnostics, codes::UnboundNativeClass).size(), 1u);
}

TEST(Validate, ReferencesToAbstractBeansAreRejected) {
  auto r = compile_texts({{"x.model.xml", model(R"(
<bean id="K" class="Class"><properties><property><name>c</name><type>CM</type></property></properties></bean>
<bean id="CM" class="Class"/>
<bean id="tmpl" class="CM" abstract="true"/>
<bean id="ok" class="CM"/>
<bean id="a" class="K"><c ref="tmpl"/></bean>
<bean id="b" class="K"><c ref="ok"/></bean>
<bean id="c" class="K"><c ref="nothing"/></bean>)")}});
  auto e005 = with_code(r.diagnostics, codes::AbstractInstantiation);
  ASSERT_EQ(e005.size(), 1u);
  EXPECT_EQ(e005[0].element, ElementId::parse("a"));
  auto e001 = with_code(r.diagnostics, codes::UnresolvedClass);
  ASSERT_EQ(e001.size(), 1u);
  EXPECT_EQ(e001[0].element, ElementId::parse("c"));
}

TEST(Validate, ParentBeanMustBeCompatible) {
  auto r = golden_with("http.model.xml", R"(id="PontisLogoRetriever" class="HTTP_Client"
    parent="FastHTTP_Client")",
                       R"(id="PontisLogoRetriever" class="HTTP_Client"
    parent="StandardCache")");
  auto e010 = with_code(r.diagnostics, codes::IncompatibleParent);
  ASSERT_EQ(e010.size(), 1u);
  EXPECT_EQ(e010[0].element, ElementId::parse("PontisLogoRetriever"));

  auto texts = golden_texts();
  texts["extra.model.xml"] = model(R"(<bean id="sc" class="StandardCache"/>
<bean id="child" class="HTTP_Client" parent="sc"/>)");
  auto r2 = compile_texts(texts, golden_manifest());
  e010 = with_code(r2.diagnostics, codes::IncompatibleParent);
  ASSERT_EQ(e010.size(), 1u);
  EXPECT_EQ(e010[0].element, ElementId::parse("child"));
}

TEST(Validate, InheritedValuesAreCheckedAgainstTheChildClass) {
  // A template of the subclass cannot serve a bean of the base class.
  auto r = compile_texts({{"x.model.xml", model(R"(
<bean id="Base" class="Class"><properties><property><name>n</name><type>Long</type></property></properties></bean>
<bean id="Sub" class="Class" parent="Base"><properties><property><name>m</name><type>Long</type></property></properties></bean>
<bean id="tmpl" class="Sub" abstract="true"><n>1</n><m>2</m></bean>
<bean id="ok" class="Sub" parent="tmpl"/>
<bean id="bad" class="Base" parent="tmpl"/>)")}});
  auto e010 = with_code(r.diagnostics, codes::IncompatibleParent);
  ASSERT_EQ(e010.size(), 1u);
  EXPECT_EQ(e010[0].element, ElementId::parse("bad"));
  EXPECT_EQ(errors(r.diagnostics).size(), 1u);
}

TEST(Validate, ConstructionCyclesAreReported) {
  auto r = compile_texts({{"x.model.xml", model(R"(
<bean id="Node" class="Class"><properties><property><name>next</name><type>Node</type></property></properties></bean>
<bean id="a" class="Node"><next ref="b"/></bean>
<bean id="b" class="Node"><next ref="a"/></bean>
<bean id="c" class="Node"><next ref="a"/></bean>
<bean id="d" class="Node"/>)")}});
  std::set<std::string> flagged;
  for (const auto& d : with_code(r.diagnostics, codes::ReferenceCycle)) flagged.insert(d.element->local);
  EXPECT_TRUE(flagged.count("a"));
  EXPECT_TRUE(flagged.count("b"));
  EXPECT_FALSE(flagged.count("d"));
}

// The same rule applies whether a value sits on an instance (checked against
// its class) or on a class (checked against its metaclass).
TEST(Validate, RulesAreUniformAcrossMetaLevels) {
  struct Case {
    std::string type;
    std::string value;
  };
  std::vector<Case> cases = {{"Long", "12x"}, {"Long", "1.5"},   {"Double", "abc"}, {"Boolean", "yes"},
                             {"Long", "9223372036854775808"}, {"Double", "1e999"}, {"Long", ""}};
  for (const auto& c : cases) {
    std::string defs =
        "<bean id=\"M\" class=\"Class\" parent=\"Class\"><properties><property><name>v</name><type>" + c.type +
        "</type></property></properties></bean>\n"
        "<bean id=\"K\" class=\"Class\"><properties><property><name>v</name><type>" + c.type +
        "</type></property></properties></bean>\n";
    auto atClass = compile_texts({{"x.model.xml", model(defs + "<bean id=\"C\" class=\"M\"><v>" + c.value + "</v></bean>")}});
    auto atInstance = compile_texts({{"x.model.xml", model(defs + "<bean id=\"C\" class=\"K\"><v>" + c.value + "</v></bean>")}});
    EXPECT_EQ(codes_of(atClass.diagnostics), codes_of(atInstance.diagnostics)) << c.type << " " << c.value;
    ASSERT_EQ(atClass.diagnostics.size(), 1u) << c.type << " " << c.value;
    EXPECT_EQ(atClass.diagnostics[0].message, atInstance.diagnostics[0].message);
  }
}

TEST(Validate, ClassLevelValuesInheritedFromSuperclassMustFitTheMetaclass) {
  auto texts = golden_texts();
  // No own cache: the StandardCache value inherited from HTTP_Client is
  // too weak for MetaSecuredCache.
  texts["retrievers.model.xml"] = replace_once(texts["retrievers.model.xml"], R"(<cache class="SecuredCacheManager">
      <timeToLive>10</timeToLive>
      <maxElementsInMemory>20</maxElementsInMemory>
    </cache>)", "");
  auto r = compile_texts(texts, golden_manifest());
  auto errs = errors(r.diagnostics);
  ASSERT_EQ(errs.size(), 1u) << render_json(r.diagnostics);
  EXPECT_EQ(errs[0].code, codes::TypeMismatch);
  EXPECT_EQ(errs[0].element, ElementId::parse("BankBalanceRetriever"));
}

TEST(Validate, LexersMatchStandardParsers) {
  std::int64_t l = 0;
  EXPECT_TRUE(lex_long("42", &l));
  EXPECT_EQ(l, 42);
  EXPECT_TRUE(lex_long(" -7 ", &l));
  EXPECT_EQ(l, -7);
  EXPECT_TRUE(lex_long("+3", &l));
  EXPECT_TRUE(lex_long("9223372036854775807"));
  EXPECT_FALSE(lex_long("9223372036854775808"));
  EXPECT_FALSE(lex_long("0x10"));
  EXPECT_FALSE(lex_long("1 2"));
  double d = 0;
  EXPECT_TRUE(lex_double("2.5e3", &d));
  EXPECT_DOUBLE_EQ(d, 2500.0);
  EXPECT_TRUE(lex_double(".5"));
  EXPECT_TRUE(lex_double("-1"));
  EXPECT_FALSE(lex_double("nan"));
  EXPECT_FALSE(lex_double("1e"));
  EXPECT_FALSE(lex_double("1e999"));
  bool b = false;
  EXPECT_TRUE(lex_boolean("true", &b));
  EXPECT_TRUE(b);
  EXPECT_TRUE(lex_boolean("false", &b));
  EXPECT_FALSE(b);
  EXPECT_FALSE(lex_boolean("0"));
  EXPECT_FALSE(lex_boolean("True"));
  // Cross-check integers against strtoll on a sweep.
  for (long long v : {0LL, 1LL, -1LL, 123456789LL, -987654321012LL}) {
    std::int64_t got = 0;
    ASSERT_TRUE(lex_long(std::to_string(v), &got));
    EXPECT_EQ(got, std::strtoll(std::to_string(v).c_str(), nullptr, 10));
  }
}

TEST(Validate, ResultsAreDeterministic) {
  auto texts = golden_texts();
  texts["http.model.xml"] = replace_once(texts["http.model.xml"], "<timeout>2</timeout>", "<timeout>x</timeout>");
  auto a = compile_texts(texts, golden_manifest());
  auto b = compile_texts(texts, golden_manifest());
  EXPECT_EQ(a.diagnostics, b.diagnostics);
  EXPECT_TRUE(std::is_sorted(a.diagnostics.begin(), a.diagnostics.end(), diagnostic_less));
}

TEST(Diagnostics, RenderLineAndJson) {
  auto d = make_error(codes::TypeMismatch, "bad", SourceSpan{"a.model.xml", 3, 7, 3, 9, 10, 12},
                      ElementId::parse("X"));
  EXPECT_EQ(render_line(d), "a.model.xml:3:7: error[E003] bad (X)");
  auto json = render_json({d});
  EXPECT_NE(json.find("\"code\": \"E003\""), std::string::npos);
  EXPECT_NE(json.find("\"line\": 3"), std::string::npos);
  auto w = make_warning(codes::UnboundNativeClass, "w", SourceSpan{"m.json", 1, 1, 1, 1, 0, 0});
  EXPECT_EQ(render_line(w), "m.json:1:1: warning[W001] w");
  EXPECT_FALSE(has_errors({w}));
  EXPECT_TRUE(has_errors({w, d}));
}

}  // namespace
