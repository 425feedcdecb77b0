#include <gtest/gtest.h>

#include "mtalk/error.hpp"
#include "mtalk/schema.hpp"
#include "mtalk/workspace.hpp"
#include "support.hpp"

namespace {

using namespace mtalk;
using namespace mtalk::test;

class SchemaTest : public ::testing::Test {
 protected:
  SchemaTest() : texts_(golden_texts()), result_(compile_golden()), schema_(generate_schema(result_.state.compiled())) {}

  std::vector<Diagnostic> check(const std::string& file, const std::string& from, const std::string& to) {
    return validate_with_schema(schema_, replace_once(texts_.at(file), from, to), file);
  }

  Texts texts_;
  CompileResult result_;
  SchemaDoc schema_;
};

TEST_F(SchemaTest, GoldenUnitsAreValid) {
  for (const auto& [path, text] : texts_) {
    auto diags = validate_with_schema(schema_, text, path);
    EXPECT_TRUE(diags.empty()) << path << ": " << render_json(diags);
  }
}

TEST_F(SchemaTest, DocumentShape) {
  EXPECT_NE(schema_.text.find("<xs:schema"), std::string::npos);
  EXPECT_NE(schema_.text.find("name=\"Class.HTTP_Client\""), std::string::npos);
  EXPECT_NE(schema_.text.find("name=\"numberOfRetries\""), std::string::npos);
  EXPECT_NE(schema_.text.find("xs:long"), std::string::npos);
  EXPECT_TRUE(schema_.imports.empty());
  EXPECT_EQ(schema_.files("s.xsd").size(), 1u);
  auto again = generate_schema(result_.state.compiled());
  EXPECT_EQ(again.text, schema_.text);
}

TEST_F(SchemaTest, UnknownChildElementsAreRejected) {
  auto d = check("http.model.xml", "<URL>www.pontis.com/logo.bmp</URL>", "<URL>u</URL><bogus/>");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].code, codes::SchemaViolation);
  EXPECT_EQ(d[0].span.line, 38);

  d = check("http.model.xml", "<timeToLive>60</timeToLive>", "<timeToLive>60</timeToLive><ttl>1</ttl>");
  EXPECT_EQ(d.size(), 1u);
  d = check("cache.model.xml", "<name>timeToLive</name>", "<name>timeToLive</name><unit>s</unit>");
  EXPECT_EQ(d.size(), 1u);
  d = check("cache.model.xml", "<model>", "<model><widget/>");
  EXPECT_EQ(d.size(), 1u);
}

TEST_F(SchemaTest, ChildOrderIsFree) {
  auto d = check("http.model.xml", R"(<numberOfRetries>2</numberOfRetries>
    <timeout>2</timeout>)",
                 R"(<timeout>2</timeout>
    <numberOfRetries>2</numberOfRetries>)");
  EXPECT_TRUE(d.empty()) << render_json(d);
  d = check("http.model.xml", R"(<cache class="StandardCache">
      <timeToLive>60</timeToLive>
      <maxElementsInMemory>500</maxElementsInMemory>
    </cache>)",
            "");
  EXPECT_TRUE(d.empty()) << render_json(d);
}

TEST_F(SchemaTest, ScalarTypesAndAttributesAreChecked) {
  EXPECT_EQ(check("http.model.xml", "<timeout>15</timeout>", "<timeout>soon</timeout>").size(), 1u);
  EXPECT_EQ(check("http.model.xml", R"(abstract="true">
    <numberOfRetries>8)",
                  R"(abstract="yes">
    <numberOfRetries>8)")
                .size(),
            1u);
  EXPECT_EQ(check("http.model.xml", R"(<bean id="RobustHTTP_Client")", R"(<bean)").size(), 1u);
  EXPECT_EQ(check("http.model.xml", R"(<bean id="RobustHTTP_Client")", R"(<bean id="R" colour="red")").size(), 1u);
  EXPECT_FALSE(check("http.model.xml", "<timeout>15</timeout>", "<timeout>15</timeout><timeout>1</timeout>").empty());
}

TEST_F(SchemaTest, MalformedXmlIsAViolation) {
  auto d = check("http.model.xml", "</URL>", "</URI>");
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d[0].code, codes::SchemaViolation);
}

TEST(Schema, BrokenClassesDegradeToOpenContent) {
  auto texts = golden_texts();
  texts["http.model.xml"] = replace_once(texts["http.model.xml"], "<type>Long</type>\n        <description>Timeout",
                                         "<type>Nowhere</type>\n        <description>Timeout");
  auto r = compile_texts(texts, golden_manifest());
  ASSERT_TRUE(has_errors(r.diagnostics));
  auto schema = generate_schema(r.state.compiled());
  std::string unit = replace_once(texts["http.model.xml"], "<URL>www.pontis.com/logo.bmp</URL>",
                                  "<URL>x</URL><anything>at all</anything>");
  EXPECT_TRUE(validate_with_schema(schema, unit, "http.model.xml").empty());
  EXPECT_NE(schema.text.find("could not be fully resolved"), std::string::npos);
  // Attributes are still checked on the open envelope.
  std::string noId = replace_once(texts["retrievers.model.xml"], R"(<bean id="CNN_NewsRetriever")", "<bean");
  EXPECT_EQ(validate_with_schema(schema, noId, "retrievers.model.xml").size(), 1u);
}

TEST(Schema, OneDocumentPerNamespace) {
  auto r = compile_texts({{"a.model.xml", model(R"(<bean id="Base" class="Class"><properties>
<property><name>n</name><type>Long</type></property></properties></bean>)")},
                          {"b.model.xml", model(R"(<bean id="Leaf" class="Class" parent="Base"/>
<bean id="leaf" class="Leaf"><n>3</n></bean>)", "urn:example:b")}});
  ASSERT_TRUE(r.diagnostics.empty()) << render_json(r.diagnostics);
  auto schema = generate_schema(r.state.compiled(), "model.xsd");
  ASSERT_EQ(schema.imports.size(), 1u);
  EXPECT_EQ(schema.imports[0].targetNamespace, "urn:example:b");
  EXPECT_EQ(schema.imports[0].fileName, "model.1.xsd");
  EXPECT_NE(schema.text.find("model.1.xsd"), std::string::npos);
  auto files = schema.files("model.xsd");
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].fileName, "model.xsd");

  std::string good = model(R"(<bean id="leaf2" class="Leaf"><n>4</n></bean>)", "urn:example:b");
  EXPECT_TRUE(validate_with_schema(schema, good).empty()) << render_json(validate_with_schema(schema, good));
  std::string bad = model(R"(<bean id="leaf2" class="Leaf"><n>four</n></bean>)", "urn:example:b");
  EXPECT_EQ(validate_with_schema(schema, bad).size(), 1u);

  TempDir dir;
  write_schema(schema, dir.path() / "model.xsd");
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "model.xsd"));
  EXPECT_EQ(read_file(dir.path() / "model.1.xsd"), schema.imports[0].text);
}

// Every unit of a clean synthetic model passes; one unknown tag never does.
TEST(Schema, SoundOnSyntheticModels) {
  BenchmarkSpec spec;
  spec.classCount = 70;
  spec.metaclassCount = 5;
  spec.meanDit = 2.5;
  spec.instancesPerClass = 2;
  spec.seed = 3;
  auto ws = generate_synthetic(spec);
  auto r = compile_texts(ws.files, std::make_shared<NativeManifest>(ws.manifest));
  ASSERT_FALSE(has_errors(r.diagnostics));
  auto schema = generate_schema(r.state.compiled());
  std::mt19937_64 rng(17);
  for (const auto& [path, text] : ws.files) {
    auto diags = validate_with_schema(schema, text, path);
    EXPECT_TRUE(diags.empty()) << path << ": " << render_json(diags);
    std::vector<std::size_t> closes;
    for (auto pos = text.find("</"); pos != std::string::npos; pos = text.find("</", pos + 1)) closes.push_back(pos);
    for (int k = 0; k < 5; ++k) {
      std::size_t at = closes[rng() % closes.size()];
      std::string mutated = text.substr(0, at) + "<zz" + std::to_string(k) + "/>" + text.substr(at);
      EXPECT_FALSE(validate_with_schema(schema, mutated, path).empty()) << path << " at " << at;
    }
  }
}

}  // namespace
