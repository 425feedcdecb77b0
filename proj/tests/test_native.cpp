#include <gtest/gtest.h>

#include "mtalk/error.hpp"
#include "support.hpp"

namespace {

using namespace mtalk;
using namespace mtalk::test;

TEST(Manifest, ParsesGoldenManifest) {
  auto m = golden_manifest();
  EXPECT_EQ(m->order, (std::vector<std::string>{"HTTP_Client", "CacheManager", "StandardCache",
                                                "SecuredCacheManager"}));
  const auto* http = m->find("HTTP_Client");
  ASSERT_NE(http, nullptr);
  EXPECT_FALSE(http->parent);
  ASSERT_EQ(http->fields.size(), 3u);
  EXPECT_EQ(http->field("URL")->type, "String");
  EXPECT_EQ(http->field("nope"), nullptr);
  EXPECT_EQ(m->find("StandardCache")->parent, "CacheManager");
  EXPECT_EQ(m->find("PictureRetriever"), nullptr);
}

TEST(Manifest, SerializeParseRoundTrip) {
  auto m = *golden_manifest();
  auto again = parse_manifest(serialize_manifest(m), m.sourcePath);
  EXPECT_EQ(again.entries, m.entries);
  EXPECT_EQ(again.order, m.order);
  EXPECT_EQ(again.hash(), m.hash());

  // Randomized manifests survive the trip as well.
  std::mt19937_64 rng(5);
  for (int round = 0; round < 50; ++round) {
    NativeManifest r;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      NativeClassSig sig;
      sig.name = "N" + std::to_string(i);
      if (i > 0 && rng() % 2) sig.parent = "N" + std::to_string(rng() % i);
      int fields = static_cast<int>(rng() % 4);
      for (int f = 0; f < fields; ++f)
        sig.fields.push_back({"f" + std::to_string(f), rng() % 2 ? "Long" : "N" + std::to_string(rng() % 5)});
      r.order.push_back(sig.name);
      r.entries.emplace(sig.name, sig);
    }
    auto back = parse_manifest(serialize_manifest(r));
    EXPECT_EQ(back.entries, r.entries);
    EXPECT_EQ(back.order, r.order);
  }
}

TEST(Manifest, HashChangesWithContent) {
  auto m = *golden_manifest();
  auto h = m.hash();
  m.entries["HTTP_Client"].fields[0].type = "String";
  EXPECT_NE(m.hash(), h);
}

TEST(Manifest, RejectsMalformedInput) {
  auto kind_of = [](std::string_view text) {
    try {
      parse_manifest(text, "m.json");
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;  // no throw
  };
  EXPECT_EQ(kind_of("{"), ErrorKind::Parse);
  EXPECT_EQ(kind_of("[]"), ErrorKind::Parse);
  EXPECT_EQ(kind_of(R"({"classes": {}})"), ErrorKind::Parse);
  EXPECT_EQ(kind_of(R"({"classes": [{"fields": []}]})"), ErrorKind::Parse);
  EXPECT_EQ(kind_of(R"({"classes": [{"name": "A", "parent": 3}]})"), ErrorKind::Parse);
  EXPECT_EQ(kind_of(R"({"classes": [{"name": "A"}, {"name": "A"}]})"), ErrorKind::Duplicate);
  EXPECT_EQ(kind_of(R"({"classes": [{"name": "A", "fields": [{"name": "x", "type": "Long"}, {"name": "x", "type": "Long"}]}]})"),
            ErrorKind::Duplicate);
  EXPECT_THROW(load_manifest("/nonexistent/manifest.json"), Error);
}

TEST(Binding, EveryRegisteredFactoryNeedsAnEntry) {
  NativeRegistry reg;
  auto factory = [](const RuntimeInstance&) { return std::make_shared<NativeObject>(); };
  reg.add("HTTP_Client", factory);
  reg.add("Unknown", factory);
  auto diags = bind(reg, *golden_manifest());
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].code, codes::BindingWithoutEntry);
  EXPECT_NE(diags[0].message.find("Unknown"), std::string::npos);
  EXPECT_EQ(reg.names(), (std::vector<std::string>{"HTTP_Client", "Unknown"}));
  EXPECT_NE(reg.find("HTTP_Client"), nullptr);
  EXPECT_EQ(reg.find("Nope"), nullptr);
}

TEST(Binding, NativeObjectBehaviors) {
  NativeObject obj;
  obj.behaviors["twice"] = [](std::span<const RuntimeValue> args) -> RuntimeValue {
    return std::get<std::int64_t>(args[0]) * 2;
  };
  RuntimeValue arg = std::int64_t{21};
  EXPECT_EQ(std::get<std::int64_t>(obj.invoke("twice", {&arg, 1})), 42);
  EXPECT_THROW(obj.invoke("missing"), Error);
}

}  // namespace
