#pragma once

// Randomized single-file edits for incremental-compile oracles. Works on the
// text of the generated dialect only; it does not try to keep files valid.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace mtalk::test {

class RandomEditor {
 public:
  RandomEditor(std::uint64_t seed, std::vector<std::string> ids) : rng_(seed), ids_(std::move(ids)) {}

  /// Picks a file and applies one edit; returns the path that changed.
  std::string edit(std::map<std::string, std::string>& texts, std::string* description = nullptr) {
    auto it = texts.begin();
    std::advance(it, pick(texts.size()));
    std::string& text = it->second;
    for (int attempt = 0; attempt < 8; ++attempt) {
      std::string what;
      if (apply(text, what)) {
        if (description) *description = it->first + ": " + what;
        return it->first;
      }
    }
    insert_bean(text);
    if (description) *description = it->first + ": add bean (fallback)";
    return it->first;
  }

 private:
  std::size_t pick(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng_() % n); }

  static std::vector<std::size_t> find_all(const std::string& text, const std::string& needle) {
    std::vector<std::size_t> out;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
      out.push_back(pos);
    return out;
  }

  std::string random_name() {
    if (rng_() % 5 == 0) return "Missing" + std::to_string(pick(50));
    return ids_[pick(ids_.size())];
  }

  void insert_bean(std::string& text) {
    auto at = text.rfind("</model>");
    text.insert(at == std::string::npos ? text.size() : at, fresh_bean());
  }

  std::string fresh_bean() {
    return "  <bean id=\"Added" + std::to_string(counter_++) + "\" class=\"" + random_name() + "\"/>\n";
  }

  bool apply(std::string& text, std::string& what) {
    switch (pick(7)) {
      case 0: {  // retarget a reference
        static const char* attrs[] = {" class=\"", " parent=\"", " ref=\""};
        std::string attr = attrs[pick(3)];
        auto hits = find_all(text, attr);
        if (hits.empty()) return false;
        std::size_t start = hits[pick(hits.size())] + attr.size();
        std::size_t end = text.find('"', start);
        if (end == std::string::npos) return false;
        std::string name = random_name();
        what = "retarget" + attr + name;
        text.replace(start, end - start, name);
        return true;
      }
      case 1: {  // change a scalar value
        static const char* values[] = {"42", "-1", "abc", "true", "3.5", "", "1e3"};
        auto hits = find_all(text, "</");
        std::vector<std::size_t> scalar;
        for (auto h : hits) {
          auto open = text.rfind('>', h);
          if (open != std::string::npos && text.find('<', open) == h && h > open + 1) scalar.push_back(open + 1);
        }
        if (scalar.empty()) return false;
        std::size_t start = scalar[pick(scalar.size())];
        std::size_t end = text.find('<', start);
        std::string v = values[pick(7)];
        what = "value " + v;
        text.replace(start, end - start, v);
        return true;
      }
      case 2: {  // delete a bean
        auto hits = find_all(text, "<bean ");
        if (hits.empty()) return false;
        std::size_t start = hits[pick(hits.size())];
        std::size_t tagEnd = text.find('>', start);
        std::size_t close = text.find("</bean>", start);
        if (tagEnd == std::string::npos) return false;
        if (text[tagEnd - 1] != '/' && close == std::string::npos) return false;
        std::size_t end = text[tagEnd - 1] == '/' ? tagEnd + 1 : close + 7;
        what = "delete bean";
        text.erase(start, end - start);
        return true;
      }
      case 3: {  // add a bean
        what = "add bean";
        insert_bean(text);
        return true;
      }
      case 4: {  // toggle abstract
        auto hits = find_all(text, "<bean ");
        if (hits.empty()) return false;
        std::size_t start = hits[pick(hits.size())];
        std::size_t tagEnd = text.find('>', start);
        if (tagEnd == std::string::npos) return false;
        auto flag = text.find(" abstract=\"true\"", start);
        if (flag != std::string::npos && flag < tagEnd) {
          text.erase(flag, 16);
          what = "clear abstract";
        } else {
          text.insert(start + 5, " abstract=\"true\"");
          what = "set abstract";
        }
        return true;
      }
      case 5: {  // break the syntax
        auto hits = find_all(text, ">");
        if (hits.size() < 3) return false;
        std::size_t at = hits[1 + pick(hits.size() - 2)];
        what = "drop '>'";
        text.erase(at, 1);
        return true;
      }
      default: {  // retype a property
        auto hits = find_all(text, "<type>");
        if (hits.empty()) return false;
        std::size_t start = hits[pick(hits.size())] + 6;
        std::size_t end = text.find('<', start);
        static const char* scalars[] = {"Long", "String", "Double", "Boolean"};
        std::string t = pick(2) == 0 ? scalars[pick(4)] : random_name();
        what = "retype " + t;
        text.replace(start, end - start, t);
        return true;
      }
    }
  }

  std::mt19937_64 rng_;
  std::vector<std::string> ids_;
  int counter_ = 0;
};

}  // namespace mtalk::test
