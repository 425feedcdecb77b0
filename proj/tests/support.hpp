#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mtalk/compiler.hpp"
#include "mtalk/native.hpp"
#include "mtalk/source.hpp"

namespace mtalk::test {

inline std::filesystem::path fixtures_dir() { return MTALK_FIXTURES_DIR; }
inline std::filesystem::path golden_dir() { return fixtures_dir() / "golden"; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

using Texts = std::map<std::string, std::string>;

inline Texts golden_texts() {
  Texts out;
  for (const auto& f : discover_model_files(golden_dir())) out[f.generic_string()] = read_file(golden_dir() / f);
  return out;
}

inline std::shared_ptr<const NativeManifest> golden_manifest() {
  return std::make_shared<const NativeManifest>(
      load_manifest(golden_dir() / "native-manifest.json"));
}

inline std::vector<SourceUnit> parse_texts(const Texts& texts) {
  std::vector<SourceUnit> units;
  for (const auto& [path, text] : texts) units.push_back(parse_unit(text, path));
  return units;
}

inline CompileResult compile_texts(const Texts& texts, std::shared_ptr<const NativeManifest> manifest = nullptr) {
  return compile(parse_texts(texts), std::move(manifest));
}

inline CompileResult compile_golden() { return compile_texts(golden_texts(), golden_manifest()); }

/// Replaces exactly one occurrence; fails the test otherwise.
inline std::string replace_once(const std::string& text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << "missing: " << from;
  if (pos == std::string::npos) return text;
  EXPECT_EQ(text.find(from, pos + 1), std::string::npos) << "ambiguous: " << from;
  return text.substr(0, pos) + to + text.substr(pos + from.size());
}

/// Wraps bean declarations into a unit.
inline std::string model(const std::string& body, const std::string& ns = "") {
  std::string open = ns.empty() ? "<model>" : "<model xmlns=\"" + ns + "\">";
  return open + "\n" + body + "\n</model>\n";
}

inline std::vector<Diagnostic> with_code(const std::vector<Diagnostic>& diags, const std::string& code) {
  std::vector<Diagnostic> out;
  for (const auto& d : diags)
    if (d.code == code) out.push_back(d);
  return out;
}

inline std::vector<std::string> codes_of(const std::vector<Diagnostic>& diags) {
  std::vector<std::string> out;
  for (const auto& d : diags) out.push_back(d.code);
  return out;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("mtalk-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void copy_golden(const std::filesystem::path& to) {
  for (const auto& entry : std::filesystem::directory_iterator(golden_dir())) {
    if (!entry.is_regular_file()) continue;  // e.g. a stray state directory
    std::filesystem::copy_file(entry.path(), to / entry.path().filename(),
                               std::filesystem::copy_options::overwrite_existing);
  }
}

}  // namespace mtalk::test
