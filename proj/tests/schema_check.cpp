// Test helper: compiles a workspace, generates its schema in memory and
// validates each given file against it. Prints "<file>\t<violations>" lines.

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mtalk/schema.hpp"
#include "mtalk/workspace.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: schema_check <workspace> [file...]\n");
    return 2;
  }
  mtalk::DriverOptions options;
  options.root = argv[1];
  options.useCache = false;
  auto result = mtalk::run_compile(options);
  auto schema = mtalk::generate_schema(result.state.compiled());
  for (int i = 2; i < argc; ++i) {
    std::ifstream in(argv[i], std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto diags = mtalk::validate_with_schema(schema, buf.str(), argv[i]);
    std::printf("%s\t%zu\n", argv[i], diags.size());
  }
  return 0;
}
