#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>

#include "dtnlab/acceptance.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

// Two CLI converge runs into separate directories must produce identical CSVs.
bool cli_determinism(const fs::path& root, std::string& detail) {
  std::string out[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = root / ("cli" + std::to_string(k));
    fs::remove_all(dir);
    const std::string cmd = std::string(DTNLAB_CLI_PATH) + " converge --seed 7 --out " + dir.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      detail = "dtnlab converge failed";
      return false;
    }
    out[k] = slurp(dir / "converge.csv");
  }
  const bool same = !out[0].empty() && out[0] == out[1];
  detail = same ? "CLI reruns identical" : "CLI reruns differ";
  return same;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "dtnlab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  auto results = dtnlab::run_acceptance(42, root.string());
  std::string detail;
  const bool cli_ok = cli_determinism(root, detail);
  auto& last = results.back();
  last.pass = last.pass && cli_ok;
  last.detail += "; " + detail;

  int failed = 0;
  for (const auto& r : results) {
    std::cout << dtnlab::format_result(r) << "\n";
    failed += !r.pass;
  }
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria pass\n";
  return failed ? 1 : 0;
}
