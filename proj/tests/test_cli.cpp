#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtnlab/config.hpp"
#include "dtnlab/expr.hpp"
#include "dtnlab/report.hpp"
#include "dtnlab/run.hpp"
#include "oracles.hpp"

using namespace dtnlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "dtnlab_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

ConfigIssue first_issue(const std::string& text, bool strict = true) {
  try {
    parse_config(text, strict);
  } catch (const ConfigParseError& e) {
    REQUIRE_FALSE(e.issues().empty());
    return e.issues().front();
  }
  FAIL("expected a parse error");
  return {};
}

int cli(const std::string& args) {
  const std::string cmd = std::string(DTNLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const RunConfig c = parse_config(R"j({"schema_version": 1})j").config;
  CHECK(c == RunConfig{});
  CHECK(c.geometry.kind == "interval");
  CHECK(c.geometry.n == 16);
  CHECK(c.output.seed == 42);
}

TEST_CASE("schema version is required and checked") {
  CHECK(first_issue("{}").message.find("schema_version") != std::string::npos);
  CHECK_THROWS_AS(parse_config(R"j({"schema_version": 2})j"), ConfigParseError);
}

TEST_CASE("expression coefficients compile to an AST") {
  const RunConfig c = parse_config(R"j({"schema_version": 1, "coefficients": {"a": "2+sin(2*pi*x)"}})j").config;
  CHECK(c.a.kind == CoefficientSpec::Kind::Expression);
  const Expr e = Expr::parse(c.a.re);
  CHECK(e.count(Expr::Kind::Func) == 1);
  CHECK(e.eval(0.25) == doctest::Approx(3.0));
}

TEST_CASE("expression syntax errors point into the document") {
  const std::string text = "{\n  \"schema_version\": 1,\n  \"coefficients\": {\"a\": \"2+*3\"}\n}\n";
  const ConfigIssue i = first_issue(text);
  CHECK(i.line == 3);
  const std::string line3 = "  \"coefficients\": {\"a\": \"2+*3\"}";
  CHECK(i.column == static_cast<int>(line3.find('*')) + 1);
  CHECK(i.path == "/coefficients/a");
}

TEST_CASE("unknown keys are errors in strict mode and warnings otherwise") {
  const std::string text = "{\"schema_version\": 1,\n \"geometry\": {\"kind\": \"interval\", \"nn\": 4}}";
  const ConfigIssue i = first_issue(text);
  CHECK(i.path == "/geometry/nn");
  CHECK(i.line == 2);
  const ParsedConfig lax = parse_config(text, false);
  REQUIRE(lax.warnings.size() == 1);
  CHECK(lax.warnings[0].path == "/geometry/nn");
}

TEST_CASE("type mismatches and malformed JSON are located") {
  const ConfigIssue t = first_issue("{\"schema_version\": 1, \"geometry\": {\"n\": \"many\"}}");
  CHECK(t.path == "/geometry/n");
  CHECK(t.line == 1);
  CHECK(t.column > 1);
  const ConfigIssue s = first_issue("{\"schema_version\": 1,\n\"geometry\": ");
  CHECK(s.line >= 2);
  CHECK_THROWS_AS(parse_config(R"j({"schema_version": 1, "experiment": {"kind": "converge"}})j"), ConfigParseError);
  CHECK_THROWS_AS(parse_config(R"j({"schema_version": 1, "experiment": {"kind": "converge",
      "schedule": [{"n_osc": 8, "grid_n": 32}]}})j"),
                  ConfigParseError);
}

TEST_CASE("serialization round trip") {
  RunConfig c = default_config("converge");
  c.m = CoefficientSpec::make_constant(Scalar(1.0, -0.5));
  c.experiment.a_odd = CoefficientSpec::make_expression("1+0.5*sin(2*pi*{n}*x)", "x");
  c.experiment.m_odd = CoefficientSpec::make_values({1.0, Scalar(2.0, 0.5), 3.0});
  c.output.svg_path = "plot.svg";
  c.pivot.gram = "custom";
  c.pivot.weights = {1.0, 2.0};
  CHECK(parse_config(serialize_config(c)).config == c);

  RunConfig r = default_config("dtn");
  r.geometry = {"rectangle", 16, 4, 3};
  r.a = CoefficientSpec::make_tensor(CoefficientSpec::make_constant(2.0), CoefficientSpec::make_expression("1+y"));
  r.m = CoefficientSpec::make_checkerboard(1.0, 4.0);
  CHECK(parse_config(serialize_config(r)).config == r);
  Mat M(2, 2);
  M << 2.0, Scalar(0.0, 0.5), Scalar(0.0, -0.5), 2.0;
  r.a = CoefficientSpec::make_matrix(M);
  CHECK(parse_config(serialize_config(r)).config == r);

  for (const char* k : {"validate", "dtn", "graph", "sector", "converge", "resolvent"}) {
    const RunConfig d = default_config(k);
    CHECK(parse_config(serialize_config(d)).config == d);
  }
}

TEST_CASE("config hash is stable and sensitive") {
  const RunConfig c = default_config("converge");
  const std::string h = config_hash(c);
  CHECK(h.size() == 16);
  CHECK(h == config_hash(parse_config(serialize_config(c)).config));
  RunConfig d = c;
  d.output.seed = 43;
  CHECK(config_hash(d) != h);
}

TEST_CASE("validate run writes a row per check with schema columns") {
  RunConfig c = default_config("validate");
  c.geometry.n = 16;
  const fs::path dir = scratch("validate");
  const RunOutcome o = run(c, dir.string());
  REQUIRE(o.exit_code == kExitOk);
  const auto rows = read_csv(dir / "validate.csv");
  REQUIRE(rows.size() > 5);
  CHECK(rows[0][0] == "schema_version");
  CHECK(rows[0][1] == "config_hash");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] == std::to_string(kSchemaVersion));
    CHECK(rows[i][1] == config_hash(c));
  }
}

TEST_CASE("dtn run matches the analytic DtN of u'' = u") {
  const RunConfig c = default_config("dtn");
  const fs::path dir = scratch("dtn");
  REQUIRE(run(c, dir.string()).exit_code == kExitOk);
  const auto rows = read_csv(dir / "dtn.csv");
  REQUIRE(rows.size() == 5);
  REQUIRE(rows[0] == std::vector<std::string>{"schema_version", "config_hash", "row", "col", "re", "im"});
  const oracle::RMat ref = oracle::analytic_dtn_unit();
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const int i = std::stoi(rows[k][2]), j = std::stoi(rows[k][3]);
    CHECK(std::abs(std::stod(rows[k][4]) - ref(i, j)) < 1e-3);
    CHECK(std::abs(std::stod(rows[k][5])) < 1e-12);
  }
}

TEST_CASE("converge run decreases and is reproducible byte for byte") {
  RunConfig c = default_config("converge");
  c.output.svg_path = "converge.svg";
  const fs::path d1 = scratch("conv1"), d2 = scratch("conv2");
  REQUIRE(run(c, d1.string()).exit_code == kExitOk);
  REQUIRE(run(c, d2.string()).exit_code == kExitOk);
  CHECK(slurp(d1 / "converge.csv") == slurp(d2 / "converge.csv"));
  CHECK(slurp(d1 / "converge.svg").find("<svg") != std::string::npos);
  const auto rows = read_csv(d1 / "converge.csv");
  const auto& hdr = rows.at(0);
  const auto col = [&](const std::string& n) { return std::find(hdr.begin(), hdr.end(), n) - hdr.begin(); };
  const auto mc = col("metric"), vc = col("value"), nc = col("n_osc");
  REQUIRE(static_cast<std::size_t>(vc) < hdr.size());
  std::vector<std::pair<int, double>> gap;
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k][mc] == "inv_gap_rel") gap.emplace_back(std::stoi(rows[k][nc]), std::stod(rows[k][vc]));
  REQUIRE(gap.size() == 4);
  std::sort(gap.begin(), gap.end());
  CHECK(gap.back().second <= 0.5 * gap.front().second);
}

TEST_CASE("resolvent run at the first Dirichlet eigenvalue reports a config error") {
  RunConfig c = default_config("resolvent");
  c.m = CoefficientSpec::make_constant(-oracle::discrete_dirichlet_eigenvalue(1, 1.0 / 257.0));
  c.experiment.m_limit = c.m;
  c.experiment.schedule = {{4, 256}};
  const RunOutcome o = run(c, scratch("kernel").string());
  CHECK(o.exit_code == kExitConfig);
}

TEST_CASE("convergence runs reject rectangles and accept a single schedule row") {
  RunConfig c = default_config("converge");
  c.experiment.schedule = {{2, 64}};
  CHECK(run(c, scratch("single").string()).exit_code == kExitOk);
  c.geometry = {"rectangle", 16, 4, 4};
  CHECK(run(c, scratch("rect").string()).exit_code == kExitConfig);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  CHECK(cli("validate --out " + dir.string()) == kExitOk);
  CHECK(fs::exists(dir / "validate.csv"));
  CHECK(cli("frobnicate") == kExitConfig);
  CHECK(cli("dtn --config " + (dir / "missing.json").string()) == kExitConfig);

  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{\"schema_version\": 1, \"bogus\": true}";
  CHECK(cli("validate --strict --config " + bad.string() + " --out " + dir.string()) == kExitConfig);

  // m = -lambda_1: the Dirichlet problem is singular
  const fs::path sing = dir / "singular.json";
  char num[64];
  std::snprintf(num, sizeof num, "%.17g", -oracle::discrete_dirichlet_eigenvalue(1, 1.0 / 64.0));
  std::ofstream(sing) << "{\"schema_version\": 1, \"geometry\": {\"kind\": \"interval\", \"n\": 63},"
                      << " \"coefficients\": {\"a\": 1, \"m\": " << num << "}}";
  CHECK(cli("dtn --config " + sing.string() + " --out " + dir.string()) == kExitSolver);
  CHECK(cli("graph --config " + sing.string() + " --out " + dir.string()) == kExitOk);

  const fs::path blocked = dir / "file_not_dir";
  std::ofstream(blocked) << "x";
  CHECK(cli("validate --out " + (blocked / "sub").string()) == kExitConfig);
}
