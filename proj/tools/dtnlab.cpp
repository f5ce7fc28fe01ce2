#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dtnlab/acceptance.hpp"
#include "dtnlab/run.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool strict = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "random seed (overrides the configuration)");
  sub->add_flag("--strict", f.strict, "reject unknown configuration keys");
}

int run_experiment(const std::string& kind, const Flags& f) {
  using namespace dtnlab;
  RunConfig cfg;
  try {
    if (f.config.empty()) {
      cfg = default_config(kind);
    } else {
      std::ifstream in(f.config, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      ParsedConfig parsed = parse_config(ss.str(), f.strict);
      for (const auto& w : parsed.warnings)
        std::cerr << f.config << ":" << w.line << ":" << w.column << ": warning: " << w.message << "\n";
      cfg = std::move(parsed.config);
      if (cfg.experiment.kind != kind) {
        // the subcommand decides what runs; the remaining sections still apply
        cfg.experiment.kind = kind;
        if ((kind == "converge" || kind == "resolvent") && cfg.experiment.schedule.empty())
          throw ConfigError(kind + " needs experiment.schedule");
      }
    }
    if (f.seed) cfg.output.seed = *f.seed;
  } catch (const ConfigParseError& e) {
    for (const auto& i : e.issues()) {
      std::cerr << (f.config.empty() ? "config" : f.config) << ":" << i.line << ":" << i.column << ": error: ";
      if (!i.path.empty()) std::cerr << i.path << ": ";
      std::cerr << i.message << "\n";
    }
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  const RunOutcome out = run(cfg, f.out);
  for (const auto& line : out.summary) (out.exit_code ? std::cerr : std::cout) << line << "\n";
  for (const auto& a : out.artifacts) std::cout << "wrote " << a << "\n";
  return out.exit_code;
}

int run_check(const Flags& f) {
  using namespace dtnlab;
  const std::uint64_t seed = f.seed.value_or(42);
  const std::string scratch = f.out + "/check";
  const auto results = run_acceptance(seed, scratch);
  bool all = true;
  for (const auto& r : results) {
    std::cout << format_result(r) << std::endl;
    all = all && r.pass;
  }
  return all ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dtnlab: discrete Dirichlet-to-Neumann experiments"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> kinds{
      {"validate", "check the dual-pair axioms and boundary spaces"},
      {"dtn", "compute the DtN matrix on the pivot space"},
      {"graph", "DtN graph, domain and multi-valued part"},
      {"sector", "sample the numerical range against the computed sector"},
      {"converge", "coefficient-sequence convergence experiment"},
      {"resolvent", "non-coercive resolvent convergence experiment"},
      {"check", "run the acceptance suite"}};
  for (const auto& [name, help] : kinds) add_flags(app.add_subcommand(name, help), flags);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dtnlab::kExitConfig;
  }
  const std::string kind = app.get_subcommands().front()->get_name();
  if (kind == "check") return run_check(flags);
  return run_experiment(kind, flags);
}
