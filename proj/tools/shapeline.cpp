// shapeline <task> [--spec FILE] [--seed U64] [--workers N] [--out DIR]
//
// Exit status: 0 all verdicts pass, 1 some verdict fails, 2 bad spec or
// arguments, 3 a run-time error (summary.json still written, partial).

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "shapeline/experiment.hpp"

namespace {

int validation_error(const std::string& msg) {
  std::cerr << "error: validation: " << msg << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace shapeline;
  CLI::App app{"Route-length shape experiments on random spatial networks"};
  std::string task, spec_file, out_dir;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool print_spec = false;
  std::string tasks_help;
  for (const auto& t : ExperimentSpec::tasks()) tasks_help += (tasks_help.empty() ? "" : "|") + t;
  app.add_option("task", task, tasks_help)->required();
  auto* seed_opt = app.add_option("--seed", seed, "run seed (a seed in the spec file wins)");
  app.add_option("--spec", spec_file, "JSON experiment spec");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory (default $SHAPELINE_OUT or ./shapeline-out)");
  app.add_flag("--print-spec", print_spec, "print the resolved spec and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ExperimentSpec spec;
  try {
    json doc = json::object();
    doc["task"] = task;
    if (seed_opt->count()) doc["seed"] = seed;
    if (!spec_file.empty()) {
      std::ifstream is(spec_file);
      if (!is) return validation_error("cannot read spec file " + spec_file);
      std::stringstream ss;
      ss << is.rdbuf();
      json file;
      try {
        file = json::parse(ss.str());
      } catch (const nlohmann::json::parse_error& e) {
        return validation_error(std::string("spec is not valid JSON: ") + e.what());
      }
      if (!file.is_object()) return validation_error("spec must be a JSON object");
      if (file.contains("task") && file["task"] != task)
        return validation_error("task '" + task + "' conflicts with spec task " + file["task"].dump());
      for (auto it = file.begin(); it != file.end(); ++it) doc[it.key()] = it.value();
    }
    spec = parse_spec(doc);
  } catch (const std::invalid_argument& e) {
    return validation_error(e.what());
  }

  if (print_spec) {
    std::cout << to_json(spec).dump(2) << '\n';
    return 0;
  }

  std::filesystem::path dir = spec.out;
  if (dir.empty()) dir = out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("SHAPELINE_OUT");
    dir = env && *env ? env : "shapeline-out";
  }
  RunSummary sum;
  try {
    sum = run(spec, dir, workers);
  } catch (const std::invalid_argument& e) {
    return validation_error(e.what());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  for (auto it = sum.verdicts.begin(); it != sum.verdicts.end(); ++it)
    std::cout << it.key() << ": " << it.value().get<std::string>() << '\n';
  if (sum.status == "error") std::cerr << "error: " << sum.error << '\n';
  std::cout << "status: " << sum.status << "  (" << (dir / "summary.json").string() << ")\n";
  return sum.exit_code();
}
