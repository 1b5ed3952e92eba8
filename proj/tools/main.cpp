#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdlkg/experiments.hpp"

using namespace fdlkg;

int main(int argc, char** argv) {
  CLI::App app{"fdl: invariant-measure laboratory for the cubic wave field"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  long long seed = -1;
  int threads = 0;
  std::string out;
  app.add_option("-c,--config", config_path, "INI-style config file");
  app.add_option("--set", sets, "override, section.key=value (repeatable)");
  app.add_option("--seed", seed, "master RNG seed ([run] seed)");
  app.add_option("--threads", threads, "worker threads ([run] threads)");
  app.add_option("--out", out, "output directory ([run] out)");

  struct Entry {
    const char* name;
    const char* help;
    ordered_json (*fn)(RunContext&);
  };
  const Entry entries[] = {
      {"selftest", "structural checks of the basis and propagators", run_selftest},
      {"simulate", "one trajectory with observable series", run_simulate},
      {"linear-check", "closed-form and sampled facts about the linear law", run_linear_check},
      {"stationary", "long damped driven run; samples of the invariant measure", run_stationary},
      {"ito", "modified-energy identity on an ensemble", run_ito},
      {"balance", "stationary balance laws, moments, density and tails", run_balance},
      {"coupling", "pathwise inviscid-limit comparison on shared noise", run_coupling},
      {"sweep", "invariant-measure statistics across an alpha ladder", run_sweep},
      {"ergodic", "time averages, correlation and recurrence along the flow", run_ergodic},
  };
  for (const Entry& e : entries) app.add_subcommand(e.name, e.help);

  CLI11_PARSE(app, argc, argv);

  try {
    ConfigMap cfg =
        config_path.empty() ? ConfigMap{} : ConfigMap::parse_file(config_path);
    for (const std::string& s : sets) cfg.apply_set(s);
    if (seed >= 0) cfg.kv["run"]["seed"] = std::to_string(seed);
    if (threads > 0) cfg.kv["run"]["threads"] = std::to_string(threads);
    if (!out.empty()) cfg.kv["run"]["out"] = out;

    RunContext ctx = make_context(std::move(cfg));
    ordered_json summary;
    for (const Entry& e : entries)
      if (app.got_subcommand(e.name)) summary = e.fn(ctx);
    std::cout << summary.dump(2) << "\n";
    return 0;
  } catch (const blowup_error& e) {
    std::cerr << "blowup: " << e.what() << "\n";
    return 3;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
