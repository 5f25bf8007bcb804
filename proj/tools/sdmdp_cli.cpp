#include "sdmdp/augmented/aug_mdp.hpp"
#include "sdmdp/bench/experiment.hpp"
#include "sdmdp/core/errors.hpp"
#include "sdmdp/instances/instances.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitResource = 3;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sdmdp::ValidationError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw sdmdp::ValidationError(path + ": " + e.what());
  }
}

int cmd_run(const std::string& config, int jobs, const std::string& delay_mode) {
  auto cfg = sdmdp::load_experiment_config(config);
  if (!delay_mode.empty()) cfg.delay_mode = delay_mode;
  const auto result = sdmdp::run_experiment(cfg, jobs);
  std::cout << "wrote " << result.traces.size() << " traces and manifest.json to " << cfg.output.string() << "\n";
  for (const auto& f : result.failures) {
    std::cerr << "failed: " << f.cell;
    if (f.seed_level) std::cerr << " seed " << f.seed;
    std::cerr << ": " << f.message << "\n";
  }
  if (result.resource_failure()) return kExitResource;
  return result.failures.empty() ? 0 : 1;
}

int cmd_summarize(const std::string& pattern, const std::string& json_out) {
  const auto files = sdmdp::expand_glob(pattern);
  if (files.empty()) throw sdmdp::ValidationError("no files match " + pattern);
  const auto report = sdmdp::summarize(files);
  std::cout << sdmdp::format_summary(report);
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    out << sdmdp::to_json(report).dump(2) << "\n";
  }
  return 0;
}

int cmd_dump(const std::string& spec, const std::string& out) {
  const auto inst = sdmdp::generate_instance(read_json(spec));
  const std::string text = sdmdp::instance_to_json(inst.instance, inst.meta).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out) << text;
  }
  return 0;
}

int cmd_validate(const std::string& path, std::size_t budget) {
  const auto loaded = sdmdp::instance_from_json(read_json(path));
  const auto& m = loaded.instance.mdp;
  const auto& d = loaded.instance.delay;
  const auto opt = sdmdp::optimal_delayed_value(m, d, budget);
  std::cout << "S=" << m.num_states() << " A=" << m.num_actions() << " H=" << m.horizon()
            << " B=" << m.branching_bound() << " max_support=" << m.max_support() << " D_max=" << d.d_max()
            << " delta_max=" << d.delta_max() << " known=" << (d.known() ? "true" : "false") << "\n"
            << "reachable augmented states: " << opt.reachable << "\n"
            << "optimal delayed value: " << opt.value << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic delayed MDP learners and benchmarks"};
  app.require_subcommand(1);

  std::string config, delay_mode, pattern, json_out, spec, out, instance;
  int jobs = 1;
  std::size_t budget = sdmdp::kDefaultAugBudget;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--delay-mode", delay_mode, "resolve mvp_delayed as known or unknown")
      ->check(CLI::IsMember({"known", "unknown"}));

  auto* sum = app.add_subcommand("summarize", "aggregate trace CSVs");
  sum->add_option("--glob", pattern, "trace file pattern")->required();
  sum->add_option("--json", json_out, "also write the report as JSON");

  auto* dump = app.add_subcommand("dump-instance", "materialize a generator spec");
  dump->add_option("--spec", spec, "generator spec JSON")->required()->check(CLI::ExistingFile);
  dump->add_option("--out", out, "output file (default stdout)");

  auto* val = app.add_subcommand("validate", "check an instance file");
  val->add_option("--instance", instance, "instance JSON")->required()->check(CLI::ExistingFile);
  val->add_option("--budget", budget, "augmented state budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return cmd_run(config, jobs, delay_mode);
    if (*sum) return cmd_summarize(pattern, json_out);
    if (*dump) return cmd_dump(spec, out);
    if (*val) return cmd_validate(instance, budget);
  } catch (const sdmdp::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const sdmdp::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << " (reachable " << e.reachable() << ")\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
