#include "sdmdp/bench/experiment.hpp"

#include "sdmdp/augmented/aug_mdp.hpp"
#include "sdmdp/core/errors.hpp"
#include "sdmdp/delayed/mvp_delayed.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef SDMDP_VERSION
#define SDMDP_VERSION "unknown"
#endif
#ifndef SDMDP_GIT
#define SDMDP_GIT "unknown"
#endif

namespace sdmdp {

namespace fs = std::filesystem;

namespace {

const char* const kAlgorithms[] = {"mvp_delayed_known", "mvp_delayed_unknown", "pkd_generic", "random_policy",
                                   "mvp_delayed"};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& p, const std::string& bytes) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << bytes;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::string value_label(const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct Cell {
  std::string name;
  std::string algorithm;
  nlohmann::json params;
  std::size_t instance = 0;
};

struct Instance {
  LoadedInstance loaded;
  std::string sha256;
  std::optional<double> optimal;
  std::string error;
  bool resource = false;
};

struct TaskResult {
  bool ok = false;
  std::string file;
  std::string sha256;
  double final_regret = 0.0;
  RunFailure failure;
};

}  // namespace

bool ExperimentResult::resource_failure() const {
  for (const auto& f : failures)
    if (f.resource) return true;
  return false;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  try {
    c.raw = j;
    c.base_dir = base_dir;
    c.name = j.value("name", c.name);
    c.instance = j.at("instance");
    if (j.contains("algorithms")) {
      c.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    } else {
      c.algorithms.push_back(j.at("algorithm").get<std::string>());
    }
    c.delay_mode = j.value("delay_mode", c.delay_mode);
    c.episodes = j.at("episodes").get<int>();
    c.delta = j.value("delta", c.delta);
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.oracle_stride = j.value("oracle_stride", c.oracle_stride);
    c.replan = replan_from_string(j.value("replan", std::string("every_episode")));
    c.budget = j.value("budget", c.budget);
    c.snapshot_every = j.value("snapshot_every", 0);
    c.output = base_dir / j.value("output", std::string("out"));
    if (j.contains("sweep")) {
      for (const auto& [key, values] : j.at("sweep").items()) {
        if (!values.is_array() || values.empty()) throw ValidationError("sweep axis " + key + " needs values");
        c.sweep.emplace_back(key, values.get<std::vector<nlohmann::json>>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed experiment config: ") + e.what());
  }
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (c.episodes < 1) throw ValidationError("episodes must be >= 1");
  if (c.seeds.empty()) throw ValidationError("seeds must be non-empty");
  if (c.oracle_stride < 0) throw ValidationError("oracle_stride must be >= 0");
  if (c.delay_mode != "known" && c.delay_mode != "unknown") throw ValidationError("delay_mode must be known or unknown");
  if (c.algorithms.empty()) throw ValidationError("no algorithms given");
  for (const auto& a : c.algorithms) {
    if (std::find(std::begin(kAlgorithms), std::end(kAlgorithms), a) == std::end(kAlgorithms)) {
      throw ValidationError("unknown algorithm '" + a + "'");
    }
  }
  if (!c.sweep.empty() && c.instance.contains("file")) {
    throw ValidationError("sweep axes need a generator instance source");
  }
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& file) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
  return parse_experiment_config(j, file.parent_path());
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string code_version() { return std::string(SDMDP_VERSION) + "+" + SDMDP_GIT; }

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  // Instances: one per sweep combination.
  std::vector<nlohmann::json> combos{nlohmann::json::object()};
  for (const auto& [key, values] : cfg.sweep) {
    std::vector<nlohmann::json> next;
    for (const auto& c : combos)
      for (const auto& v : values) {
        auto n = c;
        n[key] = v;
        next.push_back(std::move(n));
      }
    combos = std::move(next);
  }
  std::vector<Instance> instances;
  std::vector<Cell> cells;
  for (const auto& combo : combos) {
    auto load = [&] {
      if (cfg.instance.contains("file")) {
        const fs::path p = cfg.base_dir / cfg.instance.at("file").get<std::string>();
        try {
          return instance_from_json(nlohmann::json::parse(read_file(p)));
        } catch (const nlohmann::json::exception& e) {
          throw ValidationError(p.string() + ": " + e.what());
        }
      }
      nlohmann::json spec = cfg.instance;
      for (const auto& [k, v] : combo.items()) spec[k] = v;
      return generate_instance(spec);
    };
    Instance inst{load(), "", std::nullopt, "", false};
    inst.sha256 = sha256_hex(instance_to_json(inst.loaded.instance, inst.loaded.meta).dump());
    const std::size_t idx = instances.size();
    instances.push_back(std::move(inst));
    for (const auto& alg : cfg.algorithms) {
      const std::string resolved = alg == "mvp_delayed" ? "mvp_delayed_" + cfg.delay_mode : alg;
      if (resolved == "mvp_delayed_known" && !instances[idx].loaded.instance.delay.known()) {
        throw ValidationError("mvp_delayed_known needs an instance whose delay model is known");
      }
      std::string name = resolved;
      for (const auto& [key, values] : cfg.sweep) name += "." + key + "=" + value_label(combo.at(key));
      cells.push_back(Cell{name, resolved, combo, idx});
    }
  }

  for (auto& inst : instances) {
    try {
      inst.optimal = optimal_delayed_value(inst.loaded.instance.mdp, inst.loaded.instance.delay, cfg.budget).value;
    } catch (const ResourceError& e) {
      inst.error = e.what();
      inst.resource = true;
    }
  }

  fs::create_directories(cfg.output);
  struct Task {
    std::size_t cell;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!instances[cells[c].instance].optimal) continue;
    for (auto seed : cfg.seeds) tasks.push_back({c, seed});
  }
  std::vector<TaskResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Cell& cell = cells[tasks[t].cell];
      const Instance& inst = instances[cell.instance];
      TaskResult& res = results[t];
      res.failure = RunFailure{cell.name, tasks[t].seed, true, false, ""};
      try {
        RunOptions opts;
        opts.episodes = cfg.episodes;
        opts.delta = cfg.delta;
        opts.seed = tasks[t].seed;
        opts.oracle_stride = cfg.oracle_stride;
        opts.replan = cfg.replan;
        opts.budget = cfg.budget;
        opts.optimal_value = inst.optimal;
        const auto& mdp = inst.loaded.instance.mdp;
        const auto& d = inst.loaded.instance.delay;
        const std::string stem = cell.name + "__seed" + std::to_string(tasks[t].seed);
        std::ostringstream snapshots;
        SnapshotHook hook;
        if (cfg.snapshot_every > 0) {
          hook.every = cfg.snapshot_every;
          hook.write = [&](int k, const nlohmann::json& snap) {
            snapshots << nlohmann::json{{"episode", k}, {"estimator", snap}}.dump() << '\n';
          };
        }
        const RegretTrace trace = cell.algorithm == "random_policy"
                                      ? run_random_policy(mdp, d, opts)
                                      : run_mvp_delayed(mdp, d, delayed_algorithm_from_string(cell.algorithm),
                                                        opts, hook);
        std::ostringstream csv;
        trace.write_csv(csv);
        res.file = stem + ".csv";
        res.sha256 = sha256_hex(csv.str());
        res.final_regret = trace.rows().back().cumulative_regret;
        write_atomic(cfg.output / res.file, csv.str());
        if (cfg.snapshot_every > 0) write_atomic(cfg.output / (stem + ".snapshots.jsonl"), snapshots.str());
        res.ok = true;
      } catch (const ResourceError& e) {
        res.failure.resource = true;
        res.failure.message = e.what();
      } catch (const std::exception& e) {
        res.failure.message = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  ExperimentResult out;
  nlohmann::json jcells = nlohmann::json::array();
  std::size_t t = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const Instance& inst = instances[cell.instance];
    nlohmann::json traces = nlohmann::json::array();
    nlohmann::json failures = nlohmann::json::array();
    if (!inst.optimal) {
      RunFailure f{cell.name, 0, false, inst.resource, "optimal value: " + inst.error};
      failures.push_back({{"seed", nullptr}, {"resource", f.resource}, {"message", f.message}});
      out.failures.push_back(std::move(f));
    }
    for (; t < tasks.size() && tasks[t].cell == c; ++t) {
      const TaskResult& r = results[t];
      if (r.ok) {
        traces.push_back({{"seed", tasks[t].seed}, {"file", r.file}, {"sha256", r.sha256},
                          {"final_regret", r.final_regret}});
        out.traces.push_back(cfg.output / r.file);
      } else {
        failures.push_back({{"seed", tasks[t].seed}, {"resource", r.failure.resource}, {"message", r.failure.message}});
        out.failures.push_back(r.failure);
      }
    }
    jcells.push_back({{"name", cell.name},
                      {"algorithm", cell.algorithm},
                      {"params", cell.params},
                      {"instance_sha256", inst.sha256},
                      {"optimal_value", inst.optimal ? nlohmann::json(*inst.optimal) : nlohmann::json(nullptr)},
                      {"traces", std::move(traces)},
                      {"failures", std::move(failures)}});
  }
  out.manifest = {{"name", cfg.name},
                  {"code_version", code_version()},
                  {"config_sha256", sha256_hex(cfg.raw.dump())},
                  {"config", cfg.raw},
                  {"cells", std::move(jcells)}};
  write_atomic(cfg.output / "manifest.json", out.manifest.dump(2) + "\n");
  return out;
}

}  // namespace sdmdp
