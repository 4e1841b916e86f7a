// pitl: simulate plants, train baselines, run transfer workflows, aggregate reports.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pitl/errors.hpp"
#include "pitl/experiment/config.hpp"
#include "pitl/experiment/report.hpp"
#include "pitl/experiment/runner.hpp"

namespace ex = pitl::experiment;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2 };

struct CommonOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::uint64_t> seeds;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "JSON experiment config (defaults reproduce the benchmark)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--out", o.out, "Output directory");
}

ex::ExperimentConfig resolve(const CommonOpts& o) {
  ex::ExperimentConfig cfg = o.config.empty() ? ex::ExperimentConfig{} : ex::load_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.seeds = {*o.seed};
  }
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

int finish_runs(const pitl::experiment::MetricsReport& report) {
  std::cout << ex::report_table(report);
  int code = kOk;
  for (const auto& r : report.rows) {
    if (r.diverged) {
      std::cerr << "error: " << r.name << " (seed " << r.seed << ") diverged: " << r.diagnostic << '\n';
      code = kRuntime;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed transfer learning for dissolved-oxygen prediction"};
  app.require_subcommand(1);

  CommonOpts sim_o, train_o, transfer_o, bench_o;
  auto* sim = app.add_subcommand("simulate", "Write the source, industrial and target datasets as CSV");
  add_common(sim, sim_o);
  auto* trn = app.add_subcommand("train", "Train the configured baseline models on the target series");
  add_common(trn, train_o);
  auto* tfr = app.add_subcommand("transfer", "Run the configured transfer models (pretraining sources as needed)");
  add_common(tfr, transfer_o);
  auto* bench = app.add_subcommand("benchmark", "Every model on every seed, then the comparison table");
  add_common(bench, bench_o);
  bench->add_option("--seeds", bench_o.seeds, "Seed list (overrides the config)")->delimiter(',');

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* rep = app.add_subcommand("report", "Aggregate run manifests into a metrics table");
  rep->add_option("runs", report_dirs, "Run directories (searched recursively for manifest.json)");
  rep->add_option("--out", report_out, "Write report.csv, runs.csv and report.txt here");

  auto* defaults = app.add_subcommand("defaults", "Print the default experiment config as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    (void)ex::thread_cap();
    if (*defaults) {
      std::cout << ex::to_json(ex::ExperimentConfig{}).dump(2) << '\n';
      return kOk;
    }
    if (*sim) {
      ex::cmd_simulate(resolve(sim_o));
      return kOk;
    }
    if (*trn) return finish_runs(ex::cmd_train(resolve(train_o)));
    if (*tfr) return finish_runs(ex::cmd_transfer(resolve(transfer_o)));
    if (*bench) {
      const auto report = ex::cmd_benchmark(resolve(bench_o));
      std::cout << ex::report_table(report);
      return kOk;
    }
    if (*rep) {
      std::optional<std::filesystem::path> out;
      if (!report_out.empty()) out = report_out;
      std::cout << ex::report_table(ex::cmd_report({report_dirs.begin(), report_dirs.end()}, out));
      return kOk;
    }
  } catch (const pitl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const pitl::CompositionError& e) {
    std::cerr << "composition error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
