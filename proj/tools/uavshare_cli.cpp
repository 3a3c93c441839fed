#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "uavshare/experiment.hpp"

namespace fs = std::filesystem;
using namespace uavshare;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNotConverged = 3;

struct Options {
  std::string config;
  std::string seed;
  std::string seeds;
  std::string methods;
  std::string sweep;
  std::string grid;
  std::string out;
  std::string format = "csv";
  bool verbatim = false;
  bool strict = false;
  bool snapshots = false;
  int jobs = 1;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

ExperimentConfig load(const Options& o, bool want_sweep) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{.tmpl = ScenarioTemplate{}}
                                          : config_from_json(read_json(o.config));
  if (!o.seed.empty() && !o.seeds.empty()) throw ConfigError("give --seed or --seeds, not both");
  if (!o.seed.empty()) cfg.seeds = parse_seed_range(o.seed);
  if (!o.seeds.empty()) cfg.seeds = parse_seed_range(o.seeds);
  if (!o.methods.empty()) cfg.methods = parse_methods(o.methods);
  if (o.verbatim) cfg.solver.power.verbatim = true;
  if (!o.sweep.empty() || !o.grid.empty()) {
    if (o.sweep.empty() || o.grid.empty()) throw ConfigError("--sweep and --grid go together");
    if (!is_sweep_param(o.sweep)) throw ConfigError("unknown sweep parameter '" + o.sweep + "'");
    cfg.sweep = SweepSpec{o.sweep, parse_grid(o.grid)};
  }
  if (want_sweep && !cfg.sweep) throw ConfigError("sweep needs --sweep NAME --grid a:b:step or a config sweep block");
  if (o.format != "csv" && o.format != "json") throw ConfigError("--format must be csv or json");
  if (o.jobs < 1) throw ConfigError("--jobs must be >= 1");
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

int execute(const Options& o, bool want_sweep) {
  const ExperimentConfig cfg = load(o, want_sweep);
  const bool json_out = o.format == "json";
  const auto results = run_experiment(cfg, o.jobs, json_out && o.snapshots);

  std::ostringstream main, summary;
  if (json_out) {
    main << results_json(results).dump(2) << '\n';
  } else {
    write_csv(main, results, cfg.trace);
    write_summary_csv(summary, results);
  }

  if (o.out.empty()) {
    std::cout << main.str();
  } else {
    fs::create_directories(o.out);
    const fs::path dir(o.out);
    if (json_out) {
      write_file(dir / "results.json", main.str());
    } else {
      write_file(dir / "results.csv", main.str());
      write_file(dir / "summary.csv", summary.str());
    }
    write_file(dir / "config.json", to_json(cfg).dump(2) + "\n");
  }

  if (o.strict)
    for (const auto& r : results)
      for (const auto& m : r.methods)
        if (!m.converged) {
          std::cerr << "uavshare: " << m.method << " did not converge for seed " << r.seed << '\n';
          return kExitNotConverged;
        }
  return 0;
}

int export_results(const std::string& input, const std::string& format, const std::string& out, bool no_trace) {
  if (format != "csv" && format != "json") throw ConfigError("--format must be csv or json");
  const auto results = results_from_json(read_json(input));
  if (format == "json") {
    const std::string text = results_json(results).dump(2) + "\n";
    if (out.empty()) std::cout << text;
    else {
      fs::create_directories(out);
      write_file(fs::path(out) / "results.json", text);
    }
    return 0;
  }
  std::ostringstream main, summary;
  write_csv(main, results, !no_trace);
  write_summary_csv(summary, results);
  if (out.empty()) {
    std::cout << main.str();
  } else {
    fs::create_directories(out);
    write_file(fs::path(out) / "results.csv", main.str());
    write_file(fs::path(out) / "summary.csv", summary.str());
  }
  return 0;
}

int generate(const std::string& config, const std::string& seed, const std::string& out) {
  ScenarioTemplate tmpl;
  if (!config.empty()) {
    const auto j = read_json(config);
    tmpl = j.contains("template") ? template_from_json(j.at("template")) : template_from_json(j);
  }
  const auto seeds = parse_seed_range(seed);
  if (seeds.size() != 1) throw ConfigError("generate takes a single --seed");
  const std::string text = to_json(generate_scenario(tmpl, seeds.front())).dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  return 0;
}

void add_experiment_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Experiment config (JSON)");
  cmd->add_option("--seed", o.seed, "Single seed");
  cmd->add_option("--seeds", o.seeds, "Seed range N..M");
  cmd->add_option("--methods", o.methods, "Comma separated: proposed,rcop,ecop,rpoc,epoc,es");
  cmd->add_option("--sweep", o.sweep, "theta | beta | delta | num_subchannels");
  cmd->add_option("--grid", o.grid, "Sweep grid a:b:step");
  cmd->add_option("--out", o.out, "Output directory (default: stdout)");
  cmd->add_option("--format", o.format, "csv | json");
  cmd->add_flag("--verbatim-prop1", o.verbatim, "Closed-form power without the 1/ln 2 factor");
  cmd->add_option("--jobs", o.jobs, "Parallel solves");
  cmd->add_flag("--strict", o.strict, "Exit 3 if any solve does not converge");
  cmd->add_flag("--snapshots", o.snapshots, "JSON only: include full solve reports");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV resource sharing solver and experiment harness"};
  app.require_subcommand(1);

  Options run_opts, sweep_opts;
  auto* run = app.add_subcommand("run", "Solve and run baselines for each seed");
  add_experiment_flags(run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep over a grid and seeds");
  add_experiment_flags(sweep, sweep_opts);

  std::string gen_config, gen_seed = "1", gen_out;
  auto* gen = app.add_subcommand("generate", "Write a generated scenario as JSON");
  gen->add_option("--config", gen_config, "Template (JSON)");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output file (default: stdout)");

  std::string exp_input, exp_format = "csv", exp_out;
  bool exp_no_trace = false;
  auto* exp = app.add_subcommand("export", "Convert a saved results.json to CSV or JSON");
  exp->add_option("--input", exp_input, "results.json written by run or sweep")->required();
  exp->add_option("--format", exp_format, "csv | json");
  exp->add_option("--out", exp_out, "Output directory (default: stdout)");
  exp->add_flag("--no-trace", exp_no_trace, "Drop per-outer-iteration rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return execute(run_opts, false);
    if (*sweep) return execute(sweep_opts, true);
    if (*gen) return generate(gen_config, gen_seed, gen_out);
    if (*exp) return export_results(exp_input, exp_format, exp_out, exp_no_trace);
  } catch (const ConfigError& e) {
    std::cerr << "uavshare: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "uavshare: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
