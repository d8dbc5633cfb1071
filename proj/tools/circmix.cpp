// circmix: fit, select, simulate, bootstrap and recovery commands for
// circular-axial concomitant mixtures.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "circmix/bootstrap.hpp"
#include "circmix/errors.hpp"
#include "circmix/io/export.hpp"
#include "circmix/io/ingest.hpp"
#include "circmix/io/json.hpp"
#include "circmix/mixture.hpp"
#include "circmix/parallel.hpp"
#include "circmix/simstudy.hpp"

namespace {

using namespace circmix;
using io::json;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Common {
  std::string output = ".";
  std::uint64_t seed = 20240101;
  unsigned threads = default_threads();
};

struct DataOptions {
  std::string input;
  std::string circular;
  std::string axial;
  std::string unit = "degrees";
  std::string covariates;   // comma separated
  std::string categorical;  // column=reference, comma separated
  std::string delimiter = ",";
};

struct FitOptions {
  std::string family = "VM-AX";
  int J = 2;
  int restarts = 20;
  double tol = 1e-8;
  int max_iter = 500;
};

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("-o,--output", c.output, "Output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "Master random seed")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--config", "Flat key=value file; command-line flags take precedence");
}

void add_data(CLI::App* app, DataOptions& d) {
  app->add_option("-i,--input", d.input, "Delimited input file with a header row")->required();
  app->add_option("--circular", d.circular, "Circular angle column")->required();
  app->add_option("--axial", d.axial, "Axial angle column")->required();
  app->add_option("--unit", d.unit, "Angle unit of the input: degrees or radians")
      ->capture_default_str()
      ->check(CLI::IsMember({"degrees", "radians"}));
  app->add_option("--covariates", d.covariates, "Comma-separated covariate columns, in design order");
  app->add_option("--categorical", d.categorical, "Comma-separated column=reference_level pairs");
  app->add_option("--delimiter", d.delimiter, "Field delimiter")->capture_default_str();
}

void add_fit(CLI::App* app, FitOptions& f, bool with_shape) {
  if (with_shape) {
    app->add_option("--family", f.family, "VM-AX, VM-AXWC, WC-AX or WC-AXWC")->capture_default_str();
    app->add_option("-J,--components", f.J, "Number of components")->capture_default_str();
  }
  app->add_option("--restarts", f.restarts, "EM restarts")->capture_default_str();
  app->add_option("--tol", f.tol, "Relative log-likelihood tolerance")->capture_default_str();
  app->add_option("--max-iter", f.max_iter, "Maximum EM iterations")->capture_default_str();
}

io::IngestResult load(const DataOptions& d) {
  io::IngestOptions opt;
  opt.circular_column = d.circular;
  opt.axial_column = d.axial;
  opt.unit = io::angle_unit_from_string(d.unit);
  opt.covariates = split(d.covariates, ',');
  for (const auto& pair : split(d.categorical, ',')) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      throw DomainError("--categorical expects column=reference, got '" + pair + "'");
    }
    opt.categorical[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  if (d.delimiter.size() != 1 && d.delimiter != "\\t") throw DomainError("--delimiter must be a single character");
  opt.delimiter = d.delimiter == "\\t" ? '\t' : d.delimiter[0];
  return io::ingest(d.input, opt);
}

json ingest_summary(const io::IngestResult& r) {
  return {{"rows_read", r.rows_read}, {"rows_used", r.data.size()}, {"dropped_lines", r.dropped_lines}};
}

FitConfig fit_config(const FitOptions& f, const Common& c) {
  FitConfig cfg;
  cfg.restarts = f.restarts;
  cfg.tol = f.tol;
  cfg.max_iter = f.max_iter;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  return cfg;
}

std::string out_path(const Common& c, const std::string& file) {
  std::filesystem::create_directories(c.output);
  return (std::filesystem::path(c.output) / file).string();
}

std::vector<int> parse_j_range(const std::string& s) {
  std::vector<int> out;
  for (const auto& part : split(s, ',')) {
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoi(part));
      } else {
        const int a = std::stoi(part.substr(0, dash));
        const int b = std::stoi(part.substr(dash + 1));
        if (b < a) throw DomainError("");
        for (int j = a; j <= b; ++j) out.push_back(j);
      }
    } catch (const std::exception&) {
      throw DomainError("cannot parse J range '" + s + "' (use e.g. 2-4 or 1,2,3)");
    }
  }
  if (out.empty()) throw DomainError("J range is empty");
  return out;
}

Scenario load_scenario(const std::string& spec) {
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") return io::scenario_from_json(io::read_json(spec));
  return find_scenario(spec);
}

int cmd_fit(const DataOptions& d, const FitOptions& f, const Common& c) {
  const auto in = load(d);
  const FitResult r = fit(in.data, family_pair_from_string(f.family), f.J, fit_config(f, c));
  json j = io::fit_to_json(r, in.data.covariate_names);
  j["command"] = "fit";
  j["seed"] = c.seed;
  j["ingest"] = ingest_summary(in);
  io::write_json(out_path(c, "result.json"), j);
  io::write_classification(out_path(c, "classification.csv"), r);
  return kOk;
}

int cmd_select(const DataOptions& d, const FitOptions& f, const std::string& families, const std::string& range,
               const Common& c) {
  const auto in = load(d);
  std::vector<FamilyPair> grid;
  for (const auto& name : split(families, ',')) grid.push_back(family_pair_from_string(name));
  const SelectionResult s = select_model(in.data, grid, parse_j_range(range), fit_config(f, c));
  io::write_selection(out_path(c, "selection.csv"), s);
  if (!s.best) throw FitFailure("model selection: every fit failed");
  json j = io::fit_to_json(s.best_fit(), in.data.covariate_names);
  j["command"] = "select";
  j["seed"] = c.seed;
  j["ingest"] = ingest_summary(in);
  io::write_json(out_path(c, "result.json"), j);
  io::write_classification(out_path(c, "classification.csv"), s.best_fit());
  return kOk;
}

int cmd_simulate(const std::string& scenario, long n, const Common& c) {
  Scenario s = load_scenario(scenario);
  if (n > 0) s.n = static_cast<std::size_t>(n);
  s.seed = c.seed;
  Rng rng = make_stream(c.seed, 0);
  const SimulatedData sim = simulate_scenario(s, rng);
  io::write_dataset(out_path(c, "data.csv"), sim.data, &sim.labels);
  std::vector<long> counts(static_cast<std::size_t>(s.truth.J()), 0);
  for (int l : sim.labels) ++counts[static_cast<std::size_t>(l)];
  json j = {{"command", "simulate"}, {"seed", c.seed}, {"scenario", io::scenario_to_json(s)}, {"class_counts", counts}};
  io::write_json(out_path(c, "result.json"), j);
  return kOk;
}

int cmd_bootstrap(const DataOptions& d, const FitOptions& f, const std::string& model_path, int B, double level,
                  int boot_restarts, const Common& c) {
  const auto in = load(d);
  FitResult base;
  if (!model_path.empty()) {
    std::vector<std::string> names;
    const json mj = io::read_json(model_path);
    const MixtureModel start = io::model_from_json(mj.contains("model") ? mj.at("model") : mj, &names);
    if (names != in.data.covariate_names) {
      throw DataError("model covariates do not match the ingested design columns");
    }
    // Re-fit from the stored estimate so that responsibilities and convergence refer to this data.
    FitConfig cfg = fit_config(f, c);
    cfg.warm_starts = {start};
    cfg.restarts = std::max(1, f.restarts);
    base = fit(in.data, start.families(), start.J(), cfg);
  } else {
    base = fit(in.data, family_pair_from_string(f.family), f.J, fit_config(f, c));
  }
  BootstrapConfig bc;
  bc.restarts = boot_restarts;
  bc.threads = c.threads;
  bc.seed = derive_seed(c.seed, 1);
  const BootstrapResult r = parametric_bootstrap(base, in.data, B, level, bc);
  io::write_intervals(out_path(c, "intervals.csv"), r);
  json j = io::fit_to_json(base, in.data.covariate_names);
  j["command"] = "bootstrap";
  j["seed"] = c.seed;
  j["ingest"] = ingest_summary(in);
  j["bootstrap"] = io::bootstrap_to_json(r);
  io::write_json(out_path(c, "result.json"), j);
  io::write_classification(out_path(c, "classification.csv"), base);
  if (r.low_success) std::cerr << "warning: only " << r.B_effective << " of " << B << " replicate fits succeeded\n";
  return kOk;
}

int cmd_recovery(const std::string& scenario, int replicas, bool full, const FitOptions& f, const Common& c) {
  Scenario s = load_scenario(scenario);
  s.replicas = full ? 200 : replicas;
  s.seed = c.seed;
  FitConfig cfg = fit_config(f, c);
  const RecoveryReport r = run_recovery_study(s, cfg, c.threads);
  json j = io::recovery_to_json(r);
  j["command"] = "recovery";
  j["seed"] = c.seed;
  io::write_json(out_path(c, "recovery.json"), j);
  io::write_recovery(out_path(c, "recovery.csv"), r);
  io::write_accuracy(out_path(c, "accuracy.csv"), r);
  if (r.failure_flag) std::cerr << "warning: " << r.failures << " of " << r.replicas << " replicas failed\n";
  return kOk;
}

int cmd_plot(const DataOptions& d, const std::string& model_path, const io::PlotOptions& opt, const Common& c) {
  const auto in = load(d);
  std::vector<std::string> names;
  const json mj = io::read_json(model_path);
  const MixtureModel m = io::model_from_json(mj.contains("model") ? mj.at("model") : mj, &names);
  if (m.J() > 1 && names != in.data.covariate_names) {
    throw DataError("model covariates do not match the ingested design columns");
  }
  const Eigen::MatrixXd resp = e_step(m, in.data);
  std::filesystem::create_directories(c.output);
  io::export_plot_data(c.output, m, in.data, resp, opt);
  return kOk;
}

// Reads `key = value` lines; '#' starts a comment. Keys are option names
// without dashes.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    auto key = line.substr(0, eq);
    auto value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    key.erase(0, key.find_first_not_of(" \t"));
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t\r") + 1);
    if (key.size() >= 2 && value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.size() == 1) {
      out.push_back("-" + key);
      out.push_back(value);
    } else {
      out.push_back("--" + key + "=" + value);
    }
  }
  return out;
}

// Splices config-file options right after the subcommand so that later
// command-line flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::vector<std::string> config;
  std::vector<std::string> rest;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = config_arguments(args[++i]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = config_arguments(args[i].substr(9));
    } else {
      rest.push_back(args[i]);
    }
  }
  std::vector<std::string> out{args[0]};
  if (!rest.empty()) out.push_back(rest.front());
  out.insert(out.end(), config.begin(), config.end());
  if (rest.size() > 1) out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

int report(int code, const std::string& type, const std::string& message) {
  const json err = {{"error", {{"exit_code", code}, {"type", type}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixtures of circular-axial copula densities with concomitant variables"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  Common common;
  DataOptions data;
  FitOptions fitopt;

  auto* fit_cmd = app.add_subcommand("fit", "Fit one mixture by EM");
  add_common(fit_cmd, common);
  add_data(fit_cmd, data);
  add_fit(fit_cmd, fitopt, true);

  std::string families = "VM-AX,VM-AXWC,WC-AX,WC-AXWC";
  std::string range = "1-3";
  auto* select_cmd = app.add_subcommand("select", "Fit a grid of family pairs and J and pick the BIC minimizer");
  add_common(select_cmd, common);
  add_data(select_cmd, data);
  add_fit(select_cmd, fitopt, false);
  select_cmd->add_option("--families", families, "Comma-separated family pairs")->capture_default_str();
  select_cmd->add_option("--J-range", range, "Component counts, e.g. 2-4 or 1,2,3")->capture_default_str();

  std::string scenario = "VM-AX-J2";
  long sim_n = 0;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one dataset from a scenario");
  add_common(simulate_cmd, common);
  simulate_cmd->add_option("--scenario", scenario, "Built-in scenario name or scenario .json file")
      ->capture_default_str();
  simulate_cmd->add_option("-n,--n", sim_n, "Sample size (default: the scenario's)");

  std::string model_path;
  int B = 1000;
  double level = 0.95;
  int boot_restarts = 4;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Parametric bootstrap intervals for a fitted mixture");
  add_common(boot_cmd, common);
  add_data(boot_cmd, data);
  add_fit(boot_cmd, fitopt, true);
  boot_cmd->add_option("--model", model_path, "Start from a result.json instead of fitting --family/-J");
  boot_cmd->add_option("-B,--replicates", B, "Bootstrap replicates")->capture_default_str();
  boot_cmd->add_option("--level", level, "Interval level")->capture_default_str();
  boot_cmd->add_option("--replicate-restarts", boot_restarts, "Random restarts per replicate fit")
      ->capture_default_str();

  int replicas = 50;
  bool full = false;
  auto* rec_cmd = app.add_subcommand("recovery", "Parameter-recovery and accuracy study");
  add_common(rec_cmd, common);
  add_fit(rec_cmd, fitopt, false);
  rec_cmd->add_option("--scenario", scenario, "Built-in scenario name or scenario .json file")->capture_default_str();
  rec_cmd->add_option("--replicas", replicas, "Number of simulated datasets")->capture_default_str();
  rec_cmd->add_flag("--full", full, "Use 200 replicas");

  io::PlotOptions plot;
  auto* plot_cmd = app.add_subcommand("plot", "Export density grids, marginal curves and rose-diagram bins");
  add_common(plot_cmd, common);
  add_data(plot_cmd, data);
  plot_cmd->add_option("--model", model_path, "result.json of a fit")->required();
  plot_cmd->add_option("--grid", plot.grid, "Cells per axis of the density grid")->capture_default_str();
  plot_cmd->add_option("--circular-bins", plot.circular_bins, "Rose bins on the circle")->capture_default_str();
  plot_cmd->add_option("--axial-bins", plot.axial_bins, "Rose bins on the half circle")->capture_default_str();

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    args.pop_back();
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kUsage, "usage", e.what());
  } catch (const DataError& e) {
    return report(kData, "data", e.what());
  } catch (const std::exception& e) {
    return report(kUsage, "usage", e.what());
  }

  try {
    if (*fit_cmd) return cmd_fit(data, fitopt, common);
    if (*select_cmd) return cmd_select(data, fitopt, families, range, common);
    if (*simulate_cmd) return cmd_simulate(scenario, sim_n, common);
    if (*boot_cmd) return cmd_bootstrap(data, fitopt, model_path, B, level, boot_restarts, common);
    if (*rec_cmd) return cmd_recovery(scenario, replicas, full, fitopt, common);
    if (*plot_cmd) return cmd_plot(data, model_path, plot, common);
  } catch (const DataError& e) {
    return report(kData, "data", e.what());
  } catch (const DegenerateInputError& e) {
    return report(kData, "data", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report(kData, "data", e.what());
  } catch (const DomainError& e) {
    return report(kUsage, "usage", e.what());
  } catch (const std::exception& e) {
    return report(kNumerical, "numerical", e.what());
  }
  return kUsage;
}
