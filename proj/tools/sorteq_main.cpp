// Command-line front end for the sorting-equilibrium pipeline:
//   solve -> simulate -> measure -> calibrate -> counterfact.
// Structured results are JSON, tables are CSV. Payload files are byte-stable
// given the same config and seed; timestamps go to a sidecar <out>.log.
//
// Exit codes follow sysexits: 0 ok, 2 domain error, 64 usage, 65 bad data,
// 66 cannot open input, 73 cannot create output.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sorteq/calibrate.hpp"
#include "sorteq/counterfactual.hpp"
#include "sorteq/json_io.hpp"
#include "sorteq/kernels.hpp"
#include "sorteq/measure.hpp"
#include "sorteq/model.hpp"
#include "sorteq/moments.hpp"
#include "sorteq/panel.hpp"
#include "sorteq/parallel.hpp"

namespace {

using nlohmann::json;
using namespace sorteq;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitCantCreate = 73;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double sigma_x = 0, sigma_theta = 0, c_a = 0, c_l = 0, ln_A = 0;
  std::int64_t workers = 0, firms = 0, min_firm_size = 5, replicates = 0;
  std::uint64_t seed = 1;
  int threads = 0;
  std::int64_t year = 0;
  std::string panel_path, end_panel_path, out_path, firm_out, csv_out;
  std::string start_params_path, end_params_path;
  bool no_latent = false;
  bool counterfact = false;
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoError::Kind::WriteOutput, path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError(IoError::Kind::WriteOutput, path);
}

void write_sidecar_log(const std::string& out_path, const json& resolved) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  std::ofstream log(out_path + ".log", std::ios::binary);
  if (log) log << "written: " << stamp << "\nconfig: " << resolved.dump() << "\n";
}

// Payload to --out (or stdout); timestamps only ever land in the sidecar.
void emit_payload(const RunConfig& cfg, const json& resolved,
                  const std::string& payload) {
  if (cfg.out_path.empty()) {
    std::cout << payload;
    return;
  }
  write_text_file(cfg.out_path, payload);
  write_sidecar_log(cfg.out_path, resolved);
}

json config_json(const RunConfig& cfg, std::initializer_list<const char*> keys) {
  json j = json::object();
  for (const char* key : keys) {
    const std::string k = key;
    if (k == "sigma_x") j[k] = cfg.sigma_x;
    else if (k == "sigma_theta") j[k] = cfg.sigma_theta;
    else if (k == "c_a") j[k] = cfg.c_a;
    else if (k == "c_l") j[k] = cfg.c_l;
    else if (k == "ln_A") j[k] = cfg.ln_A;
    else if (k == "workers") j[k] = cfg.workers;
    else if (k == "firms") j[k] = cfg.firms;
    else if (k == "min_firm_size") j[k] = cfg.min_firm_size;
    else if (k == "replicates") j[k] = cfg.replicates;
    else if (k == "seed") j[k] = cfg.seed;
    else if (k == "threads") j[k] = resolve_threads(cfg.threads);
    else if (k == "year") j[k] = cfg.year;
    else if (k == "panel") j[k] = cfg.panel_path;
    else if (k == "end_panel") j[k] = cfg.end_panel_path;
    else if (k == "start") j[k] = cfg.start_params_path;
    else if (k == "end") j[k] = cfg.end_params_path;
    else if (k == "kernel") j[k] = kernels::active().name;
  }
  return j;
}

ModelParams params_from_config(const RunConfig& cfg) {
  return ModelParams{cfg.sigma_x, cfg.sigma_theta, cfg.c_a, cfg.c_l, cfg.ln_A};
}

ModelParams load_params_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoError::Kind::OpenInput, path);
  json j;
  try {
    in >> j;
    // Accept a bare params object or a solve/calibrate output file.
    if (j.contains("central")) return j.at("central").get<ModelParams>();
    if (j.contains("params")) return j.at("params").get<ModelParams>();
    return j.get<ModelParams>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad params JSON: ") + e.what() + " in " + path, 0);
  }
}

int cmd_solve(const RunConfig& cfg) {
  const ModelParams params = params_from_config(cfg);
  const Equilibrium eq = solve_equilibrium(params);
  const json resolved = config_json(
      cfg, {"sigma_x", "sigma_theta", "c_a", "c_l", "ln_A", "threads", "kernel"});
  json out{{"config", resolved},
           {"params", params},
           {"equilibrium", eq},
           {"welfare", welfare_report(eq, params)},
           {"wage", wage_report(eq, params)},
           {"targeted_moments", targeted_moments(eq, params)},
           {"akm", akm_report(eq, params)}};
  emit_payload(cfg, resolved, out.dump(2) + "\n");
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
  if (cfg.out_path.empty()) throw UsageError("simulate requires --out");
  const ModelParams params = params_from_config(cfg);
  const Equilibrium eq = solve_equilibrium(params);
  const Panel panel = simulate_panel(params, eq, cfg.workers, cfg.firms,
                                     cfg.min_firm_size, cfg.seed, cfg.threads);
  write_panel_csv(panel, cfg.out_path, !cfg.no_latent);
  if (!cfg.firm_out.empty()) write_firm_csv(panel, cfg.firm_out);
  const json resolved = config_json(
      cfg, {"sigma_x", "sigma_theta", "c_a", "c_l", "ln_A", "workers", "firms",
            "min_firm_size", "seed", "threads", "kernel"});
  write_sidecar_log(cfg.out_path, resolved);
  std::cerr << "wrote " << panel.n_workers() << " workers, "
            << panel.firms.size() << " firms to " << cfg.out_path << "\n";
  return kExitOk;
}

int cmd_measure(const RunConfig& cfg) {
  Panel panel = read_panel_csv(cfg.panel_path);
  panel.year_label = cfg.year;
  const MeasuredMoments mm = measure_moments(panel, cfg.min_firm_size);
  const json resolved = config_json(
      cfg, {"panel", "min_firm_size", "year", "threads", "kernel"});
  json out{{"config", resolved}, {"year", cfg.year}, {"moments", mm}};
  emit_payload(cfg, resolved, out.dump(2) + "\n");
  if (!cfg.csv_out.empty()) {
    std::ostringstream os;
    os.precision(17);
    os << "year,wfwi_weighted,var_of_within_var,wfwi_unweighted,var_log_wage,"
          "mean_log_wage,bfwi,n_workers,n_firms\n"
       << cfg.year << ',' << mm.wfwi_weighted << ',' << mm.var_of_within_var
       << ',' << mm.wfwi_unweighted << ',' << mm.var_log_wage << ','
       << mm.mean_log_wage << ',' << mm.bfwi << ',' << mm.n_workers << ','
       << mm.n_firms << '\n';
    write_text_file(cfg.csv_out, os.str());
  }
  return kExitOk;
}

std::string replicate_csv(const CalibrationResult& res) {
  std::ostringstream os;
  os.precision(17);
  os << "replicate,ok,sigma_x,sigma_theta,c_a,c_l,ln_A,sigma\n";
  for (std::size_t r = 0; r < res.per_replicate.size(); ++r) {
    const ReplicateEstimate& e = res.per_replicate[r];
    os << r << ',' << (e.ok ? 1 : 0);
    if (e.ok)
      os << ',' << e.params.sigma_x << ',' << e.params.sigma_theta << ','
         << e.params.c_a << ',' << e.params.c_l << ',' << e.params.ln_A << ','
         << e.sigma;
    else
      os << ",,,,,,";
    os << '\n';
  }
  return os.str();
}

int cmd_calibrate(const RunConfig& cfg) {
  const Panel panel = read_panel_csv(cfg.panel_path);
  if (cfg.replicates < 2) throw UsageError("--replicates: need at least 2");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(cfg.replicates));
  for (std::int64_t r = 0; r < cfg.replicates; ++r)
    seeds[r] = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
  const CalibrationResult res = bootstrap_calibrate_with_seeds(
      panel, seeds, cfg.min_firm_size, cfg.threads);

  const json resolved = config_json(
      cfg, {"panel", "end_panel", "replicates", "seed", "min_firm_size",
            "threads", "kernel"});
  json out{{"config", resolved}, {"calibration", res}};

  // Optional chained counterfactual: calibrate a second panel on the same
  // replicate seeds and decompose per replicate, reporting percentile bands
  // for every attributed change.
  if (cfg.counterfact) {
    if (cfg.end_panel_path.empty())
      throw UsageError("--counterfact requires --end-panel");
    const Panel panel_end = read_panel_csv(cfg.end_panel_path);
    const CalibrationResult res_end = bootstrap_calibrate_with_seeds(
        panel_end, seeds, cfg.min_firm_size, cfg.threads);
    const CounterfactualTable central = decompose(res.central, res_end.central);
    std::vector<CounterfactualTable> tables;
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      const ReplicateEstimate& a = res.per_replicate[r];
      const ReplicateEstimate& b = res_end.per_replicate[r];
      if (a.ok && b.ok) tables.push_back(decompose(a.params, b.params));
    }
    json ci = json::object();
    for (int o = 0; o < OutcomeVector::kCount; ++o) {
      json per = json::object();
      for (int p = 0; p < 4; ++p) {
        std::vector<double> changes;
        changes.reserve(tables.size());
        for (const auto& tbl : tables) changes.push_back(tbl.attribution[p][o]);
        per[primitive_name(kPrimitives[p])] =
            json{{"ci_low", percentile(changes, 0.025)},
                 {"ci_high", percentile(changes, 0.975)}};
      }
      std::vector<double> totals;
      totals.reserve(tables.size());
      for (const auto& tbl : tables) totals.push_back(tbl.total[o]);
      ci[OutcomeVector::name(o)] =
          json{{"by_primitive", std::move(per)},
               {"total_ci_low", percentile(totals, 0.025)},
               {"total_ci_high", percentile(totals, 0.975)}};
    }
    out["counterfactual"] = central;
    out["counterfactual_ci"] = std::move(ci);
    out["counterfactual_replicates_used"] = tables.size();
  }

  emit_payload(cfg, resolved, out.dump(2) + "\n");
  if (!cfg.csv_out.empty()) write_text_file(cfg.csv_out, replicate_csv(res));
  return kExitOk;
}

int cmd_counterfact(const RunConfig& cfg) {
  const ModelParams start = load_params_json(cfg.start_params_path);
  const ModelParams end = load_params_json(cfg.end_params_path);
  const CounterfactualTable table = decompose(start, end);
  const json resolved = config_json(cfg, {"start", "end", "threads", "kernel"});
  json out{{"config", resolved},
           {"start_params", start},
           {"end_params", end},
           {"table", table}};
  emit_payload(cfg, resolved, out.dump(2) + "\n");
  if (!cfg.csv_out.empty()) write_text_file(cfg.csv_out, counterfactual_csv(table));
  return kExitOk;
}

// Pre-parse --json <path> from argv, before CLI11 runs, so file values can
// seed the defaults that explicit flags then override.
std::string find_json_flag(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--json" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--json=", 0) == 0) return a.substr(7);
  }
  return {};
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoError::Kind::OpenInput, path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad config JSON: ") + e.what(), 0);
  }
  if (!j.is_object()) throw SchemaError("config JSON must be an object", 0);
  return j;
}

void seed_config_from_json(const json& j, RunConfig& cfg) {
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("sigma_x", cfg.sigma_x);
  get("sigma_theta", cfg.sigma_theta);
  get("c_a", cfg.c_a);
  get("c_l", cfg.c_l);
  get("ln_A", cfg.ln_A);
  get("workers", cfg.workers);
  get("firms", cfg.firms);
  get("min_firm_size", cfg.min_firm_size);
  get("replicates", cfg.replicates);
  get("seed", cfg.seed);
  get("threads", cfg.threads);
  get("year", cfg.year);
  get("panel", cfg.panel_path);
  get("end_panel", cfg.end_panel_path);
  get("out", cfg.out_path);
  get("firm_out", cfg.firm_out);
  get("csv", cfg.csv_out);
  get("start", cfg.start_params_path);
  get("end", cfg.end_params_path);
  get("no_latent", cfg.no_latent);
  get("counterfact", cfg.counterfact);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sorteq: hierarchical-firm sorting equilibrium toolkit\n"
      "Solves the equilibrium, simulates matched employer-employee panels,\n"
      "measures calibration moments, calibrates parameters with resampled\n"
      "confidence intervals, and attributes outcome changes across the four\n"
      "primitives by ordering-average decomposition.\n"
      "Exit codes: 0 ok, 2 domain error, 64 usage, 65 bad data,\n"
      "66 cannot open input, 73 cannot create output."};
  app.require_subcommand(1);

  RunConfig cfg;
  json file_cfg = json::object();
  std::string json_cfg_path;
  std::string json_flag_sink;  // bound by every subcommand's --json option

  try {
    json_cfg_path = find_json_flag(argc, argv);
    if (!json_cfg_path.empty()) {
      file_cfg = load_config_file(json_cfg_path);
      seed_config_from_json(file_cfg, cfg);
    }
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitNoInput;
  } catch (const SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const json::exception& e) {
    std::cerr << "data error: bad config value: " << e.what() << "\n";
    return kExitData;
  }

  // Required-ness is checked after the JSON merge: a key counts as provided
  // if it came from either the file or an explicit flag.
  struct RequiredOpt {
    CLI::App* cmd;
    CLI::Option* opt;
    const char* key;
  };
  std::vector<RequiredOpt> required;
  const auto require = [&](CLI::App* cmd, CLI::Option* opt, const char* key) {
    required.push_back(RequiredOpt{cmd, opt, key});
    return opt;
  };

  const auto add_params = [&](CLI::App* cmd, bool mandatory) {
    auto* a = cmd->add_option("--sigma-x,--sigma_x", cfg.sigma_x,
                              "std. dev. of worker skill");
    auto* b = cmd->add_option("--sigma-theta,--sigma_theta", cfg.sigma_theta,
                              "std. dev. of firm productivity");
    auto* c = cmd->add_option("--c-a,--c_a", cfg.c_a, "amenity cost convexity");
    auto* d = cmd->add_option("--c-l,--c_l", cfg.c_l, "span-of-control convexity");
    cmd->add_option("--ln-a,--ln_A", cfg.ln_A, "log TFP (default 0)");
    if (mandatory) {
      require(cmd, a, "sigma_x");
      require(cmd, b, "sigma_theta");
      require(cmd, c, "c_a");
      require(cmd, d, "c_l");
    }
  };
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--threads", cfg.threads,
                    "worker threads (default: all cores; env SORTEQ_THREADS)");
    cmd->add_option("--json", json_flag_sink,
                    "JSON config file; explicit flags override");
    cmd->add_option("--out", cfg.out_path, "output path (default: stdout)");
  };

  CLI::App* solve = app.add_subcommand(
      "solve", "solve the equilibrium and print all closed-form reports as JSON");
  add_params(solve, true);
  add_common(solve);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "generate a synthetic matched employer-employee panel CSV");
  add_params(simulate, true);
  add_common(simulate);
  require(simulate,
          simulate->add_option("--workers", cfg.workers, "number of workers"),
          "workers");
  require(simulate, simulate->add_option("--firms", cfg.firms, "number of firms"),
          "firms");
  simulate->add_option("--min-firm-size", cfg.min_firm_size,
                       "minimum firm size (default 5)");
  simulate->add_option("--seed", cfg.seed, "RNG seed (default 1)");
  simulate->add_option("--firm-out", cfg.firm_out, "optional firm CSV path");
  simulate->add_flag("--no-latent", cfg.no_latent,
                     "omit the latent x,h,theta columns");

  CLI::App* measure = app.add_subcommand(
      "measure", "compute calibration moments from a panel CSV");
  add_common(measure);
  require(measure,
          measure->add_option("--panel", cfg.panel_path, "input panel CSV"),
          "panel");
  measure->add_option("--min-firm-size", cfg.min_firm_size,
                      "minimum firm size (default 5)");
  measure->add_option("--year", cfg.year, "year label for CSV output");
  measure->add_option("--csv", cfg.csv_out, "also write a one-row CSV");

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "bootstrap-calibrate parameters from a panel CSV");
  add_common(calibrate);
  require(calibrate,
          calibrate->add_option("--panel", cfg.panel_path, "input panel CSV"),
          "panel");
  require(calibrate,
          calibrate->add_option("--replicates", cfg.replicates,
                                "number of resampling replicates"),
          "replicates");
  calibrate->add_option("--seed", cfg.seed, "RNG seed (default 1)");
  calibrate->add_option("--min-firm-size", cfg.min_firm_size,
                        "minimum firm size (default 5)");
  calibrate->add_option("--csv", cfg.csv_out, "per-replicate CSV path");
  calibrate->add_option("--end-panel", cfg.end_panel_path,
                        "second panel for a paired counterfactual");
  calibrate->add_flag("--counterfact", cfg.counterfact,
                      "decompose central and per-replicate changes vs --end-panel");

  CLI::App* counterfact = app.add_subcommand(
      "counterfact", "ordering-average attribution between two parameter JSON files");
  add_common(counterfact);
  require(counterfact,
          counterfact->add_option("--start", cfg.start_params_path,
                                  "start params JSON"),
          "start");
  require(counterfact,
          counterfact->add_option("--end", cfg.end_params_path, "end params JSON"),
          "end");
  counterfact->add_option("--csv", cfg.csv_out, "table CSV path");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    }
    CLI::App* sub = app.get_subcommands().front();
    for (const RequiredOpt& r : required) {
      if (r.cmd != sub) continue;
      if (r.opt->count() == 0 && !file_cfg.contains(r.key))
        throw UsageError(std::string(r.opt->get_name()) + " is required");
    }
    if (sub == solve) return cmd_solve(cfg);
    if (sub == simulate) return cmd_simulate(cfg);
    if (sub == measure) return cmd_measure(cfg);
    if (sub == calibrate) return cmd_calibrate(cfg);
    if (sub == counterfact) return cmd_counterfact(cfg);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return e.kind == IoError::Kind::OpenInput ? kExitNoInput : kExitCantCreate;
  } catch (const InfeasibleMoments& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
