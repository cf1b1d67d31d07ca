#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>

#include "matsim/analysis.hpp"
#include "matsim/config.hpp"
#include "matsim/errors.hpp"
#include "matsim/io.hpp"
#include "matsim/verify.hpp"

namespace fs = std::filesystem;
using namespace matsim;

namespace {

constexpr const char* kOutEnv = "MATSIM_OUT";

struct Loaded {
  config::RunConfig cfg;
  model::ModelSpec spec;
  chars::CharTables tables;
  model::InitialData data;

  explicit Loaded(config::RunConfig c)
      : cfg(std::move(c)),
        spec(model::build_model(cfg.families)),
        tables(spec),
        data(model::make_initial_data(spec, cfg.mu_spec, cfg.gamma_spec, cfg.biological)) {}
};

// --out beats the environment, which beats the config file.
fs::path output_dir(const config::RunConfig& cfg, const std::string& flag) {
  fs::path dir = cfg.output;
  if (const char* env = std::getenv(kOutEnv); env && *env) dir = env;
  if (!flag.empty()) dir = flag;
  fs::create_directories(dir);
  return dir;
}

int cmd_simulate(const std::string& path, const std::string& out_flag) {
  Loaded run(config::load_config(path));
  const auto dir = output_dir(run.cfg, out_flag);
  const auto grid = solver::resolve_grid(run.spec, run.cfg.grid);

  solver::SimulateOptions opts;
  opts.grid = run.cfg.grid;
  opts.dump_times = run.cfg.dumps;
  const auto sol = solver::simulate(run.tables, run.data, run.cfg.horizon, opts);

  io::write_fields_csv((dir / "fields.csv").string(), sol);
  io::write_immature_csv((dir / "immature.csv").string(), sol.boundary);
  io::write_mu_csv((dir / "initial_mu.csv").string(), sol.m, run.data);
  std::vector<double> ages;
  constexpr int kAges = 33;
  for (int k = 0; k < kAges; ++k) ages.push_back(run.spec.tau_max() * k / (kAges - 1));
  io::write_gamma_csv((dir / "initial_gamma.csv").string(), sol.m, ages, run.data);

  auto meta = config::effective(run.cfg, run.spec, grid);
  meta["output"] = dir.string();
  meta["derived"] = {{"tau_min", run.spec.tau_min()}, {"tau_max", run.spec.tau_max()},
                     {"rho", run.spec.rho()},         {"eta", run.spec.eta()},
                     {"r", run.spec.r()}};
  meta["diagnostics"] = {{"steps", sol.diag.steps},
                         {"max_fixed_point_iterations", sol.diag.max_fixed_point_iterations},
                         {"min_N", sol.diag.min_N},
                         {"min_P", sol.diag.min_P},
                         {"boundary_gap", sol.diag.boundary_gap}};
  io::write_json((dir / "meta.json").string(), meta);
  std::printf("simulate: %zu snapshots, M=%d, dt=%.6g -> %s\n", sol.dumps.size(), grid.M, grid.dt,
              dir.string().c_str());
  return 0;
}

model::Json analyze_one(const Loaded& run) {
  auto report = analysis::classify(run.tables, run.cfg.b);
  analysis::attach_simulation(report, run.tables, run.data, run.cfg.horizon);
  return analysis::to_json(report);
}

int cmd_analyze(const std::string& path, const std::string& out_flag) {
  Loaded run(config::load_config(path));
  const auto dir = output_dir(run.cfg, out_flag);
  const auto j = analyze_one(run);
  io::write_json((dir / "stability.json").string(), j);
  std::printf("analyze: %s\n", j.at("verdict").get<std::string>().c_str());
  return 0;
}

int cmd_verify(const std::string& name) {
  int failed = 0;
  for (const auto& run : verify::suite(name)) {
    const auto e = run();
    for (const auto& c : e.checks) {
      std::printf("  [%d] %s %s: %s\n", e.id, c.pass ? "ok  " : "FAIL", c.name.c_str(), c.detail.c_str());
    }
    std::printf("%s %d: %s (%.2f s)\n", e.pass() ? "PASS" : "FAIL", e.id, e.title.c_str(), e.seconds);
    std::fflush(stdout);
    failed += e.pass() ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& path, const std::string& out_flag, int workers) {
  const auto doc = config::load_document(path);
  const auto base = config::parse_config(doc);
  if (!base.sweep) throw ConfigError("sweep: the config has no 'sweep' section");
  const auto dir = output_dir(base, out_flag);
  const auto& sw = *base.sweep;

  struct Row {
    std::string verdict;
    double margin = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double root = 0.0;
    double decay = 0.0;
    std::string error;
  };
  std::vector<Row> rows(sw.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        auto d = doc;
        config::set_path(d, sw.parameter, sw.values[i]);
        Loaded run(config::parse_config(d));
        const auto j = analyze_one(run);
        rows[i] = {j.at("verdict").get<std::string>(),
                   j.at("immature").at("margin").get<double>(),
                   j.at("local_criterion").at("lhs").get<double>(),
                   j.at("local_criterion").at("rhs").get<double>(),
                   j.at("immature").at("characteristic_root").get<double>(),
                   j.at("simulation").at("x_decay_ratio").get<double>(),
                   ""};
      } catch (const std::exception& e) {
        rows[i].verdict = "error";
        rows[i].error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ofstream f(dir / "sweep.csv");
  f << sw.parameter << ",verdict,immature_margin,local_lhs,local_rhs,characteristic_root,x_decay_ratio,error\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    f << io::format(sw.values[i]) << ',' << r.verdict << ',' << io::format(r.margin) << ','
      << io::format(r.lhs) << ',' << io::format(r.rhs) << ',' << io::format(r.root) << ','
      << io::format(r.decay) << ",\"" << err << "\"\n";
  }
  std::printf("sweep: %zu runs on %d workers -> %s\n", rows.size(), n, (dir / "sweep.csv").string().c_str());
  return 0;
}

int cmd_dump_tables(const std::string& path, const std::string& out_flag) {
  Loaded run(config::load_config(path));
  const auto dir = output_dir(run.cfg, out_flag);
  std::ofstream f(dir / "tables.csv");
  f << "m,h,Theta,Delta,xi_bar,pi_bar\n";
  for (double m : model::validation_grid()) {
    f << io::format(m) << ',' << io::format(run.tables.h(m)) << ',' << io::format(run.tables.theta(m)) << ','
      << io::format(run.tables.delta(m)) << ',' << io::format(run.tables.xi_bar(m)) << ','
      << io::format(run.tables.pi_bar(m)) << '\n';
  }
  std::printf("dump-tables: %zu maturities -> %s\n", model::validation_grid().size(),
              (dir / "tables.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maturity-structured two-phase cell population: simulation and checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string suite = "all";
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* sim = app.add_subcommand("simulate", "Run the field solver; writes fields.csv, immature.csv, meta.json");
  auto* ana = app.add_subcommand("analyze", "Classify stability; writes stability.json");
  auto* ver = app.add_subcommand("verify", "Run built-in verification suites");
  auto* swp = app.add_subcommand("sweep", "Analyze the config over the sweep values; writes sweep.csv");
  auto* tab = app.add_subcommand("dump-tables", "Write m, h, Theta, Delta, xi_bar, pi_bar as tables.csv");
  for (auto* sc : {sim, ana, swp, tab}) {
    sc->add_option("--config", config_path, "YAML or JSON run configuration")->required()->check(CLI::ExistingFile);
    sc->add_option("--out", out, std::string("Output directory (overrides ") + kOutEnv + " and the config)");
  }
  swp->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  std::string suites;
  for (const auto& s : verify::suite_names()) suites += (suites.empty() ? "" : ", ") + s;
  ver->add_option("--suite", suite, "One of: " + suites);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(config_path, out);
    if (*ana) return cmd_analyze(config_path, out);
    if (*ver) return cmd_verify(suite);
    if (*swp) return cmd_sweep(config_path, out, workers);
    if (*tab) return cmd_dump_tables(config_path, out);
  } catch (const HypothesisViolation& e) {
    std::fprintf(stderr, "HypothesisViolation: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "ConfigError: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
