// grenkit command-line tool: fit monotone estimators from CSV, run the
// Monte Carlo study, and tabulate limit-distribution quantities.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "grenkit/asymptotics.hpp"
#include "grenkit/csv.hpp"
#include "grenkit/estimators.hpp"
#include "grenkit/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitEstimator = 3;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("GRENKIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw grenkit::CsvError(0, "GRENKIT_SEED is not an integer");
    }
  }
  return 20240801;
}

std::vector<double> parse_grid(const std::string& spec) {
  double start = 0.0, stop = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
      step <= 0.0) {
    throw grenkit::CsvError(0, "bad --eval-grid, expected start:stop:step");
  }
  std::vector<double> out;
  for (double x = start; x <= stop + 1e-12; x += step) out.push_back(x);
  return out;
}

void write_curve(std::ostream& out, const std::vector<double>& xs,
                 const std::vector<double>& values) {
  out << "x,estimate\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << grenkit::format_double(xs[i]) << ','
        << grenkit::format_double(values[i]) << '\n';
  }
}

struct FitArgs {
  std::string input, output, target, adjust = "none", grid_spec;
};

int run_fit(const FitArgs& args) {
  using namespace grenkit;

  std::optional<MonotoneEstimate> fit;
  std::vector<double> default_grid;
  if (args.target == "density" || args.target == "hazard") {
    const SurvivalSample sample = read_survival_csv(args.input);
    default_grid = sample.y;
    if (args.target == "density") {
      if (args.adjust == "none") {
        fit = grenander_density(sample.y);
      } else if (args.adjust == "independent") {
        fit = censored_density(sample);
      } else if (args.adjust == "conditional") {
        fit = monotone_density_adjusted(sample);
      } else {
        throw CsvError(0, "bad --adjust for density: " + args.adjust);
      }
    } else {
      Adjustment adj;
      if (args.adjust == "none") {
        adj = Adjustment::None;
      } else if (args.adjust == "independent") {
        adj = Adjustment::Independent;
      } else if (args.adjust == "conditional") {
        adj = Adjustment::Conditional;
      } else {
        throw CsvError(0, "bad --adjust for hazard: " + args.adjust);
      }
      fit = monotone_hazard(sample, adj);
    }
  } else if (args.target == "regression") {
    const RegressionSample sample = read_regression_csv(args.input);
    default_grid = sample.a;
    if (args.adjust == "none") {
      fit = isotonic_regression(sample.a, sample.y);
    } else if (args.adjust == "marginalized") {
      const NuisancePair nuis = default_nuisances(sample.a, sample.y, sample.w);
      fit = marginalized_regression(sample.a, sample.y, sample.w, nuis);
    } else {
      throw CsvError(0, "bad --adjust for regression: " + args.adjust);
    }
  } else {
    throw CsvError(0, "bad --target: " + args.target);
  }

  std::vector<double> grid;
  if (!args.grid_spec.empty()) {
    grid = parse_grid(args.grid_spec);
  } else {
    grid = default_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }

  std::vector<double> xs, values;
  int skipped = 0, boundary = 0;
  for (double x : grid) {
    try {
      const double v = (*fit)(x);
      xs.push_back(x);
      values.push_back(v);
      if (fit->at_upper_boundary(x)) ++boundary;
    } catch (const std::invalid_argument&) {
      ++skipped;
    }
  }

  std::cerr << "diagram points: " << fit->diagram().points().size() << "\n"
            << "u_n: " << grenkit::format_double(fit->u_max()) << "\n"
            << "boundary evaluations: " << boundary << "\n";
  if (fit->truncated()) std::cerr << "warning: isotonization range truncated\n";
  if (skipped > 0) {
    std::cerr << "skipped " << skipped << " out-of-domain grid points\n";
  }

  if (args.output.empty() || args.output == "-") {
    write_curve(std::cout, xs, values);
  } else {
    std::ofstream out(args.output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + args.output);
    write_curve(out, xs, values);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Grenander-type monotone estimation toolkit"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a monotone estimator from CSV");
  fit->add_option("--input", fit_args.input, "Input CSV")->required();
  fit->add_option("--output", fit_args.output, "Output CSV ('-' = stdout)");
  fit->add_option("--target", fit_args.target, "density|hazard|regression")
      ->required();
  fit->add_option("--adjust", fit_args.adjust,
                  "none|independent|conditional|marginalized");
  fit->add_option("--eval-grid", fit_args.grid_spec, "start:stop:step");

  std::string sim_setting = "i", sim_prefix = "study", manifest_path;
  std::string sim_estimators;
  int sim_n = 2000, sim_reps = 500, sim_threads = 0;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  double sim_chernoff_var = 0.0;
  auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo study");
  sim->add_option("--setting", sim_setting, "i|ii|iii|iv");
  sim->add_option("--n", sim_n, "Sample size per replication");
  sim->add_option("--reps", sim_reps, "Number of replications");
  sim->add_option("--seed", sim_seed, "Master seed")
      ->each([&](const std::string&) { sim_seed_set = true; });
  sim->add_option("--estimators", sim_estimators,
                  "Comma-separated estimator labels");
  sim->add_option("--manifest", manifest_path, "Manifest JSON (overrides flags)");
  sim->add_option("--out-prefix", sim_prefix, "Output file prefix");
  sim->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");
  sim->add_option("--chernoff-var", sim_chernoff_var,
                  "Var(Z) to use for theoretical variances (0 = compute)");

  grenkit::ChernoffConfig chern;
  std::string chern_out;
  bool chern_serial = false;
  auto* chern_cmd = app.add_subcommand("chernoff", "Tabulate the limit law");
  chern_cmd->add_option("--reps", chern.replications, "Replications");
  chern_cmd->add_option("--grid-L", chern.grid_halfwidth, "Grid half-width");
  chern_cmd->add_option("--grid-h", chern.grid_step, "Grid step");
  bool chern_seed_set = false;
  chern_cmd->add_option("--seed", chern.seed, "Seed")
      ->each([&](const std::string&) { chern_seed_set = true; });
  chern_cmd->add_option("--output", chern_out, "Output JSON path");
  chern_cmd->add_flag("--serial", chern_serial, "Use the serial reference");

  std::string tau_example = "density", tau_censoring = "none", tau_model;
  double tau_x = 0.5, tau_chernoff_var = 0.0;
  int tau_mcw = 100000;
  bool tau_marginalized = false;
  std::uint64_t tau_seed = 0;
  bool tau_seed_set = false;
  auto* tau_cmd = app.add_subcommand("tau", "Scale factor of the limit law");
  tau_cmd->add_option("--example", tau_example, "density|hazard|regression");
  tau_cmd->add_option("--censoring", tau_censoring,
                      "none|independent|conditional");
  tau_cmd->add_flag("--marginalized", tau_marginalized,
                    "Marginalized regression scale factor");
  tau_cmd->add_option("--x", tau_x, "Evaluation point")->required();
  tau_cmd->add_option("--model", tau_model, "Model-spec JSON path")->required();
  tau_cmd->add_option("--mc-w", tau_mcw, "Covariate Monte Carlo draws");
  tau_cmd->add_option("--seed", tau_seed, "Seed for covariate draws")
      ->each([&](const std::string&) { tau_seed_set = true; });
  tau_cmd->add_option("--chernoff-var", tau_chernoff_var,
                      "Var(Z) for the limiting variance (0 = compute)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return run_fit(fit_args);

    if (*sim) {
      grenkit::RunManifest man;
      if (!manifest_path.empty()) {
        std::ifstream in(manifest_path, std::ios::binary);
        if (!in) throw grenkit::CsvError(0, "cannot open " + manifest_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
          man = grenkit::manifest_from_json(buf.str());
        } catch (const std::exception& e) {
          throw grenkit::CsvError(0, std::string("bad manifest: ") + e.what());
        }
      } else {
        try {
          man = grenkit::default_manifest(sim_setting);
        } catch (const std::exception& e) {
          throw grenkit::CsvError(0, e.what());
        }
        man.n = sim_n;
        man.reps = sim_reps;
        man.seed = sim_seed_set ? sim_seed : default_seed();
        if (!sim_estimators.empty()) {
          man.estimators.clear();
          std::istringstream in(sim_estimators);
          std::string label;
          while (std::getline(in, label, ',')) {
            if (!grenkit::known_estimator(label)) {
              throw grenkit::CsvError(0, "unknown estimator: " + label);
            }
            man.estimators.push_back(label);
          }
        }
      }
      grenkit::StudyOptions opt;
      opt.threads = sim_threads;
      opt.chernoff_variance =
          sim_chernoff_var > 0.0
              ? sim_chernoff_var
              : grenkit::chernoff_oracle(grenkit::ChernoffConfig{}).variance;
      const grenkit::StudyResult result = grenkit::run_study(man, opt);
      grenkit::write_study_files(result, sim_prefix + "_draws.csv",
                                 sim_prefix + "_summary.csv",
                                 sim_prefix + "_manifest.json");
      std::cerr << "wrote " << sim_prefix << "_{draws,summary}.csv and "
                << sim_prefix << "_manifest.json\n";
      return kExitOk;
    }

    if (*chern_cmd) {
      if (!chern_seed_set) chern.seed = default_seed();
      grenkit::ChernoffTable table;
      try {
        table = chern_serial ? grenkit::chernoff_oracle_serial(chern)
                             : grenkit::chernoff_oracle(chern);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchema;
      }
      if (chern_out.empty()) {
        std::cout << table.to_json() << "\n";
      } else {
        std::ofstream out(chern_out, std::ios::binary);
        out << table.to_json() << "\n";
      }
      return kExitOk;
    }

    if (*tau_cmd) {
      std::ifstream in(tau_model, std::ios::binary);
      if (!in) throw grenkit::CsvError(0, "cannot open " + tau_model);
      nlohmann::json spec;
      try {
        spec = nlohmann::json::parse(in);
      } catch (const std::exception& e) {
        throw grenkit::CsvError(0, std::string("bad model spec: ") + e.what());
      }

      grenkit::TrueModel model;
      if (spec.contains("family")) {
        if (spec.at("family") != "weibull") {
          throw grenkit::CsvError(0, "unknown model family");
        }
        model = grenkit::true_marginals(
            grenkit::make_setting(spec.at("setting").get<std::string>()));
      } else {
        auto constant = [&spec](const char* key) {
          return [v = spec.value(key, 0.0)](double) { return v; };
        };
        auto have = [&spec](const char* key) { return spec.contains(key); };
        if (have("f0")) model.density = constant("f0");
        if (have("f0_prime")) model.density_deriv = constant("f0_prime");
        if (have("S0")) model.survival = constant("S0");
        if (have("lambda0")) model.hazard = constant("lambda0");
        if (have("lambda0_prime")) model.hazard_deriv = constant("lambda0_prime");
        if (have("G0")) model.censoring_survival = constant("G0");
        if (have("mu_prime")) model.regression_deriv = constant("mu_prime");
        if (have("sigma2")) {
          model.conditional_variance_marginal = constant("sigma2");
        }
        if (have("f0_exposure")) model.exposure_density = constant("f0_exposure");
      }

      const std::uint64_t seed = tau_seed_set ? tau_seed : default_seed();
      const double var_z =
          tau_chernoff_var > 0.0
              ? tau_chernoff_var
              : grenkit::chernoff_oracle(grenkit::ChernoffConfig{}).variance;

      grenkit::Censoring cens;
      if (tau_censoring == "none") {
        cens = grenkit::Censoring::None;
      } else if (tau_censoring == "independent") {
        cens = grenkit::Censoring::Independent;
      } else if (tau_censoring == "conditional") {
        cens = grenkit::Censoring::Conditional;
      } else {
        throw grenkit::CsvError(0, "bad --censoring: " + tau_censoring);
      }

      grenkit::ScaleReport report;
      try {
        if (tau_example == "density") {
          report =
              grenkit::tau_density(model, tau_x, cens, tau_mcw, seed, var_z);
        } else if (tau_example == "hazard") {
          report =
              grenkit::tau_hazard(model, tau_x, cens, tau_mcw, seed, var_z);
        } else if (tau_example == "regression") {
          report = grenkit::tau_regression(model, tau_x, tau_marginalized,
                                           tau_mcw, seed, var_z);
        } else {
          throw grenkit::CsvError(0, "bad --example: " + tau_example);
        }
      } catch (const std::invalid_argument& e) {
        // Missing analytic ingredients make the model spec invalid.
        throw grenkit::CsvError(0, e.what());
      }
      std::cout << report.to_json() << "\n";
      return kExitOk;
    }
  } catch (const grenkit::CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEstimator;
  }
  return kExitOk;
}
