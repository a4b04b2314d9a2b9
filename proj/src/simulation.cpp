#include "grenkit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "grenkit/estimators.hpp"
#include "json.hpp"

namespace grenkit {

SimSetting make_setting(const std::string& label) {
  SimSetting s;
  s.label = label;
  if (label == "i") {
    s.alpha0 = 0.25, s.alpha1 = -0.375, s.beta0 = 0.25, s.beta1 = -0.75;
  } else if (label == "ii") {
    s.alpha0 = 0.25, s.alpha1 = -0.375, s.beta0 = 1.0, s.beta1 = 0.0;
  } else if (label == "iii") {
    s.alpha0 = 0.25, s.alpha1 = 0.0, s.beta0 = 0.25, s.beta1 = -0.75;
  } else if (label == "iv") {
    s.alpha0 = 0.25, s.alpha1 = 0.0, s.beta0 = 1.0, s.beta1 = 0.0;
  } else {
    throw std::invalid_argument("unknown setting label: " + label);
  }
  return s;
}

SurvivalSample generate(const SimSetting& setting, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  std::vector<double> y(static_cast<std::size_t>(n));
  std::vector<int> delta(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double wi = rng.uniform(-1.0, 1.0);
    const double scale_t = std::exp(setting.alpha0 + setting.alpha1 * wi);
    const double scale_c = std::exp(setting.beta0 + setting.beta1 * wi);
    const double t =
        scale_t * std::pow(-std::log(rng.uniform_pos()), 1.0 / setting.shape_event);
    const double c =
        scale_c * std::pow(-std::log(rng.uniform_pos()), 1.0 / setting.shape_censor);
    y[static_cast<std::size_t>(i)] = std::min(t, c);
    delta[static_cast<std::size_t>(i)] = t <= c ? 1 : 0;
    w[static_cast<std::size_t>(i)] = {wi};
  }
  return SurvivalSample(std::move(y), std::move(delta), std::move(w));
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
// Legendre recurrence.
void gauss_legendre(int order, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.resize(static_cast<std::size_t>(order));
  weights.resize(static_cast<std::size_t>(order));
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < order; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(order) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 =
            ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = x;
    weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct Weibull {
  double shape;
  double scale;
  double density(double t) const {
    if (t <= 0.0) return 0.0;
    const double z = t / scale;
    return shape / scale * std::pow(z, shape - 1.0) *
           std::exp(-std::pow(z, shape));
  }
  // d/dt of the density.
  double density_deriv(double t) const {
    if (t <= 0.0) return 0.0;
    const double z = t / scale;
    return density(t) *
           ((shape - 1.0) / t - shape * std::pow(z, shape - 1.0) / scale);
  }
  double survival(double t) const {
    if (t <= 0.0) return 1.0;
    return std::exp(-std::pow(t / scale, shape));
  }
};

}  // namespace

TrueModel true_marginals(const SimSetting& setting) {
  std::vector<double> nodes, weights;
  gauss_legendre(64, nodes, weights);

  auto event_at = [setting](double w) {
    return Weibull{setting.shape_event,
                   std::exp(setting.alpha0 + setting.alpha1 * w)};
  };
  auto censor_at = [setting](double w) {
    return Weibull{setting.shape_censor,
                   std::exp(setting.beta0 + setting.beta1 * w)};
  };
  // Uniform(-1, 1) mixture: the density 1/2 joins the quadrature weight.
  auto mix = [nodes, weights](auto&& integrand) {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      acc += 0.5 * weights[k] * integrand(nodes[k]);
    }
    return acc;
  };

  TrueModel m;
  m.density = [mix, event_at](double x) {
    return mix([&](double w) { return event_at(w).density(x); });
  };
  m.density_deriv = [mix, event_at](double x) {
    return mix([&](double w) { return event_at(w).density_deriv(x); });
  };
  m.survival = [mix, event_at](double x) {
    return mix([&](double w) { return event_at(w).survival(x); });
  };
  m.hazard = [m](double x) { return m.density(x) / m.survival(x); };
  m.hazard_deriv = [m](double x) {
    const double f = m.density(x);
    const double s = m.survival(x);
    return m.density_deriv(x) / s + f * f / (s * s);
  };
  m.censoring_survival = [mix, censor_at](double x) {
    return mix([&](double w) { return censor_at(w).survival(x); });
  };
  m.conditional_density = [event_at](double x, double w) {
    return event_at(w).density(x);
  };
  m.conditional_survival = [event_at](double x, double w) {
    return event_at(w).survival(x);
  };
  m.conditional_censoring = [censor_at](double x, double w) {
    return censor_at(w).survival(x);
  };
  m.covariate_sampler = [](Rng& rng) { return rng.uniform(-1.0, 1.0); };
  return m;
}

RunManifest default_manifest(const std::string& setting_label) {
  RunManifest m;
  m.setting = make_setting(setting_label);
  m.n = 2000;
  m.reps = 500;
  m.seed = 1;
  for (int k = 1; k <= 9; ++k) m.x_eval.push_back(0.1 * k);
  m.estimators = {"naive_density", "onestep_density"};
  return m;
}

bool known_estimator(const std::string& label) {
  return label == "naive_density" || label == "onestep_density" ||
         label == "naive_hazard" || label == "onestep_hazard" ||
         label == "identity_hazard";
}

namespace {

void validate_manifest(const RunManifest& m) {
  if (m.reps < 1) throw std::invalid_argument("reps must be at least 1");
  if (m.n < 10) throw std::invalid_argument("n must be at least 10");
  if (m.x_eval.empty()) throw std::invalid_argument("empty evaluation grid");
  for (double x : m.x_eval) {
    if (!(x > 0.0 && x < 1.0)) {
      throw std::invalid_argument("x_eval must lie in (0, 1)");
    }
  }
  if (m.estimators.empty()) throw std::invalid_argument("no estimators");
  for (const auto& e : m.estimators) {
    if (!known_estimator(e)) {
      throw std::invalid_argument("unknown estimator label: " + e);
    }
  }
}

bool is_density_label(const std::string& label) {
  return label == "naive_density" || label == "onestep_density";
}

// The study targets the density and hazard on the unit interval, where the
// conditional-Weibull marginals are monotone; isotonization is restricted
// accordingly.
constexpr double kStudyUpperBound = 1.0;

MonotoneEstimate build_estimator(const std::string& label,
                                 const SurvivalSample& s) {
  if (label == "naive_density") return censored_density(s, kStudyUpperBound);
  if (label == "onestep_density") {
    return monotone_density_adjusted(s, kStudyUpperBound);
  }
  if (label == "naive_hazard") {
    return monotone_hazard(s, Adjustment::Independent, kStudyUpperBound);
  }
  if (label == "onestep_hazard") {
    return monotone_hazard(s, Adjustment::Conditional, kStudyUpperBound);
  }
  if (label == "identity_hazard") {
    return hazard_identity(s, Adjustment::Independent, kStudyUpperBound);
  }
  throw std::invalid_argument("unknown estimator label: " + label);
}

void run_one_rep(const RunManifest& man, int rep,
                 std::vector<std::vector<double>>& out) {
  Rng rng = Rng::stream(man.seed, static_cast<std::uint64_t>(rep));
  const SurvivalSample sample = generate(man.setting, man.n, rng);
  for (std::size_t e = 0; e < man.estimators.size(); ++e) {
    try {
      const MonotoneEstimate fit = build_estimator(man.estimators[e], sample);
      std::vector<double> row(man.x_eval.size());
      for (std::size_t k = 0; k < man.x_eval.size(); ++k) {
        row[k] = fit(man.x_eval[k]);
      }
      out[e] = std::move(row);
    } catch (const std::exception&) {
      std::fill(out[e].begin(), out[e].end(),
                std::numeric_limits<double>::quiet_NaN());
    }
  }
}

StudyResult finalize_study(const RunManifest& man, const StudyOptions& opt,
                           std::vector<std::vector<std::vector<double>>> values) {
  const TrueModel model = true_marginals(man.setting);
  const double rate = std::cbrt(static_cast<double>(man.n));

  StudyResult out;
  out.manifest = man;
  out.values = std::move(values);

  for (const auto& label : man.estimators) out.failures[label] = 0;
  for (int r = 0; r < man.reps; ++r) {
    for (std::size_t e = 0; e < man.estimators.size(); ++e) {
      if (std::isnan(out.values[static_cast<std::size_t>(r)][e][0])) {
        ++out.failures[man.estimators[e]];
      }
    }
  }
  for (const auto& [label, count] : out.failures) {
    if (static_cast<double>(count) > 0.01 * man.reps) {
      throw std::runtime_error("estimator failure rate above 1%: " + label);
    }
  }

  for (std::size_t e = 0; e < man.estimators.size(); ++e) {
    const std::string& label = man.estimators[e];
    const bool density = is_density_label(label);
    const Censoring cens = label == "onestep_density" || label == "onestep_hazard"
                               ? Censoring::Conditional
                               : Censoring::Independent;
    for (std::size_t k = 0; k < man.x_eval.size(); ++k) {
      const double x = man.x_eval[k];
      const double truth = density ? model.density(x) : model.hazard(x);
      out.theta0.push_back(truth);

      double mean = 0.0;
      int good = 0;
      for (int r = 0; r < man.reps; ++r) {
        const double v = out.values[static_cast<std::size_t>(r)][e][k];
        if (std::isnan(v)) continue;
        mean += v;
        ++good;
      }
      mean /= static_cast<double>(good);
      double var = 0.0;
      for (int r = 0; r < man.reps; ++r) {
        const double v = out.values[static_cast<std::size_t>(r)][e][k];
        if (std::isnan(v)) continue;
        const double z = rate * (v - truth) - rate * (mean - truth);
        var += z * z;
      }
      var /= static_cast<double>(good - 1);

      const ScaleReport report =
          density ? tau_density(model, x, cens, opt.theory_mc, opt.theory_seed,
                                opt.chernoff_variance)
                  : tau_hazard(model, x, cens, opt.theory_mc, opt.theory_seed,
                               opt.chernoff_variance);

      StudySummary row;
      row.x = x;
      row.estimator = label;
      row.emp_mean = mean;
      row.emp_var_std = var;
      row.theory_var = report.variance_of_limit;
      row.bias = mean - truth;
      out.summary.push_back(row);
    }
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> allocate_values(
    const RunManifest& man) {
  return std::vector<std::vector<std::vector<double>>>(
      static_cast<std::size_t>(man.reps),
      std::vector<std::vector<double>>(
          man.estimators.size(),
          std::vector<double>(man.x_eval.size(),
                              std::numeric_limits<double>::quiet_NaN())));
}

}  // namespace

double StudyResult::standardized(int rep, std::size_t est,
                                 std::size_t x_idx) const {
  const double rate = std::cbrt(static_cast<double>(manifest.n));
  const double truth = theta0[est * manifest.x_eval.size() + x_idx];
  return rate * (values[static_cast<std::size_t>(rep)][est][x_idx] - truth);
}

StudyResult run_study(const RunManifest& man, const StudyOptions& opt) {
  validate_manifest(man);
  auto values = allocate_values(man);
#ifdef _OPENMP
  const int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (int r = 0; r < man.reps; ++r) {
    run_one_rep(man, r, values[static_cast<std::size_t>(r)]);
  }
  return finalize_study(man, opt, std::move(values));
}

StudyResult run_study_serial(const RunManifest& man, const StudyOptions& opt) {
  validate_manifest(man);
  auto values = allocate_values(man);
  for (int r = 0; r < man.reps; ++r) {
    run_one_rep(man, r, values[static_cast<std::size_t>(r)]);
  }
  return finalize_study(man, opt, std::move(values));
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_study_files(const StudyResult& result, const std::string& draws_path,
                       const std::string& summary_path,
                       const std::string& manifest_path) {
  const RunManifest& man = result.manifest;
  {
    std::ofstream out(draws_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + draws_path);
    out << "rep,x,estimator,value,standardized\n";
    for (int r = 0; r < man.reps; ++r) {
      for (std::size_t e = 0; e < man.estimators.size(); ++e) {
        for (std::size_t k = 0; k < man.x_eval.size(); ++k) {
          const double v = result.values[static_cast<std::size_t>(r)][e][k];
          if (std::isnan(v)) continue;
          out << r << ',' << fmt(man.x_eval[k]) << ',' << man.estimators[e]
              << ',' << fmt(v) << ',' << fmt(result.standardized(r, e, k))
              << '\n';
        }
      }
    }
  }
  {
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + summary_path);
    out << "x,estimator,emp_mean,emp_var_std,theory_var,bias\n";
    for (const auto& row : result.summary) {
      out << fmt(row.x) << ',' << row.estimator << ',' << fmt(row.emp_mean)
          << ',' << fmt(row.emp_var_std) << ',' << fmt(row.theory_var) << ','
          << fmt(row.bias) << '\n';
    }
  }
  {
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + manifest_path);
    nlohmann::json j = nlohmann::json::parse(manifest_to_json(man));
    nlohmann::json fails = nlohmann::json::object();
    for (const auto& [label, count] : result.failures) fails[label] = count;
    j["failures"] = fails;
    out << j.dump(2) << '\n';
  }
}

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["setting"] = {{"label", m.setting.label},   {"alpha0", m.setting.alpha0},
                  {"alpha1", m.setting.alpha1}, {"beta0", m.setting.beta0},
                  {"beta1", m.setting.beta1},
                  {"shape_event", m.setting.shape_event},
                  {"shape_censor", m.setting.shape_censor}};
  j["n"] = m.n;
  j["reps"] = m.reps;
  j["seed"] = m.seed;
  j["x_eval"] = m.x_eval;
  j["estimators"] = m.estimators;
  return j.dump(2);
}

RunManifest manifest_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RunManifest m;
  if (j.at("setting").is_string()) {
    m.setting = make_setting(j.at("setting").get<std::string>());
  } else {
    m.setting = make_setting(j.at("setting").at("label").get<std::string>());
  }
  m.n = j.at("n").get<int>();
  m.reps = j.at("reps").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("x_eval")) {
    m.x_eval = j.at("x_eval").get<std::vector<double>>();
  } else {
    for (int k = 1; k <= 9; ++k) m.x_eval.push_back(0.1 * k);
  }
  if (j.contains("estimators")) {
    m.estimators = j.at("estimators").get<std::vector<std::string>>();
  } else {
    m.estimators = {"naive_density", "onestep_density"};
  }
  return m;
}

}  // namespace grenkit
