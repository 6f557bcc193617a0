#pragma once

// Monte Carlo harness: MSE curves and interval coverage for the three
// scenarios, plus sampled checks of the criterion's large-sample properties.
//
// Every run draws from streams keyed by (master seed, scenario, s index, run),
// and results land in pre-assigned slots that are reduced in run order, so
// the output is a function of the config alone and not of `workers`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tms/bootstrap.hpp"
#include "tms/dgp.hpp"
#include "tms/error.hpp"
#include "tms/estimands.hpp"
#include "tms/family.hpp"
#include "tms/parallel.hpp"
#include "tms/rng.hpp"
#include "tms/selection.hpp"

namespace tms {

enum class Method { Targeted, CvSelect, Baseline };
enum class Metric { Mse, Coverage, BiasOfCriterion, VarOfCriterion, SelectProb };

constexpr std::string_view method_name(Method m) {
  switch (m) {
    case Method::Targeted: return "targeted";
    case Method::CvSelect: return "cv";
    case Method::Baseline: return "baseline";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "targeted") return Method::Targeted;
  if (s == "cv") return Method::CvSelect;
  if (s == "baseline") return Method::Baseline;
  return std::nullopt;
}

constexpr std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Mse: return "mse";
    case Metric::Coverage: return "coverage";
    case Metric::BiasOfCriterion: return "bias_of_criterion";
    case Metric::VarOfCriterion: return "var_of_criterion";
    case Metric::SelectProb: return "select_prob";
  }
  return "?";
}

struct McRow {
  std::string scenario;
  double s = 0;
  std::string method;
  Metric metric = Metric::Mse;
  double value = 0;
  double mc_se = 0;
  std::size_t runs = 0;
  std::uint64_t seed = 0;
};

struct FailureRow {
  std::string scenario;
  double s = 0;
  std::size_t run = 0;
  std::string failure_kind;
  std::size_t redraws = 0;
};

struct McReport {
  std::vector<McRow> rows;
  std::vector<FailureRow> failures;
};

/// s grids matching the range studied for each scenario.
inline std::vector<double> standard_s_grid(Scenario scenario) {
  std::vector<double> grid;
  const int steps = scenario == Scenario::Proxy ? 12 : 10;
  for (int k = 0; k <= steps; ++k) {
    grid.push_back(scenario == Scenario::IvFusion ? k / 5.0 : k / 10.0);
  }
  return grid;
}

struct McConfig {
  Scenario scenario = Scenario::Observational;
  std::vector<double> s_grid;
  std::size_t runs = 200;
  std::size_t b_var = 100;
  std::size_t b_ci = 1000;
  std::size_t k_folds = 10;
  double level = 0.95;
  std::uint64_t master_seed = 0;
  std::vector<Method> methods{Method::Targeted, Method::CvSelect, Method::Baseline};
  std::size_t workers = 1;
  /// Drop the w = 1 endpoint for the obs and proxy grids.
  bool grid_as_printed = false;
  ShortcutVarianceTerm shortcut_term = ShortcutVarianceTerm::Candidate;
  std::optional<std::size_t> n;  // overrides obs/proxy size
  std::optional<std::size_t> n_complete;
  std::optional<std::size_t> n_incomplete;

  static McConfig standard(Scenario scenario) {
    McConfig c;
    c.scenario = scenario;
    c.s_grid = standard_s_grid(scenario);
    return c;
  }

  void validate() const {
    if (runs < 2) throw Error(ErrorKind::InvalidInput, "runs must be at least 2");
    if (s_grid.empty() || !std::is_sorted(s_grid.begin(), s_grid.end())) {
      throw Error(ErrorKind::InvalidInput, "s grid must be nonempty and sorted");
    }
    for (double s : s_grid) {
      if (!std::isfinite(s) || s < 0) throw Error(ErrorKind::InvalidInput, "s must be finite, >= 0");
    }
    if (b_var < 2 || b_ci < 2) throw Error(ErrorKind::InvalidInput, "bootstrap sizes must be >= 2");
    if (k_folds < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 folds");
    if (!(level > 0 && level < 1)) throw Error(ErrorKind::InvalidInput, "level must be in (0,1)");
    if (methods.empty()) throw Error(ErrorKind::InvalidInput, "no methods requested");
  }

  ScenarioConfig data_config(double s, std::uint64_t seed) const {
    auto c = ScenarioConfig::standard(scenario, s, seed);
    if (n) c.n = *n;
    if (n_complete) c.n_complete = *n_complete;
    if (n_incomplete) c.n_incomplete = *n_incomplete;
    return c;
  }

  std::vector<double> weights() const {
    auto w = tenths_grid();
    if (grid_as_printed && scenario != Scenario::IvFusion) w.pop_back();
    return w;
  }
};

// ---------------------------------------------------------------------------
// Scenario kits: generator plus the shrinkage family studied for it.

template <ScenarioData S>
struct ScenarioKit {
  std::function<S(const ScenarioConfig&)> generate;
  CandidateFamily<S> family;
};

inline ScenarioKit<ObsSample> observational_kit(const std::vector<double>& weights) {
  return {[](const ScenarioConfig& c) { return gen_observational(c).sample; },
          shrinkage_family<ObsSample>(aipw_ate, aipw_overlap, weights)};
}

inline ScenarioKit<IvSample> iv_kit(const std::vector<double>& weights) {
  return {[](const ScenarioConfig& c) { return gen_iv(c).sample; },
          shrinkage_family<IvSample>(iv_ratio, ols_slope, weights)};
}

inline ScenarioKit<ProxySample> proxy_kit(const std::vector<double>& weights) {
  return {[](const ScenarioConfig& c) { return gen_proxy(c).sample; },
          shrinkage_family<ProxySample>(diff_in_means<ProxySample>, product_estimator, weights)};
}

/// Calls fn(kit) with the kit for `scenario`.
template <class Fn>
decltype(auto) with_kit(Scenario scenario, const std::vector<double>& weights, Fn&& fn) {
  switch (scenario) {
    case Scenario::Observational: return fn(observational_kit(weights));
    case Scenario::IvFusion: return fn(iv_kit(weights));
    case Scenario::Proxy: return fn(proxy_kit(weights));
  }
  throw Error(ErrorKind::InvalidInput, "unknown scenario");
}

/// Stream keys within one run.
enum class RunStream : std::uint64_t { Data = 0, Variance = 1, Folds = 2, Interval = 3 };

inline std::uint64_t run_seed(const McConfig& c, std::size_t s_index, std::size_t run,
                              RunStream stream) {
  return derive_seed(c.master_seed, {static_cast<std::uint64_t>(c.scenario), s_index, run,
                                     static_cast<std::uint64_t>(stream)});
}

// ---------------------------------------------------------------------------
// Summary statistics, always accumulated in index order.

struct MeanSe {
  double mean = 0;
  double se = 0;
};

inline MeanSe mean_and_se(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double m = 0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return {m, sd / std::sqrt(n)};
}

/// Sample variances of two paired series and a standard error for their
/// difference, from the per-run contributions (v_i - mean v)^2 - (u_i - mean u)^2.
struct PairedVariance {
  double var_u = 0;
  double var_v = 0;
  double se_u = 0;
  double se_v = 0;
  double diff = 0;  // var_v - var_u
  double diff_se = 0;
};

inline PairedVariance paired_variance(std::span<const double> u, std::span<const double> v) {
  const std::size_t n = u.size();
  const double nn = static_cast<double>(n);
  double mu = 0, mv = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= nn;
  mv /= nn;
  std::vector<double> su(n), sv(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    su[i] = (u[i] - mu) * (u[i] - mu);
    sv[i] = (v[i] - mv) * (v[i] - mv);
    d[i] = sv[i] - su[i];
  }
  const double bessel = nn / (nn - 1);
  const auto a = mean_and_se(su), b = mean_and_se(sv), c = mean_and_se(d);
  return {a.mean * bessel, b.mean * bessel, a.se * bessel, b.se * bessel, c.mean * bessel,
          c.se * bessel};
}

// ---------------------------------------------------------------------------
// MSE curves.

namespace detail {

struct MethodOutcome {
  std::optional<double> estimate;
  std::string failure;
};

struct RunOutcome {
  std::vector<MethodOutcome> methods;
  std::size_t redraws = 0;
};

template <ScenarioData S>
RunOutcome simulate_run(const McConfig& c, const ScenarioKit<S>& kit, std::size_t s_index,
                        std::size_t run) {
  RunOutcome out;
  out.methods.resize(c.methods.size());
  const double s = c.s_grid[s_index];
  const S sample = kit.generate(c.data_config(s, run_seed(c, s_index, run, RunStream::Data)));
  for (std::size_t m = 0; m < c.methods.size(); ++m) {
    try {
      switch (c.methods[m]) {
        case Method::Baseline:
          out.methods[m].estimate = kit.family.evaluate_one(sample, 0);
          break;
        case Method::Targeted: {
          const auto est = kit.family.evaluate(sample);
          const auto mat = replicate_estimates(
              kit.family, sample,
              ResamplePlan::seeded(c.b_var, run_seed(c, s_index, run, RunStream::Variance)));
          out.redraws += mat.redraws;
          const auto table = risk_table(kit.family.labels(), est, variances_from_replicates(mat));
          out.methods[m].estimate = select(table, Criterion::ModifiedRisk).estimate;
          break;
        }
        case Method::CvSelect: {
          Rng rng(run_seed(c, s_index, run, RunStream::Folds));
          const auto folds = make_folds(sample, c.k_folds, rng);
          const auto est = kit.family.evaluate(sample);
          const auto cv = cv_risks(kit.family, sample, folds);
          std::vector<double> dsq(est.size());
          for (std::size_t g = 0; g < est.size(); ++g) dsq[g] = (est[g] - est[0]) * (est[g] - est[0]);
          out.methods[m].estimate = est[argmin_with_tiebreak(cv, dsq)];
          break;
        }
      }
    } catch (const Error& e) {
      out.methods[m].failure = std::string(method_name(c.methods[m])) + ":" +
                               std::string(to_string(e.kind()));
    }
  }
  return out;
}

// Collects per-run values for one (s, method) cell. Failed runs are excluded
// only while they stay under 1% of the runs; beyond that the experiment fails.
inline std::vector<double> successful_values(const std::vector<std::optional<double>>& values,
                                             const std::string& what) {
  std::vector<double> ok;
  for (const auto& v : values) {
    if (v) ok.push_back(*v);
  }
  const std::size_t failed = values.size() - ok.size();
  if (failed > 0 && static_cast<double>(failed) >= 0.01 * static_cast<double>(values.size())) {
    throw Error(ErrorKind::RunFailures, what + ": " + std::to_string(failed) + " of " +
                                            std::to_string(values.size()) + " runs failed");
  }
  if (ok.size() < 2) throw Error(ErrorKind::RunFailures, what + ": fewer than 2 usable runs");
  return ok;
}

template <ScenarioData S>
McReport mse_curve_impl(const McConfig& c, const ScenarioKit<S>& kit) {
  const std::size_t ns = c.s_grid.size();
  std::vector<RunOutcome> outcomes(ns * c.runs);
  parallel_for(outcomes.size(), c.workers, [&](std::size_t k) {
    outcomes[k] = simulate_run(c, kit, k / c.runs, k % c.runs);
  });

  McReport report;
  const std::string scen(scenario_name(c.scenario));
  for (std::size_t j = 0; j < ns; ++j) {
    const double s = c.s_grid[j];
    const double truth = true_effect(c.scenario, s).theta0;
    for (std::size_t r = 0; r < c.runs; ++r) {
      const auto& o = outcomes[j * c.runs + r];
      if (o.redraws > 0) report.failures.push_back({scen, s, r, "redraw", o.redraws});
      for (const auto& mo : o.methods) {
        if (!mo.estimate) report.failures.push_back({scen, s, r, mo.failure, 0});
      }
    }
    for (std::size_t m = 0; m < c.methods.size(); ++m) {
      std::vector<std::optional<double>> sq(c.runs);
      for (std::size_t r = 0; r < c.runs; ++r) {
        const auto& e = outcomes[j * c.runs + r].methods[m].estimate;
        if (e) sq[r] = (*e - truth) * (*e - truth);
      }
      const std::string method(method_name(c.methods[m]));
      const auto ok = successful_values(sq, scen + " s=" + format_double(s) + " " + method);
      const auto st = mean_and_se(ok);
      report.rows.push_back({scen, s, method, Metric::Mse, st.mean, st.se, ok.size(), c.master_seed});
    }
  }
  return report;
}

template <ScenarioData S>
McReport coverage_impl(const McConfig& c, const ScenarioKit<S>& kit) {
  const std::size_t ns = c.s_grid.size();
  struct Outcome {
    std::optional<double> covered;
    std::string failure;
    std::size_t redraws = 0;
  };
  std::vector<Outcome> outcomes(ns * c.runs);
  parallel_for(outcomes.size(), c.workers, [&](std::size_t k) {
    const std::size_t j = k / c.runs, r = k % c.runs;
    const double s = c.s_grid[j];
    auto& o = outcomes[k];
    try {
      const S sample = kit.generate(c.data_config(s, run_seed(c, j, r, RunStream::Data)));
      const auto res = select_ci_shortcut(
          kit.family, sample, ResamplePlan::seeded(c.b_ci, run_seed(c, j, r, RunStream::Interval)),
          c.level, c.shortcut_term);
      o.redraws = res.matrix.redraws;
      o.covered = res.interval.contains(true_effect(c.scenario, s).theta0) ? 1.0 : 0.0;
    } catch (const Error& e) {
      o.failure = "targeted:" + std::string(to_string(e.kind()));
    }
  });

  McReport report;
  const std::string scen(scenario_name(c.scenario));
  for (std::size_t j = 0; j < ns; ++j) {
    const double s = c.s_grid[j];
    std::vector<std::optional<double>> cov(c.runs);
    for (std::size_t r = 0; r < c.runs; ++r) {
      const auto& o = outcomes[j * c.runs + r];
      if (o.redraws > 0) report.failures.push_back({scen, s, r, "redraw", o.redraws});
      if (!o.covered) report.failures.push_back({scen, s, r, o.failure, 0});
      cov[r] = o.covered;
    }
    const auto ok = successful_values(cov, scen + " s=" + format_double(s) + " coverage");
    double p = 0;
    for (double v : ok) p += v;
    p /= static_cast<double>(ok.size());
    report.rows.push_back({scen, s, "targeted", Metric::Coverage, p,
                           std::sqrt(p * (1 - p) / static_cast<double>(ok.size())), ok.size(),
                           c.master_seed});
  }
  return report;
}

}  // namespace detail

/// Monte Carlo MSE of each method's final estimate against the true effect,
/// one row per (s, method).
inline McReport mse_curve(const McConfig& config) {
  config.validate();
  return with_kit(config.scenario, config.weights(),
                  [&](const auto& kit) { return detail::mse_curve_impl(config, kit); });
}

/// Realized coverage of shortcut bootstrap intervals for the targeted
/// estimate, one row per s.
inline McReport coverage_eval(const McConfig& config) {
  config.validate();
  return with_kit(config.scenario, config.weights(),
                  [&](const auto& kit) { return detail::coverage_impl(config, kit); });
}

inline const McRow* find_row(const std::vector<McRow>& rows, double s, std::string_view method,
                             Metric metric) {
  for (const auto& r : rows) {
    if (r.s == s && r.method == method && r.metric == metric) return &r;
  }
  return nullptr;
}

inline double grid_average(const std::vector<McRow>& rows, std::string_view method, Metric metric) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.method == method && r.metric == metric) {
      sum += r.value;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::nan("");
}

// ---------------------------------------------------------------------------
// Synthetic linear setting for the large-sample properties.
//
// D = (A, B) is bivariate Gaussian with mean zero. The baseline is the sample
// mean of psi_0 = A; the candidate is the sample mean of
// psi_g = mix * A + (1 - mix) * B, shifted by bias_shift. Both are exactly
// linear, so MSE(candidate) = Var(psi_g)/n + bias_shift^2 in closed form and
// the variance terms of the criterion can be injected exactly.

struct SyntheticLinearConfig {
  std::size_t n = 5000;
  double var_a = 1.0;
  double var_b = 1.75;
  double correlation = 0.5;
  double mix = 0.0;
  double bias_shift = 0.0;
  std::size_t k_folds = 10;
  std::uint64_t seed = 0;

  double cov_ab() const { return correlation * std::sqrt(var_a * var_b); }
  double var_psi0() const { return var_a; }
  double var_psig() const {
    return mix * mix * var_a + (1 - mix) * (1 - mix) * var_b + 2 * mix * (1 - mix) * cov_ab();
  }
  /// Var(psi_g - psi_0) = (1 - mix)^2 Var(B - A)
  double var_diff() const { return (1 - mix) * (1 - mix) * (var_a + var_b - 2 * cov_ab()); }
  double corr_psig_psi0() const {
    return (mix * var_a + (1 - mix) * cov_ab()) / std::sqrt(var_psig() * var_psi0());
  }

  void validate() const {
    if (!(var_a > 0 && var_b > 0)) throw Error(ErrorKind::InvalidInput, "variances must be > 0");
    if (!(correlation > -1 && correlation < 1)) {
      throw Error(ErrorKind::InvalidInput, "correlation must lie in (-1, 1)");
    }
    if (k_folds < 2 || n < k_folds) throw Error(ErrorKind::InvalidInput, "need n >= k >= 2");
  }
  /// The comparison with cross-validation needs |Cor(psi_g, psi_0)| != 1.
  void require_nondegenerate() const {
    if (std::abs(corr_psig_psi0()) >= 1 - 1e-12) {
      throw Error(ErrorKind::InvalidInput, "|Cor(psi_g, psi_0)| = 1: degenerate family");
    }
  }
};

namespace detail {

struct CriterionErrors {
  double targeted = 0;  // R_hat - MSE
  double cv = 0;        // R_tilde - MSE
};

// One synthetic data set. Folds are the residues i mod K; with i.i.d. draws
// that is distributed exactly like a random balanced split.
inline CriterionErrors synthetic_run(const SyntheticLinearConfig& c, std::uint64_t stream_seed) {
  Rng rng(stream_seed);
  const double sa = std::sqrt(c.var_a), sb = std::sqrt(c.var_b);
  const double rho = c.correlation, rho_c = std::sqrt(1 - rho * rho);
  std::vector<double> fold_a(c.k_folds, 0.0), fold_g(c.k_folds, 0.0);
  std::vector<std::size_t> fold_n(c.k_folds, 0);
  double sum_a = 0, sum_g = 0;
  for (std::size_t i = 0; i < c.n; ++i) {
    const double z1 = std_normal(rng), z2 = std_normal(rng);
    const double a = sa * z1;
    const double b = sb * (rho * z1 + rho_c * z2);
    const double g = c.mix * a + (1 - c.mix) * b;
    const std::size_t f = i % c.k_folds;
    fold_a[f] += a;
    fold_g[f] += g;
    ++fold_n[f];
    sum_a += a;
    sum_g += g;
  }
  const double n = static_cast<double>(c.n);
  const double est0 = sum_a / n;
  const double estg = sum_g / n + c.bias_shift;
  const double mse = c.var_psig() / n + c.bias_shift * c.bias_shift;
  const double r_hat = raw_risk((estg - est0) * (estg - est0), c.var_diff() / n, c.var_psig() / n);

  double r_cv = 0;
  for (std::size_t f = 0; f < c.k_folds; ++f) {
    const double n_held = static_cast<double>(fold_n[f]);
    const double train_g = (sum_g - fold_g[f]) / (n - n_held) + c.bias_shift;
    const double held_0 = fold_a[f] / n_held;
    r_cv += (train_g - held_0) * (train_g - held_0);
  }
  r_cv /= static_cast<double>(c.k_folds);
  return {r_hat - mse, r_cv - mse};
}

inline std::vector<CriterionErrors> synthetic_runs(const SyntheticLinearConfig& c, std::size_t runs,
                                                   std::size_t workers) {
  std::vector<CriterionErrors> out(runs);
  parallel_for(runs, workers, [&](std::size_t r) {
    out[r] = synthetic_run(c, derive_seed(c.seed, {c.n, r}));
  });
  return out;
}

// n for an asymptotically unbiased candidate, sqrt(n) for a biased one.
inline double error_scale(const SyntheticLinearConfig& c) {
  const double n = static_cast<double>(c.n);
  return c.bias_shift == 0 ? n : std::sqrt(n);
}

}  // namespace detail

/// Mean scaled error of the targeted criterion R_hat (exact injected
/// variances) and of the cross-validation criterion R_tilde, per n.
/// The scale is n when bias_shift = 0 and sqrt(n) otherwise.
inline std::vector<McRow> check_criterion_bias(SyntheticLinearConfig config,
                                               const std::vector<std::size_t>& n_grid,
                                               std::size_t runs, std::size_t workers = 1) {
  config.validate();
  std::vector<McRow> rows;
  for (std::size_t n : n_grid) {
    config.n = n;
    config.validate();
    const auto errs = detail::synthetic_runs(config, runs, workers);
    const double scale = detail::error_scale(config);
    std::vector<double> t(runs), v(runs);
    for (std::size_t r = 0; r < runs; ++r) {
      t[r] = scale * errs[r].targeted;
      v[r] = scale * errs[r].cv;
    }
    const auto st = mean_and_se(t), sv = mean_and_se(v);
    rows.push_back({"criterion_bias", static_cast<double>(n), "targeted", Metric::BiasOfCriterion,
                    st.mean, st.se, runs, config.seed});
    rows.push_back({"criterion_bias", static_cast<double>(n), "cv", Metric::BiasOfCriterion, sv.mean,
                    sv.se, runs, config.seed});
  }
  return rows;
}

/// Mean of n (R_tilde - MSE) implied by independent train/test halves:
/// alpha/(1-alpha) Var(psi_g) + Var(psi_0)/alpha with alpha = 1/K.
inline double cv_bias_constant(const SyntheticLinearConfig& c) {
  const double alpha = 1.0 / static_cast<double>(c.k_folds);
  return alpha / (1 - alpha) * c.var_psig() + c.var_psi0() / alpha;
}

struct VarianceOrdering {
  McRow targeted;
  McRow cv;
  PairedVariance paired;  // u = targeted, v = cv
};

/// Monte Carlo variance of the scaled criterion errors (n scale for an
/// unbiased candidate, sqrt(n) for a biased one).
inline VarianceOrdering check_variance_ordering(const SyntheticLinearConfig& config,
                                                std::size_t runs, std::size_t workers = 1) {
  config.validate();
  config.require_nondegenerate();
  const auto errs = detail::synthetic_runs(config, runs, workers);
  const double scale = detail::error_scale(config);
  std::vector<double> t(runs), v(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    t[r] = scale * errs[r].targeted;
    v[r] = scale * errs[r].cv;
  }
  const auto pv = paired_variance(t, v);
  const double n = static_cast<double>(config.n);
  return {{"variance_ordering", n, "targeted", Metric::VarOfCriterion, pv.var_u, pv.se_u, runs,
           config.seed},
          {"variance_ordering", n, "cv", Metric::VarOfCriterion, pv.var_v, pv.se_v, runs,
           config.seed},
          pv};
}

/// Fraction of runs in which modified-risk selection picks an asymptotically
/// unbiased candidate. Family: mean of A (baseline), mean of psi_g (unbiased),
/// mean of B + bias_shift (biased unless bias_shift = 0). Exact variances.
inline std::vector<McRow> check_selection_consistency(SyntheticLinearConfig config,
                                                      const std::vector<std::size_t>& n_grid,
                                                      std::size_t runs, std::size_t workers = 1) {
  config.validate();
  std::vector<McRow> rows;
  const double cov = config.cov_ab();
  const double var_b_minus_a = config.var_a + config.var_b - 2 * cov;
  for (std::size_t n_size : n_grid) {
    config.n = n_size;
    const double n = static_cast<double>(n_size);
    VarianceEstimates var;
    var.var_g = {config.var_a / n, config.var_psig() / n, config.var_b / n};
    var.var_diff = {0.0, config.var_diff() / n, var_b_minus_a / n};
    std::vector<double> hit(runs);
    parallel_for(runs, workers, [&](std::size_t r) {
      Rng rng(derive_seed(config.seed, {n_size, r, 1}));
      const double sa = std::sqrt(config.var_a), sb = std::sqrt(config.var_b);
      const double rho = config.correlation, rho_c = std::sqrt(1 - rho * rho);
      double sum_a = 0, sum_b = 0;
      for (std::size_t i = 0; i < n_size; ++i) {
        const double z1 = std_normal(rng), z2 = std_normal(rng);
        sum_a += sa * z1;
        sum_b += sb * (rho * z1 + rho_c * z2);
      }
      const double ma = sum_a / n, mb = sum_b / n;
      const std::vector<double> est{ma, config.mix * ma + (1 - config.mix) * mb,
                                    mb + config.bias_shift};
      const auto sel = select(risk_table({"baseline", "unbiased", "biased"}, est, var),
                              Criterion::ModifiedRisk);
      hit[r] = (sel.selected_g < 2 || config.bias_shift == 0) ? 1.0 : 0.0;
    });
    const auto st = mean_and_se(hit);
    rows.push_back({"selection_consistency", n, "targeted", Metric::SelectProb, st.mean,
                    std::sqrt(st.mean * (1 - st.mean) / static_cast<double>(runs)), runs,
                    config.seed});
  }
  return rows;
}

struct GaussianLemmaConfig {
  std::size_t k = 2;
  double var_z = 1.0;
  double var_x = 1.0;
  double correlation = 0.0;
  std::uint64_t seed = 0;
};

/// Sampled variances of
///   lhs = ((1/K) sum_i (Z_i - X_i))^2
///   rhs = (1/K) sum_i ((1/(K-1)) sum_{j != i} Z_j - X_i)^2
/// for i.i.d. Gaussian pairs (Z_i, X_i).
inline VarianceOrdering check_gaussian_lemma(const GaussianLemmaConfig& c, std::size_t runs,
                                             std::size_t workers = 1) {
  if (c.k < 2) throw Error(ErrorKind::InvalidInput, "K must be at least 2");
  if (!(c.var_z > 0 && c.var_x > 0)) throw Error(ErrorKind::InvalidInput, "variances must be > 0");
  if (!(c.correlation > -1 && c.correlation < 1)) {
    throw Error(ErrorKind::InvalidInput, "|Cor(Z, X)| must be < 1");
  }
  std::vector<double> lhs(runs), rhs(runs);
  const double sz = std::sqrt(c.var_z), sx = std::sqrt(c.var_x);
  const double rho = c.correlation, rho_c = std::sqrt(1 - rho * rho);
  const double kk = static_cast<double>(c.k);
  parallel_for(runs, workers, [&](std::size_t r) {
    Rng rng(derive_seed(c.seed, {c.k, r}));
    std::vector<double> z(c.k), x(c.k);
    double sum_z = 0, sum_diff = 0;
    for (std::size_t i = 0; i < c.k; ++i) {
      const double u1 = std_normal(rng), u2 = std_normal(rng);
      z[i] = sz * u1;
      x[i] = sx * (rho * u1 + rho_c * u2);
      sum_z += z[i];
      sum_diff += z[i] - x[i];
    }
    const double m = sum_diff / kk;
    lhs[r] = m * m;
    double acc = 0;
    for (std::size_t i = 0; i < c.k; ++i) {
      const double d = (sum_z - z[i]) / (kk - 1) - x[i];
      acc += d * d;
    }
    rhs[r] = acc / kk;
  });
  const auto pv = paired_variance(lhs, rhs);
  return {{"gaussian_lemma", kk, "lhs", Metric::VarOfCriterion, pv.var_u, pv.se_u, runs, c.seed},
          {"gaussian_lemma", kk, "rhs", Metric::VarOfCriterion, pv.var_v, pv.se_v, runs, c.seed},
          pv};
}

}  // namespace tms
