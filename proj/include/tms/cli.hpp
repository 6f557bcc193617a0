#pragma once

// Command-line front end.
//
//   tms generate     --scenario obs --s 0.3 --seed 1 --out data.csv
//   tms select       --scenario obs --input data.csv --boot 100 --folds 10 --seed 1
//   tms simulate     --scenario iv --runs 200 --seed 42 --out mse.csv
//   tms coverage     --scenario proxy --runs 200 --b-ci 1000 --seed 7 --out cov.csv
//   tms theory-check --check all --runs 2000 --seed 3 --out theory.csv
//   tms plot         --input mse.csv --out mse.svg --metric mse
//
// Options may also come from `--config file` holding `key = value` lines with
// the same names as the long flags; anything given on the command line wins.
// Exit status: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tms/bootstrap.hpp"
#include "tms/csv.hpp"
#include "tms/dgp.hpp"
#include "tms/error.hpp"
#include "tms/experiments.hpp"
#include "tms/format.hpp"
#include "tms/plot.hpp"
#include "tms/selection.hpp"

namespace tms {

namespace cli_detail {

struct Options {
  std::string scenario = "obs";
  std::uint64_t seed = 0;
  std::size_t runs = 200;
  std::size_t folds = 10;
  double level = 0.95;
  std::size_t boot = 100;
  std::size_t b_ci = 1000;
  std::size_t workers = 1;
  std::string out;
  std::string input;
  std::string s;  // one value, or a comma list overriding the s grid
  std::optional<std::size_t> n, n_complete, n_incomplete;
  bool keep_potential = false;
  std::string shortcut_term = "candidate";
  bool grid_as_printed = false;
  std::string failures;
  std::string replicates;
  std::string methods = "targeted,cv,baseline";
  std::string check = "all";
  std::string metric;
  std::string title;
  std::string x_column = "s", series_column = "method", y_column = "value", band_column = "mc_se";
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

inline std::vector<double> parse_s_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    const auto v = parse_double(item);
    if (!v) throw UsageError("--s: not a number: '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

inline Scenario scenario_of(const Options& o) {
  const auto s = parse_scenario(o.scenario);
  if (!s) throw UsageError("--scenario must be obs, iv or proxy");
  return *s;
}

inline void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

template <class Writer>
void emit(const std::string& path, std::ostream& out, Writer&& writer) {
  if (path.empty() || path == "-") {
    writer(out);
  } else {
    detail::write_file(path, writer);
  }
}

inline McConfig mc_config(const Options& o) {
  McConfig c = McConfig::standard(scenario_of(o));
  if (!o.s.empty()) c.s_grid = parse_s_list(o.s);
  c.runs = o.runs;
  c.b_var = o.boot;
  c.b_ci = o.b_ci;
  c.k_folds = o.folds;
  c.level = o.level;
  c.master_seed = o.seed;
  c.workers = o.workers;
  c.grid_as_printed = o.grid_as_printed;
  c.shortcut_term = o.shortcut_term == "as-printed" ? ShortcutVarianceTerm::AsPrinted
                                                    : ShortcutVarianceTerm::Candidate;
  c.n = o.n;
  c.n_complete = o.n_complete;
  c.n_incomplete = o.n_incomplete;
  c.methods.clear();
  for (const auto& m : split_list(o.methods)) {
    const auto parsed = parse_method(m);
    if (!parsed) throw UsageError("--methods: unknown method '" + m + "'");
    c.methods.push_back(*parsed);
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

inline int cmd_generate(const Options& o, std::ostream& out) {
  const Scenario scenario = scenario_of(o);
  const auto s = o.s.empty() ? std::vector<double>{0.0} : parse_s_list(o.s);
  if (s.size() != 1) throw UsageError("generate takes a single --s value");
  ScenarioConfig c = ScenarioConfig::standard(scenario, s[0], o.seed);
  if (o.n) c.n = *o.n;
  if (o.n_complete) c.n_complete = *o.n_complete;
  if (o.n_incomplete) c.n_incomplete = *o.n_incomplete;
  auto write = [&](const auto& gen) {
    emit(o.out, out, [&](std::ostream& os) {
      write_sample(os, ScenarioSample(gen.sample), gen.potential);
    });
  };
  switch (scenario) {
    case Scenario::Observational: write(gen_observational(c, o.keep_potential)); break;
    case Scenario::IvFusion: write(gen_iv(c, o.keep_potential)); break;
    case Scenario::Proxy: write(gen_proxy(c, o.keep_potential)); break;
  }
  return 0;
}

// Risk table for one data file: bootstrap variances from stream (seed, 1),
// folds from stream (seed, 2).
inline int cmd_select(const Options& o, std::ostream& out) {
  require(o.input, "--input");
  const Scenario scenario = scenario_of(o);
  McConfig mc = McConfig::standard(scenario);
  mc.grid_as_printed = o.grid_as_printed;
  const ScenarioSample data = read_sample_file(o.input, scenario);
  return with_kit(scenario, mc.weights(), [&](const auto& kit) {
    using S = typename std::decay_t<decltype(kit.family)>::SampleType;
    const S& sample = std::get<S>(data);
    const auto mat = replicate_estimates(
        kit.family, sample, ResamplePlan::seeded(o.boot, derive_seed(o.seed, {1})), o.workers);
    std::optional<FoldPlan> folds;
    if (o.folds > 0) {
      Rng rng(derive_seed(o.seed, {2}));
      folds = make_folds(sample, o.folds, rng);
    }
    const auto table = evaluate_criteria(kit.family, sample, variances_from_replicates(mat), folds);
    const auto sel = select(table, Criterion::ModifiedRisk);
    write_risk_table(out, table, sel.selected_g);
    if (!o.replicates.empty()) {
      detail::write_file(o.replicates, [&](std::ostream& os) { write_replicates(os, mat); });
    }
    return 0;
  });
}

inline int cmd_experiment(const Options& o, std::ostream& out, bool coverage) {
  const McConfig c = mc_config(o);
  const McReport report = coverage ? coverage_eval(c) : mse_curve(c);
  emit(o.out, out, [&](std::ostream& os) { write_rows(os, report.rows); });
  if (!o.failures.empty()) write_failures(report.failures, o.failures);
  return 0;
}

inline int cmd_theory(const Options& o, std::ostream& out) {
  const auto checks = split_list(o.check);
  auto wants = [&](const char* name) {
    for (const auto& c : checks) {
      if (c == name || c == "all") return true;
    }
    return false;
  };
  for (const auto& c : checks) {
    if (c != "all" && c != "bias" && c != "variance" && c != "selection" && c != "lemma") {
      throw UsageError("--check: unknown check '" + c + "'");
    }
  }
  const std::size_t n = o.n.value_or(5000);
  std::vector<McRow> rows;
  auto append = [&](std::vector<McRow> r) { rows.insert(rows.end(), r.begin(), r.end()); };

  if (wants("bias")) {
    SyntheticLinearConfig c;
    c.k_folds = o.folds;
    c.seed = derive_seed(o.seed, {1});
    append(check_criterion_bias(c, {n}, o.runs, o.workers));
  }
  if (wants("variance")) {
    SyntheticLinearConfig unbiased;
    unbiased.n = n;
    unbiased.mix = 0.5;
    unbiased.k_folds = o.folds;
    unbiased.seed = derive_seed(o.seed, {2});
    SyntheticLinearConfig biased = unbiased;
    biased.bias_shift = 1.0;
    biased.seed = derive_seed(o.seed, {3});
    for (auto [name, cfg] : {std::pair{"variance_unbiased", unbiased}, {"variance_biased", biased}}) {
      auto v = check_variance_ordering(cfg, o.runs, o.workers);
      v.targeted.scenario = v.cv.scenario = name;
      rows.push_back(v.targeted);
      rows.push_back(v.cv);
    }
  }
  if (wants("selection")) {
    SyntheticLinearConfig c;
    c.var_b = 0.5;
    c.mix = 0.5;
    c.bias_shift = 0.1;
    c.k_folds = o.folds;
    c.seed = derive_seed(o.seed, {4});
    append(check_selection_consistency(c, {200, 2000, 20000}, o.runs, o.workers));
  }
  if (wants("lemma")) {
    for (std::size_t k : {2, 5, 10}) {
      GaussianLemmaConfig g;
      g.k = k;
      g.correlation = 0.5;
      g.seed = derive_seed(o.seed, {5});
      const auto v = check_gaussian_lemma(g, o.runs, o.workers);
      rows.push_back(v.targeted);
      rows.push_back(v.cv);
    }
  }
  emit(o.out, out, [&](std::ostream& os) { write_rows(os, rows); });
  return 0;
}

inline int cmd_plot(const Options& o) {
  require(o.input, "--input");
  require(o.out, "--out");
  PlotSpec spec;
  spec.input_path = o.input;
  spec.output_path = o.out;
  spec.x_column = o.x_column;
  spec.series_column = o.series_column;
  spec.y_column = o.y_column;
  spec.band_column = o.band_column;
  spec.title = o.title;
  if (!o.metric.empty()) spec.metric = o.metric;
  render_plot(spec);
  return 0;
}

}  // namespace cli_detail

/// Parses `args` (args[0] is the program name) and runs the chosen verb.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  Options o;
  CLI::App app{"Targeted model selection: data, selection, simulation studies and plots", "tms"};
  app.set_config("--config", "", "File of `key = value` lines using the long flag names");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  app.add_option("--scenario", o.scenario, "obs | iv | proxy")
      ->check(CLI::IsMember({"obs", "iv", "proxy"}))
      ->capture_default_str();
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  app.add_option("--runs", o.runs, "Monte Carlo runs per s")->capture_default_str();
  app.add_option("--folds", o.folds, "Cross-validation folds (select: 0 disables)")
      ->capture_default_str();
  app.add_option("--level", o.level, "Interval level")->capture_default_str();
  app.add_option("--boot", o.boot, "Bootstrap replicates for the variance terms")
      ->capture_default_str();
  app.add_option("--b-ci", o.b_ci, "Bootstrap replicates for coverage intervals")
      ->capture_default_str();
  app.add_option("--workers", o.workers, "Worker threads (does not change output)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", o.out, "Output path (CSV or SVG); stdout when omitted for CSV");
  app.add_option("--input", o.input, "Input CSV");
  app.add_option("--s", o.s, "s value (generate) or comma list overriding the s grid")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::Join);
  app.add_option("--n", o.n, "Sample size (obs, proxy) or n for theory-check");
  app.add_option("--n-complete", o.n_complete, "IV records with the instrument");
  app.add_option("--n-incomplete", o.n_incomplete, "IV records without the instrument");
  app.add_flag("--keep-potential", o.keep_potential, "generate: add y0,y1 columns");
  app.add_option("--shortcut-variance-term", o.shortcut_term,
                 "Final variance term of the shortcut interval criterion")
      ->check(CLI::IsMember({"candidate", "as-printed"}))
      ->capture_default_str();
  app.add_flag("--grid-as-printed", o.grid_as_printed,
               "Drop the w = 1 candidate for obs and proxy");
  app.add_option("--failures", o.failures, "Failure report sidecar CSV");
  app.add_option("--replicates", o.replicates, "select: dump the replicate matrix here");
  app.add_option("--methods", o.methods, "Comma list of targeted, cv, baseline")
      ->capture_default_str()
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::Join);
  app.add_option("--check", o.check, "theory-check: bias, variance, selection, lemma or all")
      ->capture_default_str()
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::Join);
  app.add_option("--metric", o.metric, "plot: keep rows with this metric");
  app.add_option("--title", o.title, "plot: title");
  app.add_option("--x", o.x_column, "plot: x column")->capture_default_str();
  app.add_option("--series", o.series_column, "plot: series column")->capture_default_str();
  app.add_option("--y", o.y_column, "plot: y column")->capture_default_str();
  app.add_option("--band", o.band_column, "plot: error band column")->capture_default_str();

  auto verb = [&](const char* name, const char* help) {
    return app.add_subcommand(name, help)->fallthrough();
  };
  CLI::App* generate = verb("generate", "Write a simulated data set");
  CLI::App* sel = verb("select", "Print the risk table for a data file");
  CLI::App* simulate = verb("simulate", "Monte Carlo MSE curves");
  CLI::App* coverage = verb("coverage", "Coverage of shortcut bootstrap intervals");
  CLI::App* theory = verb("theory-check", "Sampled checks in a synthetic linear setting");
  CLI::App* plot = verb("plot", "Render a results CSV as SVG");

  // app.help() would describe only the parsed subcommand; usage errors show
  // the full flag synopsis.
  auto synopsis = [&] { return app.get_formatter()->make_help(&app, "", CLI::AppFormatMode::Normal); };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << synopsis();
    return 1;
  }

  try {
    if (generate->parsed()) return cmd_generate(o, out);
    if (sel->parsed()) return cmd_select(o, out);
    if (simulate->parsed()) return cmd_experiment(o, out, false);
    if (coverage->parsed()) return cmd_experiment(o, out, true);
    if (theory->parsed()) return cmd_theory(o, out);
    if (plot->parsed()) return cmd_plot(o);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << synopsis();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace tms
