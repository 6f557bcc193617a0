// One observational sample: shrink the overlap-weighted effect toward the
// unbiased AIPW estimate, pick the weight by modified risk, and report a
// shortcut bootstrap interval for the selected estimate.

#include <cstdio>
#include <iostream>

#include "tms/tms.hpp"

int main() {
  using namespace tms;
  const double s = 0.2;
  const auto data = gen_observational(ScenarioConfig::standard(Scenario::Observational, s, 2024)).sample;
  const auto family = observational_kit(tenths_grid()).family;

  const auto variances =
      variances_from_replicates(replicate_estimates(family, data, ResamplePlan::seeded(100, 1)));
  Rng fold_rng(2);
  const auto table = evaluate_criteria(family, data, variances, make_folds(data, 10, fold_rng));

  const auto by_risk = select(table, Criterion::ModifiedRisk);
  const auto by_cv = select(table, Criterion::CvRisk);
  write_risk_table(std::cout, table, by_risk.selected_g);

  const auto ci = select_ci_shortcut(family, data, ResamplePlan::seeded(1000, 3), 0.95).interval;
  std::printf("\n%-20s %.4f\n", "true effect", true_effect(Scenario::Observational, s).theta0);
  std::printf("targeted  %-10s %.4f   95%% CI [%.4f, %.4f]\n", by_risk.selected_label.c_str(),
              by_risk.estimate, ci.lower, ci.upper);
  std::printf("cv-select %-10s %.4f\n", by_cv.selected_label.c_str(), by_cv.estimate);
  std::printf("%-20s %.4f\n", "baseline (AIPW)", table.rows[0].estimate);
}
