#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "tms/bootstrap.hpp"
#include "tms/dgp.hpp"
#include "tms/estimands.hpp"
#include "tms/experiments.hpp"

using namespace tms;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

double mean_y(const ProxySample& s) {
  double m = 0;
  for (const auto& r : s.records()) m += r.y;
  return m / double(s.size());
}

CandidateFamily<ProxySample> constants(std::vector<double> values) {
  std::vector<std::string> labels;
  std::vector<CandidateFamily<ProxySample>::Estimator> est;
  for (double v : values) {
    labels.push_back(format_double(v));
    est.push_back([v](const ProxySample&) { return v; });
  }
  return CandidateFamily<ProxySample>::from_estimators(labels, est);
}

ReplicateMatrix matrix(std::vector<std::vector<double>> rows) {
  ReplicateMatrix m;
  m.replicates = rows.size();
  m.candidates = rows.front().size();
  for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
  return m;
}

std::vector<double> range(int lo, int hi) {
  std::vector<double> v;
  for (int k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

const ProxySample kSmall({{0.5, 1, 1}, {1.5, 0, 0}, {-1, 1, 0}, {2, 0, 1}, {0.1, 1, 1}});

}  // namespace

TEST(Replicates, ConstantFamily) {
  const auto m = replicate_estimates(constants({2, 5}), kSmall, ResamplePlan::seeded(3, 1));
  ASSERT_EQ(m.replicates, 3u);
  for (std::size_t b = 0; b < 3; ++b) {
    EXPECT_EQ(m.at(b, 0), 2);
    EXPECT_EQ(m.at(b, 1), 5);
  }
}

TEST(Replicates, IdentityResamplesReproduceEstimates) {
  const auto fam = shrinkage_family<ProxySample>(diff_in_means<ProxySample>, product_estimator,
                                                 tenths_grid());
  std::vector<std::size_t> id(kSmall.size());
  std::iota(id.begin(), id.end(), std::size_t{0});
  const auto m = replicate_estimates(fam, kSmall, ResamplePlan::from_indices({id, id, id, id}));
  const auto est = fam.evaluate(kSmall);
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t g = 0; g < est.size(); ++g) EXPECT_EQ(m.at(b, g), est[g]);
  }
}

TEST(Replicates, HandEvaluatedResamples) {
  const auto fam = CandidateFamily<ProxySample>::from_estimators({"mean"}, {mean_y});
  const ProxySample two({{0, 0, 0}, {2, 1, 0}});
  const auto m = replicate_estimates(fam, two, ResamplePlan::from_indices({{0, 0}, {0, 1}, {1, 1}}));
  EXPECT_EQ(m.column(0), (std::vector<double>{0, 1, 2}));
}

TEST(Replicates, ExplicitPlanValidation) {
  const auto fam = CandidateFamily<ProxySample>::from_estimators({"mean"}, {mean_y});
  EXPECT_EQ(kind_of([&] {
              replicate_estimates(fam, kSmall, ResamplePlan::from_indices({{0, 1}, {1, 2}}));
            }),
            ErrorKind::InvalidInput);
  const IvSample iv({{1, 1, 1.0}, {2, 2, 2.0}, {3, 3, std::nullopt}});
  const auto ivfam = CandidateFamily<IvSample>::from_estimators(
      {"ols"}, {[](const IvSample& s) { return s[0].y; }});
  // index 2 is the incomplete record and may not stand in for a complete one
  EXPECT_EQ(kind_of([&] {
              replicate_estimates(ivfam, iv, ResamplePlan::from_indices({{2, 0, 2}, {0, 1, 2}}));
            }),
            ErrorKind::InvalidInput);
}

TEST(Replicates, WorkerCountDoesNotChangeValues) {
  const auto s = gen_observational(ScenarioConfig::standard(Scenario::Observational, 0.4, 3)).sample;
  const auto kit = observational_kit(tenths_grid());
  const auto plan = ResamplePlan::seeded(60, 17);
  const auto a = replicate_estimates(kit.family, s, plan, 1);
  const auto b = replicate_estimates(kit.family, s, plan, 3);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.redraws, b.redraws);
}

TEST(Replicates, IvBlocksKeepTheirSizes) {
  const auto s = gen_iv(ScenarioConfig::standard(Scenario::IvFusion, 1, 5)).sample;
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto idx = draw_block_resample(s, rng);
    const auto r = s.subset(idx);
    EXPECT_EQ(r.n_complete(), 500u);
    EXPECT_EQ(r.n_incomplete(), 500u);
    for (std::size_t k = 0; k < 500; ++k) EXPECT_LT(idx[k], 500u);
    for (std::size_t k = 500; k < 1000; ++k) EXPECT_GE(idx[k], 500u);
  }
}

TEST(Replicates, FailedReplicatesAreRedrawn) {
  // Four records: a resample misses an arm with probability 1/8.
  const ProxySample tiny({{1, 1, 0}, {2, 1, 1}, {0, 0, 0}, {0.5, 0, 1}});
  const auto fam = CandidateFamily<ProxySample>::from_estimators({"dim"}, {diff_in_means<ProxySample>});
  const auto m = replicate_estimates(fam, tiny, ResamplePlan::seeded(200, 4));
  EXPECT_GT(m.redraws, 0u);
  for (double v : m.values) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(m.values, replicate_estimates(fam, tiny, ResamplePlan::seeded(200, 4), 2).values);
}

TEST(Replicates, ExhaustionIsReported) {
  const auto fam = CandidateFamily<ProxySample>::from_estimators(
      {"bad"}, {[](const ProxySample&) -> double { throw Error(ErrorKind::EmptyArm, "x"); }});
  EXPECT_EQ(kind_of([&] { replicate_estimates(fam, kSmall, ResamplePlan::seeded(5, 1)); }),
            ErrorKind::ReplicateExhausted);
}

TEST(Variances, ConstantColumns) {
  const auto v = variances_from_replicates(matrix({{1, 2}, {1, 2}, {1, 2}}));
  EXPECT_EQ(v.var_g, (std::vector<double>{0, 0}));
  EXPECT_EQ(v.var_diff, (std::vector<double>{0, 0}));
}

TEST(Variances, SampleVarianceUsesBMinusOne) {
  const auto v = variances_from_replicates(matrix({{0, 0}, {1, 2}, {2, 4}}));
  EXPECT_EQ(v.var_g[0], 1.0);
  EXPECT_EQ(v.var_g[1], 4.0);
  EXPECT_EQ(v.var_diff[0], 0.0);
  EXPECT_EQ(v.var_diff[1], 1.0);
}

// For a shrinkage family est_0 - est_w = w (a - b), so var_diff scales as w^2.
TEST(Properties, VarDiffScalesWithSquaredWeight) {
  const auto w = tenths_grid();
  const auto fam = shrinkage_family<ProxySample>(diff_in_means<ProxySample>, product_estimator, w);
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    auto c = ScenarioConfig::standard(Scenario::Proxy, 0.1 * double(rep % 13), 1000 + rep);
    const auto s = gen_proxy(c).sample;
    const auto v = variances_from_replicates(replicate_estimates(fam, s, ResamplePlan::seeded(30, rep)));
    const double full = v.var_diff.back();
    for (std::size_t g = 0; g < w.size(); ++g) {
      EXPECT_NEAR(v.var_diff[g], w[g] * w[g] * full, 1e-10 * std::max(1.0, full));
    }
  }
}

TEST(Percentile, HundredValues) {
  const auto ci = percentile_interval(range(1, 100), 0.95);
  EXPECT_EQ(ci.lower, 3);
  EXPECT_EQ(ci.upper, 98);
}

TEST(Percentile, FortyValues) {
  const auto ci = percentile_interval(range(1, 40), 0.9);
  EXPECT_EQ(ci.lower, 2);
  EXPECT_EQ(ci.upper, 38);
}

TEST(Percentile, ConstantValues) {
  const auto ci = percentile_interval(std::vector<double>(17, 2.5), 0.95);
  EXPECT_EQ(ci.lower, 2.5);
  EXPECT_EQ(ci.upper, 2.5);
}

TEST(Percentile, OrderDoesNotMatter) {
  auto v = range(1, 100);
  std::reverse(v.begin(), v.end());
  EXPECT_EQ(percentile_interval(v, 0.95).lower, 3);
}

TEST(Percentile, WiderLevelNeverNarrower) {
  Rng rng(12);
  std::vector<double> v(500);
  for (auto& x : v) x = std_normal(rng);
  double lo = INFINITY, hi = -INFINITY;
  for (double level = 0.5; level < 0.999; level += 0.01) {
    const auto ci = percentile_interval(v, level);
    EXPECT_LE(ci.lower, lo);
    EXPECT_GE(ci.upper, hi);
    lo = ci.lower;
    hi = ci.upper;
  }
}

TEST(Percentile, BadInput) {
  EXPECT_EQ(kind_of([] { percentile_interval({1.0}, 0.9); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { percentile_interval({1.0, 2.0}, 1.0); }), ErrorKind::InvalidInput);
}

TEST(Shortcut, ConstantFamilyIsDegenerate) {
  const auto r = select_ci_shortcut(constants({2, 5}), kSmall, ResamplePlan::seeded(50, 3), 0.95);
  EXPECT_EQ(r.selection.estimate, 2);
  EXPECT_EQ(r.interval.lower, 2);
  EXPECT_EQ(r.interval.upper, 2);
}

TEST(Shortcut, SingleCandidateIsPlainPercentile) {
  const auto s = gen_proxy(ScenarioConfig::standard(Scenario::Proxy, 0, 2)).sample;
  const auto fam = CandidateFamily<ProxySample>::from_estimators({"dim"}, {diff_in_means<ProxySample>});
  const auto plan = ResamplePlan::seeded(400, 5);
  const auto r = select_ci_shortcut(fam, s, plan, 0.9);
  const auto plain = percentile_interval(replicate_estimates(fam, s, plan).column(0), 0.9);
  EXPECT_EQ(r.interval.lower, plain.lower);
  EXPECT_EQ(r.interval.upper, plain.upper);
}

TEST(Shortcut, AsPrintedTermUsesGapVariance) {
  const auto s = gen_proxy(ScenarioConfig::standard(Scenario::Proxy, 0.5, 2)).sample;
  const auto kit = proxy_kit(tenths_grid());
  const auto plan = ResamplePlan::seeded(200, 5);
  const auto a = select_ci_shortcut(kit.family, s, plan, 0.95, ShortcutVarianceTerm::Candidate);
  const auto b = select_ci_shortcut(kit.family, s, plan, 0.95, ShortcutVarianceTerm::AsPrinted);
  // Same matrix and same point selection; only the replicate criterion differs.
  EXPECT_EQ(a.matrix.values, b.matrix.values);
  EXPECT_EQ(a.selection.selected_g, b.selection.selected_g);
  // Under the printed term the baseline (zero gap variance) always wins.
  const auto base = percentile_interval(a.matrix.column(0), 0.95);
  EXPECT_EQ(b.interval.lower, base.lower);
  EXPECT_EQ(b.interval.upper, base.upper);
}

TEST(FullBootstrap, ConstantFamilyIsDegenerate) {
  const auto ci = select_ci_full(constants({2, 5}), kSmall, ResamplePlan::seeded(20, 3),
                                 ResamplePlan::seeded(10, 4), 0.95);
  EXPECT_EQ(ci.lower, 2);
  EXPECT_EQ(ci.upper, 2);
}

TEST(FullBootstrap, SingleCandidateIsPlainPercentile) {
  const auto s = gen_proxy(ScenarioConfig::standard(Scenario::Proxy, 0, 2)).sample;
  const auto fam = CandidateFamily<ProxySample>::from_estimators({"dim"}, {diff_in_means<ProxySample>});
  const auto plan = ResamplePlan::seeded(200, 5);
  const auto ci = select_ci_full(fam, s, plan, ResamplePlan::seeded(5, 6), 0.9);
  const auto plain = percentile_interval(replicate_estimates(fam, s, plan).column(0), 0.9);
  EXPECT_EQ(ci.lower, plain.lower);
  EXPECT_EQ(ci.upper, plain.upper);
}

// Freezing the variance terms should barely move the interval.
TEST(FullBootstrap, WidthCloseToShortcut) {
  const auto kit = proxy_kit(tenths_grid());
  double full = 0, shortcut = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = gen_proxy(ScenarioConfig::standard(Scenario::Proxy, 0, 500 + seed)).sample;
    const auto plan = ResamplePlan::seeded(100, derive_seed(seed, {1}));
    const auto inner = ResamplePlan::seeded(100, derive_seed(seed, {2}));
    const auto f = select_ci_full(kit.family, s, plan, inner, 0.95);
    const auto c = select_ci_shortcut(kit.family, s, plan, 0.95);
    full += f.upper - f.lower;
    shortcut += c.interval.upper - c.interval.lower;
  }
  EXPECT_NEAR(full / shortcut, 1.0, 0.10) << "full " << full / 50 << " shortcut " << shortcut / 50;
}

TEST(Targeted, MatchesManualPipeline) {
  const auto s = gen_iv(ScenarioConfig::standard(Scenario::IvFusion, 0.3, 9)).sample;
  const auto kit = iv_kit(tenths_grid());
  const auto plan = ResamplePlan::seeded(50, 1);
  const auto sel = select_targeted(kit.family, s, plan);
  const auto table = risk_table(kit.family.labels(), kit.family.evaluate(s),
                                variances_from_replicates(replicate_estimates(kit.family, s, plan)));
  EXPECT_EQ(sel.selected_g, select(table, Criterion::ModifiedRisk).selected_g);
  EXPECT_EQ(sel.estimate, table.rows[sel.selected_g].estimate);
}
