#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hand_data.hpp"
#include "oracles/hand_goldens.hpp"
#include "tms/dgp.hpp"
#include "tms/estimands.hpp"

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

// Collapsed forms of the two AIPW estimators under saturated empirical
// propensities: sum_x (n_x / n) (Q(x,1) - Q(x,0)) and the p(1-p)-weighted
// analogue. Used as an oracle independent of the per-unit sums.
double collapsed_ate(const ObsSample& s) {
  const auto st = empirical_strata(s);
  double v = 0;
  for (int x = 0; x < 2; ++x) {
    if (!st.has_x(x)) continue;
    v += double(st.count_x(x)) / double(st.n()) * (st.q_hat(x, 1) - st.q_hat(x, 0));
  }
  return v;
}

double collapsed_overlap(const ObsSample& s) {
  const auto st = empirical_strata(s);
  double num = 0, den = 0;
  for (int x = 0; x < 2; ++x) {
    if (!st.has_x(x)) continue;
    const double p = st.p_hat(x, 1);
    const double w = double(st.count_x(x)) * p * (1 - p);
    if (w == 0) continue;
    num += w * (st.q_hat(x, 1) - st.q_hat(x, 0));
    den += w;
  }
  return num / den;
}

std::vector<ObsRecord> random_obs(Rng& rng, std::size_t n) {
  std::vector<ObsRecord> r;
  for (std::size_t k = 0; k < n; ++k) {
    const int x = bernoulli(rng, 0.5), t = bernoulli(rng, x ? 0.6 : 0.3);
    r.push_back({std_normal(rng) + t * (1 + x), t, x});
  }
  return r;
}

}  // namespace

TEST(Strata, DirectCounting) {
  const auto st = empirical_strata(ObsSample({{1, 1, 0}, {0, 0, 0}}));
  EXPECT_EQ(st.p_hat(0, 1), 0.5);
  EXPECT_EQ(st.q_hat(0, 1), 1.0);
  EXPECT_EQ(st.q_hat(0, 0), 0.0);
}

TEST(Strata, DegenerateCellIsUndefined) {
  const auto st = empirical_strata(ObsSample({{1, 1, 1}, {2, 1, 1}}));
  EXPECT_EQ(st.p_hat(1, 1), 1.0);
  EXPECT_EQ(kind_of([&] { st.q_hat(1, 0); }), ErrorKind::EmptyStratum);
  EXPECT_EQ(kind_of([&] { st.p_hat(0, 1); }), ErrorKind::EmptyStratum);
}

TEST(Strata, TreatedShareNearDesignValue) {
  const auto g = gen_observational(ScenarioConfig::standard(Scenario::Observational, 0, 1));
  const auto st = empirical_strata(g.sample);
  const double nx = double(st.count_x(1));
  EXPECT_NEAR(st.p_hat(1, 1), 0.7, 3 * std::sqrt(0.7 * 0.3 / nx));
}

TEST(AipwAte, PerfectOutcomeModelGivesOne) {
  EXPECT_DOUBLE_EQ(aipw_ate(ObsSample({{1, 1, 1}, {0, 0, 1}, {1, 1, 1}, {0, 0, 1}, {0, 0, 1}})),
                   1.0);
}

TEST(AipwAte, ConstantOutcomeGivesZero) {
  EXPECT_NEAR(aipw_ate(ObsSample({{3, 1, 1}, {3, 0, 1}, {3, 1, 0}, {3, 0, 0}, {3, 0, 0}})), 0.0,
              1e-15);
}

TEST(AipwAte, HandGoldens) {
  EXPECT_NEAR(aipw_ate(hand::obs_grid()), goldens::aipw_ate_grid, 1e-10);
  EXPECT_NEAR(aipw_ate(hand::obs_uneven()), goldens::aipw_ate_uneven, 1e-10);
}

TEST(AipwAte, MatchesCollapsedForm) {
  Rng rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    const ObsSample s(random_obs(rng, 40 + rep));
    try {
      EXPECT_NEAR(aipw_ate(s), collapsed_ate(s), 1e-10);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EmptyStratum);
    }
  }
}

TEST(AipwAte, EmptyCellIsAnError) {
  // x = 0 has no treated unit, so Q(0, 1) is needed and missing.
  EXPECT_EQ(kind_of([] { aipw_ate(ObsSample({{1, 0, 0}, {1, 1, 1}, {0, 0, 1}})); }),
            ErrorKind::EmptyStratum);
}

TEST(AipwOverlap, HomogeneousEffectGivesOne) {
  EXPECT_DOUBLE_EQ(aipw_overlap(ObsSample({{1, 1, 1}, {0, 0, 1}, {1, 1, 1}, {0, 0, 1}})), 1.0);
}

TEST(AipwOverlap, ConstantOutcomeGivesZero) {
  EXPECT_NEAR(aipw_overlap(ObsSample({{3, 1, 1}, {3, 0, 1}, {3, 1, 0}, {3, 0, 0}})), 0.0, 1e-15);
}

TEST(AipwOverlap, HandGoldens) {
  EXPECT_NEAR(aipw_overlap(hand::obs_grid()), goldens::aipw_overlap_grid, 1e-10);
  EXPECT_NEAR(aipw_overlap(hand::obs_uneven()), goldens::aipw_overlap_uneven, 1e-10);
}

TEST(AipwOverlap, MatchesCollapsedForm) {
  Rng rng(22);
  for (int rep = 0; rep < 100; ++rep) {
    const ObsSample s(random_obs(rng, 40 + rep));
    try {
      EXPECT_NEAR(aipw_overlap(s), collapsed_overlap(s), 1e-10);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EmptyStratum);
    }
  }
}

TEST(AipwOverlap, StratumWithoutOverlapCarriesNoWeight) {
  // x = 0 is all control: p(1|0) = 0, so Q(0, 1) is never needed.
  const ObsSample s({{0.2, 0, 0}, {0.4, 0, 0}, {2, 1, 1}, {0.5, 0, 1}, {3, 1, 1}});
  EXPECT_NEAR(aipw_overlap(s), 2.5 - 0.5, 1e-12);
  EXPECT_EQ(kind_of([&] { aipw_ate(s); }), ErrorKind::EmptyStratum);
}

TEST(AipwOverlap, NoOverlapAnywhere) {
  EXPECT_EQ(kind_of([] { aipw_overlap(ObsSample({{1, 1, 1}, {0, 0, 0}})); }),
            ErrorKind::ZeroOverlapDenominator);
}

TEST(IvRatio, OutcomeEqualsTreatment) {
  const IvSample s({{1, 1, 0.5}, {-2, -2, -1}, {0.3, 0.3, 2}, {4, 4, 0.1}, {1, 1, std::nullopt}});
  EXPECT_NEAR(iv_ratio(s), 1.0, 1e-14);
}

TEST(IvRatio, ExactProportionality) {
  EXPECT_DOUBLE_EQ(iv_ratio(IvSample({{2, 1, 1}, {-2, -1, -1}, {4, 2, 2}, {-4, -2, -2}})), 2.0);
}

TEST(IvRatio, HandGolden) {
  EXPECT_NEAR(iv_ratio(hand::iv_confounded()), goldens::iv_ratio_confounded, 1e-10);
}

TEST(IvRatio, UsesOnlyCompleteRecords) {
  // The incomplete records would change the answer if they were used.
  auto with_extra = hand::iv_confounded().records();
  with_extra.push_back({50, -3, std::nullopt});
  with_extra.push_back({-20, 9, std::nullopt});
  EXPECT_NEAR(iv_ratio(IvSample(with_extra)), goldens::iv_ratio_confounded, 1e-10);
}

TEST(IvRatio, DegenerateInstrument) {
  EXPECT_EQ(kind_of([] { iv_ratio(IvSample({{1, 1, 2}, {2, 3, 2}})); }),
            ErrorKind::DegenerateInstrument);
  EXPECT_EQ(kind_of([] { iv_ratio(IvSample({{1, 1, std::nullopt}})); }),
            ErrorKind::DegenerateInstrument);
}

TEST(OlsSlope, InterceptAbsorbed) {
  EXPECT_NEAR(ols_slope(IvSample({{4, 1, 0}, {7, 2, std::nullopt}, {-5, -2, 1}, {1, 0, 2}})), 3.0,
              1e-14);
}

TEST(OlsSlope, ConstantOutcome) {
  EXPECT_EQ(ols_slope(IvSample({{2, 1, 0}, {2, 5, 1}, {2, -1, std::nullopt}})), 0.0);
}

TEST(OlsSlope, HandGolden) {
  EXPECT_NEAR(ols_slope(hand::ols_mixed()), goldens::ols_slope_mixed, 1e-10);
}

TEST(OlsSlope, DegenerateTreatment) {
  EXPECT_EQ(kind_of([] { ols_slope(IvSample({{1, 2, 0}, {3, 2, 1}})); }),
            ErrorKind::DegenerateTreatment);
}

TEST(DiffInMeans, TwoRecords) {
  EXPECT_EQ(diff_in_means(ProxySample({{2, 1, 0}, {1, 0, 0}})), 1.0);
}

TEST(DiffInMeans, ConstantOutcome) {
  EXPECT_EQ(diff_in_means(ProxySample({{5, 1, 0}, {5, 0, 1}, {5, 1, 1}})), 0.0);
}

TEST(DiffInMeans, EmptyArm) {
  EXPECT_EQ(kind_of([] { diff_in_means(ProxySample({{1, 1, 0}, {2, 1, 1}})); }),
            ErrorKind::EmptyArm);
}

TEST(DiffInMeans, NearTrueEffectOnSimulatedProxyData) {
  const auto g = gen_proxy(ScenarioConfig::standard(Scenario::Proxy, 0, 7));
  double s[2] = {0, 0}, ss[2] = {0, 0};
  int c[2] = {0, 0};
  for (const auto& r : g.sample.records()) {
    s[r.t] += r.y;
    ss[r.t] += r.y * r.y;
    ++c[r.t];
  }
  double se2 = 0;
  for (int t = 0; t < 2; ++t) {
    const double m = s[t] / c[t];
    se2 += (ss[t] / c[t] - m * m) / (c[t] - 1);
  }
  EXPECT_NEAR(diff_in_means(g.sample), 0.5 * (normal_cdf(1) - 0.5), 3 * std::sqrt(se2));
}

TEST(Product, ProxyEqualsTreatmentEqualsOutcome) {
  EXPECT_EQ(product_estimator(ProxySample({{1, 1, 1}, {0, 0, 0}, {1, 1, 1}})), 1.0);
}

TEST(Product, ProxyIndependentOfTreatment) {
  EXPECT_EQ(product_estimator(ProxySample({{1, 1, 1}, {0, 1, 0}, {3, 0, 1}, {0.5, 0, 0}})), 0.0);
}

TEST(Product, HandGolden) {
  EXPECT_NEAR(product_estimator(hand::proxy()), goldens::product_proxy, 1e-10);
}

TEST(Product, EmptyGroups) {
  EXPECT_EQ(kind_of([] { product_estimator(ProxySample({{1, 1, 1}, {0, 1, 0}})); }),
            ErrorKind::EmptyArm);
  EXPECT_EQ(kind_of([] { product_estimator(ProxySample({{1, 1, 1}, {0, 0, 1}})); }),
            ErrorKind::EmptyProxyGroup);
}

TEST(Samples, RejectInvalidRecords) {
  EXPECT_EQ(kind_of([] { ObsSample({{1, 2, 0}}); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { ObsSample(std::vector<ObsRecord>{}); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { ProxySample({{NAN, 1, 0}}); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { IvSample({{1, INFINITY, 0}}); }), ErrorKind::InvalidInput);
}

TEST(Samples, IvRecordsHeldCompleteFirst) {
  const IvSample s({{1, 1, std::nullopt}, {2, 2, 0.5}, {3, 3, std::nullopt}, {4, 4, 1.5}});
  EXPECT_EQ(s.n_complete(), 2u);
  EXPECT_EQ(s[0].y, 2);
  EXPECT_EQ(s[1].y, 4);
  EXPECT_EQ(s[2].y, 1);
  EXPECT_EQ(s.resample_blocks(), (std::vector<std::size_t>{2, 2}));
}
