#pragma once

// Synthetic data for the three scenarios.
//
//   obs    X ~ Ber(.5), T | X ~ Ber(.7) if X = 1 else Ber(.05), eps ~ N(0,1)
//          Y(t) = X/2 + t + 3 t s^2 X + eps
//   iv     I, H, eps_T, eps_Y ~ N(0,1), T = I/2 + H + eps_T,
//          Y(t) = t - s^2 H + eps_Y; the instrument is hidden for the
//          second (incomplete) block of records
//   proxy  T ~ Ber(.5), eps_P, eps_Y ~ N(0,1), P(t) = 1{eps_P <= t},
//          Y(t) = P(t)/2 + s^2 t + eps_Y
//
// Each record consumes its variates in the order listed, from one stream
// keyed by the config seed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tms/rng.hpp"
#include "tms/sample.hpp"

namespace tms {

struct ScenarioConfig {
  Scenario scenario = Scenario::Observational;
  double s = 0;
  std::size_t n = 1000;  // obs and proxy
  std::size_t n_complete = 500;
  std::size_t n_incomplete = 500;
  std::uint64_t seed = 0;

  /// Sample sizes used throughout the simulation studies.
  static ScenarioConfig standard(Scenario scenario, double s, std::uint64_t seed) {
    ScenarioConfig c;
    c.scenario = scenario;
    c.s = s;
    c.seed = seed;
    c.n = scenario == Scenario::Proxy ? 200 : 1000;
    return c;
  }
};

/// A realized record together with both potential outcomes.
template <class Record>
struct Draw {
  Record record;
  double y0 = 0;
  double y1 = 0;
};

inline Draw<ObsRecord> draw_observational(Rng& rng, double s) {
  const int x = bernoulli(rng, 0.5) ? 1 : 0;
  const int t = bernoulli(rng, x == 1 ? 0.7 : 0.05) ? 1 : 0;
  const double eps = std_normal(rng);
  const double base = x / 2.0 + eps;
  const double y1 = base + 1.0 + 3.0 * s * s * x;
  return {{t == 1 ? y1 : base, t, x}, base, y1};
}

inline Draw<IvRecord> draw_iv(Rng& rng, double s) {
  const double i = std_normal(rng);
  const double h = std_normal(rng);
  const double eps_t = std_normal(rng);
  const double eps_y = std_normal(rng);
  const double t = i / 2.0 + h + eps_t;
  const double y0 = -s * s * h + eps_y;
  return {{t + y0, t, i}, y0, 1.0 + y0};
}

inline Draw<ProxyRecord> draw_proxy(Rng& rng, double s) {
  const int t = bernoulli(rng, 0.5) ? 1 : 0;
  const double eps_p = std_normal(rng);
  const double eps_y = std_normal(rng);
  const int p0 = eps_p <= 0.0 ? 1 : 0;
  const int p1 = eps_p <= 1.0 ? 1 : 0;
  const double y0 = 0.5 * p0 + eps_y;
  const double y1 = 0.5 * p1 + s * s + eps_y;
  return {{t == 1 ? y1 : y0, t, t == 1 ? p1 : p0}, y0, y1};
}

template <class S>
struct Generated {
  S sample;
  std::vector<std::pair<double, double>> potential;  // (Y(0), Y(1)) when kept
};

inline Generated<ObsSample> gen_observational(const ScenarioConfig& c, bool keep_potential = false) {
  Rng rng = make_stream(c.seed, {});
  std::vector<ObsRecord> rec;
  std::vector<std::pair<double, double>> po;
  rec.reserve(c.n);
  for (std::size_t k = 0; k < c.n; ++k) {
    const auto d = draw_observational(rng, c.s);
    rec.push_back(d.record);
    if (keep_potential) po.emplace_back(d.y0, d.y1);
  }
  return {ObsSample(std::move(rec)), std::move(po)};
}

inline Generated<IvSample> gen_iv(const ScenarioConfig& c, bool keep_potential = false) {
  Rng rng = make_stream(c.seed, {});
  std::vector<IvRecord> rec;
  std::vector<std::pair<double, double>> po;
  const std::size_t n = c.n_complete + c.n_incomplete;
  rec.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto d = draw_iv(rng, c.s);
    if (k >= c.n_complete) d.record.i.reset();
    rec.push_back(d.record);
    if (keep_potential) po.emplace_back(d.y0, d.y1);
  }
  return {IvSample(std::move(rec)), std::move(po)};
}

inline Generated<ProxySample> gen_proxy(const ScenarioConfig& c, bool keep_potential = false) {
  Rng rng = make_stream(c.seed, {});
  std::vector<ProxyRecord> rec;
  std::vector<std::pair<double, double>> po;
  rec.reserve(c.n);
  for (std::size_t k = 0; k < c.n; ++k) {
    const auto d = draw_proxy(rng, c.s);
    rec.push_back(d.record);
    if (keep_potential) po.emplace_back(d.y0, d.y1);
  }
  return {ProxySample(std::move(rec)), std::move(po)};
}

inline ScenarioSample generate(const ScenarioConfig& c) {
  switch (c.scenario) {
    case Scenario::Observational: return gen_observational(c).sample;
    case Scenario::IvFusion: return gen_iv(c).sample;
    case Scenario::Proxy: return gen_proxy(c).sample;
  }
  throw Error(ErrorKind::InvalidInput, "unknown scenario");
}

struct TrueEffect {
  double theta0 = 0;
};

/// E[Y(1) - Y(0)] under each data generating process.
inline TrueEffect true_effect(Scenario scenario, double s) {
  switch (scenario) {
    case Scenario::Observational: return {1.0 + 1.5 * s * s};
    case Scenario::IvFusion: return {1.0};
    case Scenario::Proxy: return {0.5 * (normal_cdf(1.0) - 0.5) + s * s};
  }
  throw Error(ErrorKind::InvalidInput, "unknown scenario");
}

}  // namespace tms
