#pragma once

// Point estimators for the three scenarios.
//
// Observational estimators use empirical (saturated) propensities p(t | x)
// and outcome means Q(x, t) for a binary covariate. No clipping or trimming:
// an estimate that needs an empty cell is undefined and raises EmptyStratum.
//
// Inside the AIPW sums, p(T_i | X_i) is the empirical probability of unit i's
// own arm. With saturated empirical propensities this reading and the
// alternative one (always p(a | X_i)) are algebraically identical, both
// reducing to sum_x n_x/n * Q(x, a); the tests pin the value either way.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "tms/error.hpp"
#include "tms/sample.hpp"

namespace tms {

/// Cell counts, propensities and outcome means for binary (x, t).
class StratumStats {
 public:
  explicit StratumStats(const ObsSample& sample) {
    for (const auto& r : sample.records()) {
      ++counts_[r.x][r.t];
      sums_[r.x][r.t] += r.y;
    }
    n_ = sample.size();
  }

  std::size_t n() const { return n_; }
  std::size_t count(int x, int t) const { return counts_[x][t]; }
  std::size_t count_x(int x) const { return counts_[x][0] + counts_[x][1]; }
  bool has_x(int x) const { return count_x(x) > 0; }
  bool has_cell(int x, int t) const { return counts_[x][t] > 0; }

  /// Empirical P(T = t | X = x).
  double p_hat(int x, int t) const {
    if (!has_x(x)) throw Error(ErrorKind::EmptyStratum, "no units with x=" + std::to_string(x));
    return static_cast<double>(counts_[x][t]) / static_cast<double>(count_x(x));
  }

  /// Empirical mean of Y given X = x, T = t.
  double q_hat(int x, int t) const {
    if (!has_cell(x, t)) {
      throw Error(ErrorKind::EmptyStratum,
                  "no units with x=" + std::to_string(x) + ", t=" + std::to_string(t));
    }
    return sums_[x][t] / static_cast<double>(counts_[x][t]);
  }

 private:
  std::array<std::array<std::size_t, 2>, 2> counts_{};
  std::array<std::array<double, 2>, 2> sums_{};
  std::size_t n_ = 0;
};

inline StratumStats empirical_strata(const ObsSample& sample) { return StratumStats(sample); }

namespace detail {

// Q(x, a) for every cell; NaN marks an empty cell so the sums can check
// lazily whether a term with a nonzero coefficient needs it.
struct CellTable {
  std::array<std::array<double, 2>, 2> p{};  // p(t | x), own-arm lookup
  std::array<std::array<double, 2>, 2> q{};

  explicit CellTable(const StratumStats& st) {
    for (int x = 0; x < 2; ++x) {
      for (int t = 0; t < 2; ++t) {
        p[x][t] = st.has_x(x) ? st.p_hat(x, t) : std::numeric_limits<double>::quiet_NaN();
        q[x][t] = st.has_cell(x, t) ? st.q_hat(x, t) : std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  double required_q(int x, int a) const {
    const double v = q[x][a];
    if (std::isnan(v)) {
      throw Error(ErrorKind::EmptyStratum, "Q(x=" + std::to_string(x) + ", t=" +
                                               std::to_string(a) + ") needed but cell is empty");
    }
    return v;
  }
};

}  // namespace detail

/// Augmented inverse probability weighting estimate of the ATE, mu_1 - mu_0.
inline double aipw_ate(const ObsSample& sample) {
  const detail::CellTable cells(empirical_strata(sample));
  std::array<double, 2> mu{0.0, 0.0};
  for (int a = 0; a < 2; ++a) {
    double sum = 0.0;
    for (const auto& r : sample.records()) {
      const double p_own = cells.p[r.x][r.t];
      if (!(p_own > 0.0)) throw Error(ErrorKind::ZeroPropensity, "p(T_i | X_i) is zero");
      const double treated = r.t == a ? 1.0 : 0.0;
      const double coef = (treated - p_own) / p_own;
      double term = r.y * treated / p_own;
      if (coef != 0.0) term -= coef * cells.required_q(r.x, a);
      sum += term;
    }
    mu[a] = sum / static_cast<double>(sample.size());
  }
  return mu[1] - mu[0];
}

/// Augmented estimate of the overlap-weighted effect,
/// (eta_1 - eta_0) / mean_i p(1 | X_i)(1 - p(1 | X_i)).
inline double aipw_overlap(const ObsSample& sample) {
  const detail::CellTable cells(empirical_strata(sample));
  const double n = static_cast<double>(sample.size());

  double denom = 0.0;
  for (const auto& r : sample.records()) {
    const double p1 = cells.p[r.x][1];
    denom += p1 * (1.0 - p1);
  }
  denom /= n;
  if (denom == 0.0) {
    throw Error(ErrorKind::ZeroOverlapDenominator, "every stratum has p(1 | x) in {0, 1}");
  }

  std::array<double, 2> eta{0.0, 0.0};
  for (int a = 0; a < 2; ++a) {
    double sum = 0.0;
    for (const auto& r : sample.records()) {
      const double p_own = cells.p[r.x][r.t];
      const double treated = r.t == a ? 1.0 : 0.0;
      const double coef = (treated - p_own) * (1.0 - p_own);
      double term = r.y * treated * (1.0 - p_own);
      if (coef != 0.0) term -= coef * cells.required_q(r.x, a);
      sum += term;
    }
    eta[a] = sum / n;
  }
  return (eta[1] - eta[0]) / denom;
}

/// Cov(I, Y) / Cov(I, T) over the instrument-bearing records.
inline double iv_ratio(const IvSample& sample) {
  const std::size_t m = sample.n_complete();
  if (m == 0) throw Error(ErrorKind::DegenerateInstrument, "no records carry an instrument");
  const auto& rec = sample.records();
  double mi = 0, mt = 0, my = 0;
  for (std::size_t k = 0; k < m; ++k) {
    mi += *rec[k].i;
    mt += rec[k].t;
    my += rec[k].y;
  }
  mi /= static_cast<double>(m);
  mt /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double c_iy = 0, c_it = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double di = *rec[k].i - mi;
    c_iy += di * (rec[k].y - my);
    c_it += di * (rec[k].t - mt);
  }
  c_iy /= static_cast<double>(m);
  c_it /= static_cast<double>(m);
  if (c_it == 0.0) throw Error(ErrorKind::DegenerateInstrument, "Cov(I, T) is zero");
  return c_iy / c_it;
}

/// Least-squares slope of Y on T (with intercept) over all records.
inline double ols_slope(const IvSample& sample) {
  const auto& rec = sample.records();
  const double n = static_cast<double>(rec.size());
  double mt = 0, my = 0;
  for (const auto& r : rec) {
    mt += r.t;
    my += r.y;
  }
  mt /= n;
  my /= n;
  double c_ty = 0, v_t = 0;
  for (const auto& r : rec) {
    const double dt = r.t - mt;
    c_ty += dt * (r.y - my);
    v_t += dt * dt;
  }
  c_ty /= n;
  v_t /= n;
  if (v_t == 0.0) throw Error(ErrorKind::DegenerateTreatment, "Var(T) is zero");
  return c_ty / v_t;
}

namespace detail {

// mean(value | group = 1) - mean(value | group = 0)
template <class Range, class Group, class Value>
double contrast(const Range& records, Group group, Value value, ErrorKind empty_kind,
                const char* what) {
  std::array<double, 2> sum{0.0, 0.0};
  std::array<std::size_t, 2> cnt{0, 0};
  for (const auto& r : records) {
    const int g = group(r);
    sum[g] += value(r);
    ++cnt[g];
  }
  if (cnt[0] == 0 || cnt[1] == 0) throw Error(empty_kind, what);
  return sum[1] / static_cast<double>(cnt[1]) - sum[0] / static_cast<double>(cnt[0]);
}

}  // namespace detail

template <class S>
  requires std::same_as<S, ProxySample> || std::same_as<S, ObsSample>
double diff_in_means(const S& sample) {
  return detail::contrast(
      sample.records(), [](const auto& r) { return r.t; },
      [](const auto& r) { return r.y; }, ErrorKind::EmptyArm, "a treatment arm is empty");
}

/// [mean(P | T=1) - mean(P | T=0)] * [mean(Y | P=1) - mean(Y | P=0)]
inline double product_estimator(const ProxySample& sample) {
  const auto& rec = sample.records();
  const double t_to_p = detail::contrast(
      rec, [](const ProxyRecord& r) { return r.t; },
      [](const ProxyRecord& r) { return static_cast<double>(r.p); }, ErrorKind::EmptyArm,
      "a treatment arm is empty");
  const double p_to_y = detail::contrast(
      rec, [](const ProxyRecord& r) { return r.p; }, [](const ProxyRecord& r) { return r.y; },
      ErrorKind::EmptyProxyGroup, "a proxy group is empty");
  return t_to_p * p_to_y;
}

}  // namespace tms
