#pragma once

// Nonparametric bootstrap over candidate families.
//
// Replicate b draws its resample from a stream keyed by (seed, b, attempt), so
// a replicate's row is the same no matter which worker computes it. A
// replicate whose estimators fail (an empty stratum after resampling, say) is
// redrawn with attempt + 1; after kMaxReplicateAttempts failures the whole
// call fails with ReplicateExhausted. Rows are never dropped.
//
// Samples with several resample blocks (IV: complete, incomplete) are
// resampled within each block so both sub-sample sizes stay fixed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tms/error.hpp"
#include "tms/family.hpp"
#include "tms/parallel.hpp"
#include "tms/rng.hpp"
#include "tms/sample.hpp"
#include "tms/selection.hpp"

namespace tms {

inline constexpr std::size_t kMaxReplicateAttempts = 100;

struct ResamplePlan {
  std::size_t replicates = 100;
  std::uint64_t seed = 0;
  /// When set, replicate b uses these row indices instead of a seeded draw.
  std::optional<std::vector<std::vector<std::size_t>>> explicit_indices;

  static ResamplePlan seeded(std::size_t replicates, std::uint64_t seed) {
    return ResamplePlan{replicates, seed, std::nullopt};
  }
  static ResamplePlan from_indices(std::vector<std::vector<std::size_t>> indices) {
    const std::size_t b = indices.size();
    return ResamplePlan{b, 0, std::move(indices)};
  }
};

struct ReplicateMatrix {
  std::size_t replicates = 0;
  std::size_t candidates = 0;
  std::vector<double> values;  // row-major, values[b * candidates + g]
  std::vector<std::string> labels;
  ResamplePlan plan;
  std::size_t redraws = 0;

  double at(std::size_t b, std::size_t g) const { return values[b * candidates + g]; }
  std::span<const double> row(std::size_t b) const {
    return {values.data() + b * candidates, candidates};
  }
  std::vector<double> column(std::size_t g) const {
    std::vector<double> col(replicates);
    for (std::size_t b = 0; b < replicates; ++b) col[b] = at(b, g);
    return col;
  }
};

struct ConfidenceInterval {
  double lower = 0;
  double upper = 0;
  double level = 0.95;

  bool contains(double v) const { return lower <= v && v <= upper; }
};

/// n indices drawn i.i.d. uniform on {0, ..., n-1}.
inline std::vector<std::size_t> draw_resample_indices(std::size_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorKind::InvalidInput, "cannot resample zero records");
  std::vector<std::size_t> idx(n);
  for (auto& k : idx) k = static_cast<std::size_t>(uniform_index(rng, n));
  return idx;
}

/// Resample within each contiguous block of the sample.
template <ScenarioData S>
std::vector<std::size_t> draw_block_resample(const S& sample, Rng& rng) {
  std::vector<std::size_t> idx;
  idx.reserve(sample.size());
  std::size_t offset = 0;
  for (std::size_t block : sample.resample_blocks()) {
    for (std::size_t k = 0; k < block; ++k) {
      idx.push_back(offset + static_cast<std::size_t>(uniform_index(rng, block)));
    }
    offset += block;
  }
  return idx;
}

namespace detail {

template <ScenarioData S>
void check_explicit(const S& sample, const std::vector<std::size_t>& idx) {
  if (idx.size() != sample.size()) {
    throw Error(ErrorKind::InvalidInput, "explicit resample must have one index per record");
  }
  std::size_t offset = 0, pos = 0;
  for (std::size_t block : sample.resample_blocks()) {
    for (std::size_t k = 0; k < block; ++k, ++pos) {
      if (idx[pos] < offset || idx[pos] >= offset + block) {
        throw Error(ErrorKind::InvalidInput, "explicit resample index leaves its block");
      }
    }
    offset += block;
  }
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Draws replicate b of `sample` and hands it to `fn`, redrawing on estimator
// failure. Returns the number of redraws used.
template <ScenarioData S, class Fn>
std::size_t with_replicate(const S& sample, const ResamplePlan& plan, std::size_t b, Fn&& fn) {
  if (plan.explicit_indices) {
    const auto& idx = (*plan.explicit_indices)[b];
    check_explicit(sample, idx);
    fn(sample.subset(idx));
    return 0;
  }
  for (std::size_t attempt = 0;; ++attempt) {
    Rng rng = make_stream(plan.seed, {b, attempt});
    const auto idx = draw_block_resample(sample, rng);
    try {
      fn(sample.subset(idx));
      return attempt;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ReplicateExhausted || attempt + 1 >= kMaxReplicateAttempts) {
        throw Error(ErrorKind::ReplicateExhausted,
                    "replicate " + std::to_string(b) + " failed " +
                        std::to_string(attempt + 1) + " draws; last: " + e.what());
      }
    }
  }
}

}  // namespace detail

/// B x (G+1) matrix of every candidate evaluated on every replicate.
template <ScenarioData S>
ReplicateMatrix replicate_estimates(const CandidateFamily<S>& family, const S& sample,
                                    const ResamplePlan& plan, std::size_t workers = 1) {
  if (plan.replicates < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 replicates");
  if (plan.explicit_indices && plan.explicit_indices->size() != plan.replicates) {
    throw Error(ErrorKind::InvalidInput, "explicit plan must list every replicate");
  }
  ReplicateMatrix m;
  m.replicates = plan.replicates;
  m.candidates = family.size();
  m.values.assign(m.replicates * m.candidates, 0.0);
  m.labels = family.labels();
  m.plan = plan;
  std::vector<std::size_t> redraws(plan.replicates, 0);
  parallel_for(plan.replicates, workers, [&](std::size_t b) {
    std::span<double> row(m.values.data() + b * m.candidates, m.candidates);
    redraws[b] = detail::with_replicate(sample, plan, b, [&](const S& resample) {
      family.evaluate_into(resample, row);
      if (!detail::all_finite(row)) {
        throw Error(ErrorKind::InvalidInput, "non-finite estimate on replicate");
      }
    });
  });
  for (std::size_t r : redraws) m.redraws += r;
  return m;
}

/// Sample variances (divisor B - 1) of each column and of each column's
/// difference from the baseline column.
inline VarianceEstimates variances_from_replicates(const ReplicateMatrix& m) {
  if (m.replicates < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 replicates");
  const double nb = static_cast<double>(m.replicates);
  VarianceEstimates v;
  v.source = VarianceSource::Bootstrap;
  v.var_diff.assign(m.candidates, 0.0);
  v.var_g.assign(m.candidates, 0.0);
  for (std::size_t g = 0; g < m.candidates; ++g) {
    double mean_g = 0, mean_d = 0;
    for (std::size_t b = 0; b < m.replicates; ++b) {
      mean_g += m.at(b, g);
      mean_d += m.at(b, 0) - m.at(b, g);
    }
    mean_g /= nb;
    mean_d /= nb;
    double ss_g = 0, ss_d = 0;
    for (std::size_t b = 0; b < m.replicates; ++b) {
      const double eg = m.at(b, g) - mean_g;
      const double ed = (m.at(b, 0) - m.at(b, g)) - mean_d;
      ss_g += eg * eg;
      ss_d += ed * ed;
    }
    v.var_g[g] = ss_g / (nb - 1);
    v.var_diff[g] = g == 0 ? 0.0 : ss_d / (nb - 1);
  }
  return v;
}

/// Order statistics at ranks ceil((1 - level)/2 * B) and ceil((1 + level)/2 * B),
/// clamped to [1, B]. No interpolation.
inline ConfidenceInterval percentile_interval(std::vector<double> values, double level) {
  if (values.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 values");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidInput, "level must be in (0,1)");
  const double nb = static_cast<double>(values.size());
  // 1e-9 absorbs representation error such as (1 - 0.9) / 2 * 40 = 1.9999999999999996.
  auto rank = [&](double q) {
    const double r = std::ceil(q * nb - 1e-9);
    return static_cast<std::size_t>(std::clamp(r, 1.0, nb));
  };
  std::sort(values.begin(), values.end());
  return ConfidenceInterval{values[rank((1.0 - level) / 2.0) - 1],
                            values[rank((1.0 + level) / 2.0) - 1], level};
}

/// Which variance enters the replicate criterion of the shortcut interval.
enum class ShortcutVarianceTerm {
  Candidate,  // Var(est_g), the same criterion as on the original sample
  AsPrinted,  // Var(est_0 - est_g) in the final slot
};

struct ShortcutResult {
  SelectionResult selection;
  ConfidenceInterval interval;
  ReplicateMatrix matrix;
};

/// Bootstraps the selection procedure while holding the variance terms fixed
/// at their values from one replicate matrix: each replicate then costs a
/// single family sweep.
template <ScenarioData S>
ShortcutResult select_ci_shortcut(const CandidateFamily<S>& family, const S& sample,
                                  const ResamplePlan& plan, double level,
                                  ShortcutVarianceTerm term = ShortcutVarianceTerm::Candidate,
                                  std::size_t workers = 1) {
  const auto est = family.evaluate(sample);
  ReplicateMatrix m = replicate_estimates(family, sample, plan, workers);
  const VarianceEstimates var = variances_from_replicates(m);
  SelectionResult sel = select(risk_table(family.labels(), est, var), Criterion::ModifiedRisk);

  const std::vector<double>& final_term =
      term == ShortcutVarianceTerm::Candidate ? var.var_g : var.var_diff;
  std::vector<double> theta_star(m.replicates);
  std::vector<double> crit(m.candidates), dsq(m.candidates);
  for (std::size_t b = 0; b < m.replicates; ++b) {
    const auto row = m.row(b);
    for (std::size_t g = 0; g < m.candidates; ++g) {
      const double d = row[g] - row[0];
      dsq[g] = d * d;
      crit[g] = std::max(dsq[g] - var.var_diff[g], 0.0) + final_term[g];
    }
    theta_star[b] = row[argmin_with_tiebreak(crit, dsq)];
  }
  auto ci = percentile_interval(std::move(theta_star), level);
  return ShortcutResult{std::move(sel), ci, std::move(m)};
}

/// Modified-risk selection with bootstrap variances, run end to end on one
/// sample. Returns the selected estimate.
template <ScenarioData S>
SelectionResult select_targeted(const CandidateFamily<S>& family, const S& sample,
                                const ResamplePlan& variance_plan, std::size_t workers = 1) {
  const auto est = family.evaluate(sample);
  const auto var = variances_from_replicates(replicate_estimates(family, sample, variance_plan, workers));
  return select(risk_table(family.labels(), est, var), Criterion::ModifiedRisk);
}

/// The full bootstrap of the selection procedure: every outer replicate
/// re-estimates its own variances with an inner bootstrap of size
/// inner_plan.replicates before selecting. Cost is B * B_inner family sweeps.
template <ScenarioData S>
ConfidenceInterval select_ci_full(const CandidateFamily<S>& family, const S& sample,
                                  const ResamplePlan& plan, const ResamplePlan& inner_plan,
                                  double level, std::size_t workers = 1) {
  if (plan.replicates < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 replicates");
  std::vector<double> theta_star(plan.replicates);
  parallel_for(plan.replicates, workers, [&](std::size_t b) {
    detail::with_replicate(sample, plan, b, [&](const S& resample) {
      const auto inner =
          ResamplePlan::seeded(inner_plan.replicates, derive_seed(inner_plan.seed, {b}));
      theta_star[b] = select_targeted(family, resample, inner).estimate;
    });
  });
  return percentile_interval(std::move(theta_star), level);
}

}  // namespace tms
