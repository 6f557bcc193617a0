#pragma once

// Risk criteria and the selection rule.
//
//   raw      (est_g - est_0)^2 - Var(est_g - est_0) + Var(est_g)
//   modified max((est_g - est_0)^2 - Var(est_g - est_0), 0) + Var(est_g)
//   cv       mean over folds of (est_g(train_k) - est_0(heldout_k))^2
//
// Selection takes the argmin of one criterion column. Exact ties go to the
// smallest squared gap to the baseline, then to the smallest index. Ties are
// compared with ==; criterion values are noisy, so there is no epsilon.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tms/error.hpp"
#include "tms/family.hpp"
#include "tms/rng.hpp"
#include "tms/sample.hpp"

namespace tms {

inline double raw_risk(double diff_sq, double var_diff, double var_g) {
  return diff_sq - var_diff + var_g;
}

inline double modified_risk(double diff_sq, double var_diff, double var_g) {
  return std::max(diff_sq - var_diff, 0.0) + var_g;
}

enum class VarianceSource { Bootstrap, Injected };

/// var_diff[g] estimates Var(est_g - est_0); var_g[g] estimates Var(est_g).
struct VarianceEstimates {
  std::vector<double> var_diff;
  std::vector<double> var_g;
  VarianceSource source = VarianceSource::Injected;

  std::size_t size() const { return var_g.size(); }

  void validate() const {
    if (var_diff.size() != var_g.size() || var_g.empty()) {
      throw Error(ErrorKind::InvalidInput, "variance vectors must be nonempty and equal length");
    }
    if (var_diff[0] != 0.0) throw Error(ErrorKind::InvalidInput, "var_diff[0] must be 0");
    for (std::size_t g = 0; g < var_g.size(); ++g) {
      if (!(std::isfinite(var_diff[g]) && var_diff[g] >= 0 && std::isfinite(var_g[g]) &&
            var_g[g] >= 0)) {
        throw Error(ErrorKind::InvalidInput, "variances must be finite and nonnegative");
      }
    }
  }
};

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // fold index per record

  std::vector<std::size_t> held_out(std::size_t fold) const {
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < assignment.size(); ++r) {
      if (assignment[r] == fold) idx.push_back(r);
    }
    return idx;
  }

  std::vector<std::size_t> training(std::size_t fold) const {
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < assignment.size(); ++r) {
      if (assignment[r] != fold) idx.push_back(r);
    }
    return idx;
  }

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t f : assignment) ++sizes[f];
    return sizes;
  }
};

inline void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

/// Random balanced K-fold assignment. Records are shuffled within each fold
/// stratum, strata are laid end to end and dealt round-robin, and the fold
/// labels are then permuted at random. Fold sizes therefore differ by at most
/// one both overall and within every stratum. IV samples additionally need at
/// least k records in each nonempty stratum so every fold sees both kinds.
template <ScenarioData S>
FoldPlan make_folds(const S& sample, std::size_t k, Rng& rng) {
  const std::size_t n = sample.size();
  if (k < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 folds");
  if (n < k) {
    throw Error(ErrorKind::TooFewRecords,
                std::to_string(n) + " records cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::vector<std::size_t>> strata;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t s = sample.fold_stratum(r);
    if (s >= strata.size()) strata.resize(s + 1);
    strata[s].push_back(r);
  }
  if constexpr (std::same_as<S, IvSample>) {
    for (const auto& st : strata) {
      if (!st.empty() && st.size() < k) {
        throw Error(ErrorKind::TooFewRecords, "an IV stratum has fewer records than folds");
      }
    }
  }
  FoldPlan plan{k, std::vector<std::size_t>(n, 0)};
  std::size_t slot = 0;
  for (auto& st : strata) {
    shuffle_indices(st, rng);
    for (std::size_t r : st) plan.assignment[r] = slot++ % k;
  }
  std::vector<std::size_t> relabel(k);
  std::iota(relabel.begin(), relabel.end(), std::size_t{0});
  shuffle_indices(relabel, rng);
  for (auto& f : plan.assignment) f = relabel[f];
  return plan;
}

/// Cross-validation criterion for every candidate at once: candidates fit on
/// the training part, the baseline on the held-out fold. Folds are visited in
/// index order so the mean is reproducible bit for bit.
template <ScenarioData S>
std::vector<double> cv_risks(const CandidateFamily<S>& family, const S& sample,
                             const FoldPlan& folds) {
  if (folds.assignment.size() != sample.size()) {
    throw Error(ErrorKind::InvalidInput, "fold plan does not match sample size");
  }
  std::vector<double> acc(family.size(), 0.0);
  std::vector<double> train_est(family.size());
  for (std::size_t f = 0; f < folds.k; ++f) {
    const auto train_idx = folds.training(f);
    const auto held_idx = folds.held_out(f);
    try {
      family.evaluate_into(sample.subset(train_idx), train_est);
      const double held = family.evaluate_one(sample.subset(held_idx), 0);
      for (std::size_t g = 0; g < family.size(); ++g) {
        const double d = train_est[g] - held;
        acc[g] += d * d;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.what());
    }
  }
  for (auto& a : acc) a /= static_cast<double>(folds.k);
  return acc;
}

template <ScenarioData S>
double cv_risk(const CandidateFamily<S>& family, std::size_t g, const S& sample,
               const FoldPlan& folds) {
  if (g >= family.size()) throw Error(ErrorKind::InvalidInput, "candidate index out of range");
  double acc = 0.0;
  for (std::size_t f = 0; f < folds.k; ++f) {
    try {
      const double train = family.evaluate_one(sample.subset(folds.training(f)), g);
      const double held = family.evaluate_one(sample.subset(folds.held_out(f)), 0);
      acc += (train - held) * (train - held);
    } catch (const Error& e) {
      throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.what());
    }
  }
  return acc / static_cast<double>(folds.k);
}

struct RiskRow {
  std::string label;
  double estimate = 0;
  double diff_sq = 0;
  double var_diff = 0;
  double var_g = 0;
  double raw_risk = 0;
  double mod_risk = 0;
  std::optional<double> cv_risk;
};

struct RiskTable {
  std::vector<RiskRow> rows;

  std::size_t size() const { return rows.size(); }
  bool has_cv() const {
    return !rows.empty() &&
           std::all_of(rows.begin(), rows.end(), [](const RiskRow& r) { return r.cv_risk; });
  }
};

/// Assembles the table from candidate estimates already computed on the
/// sample. estimates[0] is the baseline.
inline RiskTable risk_table(const std::vector<std::string>& labels,
                            std::span<const double> estimates, const VarianceEstimates& variances,
                            std::optional<std::span<const double>> cv = std::nullopt) {
  variances.validate();
  if (estimates.size() != variances.size() || labels.size() != estimates.size() ||
      (cv && cv->size() != estimates.size())) {
    throw Error(ErrorKind::InvalidInput, "estimates, labels and variances disagree in length");
  }
  RiskTable table;
  for (std::size_t g = 0; g < estimates.size(); ++g) {
    RiskRow row;
    row.label = labels[g];
    row.estimate = estimates[g];
    const double d = estimates[g] - estimates[0];
    row.diff_sq = d * d;
    row.var_diff = variances.var_diff[g];
    row.var_g = variances.var_g[g];
    row.raw_risk = raw_risk(row.diff_sq, row.var_diff, row.var_g);
    row.mod_risk = modified_risk(row.diff_sq, row.var_diff, row.var_g);
    if (cv) row.cv_risk = (*cv)[g];
    table.rows.push_back(std::move(row));
  }
  return table;
}

template <ScenarioData S>
RiskTable evaluate_criteria(const CandidateFamily<S>& family, const S& sample,
                            const VarianceEstimates& variances,
                            const std::optional<FoldPlan>& folds = std::nullopt) {
  if (variances.size() != family.size()) {
    throw Error(ErrorKind::InvalidInput, "variance estimates do not match family size");
  }
  const auto est = family.evaluate(sample);
  if (folds) {
    const auto cv = cv_risks(family, sample, *folds);
    return risk_table(family.labels(), est, variances, std::span<const double>(cv));
  }
  return risk_table(family.labels(), est, variances);
}

enum class Criterion { ModifiedRisk, CvRisk };

/// argmin of `criterion`; exact ties broken by smallest diff_sq, then index.
inline std::size_t argmin_with_tiebreak(std::span<const double> criterion,
                                        std::span<const double> diff_sq) {
  std::size_t best = 0;
  for (std::size_t g = 1; g < criterion.size(); ++g) {
    if (criterion[g] < criterion[best] ||
        (criterion[g] == criterion[best] && diff_sq[g] < diff_sq[best])) {
      best = g;
    }
  }
  return best;
}

struct SelectionResult {
  std::size_t selected_g = 0;
  std::string selected_label;
  double estimate = 0;
  Criterion criterion = Criterion::ModifiedRisk;
  RiskTable table;
};

inline SelectionResult select(const RiskTable& table, Criterion criterion) {
  if (table.rows.empty()) throw Error(ErrorKind::InvalidInput, "empty risk table");
  if (criterion == Criterion::CvRisk && !table.has_cv()) {
    throw Error(ErrorKind::InvalidInput, "cv_risk column not populated");
  }
  std::vector<double> crit, dsq;
  for (const auto& r : table.rows) {
    crit.push_back(criterion == Criterion::CvRisk ? *r.cv_risk : r.mod_risk);
    dsq.push_back(r.diff_sq);
  }
  const std::size_t g = argmin_with_tiebreak(crit, dsq);
  return SelectionResult{g, table.rows[g].label, table.rows[g].estimate, criterion, table};
}

}  // namespace tms
