#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tms/error.hpp"
#include "tms/format.hpp"

namespace tms {

/// Ordered candidate estimators; index 0 is the baseline, the estimator
/// assumed asymptotically unbiased for the target.
///
/// Every candidate is a fixed linear combination of a few base estimators.
/// Evaluating the whole family on a sample runs each base once, which is what
/// makes replicate sweeps over an 11-point shrinkage grid cost two estimator
/// calls rather than eleven. Terms with a zero coefficient are skipped, so the
/// baseline of a shrinkage family never touches the alternative estimator.
template <class Sample>
class CandidateFamily {
 public:
  using SampleType = Sample;
  using Estimator = std::function<double(const Sample&)>;

  /// One candidate per estimator, evaluated independently.
  static CandidateFamily from_estimators(std::vector<std::string> labels,
                                         std::vector<Estimator> estimators) {
    if (labels.size() != estimators.size() || estimators.empty()) {
      throw Error(ErrorKind::InvalidInput, "family needs one label per estimator");
    }
    std::vector<std::vector<double>> mix(estimators.size(),
                                         std::vector<double>(estimators.size(), 0.0));
    for (std::size_t g = 0; g < mix.size(); ++g) mix[g][g] = 1.0;
    return CandidateFamily(std::move(labels), std::move(estimators), std::move(mix));
  }

  /// Candidate g = sum_j mix[g][j] * base_j(sample).
  static CandidateFamily from_linear(std::vector<std::string> labels, std::vector<Estimator> bases,
                                     std::vector<std::vector<double>> mix) {
    if (labels.size() != mix.size() || mix.empty() || bases.empty()) {
      throw Error(ErrorKind::InvalidInput, "family needs one label per candidate");
    }
    for (const auto& row : mix) {
      if (row.size() != bases.size()) {
        throw Error(ErrorKind::InvalidInput, "mixing row length must match base count");
      }
    }
    return CandidateFamily(std::move(labels), std::move(bases), std::move(mix));
  }

  std::size_t size() const { return labels_.size(); }
  static constexpr std::size_t baseline_index() { return 0; }
  const std::vector<std::string>& labels() const { return labels_; }

  void evaluate_into(const Sample& sample, std::span<double> out) const {
    std::vector<double> base(bases_.size(), 0.0);
    for (std::size_t j = 0; j < bases_.size(); ++j) {
      if (used_[j]) base[j] = bases_[j](sample);
    }
    for (std::size_t g = 0; g < mix_.size(); ++g) out[g] = combine(g, base);
  }

  std::vector<double> evaluate(const Sample& sample) const {
    std::vector<double> out(size());
    evaluate_into(sample, out);
    return out;
  }

  double evaluate_one(const Sample& sample, std::size_t g) const {
    std::vector<double> base(bases_.size(), 0.0);
    for (std::size_t j = 0; j < bases_.size(); ++j) {
      if (mix_[g][j] != 0.0) base[j] = bases_[j](sample);
    }
    return combine(g, base);
  }

 private:
  CandidateFamily(std::vector<std::string> labels, std::vector<Estimator> bases,
                  std::vector<std::vector<double>> mix)
      : labels_(std::move(labels)), bases_(std::move(bases)), mix_(std::move(mix)) {
    used_.assign(bases_.size(), false);
    for (const auto& row : mix_) {
      for (std::size_t j = 0; j < row.size(); ++j) used_[j] = used_[j] || row[j] != 0.0;
    }
  }

  double combine(std::size_t g, const std::vector<double>& base) const {
    double v = 0.0;
    bool first = true;
    for (std::size_t j = 0; j < base.size(); ++j) {
      const double c = mix_[g][j];
      if (c == 0.0) continue;
      v = first ? c * base[j] : v + c * base[j];
      first = false;
    }
    return v;
  }

  std::vector<std::string> labels_;
  std::vector<Estimator> bases_;
  std::vector<std::vector<double>> mix_;
  std::vector<bool> used_;
};

/// Convex combinations (1 - w) * a + w * b over an ascending weight grid that
/// starts at w = 0 (the baseline a). Labels default to "w=<weight>".
template <class Sample>
CandidateFamily<Sample> shrinkage_family(typename CandidateFamily<Sample>::Estimator a,
                                         typename CandidateFamily<Sample>::Estimator b,
                                         const std::vector<double>& weights,
                                         std::vector<std::string> labels = {}) {
  if (weights.empty() || weights.front() != 0.0) {
    throw Error(ErrorKind::MissingBaseline, "weight grid must start at w = 0");
  }
  for (std::size_t g = 0; g < weights.size(); ++g) {
    if (!(weights[g] >= 0.0 && weights[g] <= 1.0)) {
      throw Error(ErrorKind::InvalidInput, "shrinkage weights must lie in [0, 1]");
    }
    if (g > 0 && !(weights[g] > weights[g - 1])) {
      throw Error(ErrorKind::InvalidInput, "shrinkage weights must be strictly ascending");
    }
  }
  if (labels.empty()) {
    for (double w : weights) labels.push_back("w=" + format_double(w));
  }
  std::vector<std::vector<double>> mix;
  for (double w : weights) mix.push_back({1.0 - w, w});
  return CandidateFamily<Sample>::from_linear(std::move(labels), {std::move(a), std::move(b)},
                                              std::move(mix));
}

/// 0, 0.1, ..., 1.0 built from integer tenths so each weight is the nearest
/// double to k/10.
inline std::vector<double> tenths_grid() {
  std::vector<double> w;
  for (int k = 0; k <= 10; ++k) w.push_back(k / 10.0);
  return w;
}

}  // namespace tms
