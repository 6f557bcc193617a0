#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tms/error.hpp"

namespace tms {

enum class Scenario { Observational, IvFusion, Proxy };

constexpr std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Observational: return "obs";
    case Scenario::IvFusion: return "iv";
    case Scenario::Proxy: return "proxy";
  }
  return "?";
}

inline std::optional<Scenario> parse_scenario(std::string_view name) {
  if (name == "obs") return Scenario::Observational;
  if (name == "iv") return Scenario::IvFusion;
  if (name == "proxy") return Scenario::Proxy;
  return std::nullopt;
}

/// Outcome, binary treatment and binary covariate.
struct ObsRecord {
  double y = 0;
  int t = 0;
  int x = 0;
};

/// Outcome, continuous treatment and an instrument that may be unobserved.
struct IvRecord {
  double y = 0;
  double t = 0;
  std::optional<double> i;
};

/// Outcome, binary treatment and binary proxy (surrogate) outcome.
struct ProxyRecord {
  double y = 0;
  int t = 0;
  int p = 0;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidInput, what);
}

inline bool is_binary(int v) { return v == 0 || v == 1; }

template <class Record>
std::vector<Record> gather(const std::vector<Record>& src, std::span<const std::size_t> idx) {
  std::vector<Record> out;
  out.reserve(idx.size());
  for (std::size_t k : idx) out.push_back(src[k]);
  return out;
}

}  // namespace detail

// The three sample types share one shape so resampling and fold logic can be
// written once:
//   subset(idx)        rows idx in order (IvSample re-sorts complete-first)
//   resample_blocks()  contiguous blocks resampled independently
//   fold_stratum(i)    label balanced across cross-validation folds

class ObsSample {
 public:
  static constexpr Scenario scenario = Scenario::Observational;
  using Record = ObsRecord;

  explicit ObsSample(std::vector<ObsRecord> records) : records_(std::move(records)) {
    detail::require(!records_.empty(), "observational sample is empty");
    for (const auto& r : records_) {
      detail::require(detail::is_binary(r.t) && detail::is_binary(r.x),
                      "observational t and x must be 0 or 1");
      detail::require(std::isfinite(r.y), "observational y must be finite");
    }
  }

  std::size_t size() const { return records_.size(); }
  const std::vector<ObsRecord>& records() const { return records_; }
  const ObsRecord& operator[](std::size_t k) const { return records_[k]; }

  ObsSample subset(std::span<const std::size_t> idx) const {
    return ObsSample(detail::gather(records_, idx), Trusted{});
  }
  std::vector<std::size_t> resample_blocks() const { return {records_.size()}; }
  // (x, t) cell, so that held-out folds keep every treatment cell populated.
  std::size_t fold_stratum(std::size_t k) const {
    return static_cast<std::size_t>(2 * records_[k].x + records_[k].t);
  }

 private:
  struct Trusted {};
  ObsSample(std::vector<ObsRecord> records, Trusted) : records_(std::move(records)) {
    detail::require(!records_.empty(), "observational sample is empty");
  }
  std::vector<ObsRecord> records_;
};

/// Records are held complete-first: the first n_complete() carry an instrument.
class IvSample {
 public:
  static constexpr Scenario scenario = Scenario::IvFusion;
  using Record = IvRecord;

  explicit IvSample(std::vector<IvRecord> records) : records_(std::move(records)) {
    detail::require(!records_.empty(), "IV sample is empty");
    for (const auto& r : records_) {
      detail::require(std::isfinite(r.y) && std::isfinite(r.t), "IV y and t must be finite");
      detail::require(!r.i || std::isfinite(*r.i), "IV instrument must be finite when present");
    }
    order_complete_first();
  }

  std::size_t size() const { return records_.size(); }
  std::size_t n_complete() const { return n_complete_; }
  std::size_t n_incomplete() const { return records_.size() - n_complete_; }
  const std::vector<IvRecord>& records() const { return records_; }
  const IvRecord& operator[](std::size_t k) const { return records_[k]; }

  IvSample subset(std::span<const std::size_t> idx) const {
    return IvSample(detail::gather(records_, idx), Trusted{});
  }
  std::vector<std::size_t> resample_blocks() const { return {n_complete_, n_incomplete()}; }
  std::size_t fold_stratum(std::size_t k) const { return records_[k].i ? 0 : 1; }

 private:
  struct Trusted {};
  IvSample(std::vector<IvRecord> records, Trusted) : records_(std::move(records)) {
    detail::require(!records_.empty(), "IV sample is empty");
    order_complete_first();
  }
  void order_complete_first() {
    auto mid = std::stable_partition(records_.begin(), records_.end(),
                                     [](const IvRecord& r) { return r.i.has_value(); });
    n_complete_ = static_cast<std::size_t>(mid - records_.begin());
  }

  std::vector<IvRecord> records_;
  std::size_t n_complete_ = 0;
};

class ProxySample {
 public:
  static constexpr Scenario scenario = Scenario::Proxy;
  using Record = ProxyRecord;

  explicit ProxySample(std::vector<ProxyRecord> records) : records_(std::move(records)) {
    detail::require(!records_.empty(), "proxy sample is empty");
    for (const auto& r : records_) {
      detail::require(detail::is_binary(r.t) && detail::is_binary(r.p),
                      "proxy t and p must be 0 or 1");
      detail::require(std::isfinite(r.y), "proxy y must be finite");
    }
  }

  std::size_t size() const { return records_.size(); }
  const std::vector<ProxyRecord>& records() const { return records_; }
  const ProxyRecord& operator[](std::size_t k) const { return records_[k]; }

  ProxySample subset(std::span<const std::size_t> idx) const {
    return ProxySample(detail::gather(records_, idx), Trusted{});
  }
  std::vector<std::size_t> resample_blocks() const { return {records_.size()}; }
  std::size_t fold_stratum(std::size_t) const { return 0; }

 private:
  struct Trusted {};
  ProxySample(std::vector<ProxyRecord> records, Trusted) : records_(std::move(records)) {
    detail::require(!records_.empty(), "proxy sample is empty");
  }
  std::vector<ProxyRecord> records_;
};

template <class S>
concept ScenarioData = requires(const S& s, std::span<const std::size_t> idx, std::size_t k) {
  { s.size() } -> std::convertible_to<std::size_t>;
  { s.subset(idx) } -> std::same_as<S>;
  { s.resample_blocks() } -> std::same_as<std::vector<std::size_t>>;
  { s.fold_stratum(k) } -> std::convertible_to<std::size_t>;
};

using ScenarioSample = std::variant<ObsSample, IvSample, ProxySample>;

inline Scenario scenario_of(const ScenarioSample& s) {
  return std::visit([](const auto& v) { return std::decay_t<decltype(v)>::scenario; }, s);
}

}  // namespace tms
