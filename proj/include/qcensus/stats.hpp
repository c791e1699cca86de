#pragma once

// Mergeable streaming statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace qcensus {

/// Single-pass mean / M2 (Welford) with min and max.
class RunningStat {
 public:
  void push(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }

  // Parallel combination, written symmetrically so merge(a,b) == merge(b,a).
  void merge(const RunningStat& o) {
    if (o.count_ == 0) return;
    if (count_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(o.count_);
    const double n = na + nb;
    const double delta = o.mean_ - mean_;
    mean_ = (na * mean_ + nb * o.mean_) / n;
    m2_ = m2_ + o.m2_ + delta * delta * (na * nb / n);
    count_ += o.count_;
    min_ = std::min(min_, o.min_);
    max_ = std::max(max_, o.max_);
  }

  [[nodiscard]] std::uint64_t count() const { return count_; }
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double m2() const { return m2_; }
  [[nodiscard]] double min() const { return count_ ? min_ : 0.0; }
  [[nodiscard]] double max() const { return count_ ? max_ : 0.0; }
  [[nodiscard]] double variance() const {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  /// Sample standard deviation / sqrt(count); 0 below two observations.
  [[nodiscard]] double stderr_of_mean() const {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
};

struct FractionCounter {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;

  void record(bool hit) {
    ++trials;
    hits += hit ? 1u : 0u;
  }
  void merge(const FractionCounter& o) {
    hits += o.hits;
    trials += o.trials;
  }
  [[nodiscard]] double fraction() const {
    return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
  }
  /// Binomial standard error sqrt(p (1 - p) / n).
  [[nodiscard]] double stderr_of_fraction() const {
    if (trials == 0) return 0.0;
    const double p = fraction();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
};

/// Uniform bins on [0, 1] plus a separate exact-zero counter. Zeros never
/// enter a bin; the value 1 lands in the last bin.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(int bins) : counts_(static_cast<std::size_t>(bins), 0) {
    if (bins < 2) throw std::invalid_argument("Histogram: need at least 2 bins");
  }

  void observe(double x, bool is_zero) {
    if (is_zero) {
      ++zero_count_;
      return;
    }
    const auto bins = static_cast<double>(counts_.size());
    auto b = static_cast<std::ptrdiff_t>(std::floor(std::clamp(x, 0.0, 1.0) * bins));
    b = std::min<std::ptrdiff_t>(b, static_cast<std::ptrdiff_t>(counts_.size()) - 1);
    ++counts_[static_cast<std::size_t>(b)];
  }

  void merge(const Histogram& o) {
    if (counts_.empty()) {
      *this = o;
      return;
    }
    if (o.counts_.empty()) return;
    if (o.counts_.size() != counts_.size()) throw std::invalid_argument("Histogram: bin count mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    zero_count_ += o.zero_count_;
  }

  [[nodiscard]] int bins() const { return static_cast<int>(counts_.size()); }
  [[nodiscard]] const std::vector<std::uint64_t>& counts() const { return counts_; }
  [[nodiscard]] std::uint64_t zero_count() const { return zero_count_; }
  [[nodiscard]] std::uint64_t total() const {
    std::uint64_t t = zero_count_;
    for (auto c : counts_) t += c;
    return t;
  }
  [[nodiscard]] double bin_lo(int i) const { return static_cast<double>(i) / bins(); }
  [[nodiscard]] double bin_hi(int i) const { return static_cast<double>(i + 1) / bins(); }
  /// count / (total * width); with the zero mass these integrate to 1.
  [[nodiscard]] double density(int i) const {
    const std::uint64_t t = total();
    if (t == 0) return 0.0;
    return static_cast<double>(counts_[static_cast<std::size_t>(i)]) * bins() / static_cast<double>(t);
  }
  [[nodiscard]] double zero_mass() const {
    const std::uint64_t t = total();
    return t ? static_cast<double>(zero_count_) / static_cast<double>(t) : 0.0;
  }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t zero_count_ = 0;
};

/// Identifies a statistic: name, subset size, transpose size (0 = n/a).
struct StatKey {
  std::string statistic;
  int subset_size = 0;
  int transpose_size = 0;

  friend auto operator<=>(const StatKey& a, const StatKey& b) {
    return std::tie(a.subset_size, a.transpose_size, a.statistic) <=>
           std::tie(b.subset_size, b.transpose_size, b.statistic);
  }
  friend bool operator==(const StatKey&, const StatKey&) = default;
};

/// Keyed running statistics, fractions and histograms for one experiment.
/// A default-constructed accumulator (empty signature, no data) is the merge
/// identity.
class Accumulator {
 public:
  Accumulator() = default;
  explicit Accumulator(std::string signature) : signature_(std::move(signature)) {}

  [[nodiscard]] const std::string& signature() const { return signature_; }

  RunningStat& stat(const StatKey& k) { return stats_[k]; }
  FractionCounter& fraction(const StatKey& k) { return fractions_[k]; }
  Histogram& histogram(const std::string& measure, int bins) {
    auto it = histograms_.find(measure);
    if (it == histograms_.end()) it = histograms_.emplace(measure, Histogram(bins)).first;
    return it->second;
  }
  void count_state() { ++states_; }

  [[nodiscard]] const std::map<StatKey, RunningStat>& stats() const { return stats_; }
  [[nodiscard]] const std::map<StatKey, FractionCounter>& fractions() const { return fractions_; }
  [[nodiscard]] const std::map<std::string, Histogram>& histograms() const { return histograms_; }
  [[nodiscard]] std::uint64_t states() const { return states_; }

  [[nodiscard]] bool is_identity() const {
    return signature_.empty() && states_ == 0 && stats_.empty() && fractions_.empty() &&
           histograms_.empty();
  }

  void merge_from(const Accumulator& o) {
    if (o.is_identity()) return;
    if (is_identity()) {
      *this = o;
      return;
    }
    if (o.signature_ != signature_)
      throw std::invalid_argument("merge: accumulator signatures differ");
    states_ += o.states_;
    for (const auto& [k, v] : o.stats_) stats_[k].merge(v);
    for (const auto& [k, v] : o.fractions_) fractions_[k].merge(v);
    for (const auto& [k, v] : o.histograms_) histograms_[k].merge(v);
  }

 private:
  std::string signature_;
  std::uint64_t states_ = 0;
  std::map<StatKey, RunningStat> stats_;
  std::map<StatKey, FractionCounter> fractions_;
  std::map<std::string, Histogram> histograms_;
};

inline Accumulator merge(const Accumulator& a, const Accumulator& b) {
  Accumulator out = a;
  out.merge_from(b);
  return out;
}

}  // namespace qcensus
