#pragma once

// Monte Carlo experiments over Haar-random states: sampling, measure
// evaluation over qubit subsets, shard-parallel accumulation and reports.
//
// A run with S shards gives shard i the stream derive_stream(seed, i) and
// samples/S draws (the first samples % S shards take one extra). Shards are
// merged in index order, so results depend only on the configuration, never
// on how many threads executed the shards.

#include "qcensus/measures.hpp"
#include "qcensus/qstate.hpp"
#include "qcensus/sampler.hpp"
#include "qcensus/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qcensus {

enum class ExperimentKind { pairs, subsets, entropy, distribution };
enum class DistMeasure { tangle, concurrence, eof, three_tangle, pair_tangle };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::pairs: return "pairs";
    case ExperimentKind::subsets: return "subsets";
    case ExperimentKind::entropy: return "entropy";
    case ExperimentKind::distribution: return "dist";
  }
  return "?";
}

inline std::string to_string(DistMeasure m) {
  switch (m) {
    case DistMeasure::tangle: return "tangle";
    case DistMeasure::concurrence: return "concurrence";
    case DistMeasure::eof: return "eof";
    case DistMeasure::three_tangle: return "three_tangle";
    case DistMeasure::pair_tangle: return "pair_tangle";
  }
  return "?";
}

inline std::optional<DistMeasure> parse_measure(const std::string& s) {
  for (auto m : {DistMeasure::tangle, DistMeasure::concurrence, DistMeasure::eof,
                 DistMeasure::three_tangle, DistMeasure::pair_tangle})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

inline constexpr int kDefaultSubsetCap = 2000;
// Shard index reserved for the stream that draws the subset sample.
inline constexpr std::uint64_t kSubsetPlanShard = ~std::uint64_t{0};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::pairs;
  int n_qubits = 2;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  int shards = 1;
  int bins = 100;
  int subset_size = 0;  // m, subsets kind only
  DistMeasure measure = DistMeasure::tangle;
  double zero_margin = kZeroMargin;
  double ppt_slack = kPptSlack;
  int max_subsets = kDefaultSubsetCap;
  int threads = 0;  // 0: hardware concurrency (capped by QCENSUS_THREADS)

  void validate() const {
    if (n_qubits < 2 || n_qubits > kMaxQubits)
      throw std::invalid_argument("config: n_qubits must be in [2,13]");
    if (samples < 1) throw std::invalid_argument("config: samples must be >= 1");
    if (shards < 1) throw std::invalid_argument("config: shards must be >= 1");
    if (bins < 2) throw std::invalid_argument("config: bins must be >= 2");
    if (!(zero_margin >= 0.0)) throw std::invalid_argument("config: zero_margin must be >= 0");
    if (!(ppt_slack >= 0.0)) throw std::invalid_argument("config: ppt_slack must be >= 0");
    if (max_subsets < 1) throw std::invalid_argument("config: max_subsets must be >= 1");
    if (kind == ExperimentKind::subsets &&
        (subset_size < 2 || subset_size > std::min(kMaxDenseQubits, n_qubits - 1)))
      throw std::invalid_argument("config: subset size m must be in [2, min(6, N-1)]");
    if (kind == ExperimentKind::distribution) {
      const bool whole_pair =
          measure == DistMeasure::tangle || measure == DistMeasure::concurrence || measure == DistMeasure::eof;
      if (whole_pair && n_qubits != 2)
        throw std::invalid_argument("config: " + to_string(measure) + " distribution requires N=2");
      if (measure == DistMeasure::three_tangle && n_qubits != 3)
        throw std::invalid_argument("config: three_tangle distribution requires N=3");
    }
  }

  /// Everything that must agree for two accumulators to be mergeable.
  [[nodiscard]] std::string signature() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind) << ";n=" << n_qubits << ";seed=" << seed << ";bins=" << bins
       << ";m=" << subset_size << ";measure=" << to_string(measure) << ";zeta=" << zero_margin
       << ";eps=" << ppt_slack << ";cap=" << max_subsets;
    return os.str();
  }
};

struct StatRow {
  std::string kind;
  int n_qubits = 0;
  int subset_size = 0;
  int transpose_size = 0;
  std::string statistic;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t count = 0;
};

struct HistogramReport {
  std::string measure;
  std::vector<double> bin_lo, bin_hi, density;
  std::vector<std::uint64_t> counts;
  std::uint64_t zero_count = 0;
  std::uint64_t total = 0;
};

struct CensusReport {
  ExperimentConfig config;
  std::vector<StatRow> stats;
  std::vector<HistogramReport> histograms;
  Accumulator accumulator;
  double duration_seconds = 0.0;

  [[nodiscard]] const StatRow* find(const std::string& statistic, int subset_size = -1,
                                    int transpose_size = -1, int n_qubits = -1) const {
    for (const auto& r : stats)
      if (r.statistic == statistic && (subset_size < 0 || r.subset_size == subset_size) &&
          (transpose_size < 0 || r.transpose_size == transpose_size) &&
          (n_qubits < 0 || r.n_qubits == n_qubits))
        return &r;
    return nullptr;
  }
  [[nodiscard]] const StatRow& at(const std::string& statistic, int subset_size = -1,
                                  int transpose_size = -1) const {
    const StatRow* r = find(statistic, subset_size, transpose_size);
    if (!r) throw std::out_of_range("CensusReport: no statistic " + statistic);
    return *r;
  }
  [[nodiscard]] const HistogramReport* histogram(const std::string& measure) const {
    for (const auto& h : histograms)
      if (h.measure == measure) return &h;
    return nullptr;
  }
};

// ---------------------------------------------------------------- planning

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

/// The m-subsets evaluated for every sampled state, in lexicographic order:
/// all C(N, m) when within the cap, otherwise `cap` distinct subsets drawn
/// uniformly once per run from the reserved plan stream.
inline std::vector<QubitSet> plan_subsets(int n, int m, int cap, std::uint64_t seed) {
  std::vector<QubitSet> out;
  if (binomial(n, m) <= static_cast<std::uint64_t>(cap)) {
    detail::for_each_combination(n, m, [&](const QubitSet& s) {
      out.push_back(s);
      return true;
    });
    return out;
  }
  RandomStream s = derive_stream(seed, kSubsetPlanShard);
  std::set<QubitSet> chosen;
  std::vector<int> pool(static_cast<std::size_t>(n));
  while (chosen.size() < static_cast<std::size_t>(cap)) {
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < m; ++i) {
      const auto j = static_cast<std::size_t>(i) + s.below(static_cast<std::uint64_t>(n - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    std::vector<int> pick(pool.begin(), pool.begin() + m);
    std::sort(pick.begin(), pick.end());
    chosen.insert(QubitSet(std::move(pick)));
  }
  return {chosen.begin(), chosen.end()};
}

inline std::vector<QubitSet> all_pairs(int n) {
  std::vector<QubitSet> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back(QubitSet{i, j});
  return out;
}

/// Reduced state of `keep`; the whole state when keep covers the register.
inline DensityMatrix marginal(const PureState& psi, const QubitSet& keep) {
  if (keep.size() == psi.n_qubits()) return pure_to_density(psi);
  return partial_trace(psi, keep);
}

// ------------------------------------------------------------ accumulation

struct SamplePlan {
  std::vector<QubitSet> subsets;  // pairs or m-subsets, lexicographic
};

inline SamplePlan make_plan(const ExperimentConfig& cfg) {
  SamplePlan p;
  switch (cfg.kind) {
    case ExperimentKind::pairs: p.subsets = all_pairs(cfg.n_qubits); break;
    case ExperimentKind::subsets:
      p.subsets = plan_subsets(cfg.n_qubits, cfg.subset_size, cfg.max_subsets, cfg.seed);
      break;
    case ExperimentKind::distribution:
      if (cfg.measure == DistMeasure::pair_tangle) p.subsets = all_pairs(cfg.n_qubits);
      break;
    case ExperimentKind::entropy: break;
  }
  return p;
}

namespace detail {

inline void accumulate_pairs(const ExperimentConfig& cfg, const SamplePlan& plan, RandomStream& s,
                             std::uint64_t count, Accumulator& acc) {
  RunningStat& tangle = acc.stat({"tangle", 2, 0});
  RunningStat& conc = acc.stat({"concurrence", 2, 0});
  RunningStat& eof = acc.stat({"eof", 2, 0});
  FractionCounter& p2 = acc.fraction({"p2", 2, 0});
  FractionCounter& p2_hi = acc.fraction({"p2_margin_x10", 2, 0});
  FractionCounter& p2_lo = acc.fraction({"p2_margin_div10", 2, 0});
  FractionCounter& ps = acc.fraction({"ps", 2, 0});
  Histogram& hist = acc.histogram("tangle", cfg.bins);
  for (std::uint64_t i = 0; i < count; ++i) {
    const PureState psi = haar_pure_gaussian(cfg.n_qubits, s);
    acc.count_state();
    bool all_zero = true;
    for (const QubitSet& pair : plan.subsets) {
      const PairMeasures pm = concurrence(marginal(psi, pair), cfg.zero_margin);
      tangle.push(pm.tangle);
      conc.push(pm.concurrence);
      eof.push(pm.eof);
      p2.record(pm.is_zero);
      p2_hi.record(pm.margin <= cfg.zero_margin * 10.0);
      p2_lo.record(pm.margin <= cfg.zero_margin / 10.0);
      hist.observe(pm.tangle, pm.is_zero);
      all_zero = all_zero && pm.is_zero;
    }
    ps.record(all_zero);
  }
}

inline void accumulate_subsets(const ExperimentConfig& cfg, const SamplePlan& plan, RandomStream& s,
                               std::uint64_t count, Accumulator& acc) {
  const int m = cfg.subset_size;
  std::vector<RunningStat*> neg;
  std::vector<FractionCounter*> ppt_by_size;
  for (int t = 1; t <= m / 2; ++t) {
    neg.push_back(&acc.stat({"negativity", m, t}));
    ppt_by_size.push_back(&acc.fraction({"ppt_fraction", m, t}));
  }
  FractionCounter& ppt = acc.fraction({"ppt_fraction", m, 0});
  FractionCounter& ppt_state = acc.fraction({"ppt_state", m, 0});
  for (std::uint64_t i = 0; i < count; ++i) {
    const PureState psi = haar_pure_gaussian(cfg.n_qubits, s);
    acc.count_state();
    bool state_ppt = true;
    for (const QubitSet& subset : plan.subsets) {
      const auto profile = transpose_profile(partial_trace(psi, subset), cfg.ppt_slack);
      bool all = true;
      for (std::size_t t = 0; t < profile.size(); ++t) {
        neg[t]->push(profile[t].negativity);
        ppt_by_size[t]->record(profile[t].ppt);
        all = all && profile[t].ppt;
      }
      ppt.record(all);
      state_ppt = state_ppt && all;
    }
    ppt_state.record(state_ppt);
  }
}

inline void accumulate_entropy(const ExperimentConfig& cfg, RandomStream& s, std::uint64_t count,
                               Accumulator& acc) {
  const int n = cfg.n_qubits;
  std::vector<QubitSet> keep, rest;
  for (int k = 1; k <= n / 2; ++k) {
    keep.push_back(QubitSet::leading(k));
    rest.push_back(keep.back().complement(n));
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const PureState psi = haar_pure_gaussian(n, s);
    acc.count_state();
    for (int k = 1; k <= n / 2; ++k) {
      const auto idx = static_cast<std::size_t>(k - 1);
      const double sk = entropy(partial_trace(psi, keep[idx]));
      acc.stat({"entropy", k, 0}).push(sk);
      acc.stat({"entropy_per_qubit", k, 0}).push(sk / k);
      acc.stat({"entropy_per_qubit_complement", k, 0}).push(sk / (n - k));
      // The complement is only diagonalized while it fits the dense kernels.
      if (n - k <= kMaxDenseQubits) {
        const double sc = entropy(partial_trace(psi, rest[idx]));
        acc.stat({"complement_gap", k, 0}).push(std::abs(sk - sc));
      }
    }
  }
}

inline void accumulate_distribution(const ExperimentConfig& cfg, const SamplePlan& plan,
                                    RandomStream& s, std::uint64_t count, Accumulator& acc) {
  const std::string name = to_string(cfg.measure);
  Histogram& hist = acc.histogram(name, cfg.bins);
  for (std::uint64_t i = 0; i < count; ++i) {
    const PureState psi = haar_pure_gaussian(cfg.n_qubits, s);
    acc.count_state();
    switch (cfg.measure) {
      case DistMeasure::tangle:
      case DistMeasure::concurrence:
      case DistMeasure::eof: {
        const PairMeasures pm = concurrence(pure_to_density(psi), cfg.zero_margin);
        const double v = cfg.measure == DistMeasure::tangle        ? pm.tangle
                         : cfg.measure == DistMeasure::concurrence ? pm.concurrence
                                                                   : pm.eof;
        acc.stat({name, 2, 0}).push(v);
        hist.observe(v, pm.is_zero);
        break;
      }
      case DistMeasure::pair_tangle: {
        for (const QubitSet& pair : plan.subsets) {
          const PairMeasures pm = concurrence(marginal(psi, pair), cfg.zero_margin);
          acc.stat({name, 2, 0}).push(pm.tangle);
          acc.fraction({"p2", 2, 0}).record(pm.is_zero);
          hist.observe(pm.tangle, pm.is_zero);
        }
        break;
      }
      case DistMeasure::three_tangle: {
        const auto d0 = three_tangle(psi, 0, cfg.zero_margin);
        const auto d1 = three_tangle(psi, 1, cfg.zero_margin);
        const auto d2 = three_tangle(psi, 2, cfg.zero_margin);
        const double t01 = d0.tau_ab, t02 = d0.tau_ac, t12 = d1.tau_ac;
        acc.stat({name, 3, 0}).push(d0.tau3);
        acc.stat({"tau_a", 1, 0}).push(d0.tau_a);
        acc.stat({"tau_pair", 2, 0}).push(t01);
        acc.stat({"tau_pair", 2, 0}).push(t02);
        acc.stat({"tau_pair", 2, 0}).push(t12);
        acc.stat({"total_tangle", 3, 0}).push(d0.tau3 + t01 + t02 + t12);
        for (const auto& d : {d0, d1, d2})
          acc.stat({"monogamy_residual", 3, 0}).push(d.tau_a - d.tau_ab - d.tau_ac);
        acc.stat({"tau3_focus_spread", 3, 0})
            .push(std::max({d0.tau3, d1.tau3, d2.tau3}) - std::min({d0.tau3, d1.tau3, d2.tau3}));
        hist.observe(d0.tau3, d0.tau3 <= cfg.zero_margin);
        break;
      }
    }
  }
}

}  // namespace detail

/// Feeds `count` states from `stream` into `acc`. Calling this on shard
/// streams one after another reproduces the sharded run as a single pass.
inline void accumulate(const ExperimentConfig& cfg, const SamplePlan& plan, RandomStream& stream,
                       std::uint64_t count, Accumulator& acc) {
  switch (cfg.kind) {
    case ExperimentKind::pairs: detail::accumulate_pairs(cfg, plan, stream, count, acc); break;
    case ExperimentKind::subsets: detail::accumulate_subsets(cfg, plan, stream, count, acc); break;
    case ExperimentKind::entropy: detail::accumulate_entropy(cfg, stream, count, acc); break;
    case ExperimentKind::distribution:
      detail::accumulate_distribution(cfg, plan, stream, count, acc);
      break;
  }
}

inline std::uint64_t shard_samples(const ExperimentConfig& cfg, int shard) {
  const auto shards = static_cast<std::uint64_t>(cfg.shards);
  const auto i = static_cast<std::uint64_t>(shard);
  return cfg.samples / shards + (i < cfg.samples % shards ? 1 : 0);
}

/// Worker threads for a run: `requested` (or the processor count when 0),
/// capped by QCENSUS_THREADS when set.
inline int resolve_threads(int requested) {
  int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  t = std::max(t, 1);
  if (const char* env = std::getenv("QCENSUS_THREADS"); env && *env) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (*end != '\0' || cap < 1) throw std::invalid_argument("QCENSUS_THREADS must be an integer >= 1");
    t = static_cast<int>(std::min<long>(t, cap));
  }
  return t;
}

inline Accumulator run_accumulator(const ExperimentConfig& cfg) {
  cfg.validate();
  const SamplePlan plan = make_plan(cfg);
  std::vector<Accumulator> parts(static_cast<std::size_t>(cfg.shards));
  auto run_shard = [&](int shard) {
    Accumulator acc(cfg.signature());
    RandomStream s = derive_stream(cfg.seed, static_cast<std::uint64_t>(shard));
    accumulate(cfg, plan, s, shard_samples(cfg, shard), acc);
    parts[static_cast<std::size_t>(shard)] = std::move(acc);
  };
  const int workers = std::min(resolve_threads(cfg.threads), cfg.shards);
  if (workers <= 1) {
    for (int i = 0; i < cfg.shards; ++i) run_shard(i);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < cfg.shards && !failed; i = next++) {
          try {
            run_shard(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }
  Accumulator total(cfg.signature());
  for (const auto& p : parts) total.merge_from(p);
  return total;
}

// ---------------------------------------------------------------- reports

inline CensusReport summarize(const ExperimentConfig& cfg, Accumulator acc, double duration = 0.0) {
  CensusReport r;
  r.config = cfg;
  r.duration_seconds = duration;
  const std::string kind = to_string(cfg.kind);
  std::vector<std::pair<StatKey, StatRow>> rows;
  for (const auto& [k, v] : acc.stats())
    rows.push_back({k, {kind, cfg.n_qubits, k.subset_size, k.transpose_size, k.statistic, v.mean(),
                        v.stderr_of_mean(), v.count()}});
  for (const auto& [k, v] : acc.fractions())
    rows.push_back({k, {kind, cfg.n_qubits, k.subset_size, k.transpose_size, k.statistic,
                        v.fraction(), v.stderr_of_fraction(), v.trials}});
  if (cfg.kind == ExperimentKind::entropy) {
    for (int k = 1; k <= cfg.n_qubits / 2; ++k) {
      const double page = page_entropy(cfg.n_qubits, k, PageMode::exact);
      rows.push_back({{"page_exact", k, 0}, {kind, cfg.n_qubits, k, 0, "page_exact", page, 0.0, 0}});
      rows.push_back({{"page_exact_per_qubit", k, 0},
                      {kind, cfg.n_qubits, k, 0, "page_exact_per_qubit", page / k, 0.0, 0}});
      const auto it = acc.stats().find({"entropy", k, 0});
      if (it != acc.stats().end()) {
        const double se = it->second.stderr_of_mean();
        const double dev = se > 0.0 ? (it->second.mean() - page) / se : 0.0;
        rows.push_back({{"page_deviation_se", k, 0},
                        {kind, cfg.n_qubits, k, 0, "page_deviation_se", dev, 0.0, it->second.count()}});
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [k, row] : rows) r.stats.push_back(std::move(row));

  for (const auto& [name, h] : acc.histograms()) {
    HistogramReport hr;
    hr.measure = name;
    hr.zero_count = h.zero_count();
    hr.total = h.total();
    for (int i = 0; i < h.bins(); ++i) {
      hr.bin_lo.push_back(h.bin_lo(i));
      hr.bin_hi.push_back(h.bin_hi(i));
      hr.counts.push_back(h.counts()[static_cast<std::size_t>(i)]);
      hr.density.push_back(h.density(i));
    }
    r.histograms.push_back(std::move(hr));
  }
  r.accumulator = std::move(acc);
  return r;
}

inline CensusReport run_census(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Accumulator acc = run_accumulator(cfg);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  return summarize(cfg, std::move(acc), dt.count());
}

namespace detail {
inline void require_kind(const ExperimentConfig& cfg, ExperimentKind k) {
  if (cfg.kind != k) throw std::invalid_argument("census: configuration kind is not " + to_string(k));
}
}  // namespace detail

inline CensusReport run_pair_census(const ExperimentConfig& cfg) {
  detail::require_kind(cfg, ExperimentKind::pairs);
  return run_census(cfg);
}

inline CensusReport run_subset_census(const ExperimentConfig& cfg) {
  detail::require_kind(cfg, ExperimentKind::subsets);
  return run_census(cfg);
}

inline CensusReport run_subset_census(ExperimentConfig cfg, int m) {
  cfg.subset_size = m;
  return run_subset_census(cfg);
}

inline CensusReport run_entropy_census(const ExperimentConfig& cfg) {
  detail::require_kind(cfg, ExperimentKind::entropy);
  return run_census(cfg);
}

inline CensusReport run_distribution(const ExperimentConfig& cfg) {
  detail::require_kind(cfg, ExperimentKind::distribution);
  return run_census(cfg);
}

inline CensusReport run_distribution(ExperimentConfig cfg, DistMeasure measure) {
  cfg.measure = measure;
  return run_distribution(cfg);
}

}  // namespace qcensus
