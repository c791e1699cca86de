// Acceptance suite: one line per criterion, PASS or FAIL, with the measured
// numbers. Usage: acceptance [criterion ...]   (default: all ten)
//
// Exit status is 0 when every criterion passes or fails only by a listed
// known deviation (see kKnownDeviations); any other failure exits 1.

#include "qcensus/census.hpp"
#include "qcensus/measures.hpp"
#include "qcensus/sampler.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace qcensus;

namespace {

constexpr int kShards = 4;

struct Check {
  std::string label;
  bool ok;
  std::string detail;
};

class Criterion {
 public:
  explicit Criterion(double budget_seconds) : budget_(budget_seconds), t0_(std::chrono::steady_clock::now()) {}

  void expect(const std::string& label, bool ok, const std::string& detail) {
    checks_.push_back({label, ok, detail});
  }

  /// |value - target| <= tol.
  void near(const std::string& label, double value, double target, double tol) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.6g vs %.6g (|d|=%.2g, tol %.2g)", value, target, std::abs(value - target), tol);
    expect(label, std::abs(value - target) <= tol, buf);
  }

  void finish_timing() {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0_;
    elapsed_ = dt.count();
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.1f s (budget %.0f s)", elapsed_, budget_);
    expect("wall clock", elapsed_ <= budget_, buf);
  }

  [[nodiscard]] const std::vector<Check>& checks() const { return checks_; }
  [[nodiscard]] double elapsed() const { return elapsed_; }

 private:
  double budget_;
  std::chrono::steady_clock::time_point t0_;
  double elapsed_ = 0.0;
  std::vector<Check> checks_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ExperimentConfig cfg(ExperimentKind kind, int n, std::uint64_t samples, std::uint64_t seed) {
  ExperimentConfig c;
  c.kind = kind;
  c.n_qubits = n;
  c.samples = samples;
  c.seed = seed;
  c.shards = kShards;
  return c;
}

// Checks that fail for a documented reason rather than a defect. Keyed by
// criterion and check label; the text is printed next to the FAIL line.
const std::map<std::pair<int, std::string>, std::string> kKnownDeviations = {
    {{7, "page_entropy(4,1) = 0.86620"},
     "the target is not the value of the formula: the direct sum over j = 9..16 gives "
     "(H_16 - H_8 - 1/16)/ln 2 = 0.8661535, which an independent long-double harmonic sum "
     "and the quoted 0.8661 both confirm; 0.86620 is off by 4.7e-5"},
};

// ------------------------------------------------------------- criteria

void c1(Criterion& c) {
  const CensusReport r = run_pair_census(cfg(ExperimentKind::pairs, 2, 100000, 101));
  for (const auto& [name, target] : std::vector<std::pair<std::string, double>>{
           {"tangle", 0.400}, {"concurrence", 0.5890}, {"eof", 0.4808}}) {
    const StatRow& row = r.at(name);
    c.near("mean " + name, row.mean, target, std::max(3.0 * row.stderr_, 0.003));
  }
}

void c2(Criterion& c) {
  ExperimentConfig e = cfg(ExperimentKind::distribution, 3, 100000, 102);
  e.measure = DistMeasure::three_tangle;
  const CensusReport r = run_distribution(e);
  const StatRow& t3 = r.at("three_tangle");
  const StatRow& tab = r.at("tau_pair");
  c.near("mean tau3", t3.mean, 1.0 / 3.0, std::max(3.0 * t3.stderr_, 0.004));
  c.near("mean tau_AB", tab.mean, 1.0 / 6.0, std::max(3.0 * tab.stderr_, 0.004));
  c.near("mean tau3 + sum of pair tangles", r.at("total_tangle").mean, 5.0 / 6.0, 0.01);
}

void c3(Criterion& c) {
  const auto ghz = three_tangle(qtest::ghz(), 0);
  const auto w = three_tangle(qtest::w_state(), 0);
  c.near("GHZ tau3", ghz.tau3, 1.0, 1e-9);
  c.near("GHZ tau_AB", ghz.tau_ab, 0.0, 1e-9);
  c.near("W tau3", w.tau3, 0.0, 1e-9);
  c.near("W tau_AB", w.tau_ab, 4.0 / 9.0, 1e-9);
  const DensityMatrix bell = pure_to_density(qtest::bell());
  c.near("Bell concurrence", concurrence(bell).concurrence, 1.0, 1e-9);
  c.near("Bell negativity", negativity(bell, {0}), 1.0, 1e-9);
}

void c4(Criterion& c) {
  const CensusReport r = run_pair_census(cfg(ExperimentKind::pairs, 4, 100000, 104));
  const StatRow& t = r.at("tangle");
  c.near("mean pair tangle", t.mean, 0.0314, std::max(3.0 * t.stderr_, 0.0005));
  c.near("P2(4)", r.at("p2").mean, 0.24, 0.01);
  const HistogramReport* h = r.histogram("tangle");
  c.near("histogram zero_count/total", static_cast<double>(h->zero_count) / static_cast<double>(h->total), 0.24, 0.01);
}

void c5(Criterion& c) {
  c.near("P2(5)", run_pair_census(cfg(ExperimentKind::pairs, 5, 100000, 105)).at("p2").mean, 0.80, 0.01);
  c.near("P2(6)", run_pair_census(cfg(ExperimentKind::pairs, 6, 100000, 106)).at("p2").mean, 0.99, 0.005);
  const double ps = run_pair_census(cfg(ExperimentKind::pairs, 7, 10000, 107)).at("ps").mean;
  c.expect("Ps(7) >= 0.995", ps >= 0.995, fmt("%.5f", ps));
}

void c6(Criterion& c) {
  int worst_n = 0, worst_k = 0;
  double worst = 0.0;
  bool all = true;
  for (int n = 2; n <= 10; ++n) {
    const CensusReport r = run_entropy_census(cfg(ExperimentKind::entropy, n, 10000, 600 + n));
    for (int k = 1; k <= n / 2; ++k) {
      const StatRow& s = r.at("entropy", k, 0);
      const double z = std::abs(s.mean - page_entropy(n, k)) / s.stderr_;
      all = all && z <= 3.0;
      if (z > worst) worst = z, worst_n = n, worst_k = k;
    }
  }
  c.expect("|MC - exact| <= 3 se for all N <= 10, k <= N/2 (1e4 samples)", all,
           fmt("worst %.2f se at N=%g, k=%g", worst, worst_n, worst_k));
  // Three significant digits: relative error below half a unit of the third digit.
  double worst_rel = 0.0;
  bool digits = true;
  for (int n = 2; n <= 6; ++n) {
    const CensusReport r = run_entropy_census(cfg(ExperimentKind::entropy, n, 100000, 660 + n));
    for (int k = 1; k <= n / 2; ++k) {
      const double exact = page_entropy(n, k);
      const double rel = std::abs(r.at("entropy", k, 0).mean - exact) / exact;
      digits = digits && rel < 5e-3;
      if (rel > worst_rel) worst_rel = rel, worst_n = n, worst_k = k;
    }
  }
  c.expect("3 significant digits for N <= 6 (1e5 samples)", digits,
           fmt("worst relative error %.2g at N=%g, k=%g", worst_rel, worst_n, worst_k));
}

void c7(Criterion& c) {
  c.near("page_entropy(2,1) = 0.48090", page_entropy(2, 1), 0.48090, 1e-5);
  c.near("page_entropy(4,1) = 0.86620", page_entropy(4, 1), 0.86620, 1e-5);
  c.near("page_entropy(4,2)/2 = 0.66536", page_entropy(4, 2) / 2.0, 0.66536, 1e-5);
  const double d = std::abs(page_entropy(12, 5, PageMode::exact) - page_entropy(12, 5, PageMode::approx));
  c.expect("|exact - approx| < 0.01 at N=12, k=5", d < 0.01, fmt("%.3g bits", d));
}

void c8(Criterion& c) {
  for (int m = 2; m <= 5; ++m) {
    std::vector<double> frac;
    std::ostringstream curve;
    const int last = std::min(2 * m + 3, kMaxQubits);
    double at_low = 1.0, at_high = 0.0;
    for (int n = m + 1; n <= last; ++n) {
      ExperimentConfig e = cfg(ExperimentKind::subsets, n, 1000, 800 + static_cast<std::uint64_t>(10 * m + n));
      e.subset_size = m;
      e.max_subsets = 100;
      const double f = run_subset_census(e).at("ppt_fraction", m, 0).mean;
      frac.push_back(f);
      curve << (n == m + 1 ? "" : " ") << n << ":" << fmt("%.4f", f);
      if (n == 2 * m - 1) at_low = f;
      if (n == 2 * m + 3) at_high = f;
    }
    const bool monotone = std::is_sorted(frac.begin(), frac.end());
    const std::string tag = "m=" + std::to_string(m);
    c.expect(tag + " non-decreasing", monotone, curve.str());
    c.expect(tag + " below 50% at N=2m-1", at_low < 0.5, fmt("%.4f", at_low));
    c.expect(tag + " at least 99% at N=2m+3", at_high >= 0.99, fmt("%.4f", at_high));
  }
}

void c9(Criterion& c) {
  for (int m = 2; m <= 3; ++m) {
    std::vector<double> mean;
    std::ostringstream curve;
    for (int n = m + 1; n <= m + 6; ++n) {
      ExperimentConfig e = cfg(ExperimentKind::subsets, n, 2000, 900 + static_cast<std::uint64_t>(10 * m + n));
      e.subset_size = m;
      mean.push_back(run_subset_census(e).at("negativity", m, 1).mean);
      curve << (n == m + 1 ? "" : " ") << n << ":" << fmt("%.3g", mean.back());
    }
    // Strictly decreasing while positive; once the mean is exactly zero it stays zero.
    bool decreasing = true;
    for (std::size_t i = 1; i < mean.size(); ++i)
      decreasing = decreasing && (mean[i - 1] > 0.0 ? mean[i] < mean[i - 1] : mean[i] == 0.0);
    std::vector<double> ratio;
    for (std::size_t i = 1; i < mean.size(); ++i)
      if (mean[i - 1] > 0.0) ratio.push_back(mean[i] / mean[i - 1]);
    bool faster = ratio.size() >= 3;
    std::ostringstream rs;
    for (std::size_t i = 0; i < ratio.size(); ++i) {
      if (i) faster = faster && ratio[i] < ratio[i - 1];
      rs << (i ? " " : "") << fmt("%.3g", ratio[i]);
    }
    const std::string tag = "m=" + std::to_string(m);
    c.expect(tag + " mean negativity decreasing in N", decreasing, curve.str());
    c.expect(tag + " successive ratios decreasing", faster, "ratios " + rs.str());
  }
}

void c10(Criterion& c) {
  constexpr int kInstances = 10000;

  ExperimentConfig mono = cfg(ExperimentKind::distribution, 3, kInstances, 1001);
  mono.measure = DistMeasure::three_tangle;
  const double residual = run_distribution(mono).accumulator.stats().at({"monogamy_residual", 3, 0}).min();
  c.expect("monogamy residual >= -1e-9", residual >= -1e-9, fmt("min %.3g", residual));

  RandomStream s = derive_stream(1002, 0);
  int discordant = 0, unexplained = 0;
  for (int i = 0; i < kInstances; ++i) {
    const int n = 3 + i % 4;
    const DensityMatrix rho = partial_trace(haar_pure_gaussian(n, s), {0, n - 1});
    const PairMeasures pm = concurrence(rho);
    if (is_ppt(rho) != pm.is_zero) {
      ++discordant;
      const double lo = qtest::jacobi_eigenvalues(partial_transpose(rho, {0})).back();
      unexplained += std::abs(pm.margin) > 1e-8 || std::abs(lo) > 1e-8;
    }
  }
  c.expect("2x2 PPT <=> zero concurrence", unexplained == 0,
           fmt("%g of 10000 disagree, %g of them away from the boundary", discordant, unexplained));

  s = derive_stream(1003, 0);
  double gap = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const int n = 2 + i % 6;
    const PureState psi = haar_pure_gaussian(n, s);
    const int k = 1 + i % std::max(1, n / 2);
    const QubitSet keep = QubitSet::leading(k);
    gap = std::max(gap, std::abs(entropy(partial_trace(psi, keep)) - entropy(partial_trace(psi, keep.complement(n)))));
  }
  c.expect("S_k = S_(N-k) within 1e-9", gap <= 1e-9, fmt("max gap %.3g", gap));

  const ExperimentConfig pc = cfg(ExperimentKind::pairs, 4, kInstances, 1004);
  const Accumulator sharded = run_accumulator(pc);
  const SamplePlan plan = make_plan(pc);
  Accumulator one(pc.signature());
  for (int shard = 0; shard < pc.shards; ++shard) {
    RandomStream st = derive_stream(pc.seed, static_cast<std::uint64_t>(shard));
    accumulate(pc, plan, st, shard_samples(pc, shard), one);
  }
  bool same = sharded.states() == one.states();
  double mean_gap = 0.0;
  for (const auto& [k, v] : sharded.stats()) {
    same = same && v.count() == one.stats().at(k).count() && v.min() == one.stats().at(k).min() &&
           v.max() == one.stats().at(k).max();
    mean_gap = std::max(mean_gap, std::abs(v.mean() - one.stats().at(k).mean()));
  }
  for (const auto& [k, v] : sharded.fractions())
    same = same && v.hits == one.fractions().at(k).hits && v.trials == one.fractions().at(k).trials;
  for (const auto& [k, h] : sharded.histograms())
    same = same && h.counts() == one.histograms().at(k).counts() && h.zero_count() == one.histograms().at(k).zero_count();
  c.expect("4 shards vs 1 pass: identical counters", same && mean_gap <= 1e-12,
           fmt("counters equal: %g, max mean difference %.2g", same, mean_gap));

  RandomStream g = derive_stream(1005, 0), h = derive_stream(1006, 0);
  std::vector<double> tg, th, t3g, t3h, wg, wh;
  for (int i = 0; i < kInstances; ++i) {
    tg.push_back(concurrence(pure_to_density(haar_pure_gaussian(2, g))).tangle);
    th.push_back(concurrence(pure_to_density(haar_pure_hyperspherical(2, h))).tangle);
    const PureState a = haar_pure_gaussian(3, g), b = haar_pure_hyperspherical(3, h);
    t3g.push_back(three_tangle(a, 0).tau3);
    t3h.push_back(three_tangle(b, 0).tau3);
    wg.push_back(std::norm(a.amplitudes()(0)));
    wh.push_back(std::norm(b.amplitudes()(0)));
  }
  const double crit = qtest::ks_critical_1pct(kInstances, kInstances);
  const double d2 = qtest::ks_statistic(tg, th), d3 = qtest::ks_statistic(t3g, t3h), dw = qtest::ks_statistic(wg, wh);
  c.expect("KS gaussian vs hyperspherical, N=2 tangle", d2 < crit, fmt("D=%.4f, crit %.4f", d2, crit));
  c.expect("KS gaussian vs hyperspherical, N=3 tau3", d3 < crit, fmt("D=%.4f, crit %.4f", d3, crit));
  c.expect("KS gaussian vs hyperspherical, N=3 |a0|^2", dw < crit, fmt("D=%.4f, crit %.4f", dw, crit));
}

struct Entry {
  int id;
  const char* title;
  double budget;
  std::function<void(Criterion&)> run;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> e = {
      {1, "N=2 averages", 60, c1},
      {2, "N=3 averages", 60, c2},
      {3, "canonical states exact", 1, c3},
      {4, "N=4 pair statistics", 300, c4},
      {5, "zero-fraction ladder", 600, c5},
      {6, "entropy vs exact Haar average", 600, c6},
      {7, "closed-form entropy unit checks", 1, c7},
      {8, "PPT cutoff shape", 1800, c8},
      {9, "negativity decay", 600, c9},
      {10, "property suites", 120, c10},
  };
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int passed = 0, known = 0, failed = 0;
  for (const Entry& e : entries()) {
    if (!wanted.empty() && !wanted.count(e.id)) continue;
    Criterion c(e.budget);
    e.run(c);
    c.finish_timing();
    bool ok = true, only_known = true;
    for (const Check& k : c.checks())
      if (!k.ok) {
        ok = false;
        only_known = only_known && kKnownDeviations.count({e.id, k.label});
      }
    std::printf("[%s] criterion %d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", e.id, e.title, c.elapsed());
    for (const Check& k : c.checks()) {
      std::printf("    %s %s: %s\n", k.ok ? "ok  " : "FAIL", k.label.c_str(), k.detail.c_str());
      if (!k.ok)
        if (auto it = kKnownDeviations.find({e.id, k.label}); it != kKnownDeviations.end())
          std::printf("         known deviation: %s\n", it->second.c_str());
    }
    std::fflush(stdout);
    if (ok) ++passed;
    else if (only_known) ++known;
    else ++failed;
  }
  std::printf("summary: %d passed, %d failed by known deviation, %d failed\n", passed, known, failed);
  return failed == 0 ? 0 : 1;
}
