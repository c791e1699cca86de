#pragma once

// Command-line front end: argument parsing, command dispatch and the figure
// presets. Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.

#include "qcensus/census.hpp"
#include "qcensus/measures.hpp"
#include "qcensus/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qcensus {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by parse() for --help; carries the rendered help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CliInvocation {
  std::string command;  // pairs | subsets | entropy | dist | page | figure
  ExperimentConfig config;
  bool seed_given = false;
  bool samples_given = false;
  bool qubits_given = false;
  OutputFormat format = OutputFormat::csv;
  std::string out;     // file, or directory for `figure`; empty = stdout
  std::string figure;  // fig1 .. fig5
};

/// Decimal, or hexadecimal with a 0x prefix.
inline std::optional<std::uint64_t> parse_seed(const std::string& s) {
  if (s.empty()) return std::nullopt;
  int base = 10;
  std::string digits = s;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    digits = s.substr(2);
  }
  if (digits.empty() || digits.find_first_of("+- ") != std::string::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(digits, &used, base);
    if (used != digits.size()) return std::nullopt;
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline int default_shards() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

inline std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

namespace detail {

struct RawOptions {
  int qubits = 0;
  std::uint64_t samples = 100000;
  std::string seed;
  int shards = 0;
  int bins = 100;
  int subset = 0;
  int max_subsets = kDefaultSubsetCap;
  std::string measure;
  std::string format = "csv";
  std::string out;
  double zero_margin = kZeroMargin;
  double ppt_slack = kPptSlack;
  std::string figure;
};

inline void add_run_options(CLI::App* c, RawOptions& o, bool require_qubits) {
  auto* q = c->add_option("--qubits", o.qubits, "Number of qubits N (2..13)")->check(CLI::Range(2, kMaxQubits));
  if (require_qubits) q->required();
  c->add_option("--samples", o.samples, "Random states to draw (default 100000)")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  c->add_option("--seed", o.seed, "64-bit seed, decimal or 0x-hex (default: random, echoed)");
  c->add_option("--shards", o.shards, "Independent streams (default: processor count)")
      ->check(CLI::Range(1, 4096));
  c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  c->add_option("--out", o.out, "Output file (default: stdout)");
  c->add_option("--zero-margin", o.zero_margin, "Zero-concurrence margin on l1-l2-l3-l4 (default 1e-9)")
      ->check(CLI::NonNegativeNumber);
  c->add_option("--ppt-slack", o.ppt_slack, "PPT eigenvalue slack (default 1e-10)")->check(CLI::NonNegativeNumber);
}

}  // namespace detail

inline CliInvocation parse(const std::vector<std::string>& args) {
  detail::RawOptions o;
  CLI::App app{"qcensus: Monte Carlo census of entanglement in Haar-random qubit states", "qcensus"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  auto* pairs = app.add_subcommand("pairs", "Concurrence, tangle and E_f over all qubit pairs");
  detail::add_run_options(pairs, o, true);
  pairs->add_option("--bins", o.bins, "Histogram bins on [0,1] (default 100)")->check(CLI::Range(2, 100000));

  auto* subsets = app.add_subcommand("subsets", "Negativity and PPT fraction over m-qubit subsets");
  detail::add_run_options(subsets, o, true);
  subsets->add_option("--subset", o.subset, "Subset size m (2..min(6,N-1))")->required()->check(CLI::Range(2, kMaxDenseQubits));
  subsets->add_option("--max-subsets", o.max_subsets, "Subsets evaluated per state before sampling (default 2000)")
      ->check(CLI::Range(1, 1000000));

  auto* entropy = app.add_subcommand("entropy", "Subsystem entropies against the exact Haar average");
  detail::add_run_options(entropy, o, true);

  auto* dist = app.add_subcommand("dist", "Histogram of one measure");
  detail::add_run_options(dist, o, true);
  dist->add_option("--bins", o.bins, "Histogram bins on [0,1] (default 100)")->check(CLI::Range(2, 100000));
  dist->add_option("--measure", o.measure, "tangle|concurrence|eof (N=2), three_tangle (N=3), pair_tangle")
      ->required()
      ->check(CLI::IsMember({"tangle", "concurrence", "eof", "three_tangle", "pair_tangle"}));

  auto* page = app.add_subcommand("page", "Exact and approximate Haar-average entropy table");
  page->add_option("--qubits", o.qubits, "Number of qubits N (2..13)")->required()->check(CLI::Range(2, kMaxQubits));
  page->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  page->add_option("--out", o.out, "Output file (default: stdout)");

  auto* figure = app.add_subcommand("figure", "Run the bundle of experiments behind a figure");
  figure->add_option("figure", o.figure, "fig1|fig2|fig3|fig4|fig5")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5"}));
  detail::add_run_options(figure, o, false);
  figure->get_option("--qubits")->description("Largest N for fig3, fig4 and fig5");
  figure->get_option("--out")->description("Output directory (default: current directory)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    for (auto* sc : {pairs, subsets, entropy, dist, page, figure})
      if (sc->parsed()) throw HelpRequested(sc->help());
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CliInvocation inv;
  for (auto* sc : {pairs, subsets, entropy, dist, page, figure})
    if (sc->parsed()) {
      inv.command = sc->get_name();
      inv.qubits_given = sc->get_option("--qubits")->count() > 0;
      if (sc != page) inv.samples_given = sc->get_option("--samples")->count() > 0;
    }

  ExperimentConfig& c = inv.config;
  c.n_qubits = o.qubits ? o.qubits : 2;
  c.samples = o.samples;
  c.bins = o.bins;
  c.zero_margin = o.zero_margin;
  c.ppt_slack = o.ppt_slack;
  c.max_subsets = o.max_subsets;
  c.shards = o.shards ? o.shards : default_shards();
  inv.format = o.format == "json" ? OutputFormat::json : OutputFormat::csv;
  inv.out = o.out;
  inv.figure = o.figure;
  if (!o.seed.empty()) {
    const auto s = parse_seed(o.seed);
    if (!s) throw UsageError("--seed: not a 64-bit decimal or 0x-hex value: " + o.seed);
    c.seed = *s;
    inv.seed_given = true;
  }

  if (inv.command == "pairs") c.kind = ExperimentKind::pairs;
  if (inv.command == "subsets") {
    c.kind = ExperimentKind::subsets;
    c.subset_size = o.subset;
  }
  if (inv.command == "entropy") c.kind = ExperimentKind::entropy;
  if (inv.command == "dist") {
    c.kind = ExperimentKind::distribution;
    c.measure = *parse_measure(o.measure);
  }
  if (inv.command == "pairs" || inv.command == "subsets" || inv.command == "entropy" ||
      inv.command == "dist") {
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return inv;
}

// ---------------------------------------------------------------- presets

struct PresetCurve {
  std::string name;  // output file stem
  ReportTables tables;
};

struct PresetOverrides {
  std::optional<std::uint64_t> samples;
  std::optional<int> max_qubits;
  std::uint64_t seed = 0;
  int shards = 1;
};

struct PresetInfo {
  std::string id;
  std::uint64_t default_samples;
  int default_max_qubits;
  std::string description;
};

/// Default sample counts and N ranges per preset. Wall-clock figures were
/// measured on a single core.
inline const std::vector<PresetInfo>& preset_table() {
  static const std::vector<PresetInfo> t = {
      {"fig1", 100000, 2, "tangle, concurrence and E_f histograms at N=2 (~2 s)"},
      {"fig2", 100000, 4, "pair-tangle histograms at N=2,3,4 and the three-tangle histogram at N=3 (~10 s)"},
      {"fig3", 2000, 10, "mean negativity per (m,t), m=2..5, N=m+1..max, plus pair tangle/concurrence (~5 min)"},
      {"fig4", 1000, 11, "PPT fraction per m=2..5 for N=m+1..max (~6 min)"},
      {"fig5", 10000, 10, "per-qubit subsystem entropies with exact references, N=2..max (~30 s)"},
  };
  return t;
}

inline const PresetInfo& preset_info(const std::string& id) {
  for (const auto& p : preset_table())
    if (p.id == id) return p;
  throw std::invalid_argument("unknown figure preset " + id);
}

namespace detail {

inline void append(ReportTables& dst, const CensusReport& r, const std::vector<std::string>& keep = {}) {
  for (const auto& row : r.stats)
    if (keep.empty() || std::find(keep.begin(), keep.end(), row.statistic) != keep.end())
      dst.stats.push_back(row);
}

inline ReportTables single(const CensusReport& r) { return tables_of(r); }

}  // namespace detail

inline std::vector<PresetCurve> run_preset(const std::string& figure, const PresetOverrides& ov) {
  const PresetInfo& info = preset_info(figure);
  ExperimentConfig base;
  base.samples = ov.samples.value_or(info.default_samples);
  base.seed = ov.seed;
  base.shards = ov.shards;
  const int max_n = ov.max_qubits.value_or(info.default_max_qubits);
  auto blank = [&] {
    ReportTables t;
    t.seed = base.seed;
    t.shards = base.shards;
    return t;
  };
  std::vector<PresetCurve> out;

  if (figure == "fig1") {
    for (auto m : {DistMeasure::tangle, DistMeasure::concurrence, DistMeasure::eof}) {
      ExperimentConfig c = base;
      c.kind = ExperimentKind::distribution;
      c.n_qubits = 2;
      c.measure = m;
      out.push_back({"fig1_" + to_string(m), detail::single(run_distribution(c))});
    }
  } else if (figure == "fig2") {
    for (int n = 2; n <= std::max(2, max_n); ++n) {
      ExperimentConfig c = base;
      c.kind = ExperimentKind::distribution;
      c.n_qubits = n;
      c.measure = DistMeasure::pair_tangle;
      out.push_back({"fig2_pair_tangle_n" + std::to_string(n), detail::single(run_distribution(c))});
    }
    ExperimentConfig c = base;
    c.kind = ExperimentKind::distribution;
    c.n_qubits = 3;
    c.measure = DistMeasure::three_tangle;
    out.push_back({"fig2_three_tangle_n3", detail::single(run_distribution(c))});
  } else if (figure == "fig3" || figure == "fig4") {
    const bool neg = figure == "fig3";
    std::map<std::string, ReportTables> curves;
    for (int m = 2; m <= 5; ++m)
      for (int n = m + 1; n <= max_n; ++n) {
        ExperimentConfig c = base;
        c.kind = ExperimentKind::subsets;
        c.n_qubits = n;
        c.subset_size = m;
        const CensusReport r = run_subset_census(c);
        if (neg) {
          for (int t = 1; t <= m / 2; ++t) {
            const std::string name = "fig3_negativity_m" + std::to_string(m) + "_t" + std::to_string(t);
            if (!curves.count(name)) curves[name] = blank();
            if (const StatRow* row = r.find("negativity", m, t)) curves[name].stats.push_back(*row);
          }
        } else {
          const std::string name = "fig4_ppt_m" + std::to_string(m);
          if (!curves.count(name)) curves[name] = blank();
          if (const StatRow* row = r.find("ppt_fraction", m, 0)) curves[name].stats.push_back(*row);
        }
      }
    if (neg) {
      curves["fig3_tangle"] = blank();
      curves["fig3_concurrence"] = blank();
      for (int n = 2; n <= max_n; ++n) {
        ExperimentConfig c = base;
        c.kind = ExperimentKind::pairs;
        c.n_qubits = n;
        const CensusReport r = run_pair_census(c);
        detail::append(curves["fig3_tangle"], r, {"tangle"});
        detail::append(curves["fig3_concurrence"], r, {"concurrence"});
      }
    }
    for (auto& [name, t] : curves) out.push_back({name, std::move(t)});
  } else if (figure == "fig5") {
    std::map<std::string, ReportTables> curves;
    for (int n = 2; n <= max_n; ++n) {
      ExperimentConfig c = base;
      c.kind = ExperimentKind::entropy;
      c.n_qubits = n;
      const CensusReport r = run_entropy_census(c);
      for (int k = 1; k <= n / 2; ++k) {
        const std::string name = "fig5_k" + std::to_string(k);
        if (!curves.count(name)) curves[name] = blank();
        for (const auto& row : r.stats)
          if (row.subset_size == k &&
              (row.statistic == "entropy_per_qubit" || row.statistic == "entropy_per_qubit_complement" ||
               row.statistic == "page_exact_per_qubit" || row.statistic == "page_exact"))
            curves[name].stats.push_back(row);
      }
    }
    for (auto& [name, t] : curves) out.push_back({name, std::move(t)});
  }
  return out;
}

// ---------------------------------------------------------------- page

inline ReportTables page_tables(int n) {
  ReportTables t;
  for (int k = 1; k <= n / 2; ++k) {
    const double exact = page_entropy(n, k, PageMode::exact);
    const double approx = page_entropy(n, k, PageMode::approx);
    t.stats.push_back({"page", n, k, 0, "page_exact", exact, 0.0, 0});
    t.stats.push_back({"page", n, k, 0, "page_exact_per_qubit", exact / k, 0.0, 0});
    t.stats.push_back({"page", n, k, 0, "page_approx", approx, 0.0, 0});
    t.stats.push_back({"page", n, k, 0, "page_approx_per_qubit", approx / k, 0.0, 0});
  }
  return t;
}

// ---------------------------------------------------------------- dispatch

inline void emit(const ReportTables& t, const nlohmann::json& config, OutputFormat format,
                 const std::string& path, std::ostream& out) {
  if (!path.empty()) {
    emit_tables(t, config, format, path);
    return;
  }
  if (format == OutputFormat::json) {
    out << canonical_json(report_json(t, config));
    return;
  }
  write_stats_csv(out, t);
  if (!t.histograms.empty()) {
    out << '\n';
    write_histogram_csv(out, t);
  }
}

inline int run(CliInvocation inv, std::ostream& out, std::ostream& err) {
  try {
    if (inv.command == "page") {
      ReportTables t = page_tables(inv.config.n_qubits);
      emit(t, {{"kind", "page"}, {"n_qubits", inv.config.n_qubits}}, inv.format, inv.out, out);
      return kExitOk;
    }
    if (!inv.seed_given) {
      inv.config.seed = entropy_seed();
      err << "qcensus: seed " << inv.config.seed << '\n';
    }
    if (inv.command == "figure") {
      PresetOverrides ov;
      if (inv.samples_given) ov.samples = inv.config.samples;
      if (inv.qubits_given) ov.max_qubits = inv.config.n_qubits;
      ov.seed = inv.config.seed;
      ov.shards = inv.config.shards;
      const std::string dir = inv.out.empty() ? "." : inv.out;
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw ReportIoError("cannot create directory " + dir);
      const std::string ext = inv.format == OutputFormat::json ? ".json" : ".csv";
      for (const auto& curve : run_preset(inv.figure, ov)) {
        const nlohmann::json config = {{"figure", inv.figure},    {"curve", curve.name},
                                       {"seed", ov.seed},         {"shards", ov.shards},
                                       {"samples", ov.samples.value_or(preset_info(inv.figure).default_samples)}};
        for (const auto& p : emit_tables(curve.tables, config, inv.format, dir + "/" + curve.name + ext))
          err << "qcensus: wrote " << p << '\n';
      }
      return kExitOk;
    }
    const CensusReport r = run_census(inv.config);
    emit(tables_of(r), config_json(r.config), inv.format, inv.out, out);
    err << "qcensus: " << inv.command << " N=" << r.config.n_qubits << " samples=" << r.config.samples
        << " in " << r.duration_seconds << " s\n";
    return kExitOk;
  } catch (const ReportIoError& e) {
    err << "qcensus: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    err << "qcensus: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "qcensus: " << e.what() << '\n';
    return kExitRuntime;
  }
}

inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliInvocation inv;
  try {
    inv = parse(args);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "qcensus: usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }
  return run(std::move(inv), out, err);
}

}  // namespace qcensus
