#pragma once

// CSV and JSON serialization of census reports.
//
// CSV: a stats table with header
//   kind,n_qubits,subset_size,transpose_size,statistic,mean,stderr,count,seed,shards
// and, for reports carrying histograms, a histogram table with header
//   measure,bin_lo,bin_hi,count,density,zero_count
// JSON: {"config": {...}, "stats": [...], "histogram": [...]} where each
// array element mirrors one CSV row. Floating-point values are printed with
// 17 significant digits, object keys are sorted, so parsing and re-emitting
// a document reproduces it byte for byte.

#include "qcensus/census.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcensus {

inline constexpr const char* kStatsHeader =
    "kind,n_qubits,subset_size,transpose_size,statistic,mean,stderr,count,seed,shards";
inline constexpr const char* kHistogramHeader = "measure,bin_lo,bin_hi,count,density,zero_count";

inline std::string format_double(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Rows from one or more reports rendered into a single table set.
struct ReportTables {
  std::uint64_t seed = 0;
  int shards = 1;
  std::vector<StatRow> stats;
  std::vector<HistogramReport> histograms;
};

inline ReportTables tables_of(const CensusReport& r) {
  return {r.config.seed, r.config.shards, r.stats, r.histograms};
}

inline void write_stats_csv(std::ostream& os, const ReportTables& t) {
  os << kStatsHeader << '\n';
  for (const auto& r : t.stats)
    os << r.kind << ',' << r.n_qubits << ',' << r.subset_size << ',' << r.transpose_size << ','
       << r.statistic << ',' << format_double(r.mean) << ',' << format_double(r.stderr_) << ','
       << r.count << ',' << t.seed << ',' << t.shards << '\n';
}

inline void write_histogram_csv(std::ostream& os, const ReportTables& t) {
  os << kHistogramHeader << '\n';
  for (const auto& h : t.histograms)
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      os << h.measure << ',' << format_double(h.bin_lo[i]) << ',' << format_double(h.bin_hi[i]) << ','
         << h.counts[i] << ',' << format_double(h.density[i]) << ',' << h.zero_count << '\n';
}

// ------------------------------------------------------------------ JSON

namespace detail {

inline void write_canonical(std::ostream& os, const nlohmann::json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << inner << nlohmann::json(it.key()).dump() << ": ";
        write_canonical(os, it.value(), indent + 1);
      }
      os << '\n' << pad << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << inner;
        write_canonical(os, j[i], indent + 1);
      }
      os << '\n' << pad << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      os << (std::isfinite(x) ? format_double(x) : std::string("null"));
      return;
    }
    default: os << j.dump(); return;
  }
}

}  // namespace detail

/// Sorted keys, 2-space indent, doubles at 17 significant digits.
inline std::string canonical_json(const nlohmann::json& j) {
  std::ostringstream os;
  detail::write_canonical(os, j, 0);
  os << '\n';
  return os.str();
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  return {{"kind", to_string(c.kind)},          {"n_qubits", c.n_qubits},
          {"samples", c.samples},               {"seed", c.seed},
          {"shards", c.shards},                 {"bins", c.bins},
          {"subset_size", c.subset_size},       {"measure", to_string(c.measure)},
          {"zero_margin", c.zero_margin},       {"ppt_slack", c.ppt_slack},
          {"max_subsets", c.max_subsets}};
}

inline nlohmann::json report_json(const ReportTables& t, const nlohmann::json& config) {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& r : t.stats)
    stats.push_back({{"kind", r.kind},
                     {"n_qubits", r.n_qubits},
                     {"subset_size", r.subset_size},
                     {"transpose_size", r.transpose_size},
                     {"statistic", r.statistic},
                     {"mean", r.mean},
                     {"stderr", r.stderr_},
                     {"count", r.count},
                     {"seed", t.seed},
                     {"shards", t.shards}});
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : t.histograms)
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      hist.push_back({{"measure", h.measure},
                      {"bin_lo", h.bin_lo[i]},
                      {"bin_hi", h.bin_hi[i]},
                      {"count", h.counts[i]},
                      {"density", h.density[i]},
                      {"zero_count", h.zero_count}});
  return {{"config", config}, {"stats", stats}, {"histogram", hist}};
}

inline nlohmann::json report_json(const CensusReport& r) {
  return report_json(tables_of(r), config_json(r.config));
}

// ------------------------------------------------------------------ files

enum class OutputFormat { csv, json };

/// Companion file for histogram rows: "a/b.csv" -> "a/b.hist.csv".
inline std::string histogram_path(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + ".hist.csv";
  return path.substr(0, dot) + ".hist" + path.substr(dot);
}

class ReportIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ReportIoError("cannot open " + path + " for writing");
  f << contents;
  f.close();
  if (!f) throw ReportIoError("failed writing " + path);
}

/// Writes the tables to `path` (JSON: one document; CSV: stats at `path`,
/// histograms, when present, at histogram_path(path)). Returns the paths written.
inline std::vector<std::string> emit_tables(const ReportTables& t, const nlohmann::json& config,
                                            OutputFormat format, const std::string& path) {
  if (format == OutputFormat::json) {
    write_file(path, canonical_json(report_json(t, config)));
    return {path};
  }
  std::ostringstream stats;
  write_stats_csv(stats, t);
  write_file(path, stats.str());
  if (t.histograms.empty()) return {path};
  std::ostringstream hist;
  write_histogram_csv(hist, t);
  const std::string hp = histogram_path(path);
  write_file(hp, hist.str());
  return {path, hp};
}

inline std::vector<std::string> emit_report(const CensusReport& r, OutputFormat format,
                                            const std::string& path) {
  return emit_tables(tables_of(r), config_json(r.config), format, path);
}

/// Stream form used when no output path is given.
inline void emit_report(const CensusReport& r, OutputFormat format, std::ostream& os) {
  if (format == OutputFormat::json) {
    os << canonical_json(report_json(r));
    return;
  }
  const ReportTables t = tables_of(r);
  write_stats_csv(os, t);
  if (!t.histograms.empty()) {
    os << '\n';
    write_histogram_csv(os, t);
  }
}

}  // namespace qcensus
