#include "qcensus/report.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace qcensus;

namespace {

CensusReport small_pairs_run(std::uint64_t seed = 11) {
  ExperimentConfig c;
  c.kind = ExperimentKind::pairs;
  c.n_qubits = 3;
  c.samples = 200;
  c.seed = seed;
  c.shards = 2;
  c.bins = 8;
  return run_pair_census(c);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / ("qcensus_report_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST(Csv, EmptyReportIsHeaderOnly) {
  std::ostringstream os;
  write_stats_csv(os, ReportTables{});
  EXPECT_EQ(os.str(), std::string(kStatsHeader) + "\n");
  std::ostringstream hs;
  write_histogram_csv(hs, ReportTables{});
  EXPECT_EQ(hs.str(), "measure,bin_lo,bin_hi,count,density,zero_count\n");
  EXPECT_STREQ(kStatsHeader, "kind,n_qubits,subset_size,transpose_size,statistic,mean,stderr,count,seed,shards");
}

TEST(Csv, RowsRoundTripDoubles) {
  const CensusReport r = small_pairs_run();
  std::ostringstream os;
  write_stats_csv(os, tables_of(r));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 10u);
    EXPECT_EQ(f[0], "pairs");
    EXPECT_EQ(std::stod(f[5]), r.stats[rows].mean);
    EXPECT_EQ(f[8], "11");
    EXPECT_EQ(f[9], "2");
    ++rows;
  }
  EXPECT_EQ(rows, r.stats.size());
}

TEST(Json, ReparseAndReemitIsByteIdentical) {
  const std::string a = canonical_json(report_json(small_pairs_run()));
  const std::string b = canonical_json(nlohmann::json::parse(a));
  EXPECT_EQ(a, b);
  const auto doc = nlohmann::json::parse(a);
  EXPECT_TRUE(doc.contains("config"));
  EXPECT_EQ(doc["stats"][0].size(), 10u);
  EXPECT_EQ(doc["histogram"].size(), 8u);
  EXPECT_EQ(canonical_json(report_json(ReportTables{}, nlohmann::json::object())),
            canonical_json(nlohmann::json::parse(canonical_json(report_json(ReportTables{}, nlohmann::json::object())))));
}

TEST(Files, CsvWritesCompanionHistogramAndRerunIsIdentical) {
  const std::string dir = temp_dir();
  const std::string path = dir + "/run.csv";
  const auto written = emit_report(small_pairs_run(), OutputFormat::csv, path);
  ASSERT_EQ(written.size(), 2u);
  EXPECT_EQ(written[1], dir + "/run.hist.csv");
  const std::string first = slurp(path), first_hist = slurp(written[1]);
  emit_report(small_pairs_run(), OutputFormat::csv, path);
  EXPECT_EQ(slurp(path), first);
  EXPECT_EQ(slurp(written[1]), first_hist);
  EXPECT_EQ(first_hist.substr(0, first_hist.find('\n')), kHistogramHeader);
  std::filesystem::remove_all(dir);
}

TEST(Files, UnwritablePathRaisesWithPath) {
  try {
    emit_report(small_pairs_run(), OutputFormat::json, "/nonexistent-dir/x.json");
    FAIL() << "expected ReportIoError";
  } catch (const ReportIoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.json"), std::string::npos);
  }
}

TEST(Files, HistogramPathNaming) {
  EXPECT_EQ(histogram_path("a/b.csv"), "a/b.hist.csv");
  EXPECT_EQ(histogram_path("a.b/c"), "a.b/c.hist.csv");
  EXPECT_EQ(histogram_path("out"), "out.hist.csv");
}

TEST(FormatDouble, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 2.0 / 5.0, 1e-300, 123456789.123456789})
    EXPECT_EQ(std::stod(format_double(x)), x);
}
