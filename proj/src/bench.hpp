#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfca.hpp"

namespace cflat {

struct BenchQuery {
  VertexId origin;
  VertexId destination;
  double departure;
};

struct Workload {
  std::vector<BenchQuery> queries;
  std::size_t resampled = 0;  // pairs drawn again because d was unreachable
};

/// Uniform over V x V x [0, T) with a fixed seed.
Workload make_workload(const Oracle& oracle, std::size_t count, std::uint64_t seed);

enum class Baseline { kTdd, kFreeflow };

struct BenchOptions {
  std::vector<std::size_t> ns{1, 2, 4, 6};
  Baseline baseline = Baseline::kTdd;
  std::size_t threads = 1;  // > 1 drops all wall-time measurements
};

struct BenchRow {
  std::size_t query = 0;
  BenchQuery q{};
  std::size_t n = 0;
  double cost = 0;
  double exact_cost = 0;  // TDD
  double error = 0;       // percent against TDD
  bool exact = false, fallback = false;
  std::size_t step1_settled = 0, step1_relaxed = 0, landmarks_settled = 0;
  std::size_t step2_visited = 0, marked_arcs = 0;
  std::size_t step3_settled = 0, step3_relaxed = 0;
  double step1_ms = 0, step2_ms = 0, step3_ms = 0;
};

struct BaselineRow {
  double cost = 0;
  double error = 0;  // percent against TDD; 0 for the TDD baseline itself
  std::size_t settled = 0;
  double ms = 0;
};

struct BenchSummary {
  std::size_t n = 0;
  double avg_error = 0, max_error = 0;
  double avg_ms = 0;
  double avg_settled = 0;
  double exact_share = 0;
  std::size_t fallbacks = 0;
  std::vector<double> sorted_errors;  // ascending

  /// Empirical q-quantile (nearest rank), q in [0, 1].
  double quantile(double q) const;
  /// Share of queries with error <= x percent.
  double fraction_within(double x) const;
};

struct BenchReport {
  Baseline baseline = Baseline::kTdd;
  bool timed = true;
  std::size_t resampled = 0;
  std::vector<BaselineRow> baseline_rows;  // one per query
  std::vector<BenchRow> rows;              // query-major, one per (query, N)
  std::vector<BenchSummary> summaries;     // one per N
  double baseline_avg_ms = 0, baseline_avg_settled = 0, baseline_avg_error = 0;
};

BenchReport run_bench(const Oracle& oracle, const Workload& w, const BenchOptions& opt);

/// Rows with a header line. Wall-time columns are left out of untimed reports.
void write_csv(std::ostream& out, const BenchReport& r);
/// Aggregates as a JSON object.
std::string aggregate_json(const BenchReport& r);
/// Error tails per N: share of queries within fixed error levels and the
/// upper quantiles.
std::string quantile_table(const BenchReport& r);

}  // namespace cflat
