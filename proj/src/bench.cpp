#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"

namespace cflat {

namespace {

constexpr double kLevels[] = {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
constexpr double kTails[] = {0.5, 0.9, 0.99, 0.999};

const char* baseline_name(Baseline b) { return b == Baseline::kTdd ? "tdd" : "dijff"; }

}  // namespace

Workload make_workload(const Oracle& oracle, std::size_t count, std::uint64_t seed) {
  const Instance& g = oracle.path_graph();
  if (g.num_vertices() == 0) throw std::invalid_argument("empty instance");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> vertex(0, static_cast<VertexId>(g.num_vertices() - 1));
  std::uniform_real_distribution<double> time(0.0, g.period());
  Workload w;
  std::size_t attempts = 0;
  while (w.queries.size() < count) {
    if (++attempts > 100 * count + 1000) throw std::runtime_error("too many unreachable query pairs");
    BenchQuery q{vertex(rng), vertex(rng), time(rng)};
    try {
      oracle.freeflow(q.origin, q.destination, q.departure);
    } catch (const UnreachableError&) {
      ++w.resampled;
      continue;
    }
    w.queries.push_back(q);
  }
  return w;
}

double BenchSummary::quantile(double q) const {
  if (sorted_errors.empty()) return 0;
  const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted_errors.size())));
  return sorted_errors[std::min(sorted_errors.size() - 1, k == 0 ? 0 : k - 1)];
}

double BenchSummary::fraction_within(double x) const {
  if (sorted_errors.empty()) return 0;
  const auto k = std::upper_bound(sorted_errors.begin(), sorted_errors.end(), x) - sorted_errors.begin();
  return static_cast<double>(k) / static_cast<double>(sorted_errors.size());
}

BenchReport run_bench(const Oracle& oracle, const Workload& w, const BenchOptions& opt) {
  if (opt.ns.empty()) throw std::invalid_argument("no landmark counts given");
  BenchReport r;
  r.baseline = opt.baseline;
  r.timed = opt.threads <= 1;
  r.resampled = w.resampled;
  const std::size_t k = opt.ns.size();
  r.baseline_rows.resize(w.queries.size());
  r.rows.resize(w.queries.size() * k);

  parallel_for(w.queries.size(), opt.threads, [&](std::size_t i) {
    thread_local SearchWorkspace ws;
    const BenchQuery& q = w.queries[i];
    auto start = std::chrono::steady_clock::now();
    const QueryResult exact = oracle.tdd(q.origin, q.destination, q.departure, ws);
    const double exact_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    BaselineRow& b = r.baseline_rows[i];
    if (opt.baseline == Baseline::kTdd) {
      b.cost = exact.cost;
      b.settled = exact.total_settled();
      b.ms = exact_ms;
    } else {
      start = std::chrono::steady_clock::now();
      const QueryResult ff = oracle.freeflow(q.origin, q.destination, q.departure);
      b.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      b.cost = ff.cost;
      b.settled = ff.total_settled();
      b.error = relative_error(ff.cost, exact.cost);
    }
    for (std::size_t j = 0; j < k; ++j) {
      const QueryResult c = oracle.cfca(q.origin, q.destination, q.departure, opt.ns[j], ws);
      BenchRow& row = r.rows[i * k + j];
      row.query = i;
      row.q = q;
      row.n = opt.ns[j];
      row.cost = c.cost;
      row.exact_cost = exact.cost;
      row.error = relative_error(c.cost, exact.cost);
      row.exact = c.exact;
      row.fallback = c.fallback;
      row.step1_settled = c.step1.settled;
      row.step1_relaxed = c.step1.relaxed;
      row.landmarks_settled = c.landmarks_settled;
      row.step2_visited = c.step2_visited;
      row.marked_arcs = c.marked_arcs;
      row.step3_settled = c.step3.settled;
      row.step3_relaxed = c.step3.relaxed;
      row.step1_ms = c.step1_ms;
      row.step2_ms = c.step2_ms;
      row.step3_ms = c.step3_ms;
    }
  });

  const double count = static_cast<double>(std::max<std::size_t>(1, w.queries.size()));
  for (const auto& b : r.baseline_rows) {
    r.baseline_avg_ms += b.ms / count;
    r.baseline_avg_settled += static_cast<double>(b.settled) / count;
    r.baseline_avg_error += b.error / count;
  }
  for (std::size_t j = 0; j < k; ++j) {
    BenchSummary s;
    s.n = opt.ns[j];
    for (std::size_t i = 0; i < w.queries.size(); ++i) {
      const BenchRow& row = r.rows[i * k + j];
      s.avg_error += row.error / count;
      s.max_error = std::max(s.max_error, row.error);
      s.avg_ms += (row.step1_ms + row.step2_ms + row.step3_ms) / count;
      s.avg_settled += static_cast<double>(row.step1_settled + row.step3_settled) / count;
      s.exact_share += row.exact ? 1.0 / count : 0.0;
      s.fallbacks += row.fallback;
      s.sorted_errors.push_back(row.error);
    }
    std::sort(s.sorted_errors.begin(), s.sorted_errors.end());
    r.summaries.push_back(std::move(s));
  }
  if (!r.timed) {
    r.baseline_avg_ms = 0;
    for (auto& s : r.summaries) s.avg_ms = 0;
  }
  return r;
}

void write_csv(std::ostream& out, const BenchReport& r) {
  out << "query,origin,destination,departure,n,cost,tdd_cost,error_pct,exact,fallback,"
         "step1_settled,step1_relaxed,landmarks_settled,step2_visited,marked_arcs,step3_settled,step3_relaxed,"
         "baseline,baseline_cost,baseline_settled";
  if (r.timed) out << ",step1_ms,step2_ms,step3_ms,baseline_ms";
  out << '\n';
  for (const auto& row : r.rows) {
    const BaselineRow& b = r.baseline_rows[row.query];
    out << row.query << ',' << row.q.origin << ',' << row.q.destination << ',' << format_double(row.q.departure)
        << ',' << row.n << ',' << format_double(row.cost) << ',' << format_double(row.exact_cost) << ','
        << format_double(row.error) << ',' << row.exact << ',' << row.fallback << ',' << row.step1_settled << ','
        << row.step1_relaxed << ',' << row.landmarks_settled << ',' << row.step2_visited << ',' << row.marked_arcs
        << ',' << row.step3_settled << ',' << row.step3_relaxed << ',' << baseline_name(r.baseline) << ','
        << format_double(b.cost) << ',' << b.settled;
    if (r.timed) {
      out << ',' << format_double(row.step1_ms) << ',' << format_double(row.step2_ms) << ','
          << format_double(row.step3_ms) << ',' << format_double(b.ms);
    }
    out << '\n';
  }
}

std::string aggregate_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["queries"] = r.baseline_rows.size();
  j["resampled"] = r.resampled;
  j["baseline"] = {{"name", baseline_name(r.baseline)},
                   {"avg_settled", r.baseline_avg_settled},
                   {"avg_error_pct", r.baseline_avg_error}};
  if (r.timed) j["baseline"]["avg_ms"] = r.baseline_avg_ms;
  for (const auto& s : r.summaries) {
    nlohmann::ordered_json e;
    e["n"] = s.n;
    e["avg_error_pct"] = s.avg_error;
    e["max_error_pct"] = s.max_error;
    for (double q : kTails) e["p" + format_double(q * 100) + "_error_pct"] = s.quantile(q);
    e["avg_settled"] = s.avg_settled;
    e["settled_ratio"] = r.baseline_avg_settled > 0 ? s.avg_settled / r.baseline_avg_settled : 0.0;
    e["exact_share"] = s.exact_share;
    e["fallbacks"] = s.fallbacks;
    if (r.timed) {
      e["avg_ms"] = s.avg_ms;
      e["speedup"] = s.avg_ms > 0 ? r.baseline_avg_ms / s.avg_ms : 0.0;
    }
    j["cfca"].push_back(std::move(e));
  }
  return j.dump(2);
}

std::string quantile_table(const BenchReport& r) {
  std::ostringstream out;
  out << std::fixed;
  out << std::setw(10) << "error<=%";
  for (const auto& s : r.summaries) out << std::setw(12) << ("N=" + std::to_string(s.n));
  out << '\n';
  for (double x : kLevels) {
    out << std::setw(10) << std::setprecision(2) << x;
    for (const auto& s : r.summaries) out << std::setw(11) << std::setprecision(3) << 100 * s.fraction_within(x) << '%';
    out << '\n';
  }
  for (double q : kTails) {
    out << std::setw(10) << ("p" + format_double(q * 100));
    for (const auto& s : r.summaries) out << std::setw(12) << std::setprecision(4) << s.quantile(q);
    out << '\n';
  }
  out << std::setw(10) << "max";
  for (const auto& s : r.summaries) out << std::setw(12) << std::setprecision(4) << s.max_error;
  out << '\n';
  return out.str();
}

}  // namespace cflat
