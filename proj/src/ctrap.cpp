#include "ctrap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <unordered_set>

#include "parallel.hpp"
#include "tdd.hpp"

namespace cflat {

double trapezoid_upper(double t, double ts, double tf, double Ds, double Df, const MetricBounds& b) {
  return std::min(Ds + b.lambda_max * (t - ts), Df + b.lambda_min * (tf - t));
}

double trapezoid_lower(double t, double ts, double tf, double Ds, double Df, const MetricBounds& b) {
  return std::max(Ds - b.lambda_min * (t - ts), Df - b.lambda_max * (tf - t));
}

namespace {

// Points where the concave gap functions can peak.
std::array<double, 4> critical_points(double ts, double tf, double Ds, double Df, const MetricBounds& b) {
  const double sum = b.lambda_max + b.lambda_min;
  double up = ts, low = ts;
  if (sum > 0) {
    up = (Df - Ds + b.lambda_max * ts + b.lambda_min * tf) / sum;
    low = (Ds - Df + b.lambda_min * ts + b.lambda_max * tf) / sum;
  }
  return {ts, tf, std::clamp(up, ts, tf), std::clamp(low, ts, tf)};
}

void check_interval(double ts, double tf, double eps) {
  if (!(ts < tf)) throw std::invalid_argument("invalid interval: ts must be < tf");
  if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
}

}  // namespace

double trapezoid_gap(double ts, double tf, double Ds, double Df, const MetricBounds& b) {
  double gap = -kInf;
  for (double t : critical_points(ts, tf, Ds, Df, b)) {
    gap = std::max(gap, trapezoid_upper(t, ts, tf, Ds, Df, b) - trapezoid_lower(t, ts, tf, Ds, Df, b));
  }
  return gap;
}

bool mae_ok(double Ds, double Df, double ts, double tf, double eps, const MetricBounds& b, MaeMode mode) {
  check_interval(ts, tf, eps);
  if (mode == MaeMode::kLiteral) return std::min(Ds, Df) >= (1.0 + 1.0 / eps) * b.lambda_max;
  return trapezoid_gap(ts, tf, Ds, Df, b) <= eps * std::min(Ds, Df);
}

bool trapezoid_relative_ok(double Ds, double Df, double ts, double tf, double eps, const MetricBounds& b) {
  check_interval(ts, tf, eps);
  for (double t : critical_points(ts, tf, Ds, Df, b)) {
    const double up = trapezoid_upper(t, ts, tf, Ds, Df, b);
    const double low = trapezoid_lower(t, ts, tf, Ds, Df, b);
    if (up > (1.0 + eps) * low) return false;
  }
  return true;
}

bool almost_constant(double Ds, double Dmid, double Df) {
  return std::abs(Ds - Dmid) <= kTimeEps && std::abs(Dmid - Df) <= kTimeEps;
}

std::vector<VertexId> dedup(const std::vector<std::vector<double>>& deps,
                            const std::vector<std::pair<double, double>>& hashes,
                            const std::vector<char>& eligible) {
  const std::size_t n = deps.size();
  if (hashes.size() != n || eligible.size() != n) throw std::invalid_argument("dedup input sizes differ");
  std::vector<VertexId> rep(n);
  std::vector<VertexId> order;
  for (VertexId v = 0; v < n; ++v) {
    rep[v] = v;
    if (eligible[v]) order.push_back(v);
  }
  std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
    return std::tie(hashes[a].first, hashes[a].second, a) < std::tie(hashes[b].first, hashes[b].second, b);
  });
  std::vector<VertexId> owners;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && hashes[order[j]] == hashes[order[i]]) ++j;
    owners.clear();
    for (std::size_t k = i; k < j; ++k) {
      const VertexId v = order[k];
      auto it = std::find_if(owners.begin(), owners.end(), [&](VertexId o) { return deps[o] == deps[v]; });
      if (it != owners.end()) {
        rep[v] = *it;
      } else {
        owners.push_back(v);
      }
    }
    i = j;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Chunk payload

namespace {

constexpr std::uint64_t kUnreachableOffset = ~std::uint64_t{0};

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <class T>
T get(const std::uint8_t* p) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(p[i]) << (8 * i);
  return value;
}

}  // namespace

LandmarkSummary pack(VertexId landmark, double period, const std::vector<DestinationEntry>& entries) {
  const std::size_t n = entries.size();
  std::vector<std::uint8_t> records;
  std::vector<std::uint64_t> offsets(n, kUnreachableOffset);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& e = entries[v];
    if (e.kind == RecordKind::kUnreachable) continue;
    offsets[v] = records.size();
    records.push_back(static_cast<std::uint8_t>(e.kind));
    if (e.kind == RecordKind::kUnique) {
      records.push_back(e.preds.at(0));
      continue;
    }
    put<std::uint32_t>(records, static_cast<std::uint32_t>(e.preds.size()));
    records.insert(records.end(), e.preds.begin(), e.preds.end());
    if (e.kind == RecordKind::kOwned) {
      if (e.deps.size() != e.preds.size()) throw std::invalid_argument("owned record length mismatch");
      for (auto q : e.deps) put<std::uint16_t>(records, q.index);
    } else {
      put<std::uint32_t>(records, e.representative);
    }
  }
  std::vector<std::uint8_t> payload;
  payload.reserve(8 * n + records.size());
  for (auto o : offsets) put<std::uint64_t>(payload, o);
  payload.insert(payload.end(), records.begin(), records.end());
  return LandmarkSummary(landmark, n, period, std::move(payload));
}

LandmarkSummary::LandmarkSummary(VertexId landmark, std::size_t n, double period,
                                 std::vector<std::uint8_t> payload)
    : landmark_(landmark), n_(n), period_(period), payload_(std::move(payload)) {
  if (payload_.size() < 8 * n_) throw std::runtime_error("summary payload shorter than its offset index");
}

const std::uint8_t* LandmarkSummary::record(VertexId v) const {
  if (v >= n_) throw std::out_of_range("destination out of range");
  const auto off = get<std::uint64_t>(payload_.data() + 8 * std::size_t{v});
  if (off == kUnreachableOffset) return nullptr;
  const std::size_t base = 8 * n_;
  if (off >= payload_.size() - base) throw std::runtime_error("corrupt summary offset");
  return payload_.data() + base + off;
}

RecordKind LandmarkSummary::kind(VertexId v) const {
  const auto* r = record(v);
  return r ? static_cast<RecordKind>(r[0]) : RecordKind::kUnreachable;
}

std::size_t LandmarkSummary::count(VertexId v) const {
  const auto* r = record(v);
  if (!r) return 0;
  return r[0] == 0 ? 1 : get<std::uint32_t>(r + 1);
}

std::uint8_t LandmarkSummary::pred(VertexId v, std::size_t i) const {
  const auto* r = record(v);
  if (!r) throw std::out_of_range("destination unreachable from landmark");
  return r[0] == 0 ? r[1] : r[5 + i];
}

VertexId LandmarkSummary::representative(VertexId v) const {
  const auto* r = record(v);
  if (!r || r[0] != static_cast<std::uint8_t>(RecordKind::kShared)) return v;
  return get<std::uint32_t>(r + 5 + get<std::uint32_t>(r + 1));
}

QuantizedTime LandmarkSummary::dep(VertexId v, std::size_t i) const {
  const auto* r = record(v);
  if (!r) throw std::out_of_range("destination unreachable from landmark");
  if (r[0] == 0) return {0};
  if (r[0] == static_cast<std::uint8_t>(RecordKind::kShared)) r = record(representative(v));
  const auto c = get<std::uint32_t>(r + 1);
  return {get<std::uint16_t>(r + 5 + c + 2 * i)};
}

namespace {

double wrap(double t, double period) {
  double x = std::fmod(t, period);
  if (x < 0) x += period;
  return x >= period ? 0.0 : x;
}

template <class DepAt, class PredAt>
PredInterval lookup_sorted(std::size_t c, DepAt dep_at, PredAt pred_at, double period, double t) {
  const double x = wrap(t, period);
  // Largest i with dep(i) <= x.
  std::size_t lo = 0, hi = c;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (dep_at(mid) <= x) lo = mid + 1;
    else hi = mid;
  }
  PredInterval r;
  if (lo == 0) {
    r.pred_lo = pred_at(c - 1);
    r.pred_hi = pred_at(0);
    r.t_lo = dep_at(c - 1) - period;
    r.t_hi = dep_at(0);
  } else if (lo == c) {
    r.pred_lo = pred_at(c - 1);
    r.pred_hi = pred_at(0);
    r.t_lo = dep_at(c - 1);
    r.t_hi = dep_at(0) + period;
  } else {
    r.pred_lo = pred_at(lo - 1);
    r.pred_hi = pred_at(lo);
    r.t_lo = dep_at(lo - 1);
    r.t_hi = dep_at(lo);
  }
  return r;
}

}  // namespace

PredInterval pred_lookup(const LandmarkSummary& s, VertexId v, double t_l) {
  const auto kind = s.kind(v);
  if (kind == RecordKind::kUnreachable) {
    throw std::out_of_range("vertex " + std::to_string(v) + " unreachable in summary of landmark " +
                            std::to_string(s.landmark()));
  }
  if (kind == RecordKind::kUnique) {
    const auto p = s.pred(v, 0);
    return {p, p, 0.0, s.period()};
  }
  const double scale = quantization_scale(s.period());
  return lookup_sorted(
      s.count(v), [&](std::size_t i) { return dequantize(s.dep(v, i), scale); },
      [&](std::size_t i) { return s.pred(v, i); }, s.period(), t_l);
}

PredInterval pred_lookup(std::span<const std::uint8_t> preds, std::span<const double> deps, double period,
                         double t_l) {
  if (preds.size() != deps.size() || preds.empty()) throw std::invalid_argument("bad predecessor sequence");
  if (preds.size() == 1) return {preds[0], preds[0], 0.0, period};
  return lookup_sorted(
      preds.size(), [&](std::size_t i) { return deps[i]; }, [&](std::size_t i) { return preds[i]; },
      period, t_l);
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

struct Interval {
  double a, b, Da, Db;
  VertexId v;
};

struct Sample {
  double t;
  std::uint8_t pred;
};

class WeightStream {
 public:
  WeightStream(std::uint64_t seed, VertexId landmark) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), landmark};
    rng_.seed(seq);
  }
  std::pair<double, double> next() { return {draw(), draw()}; }

 private:
  double draw() {
    std::uniform_real_distribution<double> u(1.0, 100.0);
    for (;;) {
      const double w = u(rng_);
      if (used_.insert(w).second) return w;
    }
  }
  std::mt19937_64 rng_;
  std::unordered_set<double> used_;
};

class Sampler {
 public:
  Sampler(const Instance& g, VertexId landmark, const CtrapParams& p, CtrapTrace* trace)
      : g_(g), l_(landmark), p_(p), trace_(trace), weights_(p.seed, landmark), samples_(g.num_vertices()),
        hashes_(g.num_vertices(), {0.0, 0.0}), mark_(g.num_vertices(), 0) {}

  CtrapResult run();

 private:
  void sample(double t, const std::vector<VertexId>& needy);
  bool deactivate(const Interval& iv, MetricBounds& used);
  MetricBounds bounds_for(double cap);
  void test(const Interval& iv, std::vector<Interval>& next);

  const Instance& g_;
  VertexId l_;
  const CtrapParams& p_;
  CtrapTrace* trace_;
  WeightStream weights_;
  SearchWorkspace ws_;
  Tree tree_;
  std::vector<std::vector<Sample>> samples_;
  std::vector<std::pair<double, double>> hashes_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<VertexId> closure_;
  std::vector<MetricBounds> by_hops_;
};

// Same values as PathSlopeModel::for_cost, memoized per hop count.
MetricBounds Sampler::bounds_for(double cap) {
  if (!(p_.slopes.min_arc_time > 0) || !std::isfinite(cap)) return p_.slopes.arc;
  const double h = p_.slopes.hops(cap);
  if (h > 1e6) return p_.slopes.for_hops(h);
  const auto i = static_cast<std::size_t>(h);
  if (by_hops_.size() <= i) {
    const std::size_t old = by_hops_.size();
    by_hops_.resize(std::max(i + 1, 2 * old));
    for (std::size_t k = old; k < by_hops_.size(); ++k) by_hops_[k] = p_.slopes.for_hops(static_cast<double>(k));
  }
  return by_hops_[i];
}

// Computes the tree at t and records (t, pred) for the needy destinations
// and every tree ancestor, so PRED chains are exact at t.
void Sampler::sample(double t, const std::vector<VertexId>& needy) {
  tdd_tree(g_, l_, t, ws_, tree_);
  const auto [w1, w2] = weights_.next();
  if (trace_) {
    trace_->sample_times.push_back(t);
    ++trace_->trees;
  }
  ++stamp_;
  closure_.clear();
  for (VertexId v : needy) {
    for (VertexId u = v; u != l_ && mark_[u] != stamp_;) {
      mark_[u] = stamp_;
      closure_.push_back(u);
      u = g_.tail(g_.in_arcs(u)[tree_.parent[u]]);
    }
  }
  for (VertexId u : closure_) {
    samples_[u].push_back({t, tree_.parent[u]});
    hashes_[u].first += w1 * t;
    hashes_[u].second += w2 * t;
  }
}

bool Sampler::deactivate(const Interval& iv, MetricBounds& used) {
  if (p_.mode == MaeMode::kLiteral) {
    used = p_.slopes.arc;
    return mae_ok(iv.Da, iv.Db, iv.a, iv.b, p_.epsilon, used, MaeMode::kLiteral);
  }
  // FIFO caps D on the interval by Db + (b - a); the upper envelope then
  // tightens the cap, which tightens the path slope bounds.
  double cap = iv.Db + (iv.b - iv.a);
  for (int i = 0; i < 3; ++i) {
    const MetricBounds b = bounds_for(cap);
    double peak = -kInf;
    for (double t : critical_points(iv.a, iv.b, iv.Da, iv.Db, b)) {
      peak = std::max(peak, trapezoid_upper(t, iv.a, iv.b, iv.Da, iv.Db, b));
    }
    cap = std::min(cap, peak);
  }
  used = bounds_for(cap);
  return mae_ok(iv.Da, iv.Db, iv.a, iv.b, p_.epsilon, used, MaeMode::kGeometric) &&
         trapezoid_relative_ok(iv.Da, iv.Db, iv.a, iv.b, p_.epsilon, used);
}

void Sampler::test(const Interval& iv, std::vector<Interval>& next) {
  MetricBounds used;
  if (deactivate(iv, used)) {
    if (trace_) trace_->events.push_back({iv.v, iv.a, iv.b, iv.Da, iv.Db, used, false});
  } else {
    next.push_back(iv);
  }
}

CtrapResult Sampler::run() {
  const std::size_t n = g_.num_vertices();
  const double T = g_.period();
  if (l_ >= n) throw std::out_of_range("landmark out of range");
  if (!(p_.epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(p_.tau_start > 0) || !(p_.tau_floor > 0)) throw std::invalid_argument("sampling steps must be positive");

  const std::vector<double> grid = round0_grid(T, p_.tau_start, p_.window);

  CtrapResult result;
  result.reachable.assign(n, 0);
  std::vector<VertexId> all;
  std::vector<std::vector<double>> D(grid.size());
  freeflow_search(g_, l_, false, ws_, [&](VertexId v, double) {
    if (v != l_) result.reachable[v] = 1;
    return true;
  });
  for (VertexId v = 0; v < n; ++v) {
    if (result.reachable[v]) all.push_back(v);
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    sample(grid[k], all);
    D[k].resize(n);
    for (VertexId v : all) D[k][v] = tree_.arrival[v] - grid[k];
  }

  // Without a window the last interval wraps to T, where D(T) = D(0).
  std::vector<Interval> active, next;
  const std::size_t intervals = p_.window ? grid.size() - 1 : grid.size();
  for (VertexId v : all) {
    for (std::size_t k = 0; k < intervals; ++k) {
      const bool wraps = k + 1 == grid.size();
      const double b = wraps ? T : grid[k + 1];
      const double Db = wraps ? D[0][v] : D[k + 1][v];
      test({grid[k], b, D[k][v], Db, v}, active);
    }
  }
  D.clear();

  std::vector<VertexId> needy;
  while (!active.empty()) {
    std::vector<VertexId> stuck;
    for (const auto& iv : active) {
      if ((iv.b - iv.a) / 2 < p_.tau_floor) stuck.push_back(iv.v);
    }
    if (!stuck.empty()) {
      std::sort(stuck.begin(), stuck.end());
      stuck.erase(std::unique(stuck.begin(), stuck.end()), stuck.end());
      std::string names;
      for (std::size_t i = 0; i < stuck.size() && i < 10; ++i) names += (i ? ", " : "") + std::to_string(stuck[i]);
      throw CtrapError("landmark " + std::to_string(l_) + ": sampling step below floor with " +
                       std::to_string(stuck.size()) + " active destination(s): " + names);
    }
    std::sort(active.begin(), active.end(), [](const Interval& x, const Interval& y) {
      const double mx = (x.a + x.b) / 2, my = (y.a + y.b) / 2;
      return mx < my || (mx == my && x.v < y.v);
    });
    next.clear();
    for (std::size_t i = 0; i < active.size();) {
      const double t = (active[i].a + active[i].b) / 2;
      std::size_t j = i;
      needy.clear();
      while (j < active.size() && (active[j].a + active[j].b) / 2 == t) needy.push_back(active[j++].v);
      sample(t, needy);
      for (std::size_t k = i; k < j; ++k) {
        const auto& iv = active[k];
        const double Dm = tree_.arrival[iv.v] - t;
        if (almost_constant(iv.Da, Dm, iv.Db)) {
          if (trace_) trace_->events.push_back({iv.v, iv.a, iv.b, iv.Da, iv.Db, {}, true});
          continue;
        }
        test({iv.a, t, iv.Da, Dm, iv.v}, next);
        test({t, iv.b, Dm, iv.Db, iv.v}, next);
      }
      i = j;
    }
    std::swap(active, next);
  }

  result.merged.resize(n);
  result.hashes = hashes_;
  if (trace_) {
    trace_->sampled.assign(n, {});
    trace_->hashes = hashes_;
  }
  for (VertexId v = 0; v < n; ++v) {
    auto& s = samples_[v];
    std::stable_sort(s.begin(), s.end(), [](const Sample& x, const Sample& y) { return x.t < y.t; });
    RawSequence seq;
    seq.preds.reserve(s.size());
    seq.deps.reserve(s.size());
    for (const auto& x : s) {
      seq.preds.push_back(x.pred);
      seq.deps.push_back(x.t);
    }
    s.clear();
    s.shrink_to_fit();
    if (trace_) trace_->sampled[v] = seq;
    merge(seq.preds, seq.deps);
    result.merged[v] = std::move(seq);
  }
  if (trace_) trace_->merged = result.merged;
  return result;
}

}  // namespace

std::vector<double> round0_grid(double period, double step,
                                const std::optional<std::pair<double, double>>& window) {
  std::vector<double> grid;
  for (std::size_t k = 0; static_cast<double>(k) * step < period; ++k) grid.push_back(static_cast<double>(k) * step);
  if (!window) return grid;
  const auto [first, second] = *window;
  if (!(0 <= first && first <= second && second < period)) throw std::invalid_argument("sampling window outside [0,T)");
  grid.push_back(period);
  std::size_t lo = 0, hi = grid.size() - 1;
  while (lo + 1 < grid.size() && grid[lo + 1] < first) ++lo;
  while (hi > lo + 1 && grid[hi - 1] > second) --hi;
  return {grid.begin() + static_cast<std::ptrdiff_t>(lo), grid.begin() + static_cast<std::ptrdiff_t>(hi) + 1};
}

CtrapResult ctrap_sample(const Instance& g, VertexId landmark, const CtrapParams& p, CtrapTrace* trace) {
  Sampler s(g, landmark, p, trace);
  return s.run();
}

LandmarkSummary ctrap(const Instance& g, VertexId landmark, const CtrapParams& p, CtrapTrace* trace) {
  if (p.window) throw std::invalid_argument("windowed runs produce overlays, not summaries");
  CtrapResult r = ctrap_sample(g, landmark, p, trace);
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<double>> deps(n);
  std::vector<char> eligible(n, 0);
  for (VertexId v = 0; v < n; ++v) {
    eligible[v] = r.reachable[v] && r.merged[v].preds.size() > 1;
    if (eligible[v]) deps[v] = r.merged[v].deps;
  }
  const auto rep = dedup(deps, r.hashes, eligible);
  const double scale = quantization_scale(g.period());
  std::vector<DestinationEntry> entries(n);
  for (VertexId v = 0; v < n; ++v) {
    auto& e = entries[v];
    if (!r.reachable[v]) continue;
    e.preds = std::move(r.merged[v].preds);
    if (!eligible[v]) {
      e.kind = RecordKind::kUnique;
    } else if (rep[v] != v) {
      e.kind = RecordKind::kShared;
      e.representative = rep[v];
    } else {
      e.kind = RecordKind::kOwned;
      for (double t : deps[v]) {
        const auto q = quantize(t, scale);
        if (!e.deps.empty() && q.index <= e.deps.back().index) {
          throw CtrapError("departure times collide after quantization at destination " + std::to_string(v));
        }
        e.deps.push_back(q);
      }
    }
  }
  return pack(landmark, g.period(), entries);
}

std::vector<LandmarkSummary> preprocess(const Instance& g, const std::vector<VertexId>& landmarks,
                                        const CtrapParams& p, std::size_t threads) {
  std::vector<LandmarkSummary> out(landmarks.size());
  parallel_for(landmarks.size(), threads, [&](std::size_t i) { out[i] = ctrap(g, landmarks[i], p); });
  return out;
}

}  // namespace cflat
