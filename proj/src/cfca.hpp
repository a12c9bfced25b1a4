#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "contraction.hpp"
#include "live.hpp"
#include "store.hpp"
#include "tdd.hpp"

namespace cflat {

/// Arcs kept for the restricted search of Step 3.
struct MarkedSubgraph {
  std::vector<char> marked;  // per arc of the searched graph
  std::vector<ArcId> arcs;   // in marking order
  std::size_t visited = 0;   // vertices popped from the work queue
};

/// Summaries and live overlay consulted while marking.
struct SummarySource {
  const Store* store = nullptr;
  const TemporalOverlay* overlay = nullptr;
  double now = kNever;
};

/// Backward marking from d. `core` is the graph the summaries index into;
/// g is either that graph or an expanded view of it.
template <class G>
MarkedSubgraph mark_subgraph(const G& g, const Instance& core, const Ball<G>& ball,
                             std::span<const SettledLandmark> settled, const SummarySource& src, VertexId d) {
  MarkedSubgraph m;
  m.marked.assign(g.num_arcs(), 0);
  std::vector<char> enqueued(g.num_vertices(), 0);
  std::deque<VertexId> queue{d};
  enqueued[d] = 1;
  auto mark = [&](ArcId a) {
    if (m.marked[a]) return;
    m.marked[a] = 1;
    m.arcs.push_back(a);
  };
  auto push = [&](VertexId v) {
    if (enqueued[v]) return;
    enqueued[v] = 1;
    queue.push_back(v);
  };

  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    ++m.visited;
    if (ball.reached(v)) {
      // ox-path along the ball's parent pointers; a marked arc means the rest is marked too
      for (ArcId a = ball.parent(v); a != kNoArc && !m.marked[a]; a = ball.parent(g.tail(a))) mark(a);
      // a frontier label may still improve, so its predecessors are followed too
      if (ball.settled(v)) continue;
    }
    if (!core.is_active(v)) {
      g.for_each_in(v, [&](ArcId a) {
        mark(a);
        push(g.tail(a));
      });
      continue;
    }
    const auto in = core.in_arcs(v);
    for (const auto& s : settled) {
      if (!src.store->summary(s.index).reachable(v)) continue;
      const PredInterval p = lookup_with_overlay(*src.store, src.overlay, s.index, v, s.arrival, src.now);
      for (std::uint8_t pos : {p.pred_lo, p.pred_hi}) {
        if (pos == kNoPred) continue;
        if (pos >= in.size()) throw std::out_of_range("predecessor position out of range");
        mark(in[pos]);
        push(core.tail(in[pos]));
      }
    }
  }
  return m;
}

namespace detail {
inline double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}
}  // namespace detail

/// CFCA(N) on one graph. Path arcs are ids of g.
template <class G>
QueryResult cfca_search(const G& g, const Instance& core, const SummarySource& src,
                        const std::vector<std::int32_t>& landmark_index, VertexId o, VertexId d, double t0,
                        std::size_t n_landmarks, SearchWorkspace& ws) {
  using clock = std::chrono::steady_clock;
  if (o >= g.num_vertices() || d >= g.num_vertices()) throw std::out_of_range("vertex out of range");
  if (!(t0 >= 0 && t0 < g.period())) throw std::invalid_argument("departure time outside [0,T)");
  QueryResult r;

  auto start = clock::now();
  Ball<G> ball(g, ws, o, t0);
  const auto settled = grow_ball(ball, landmark_index, n_landmarks, d);
  r.step1 = ball.counters();
  r.landmarks_settled = settled.size();
  r.step1_ms = detail::ms_since(start);

  auto fallback = [&]() {
    start = clock::now();
    QueryResult full = tdd_query(g, o, d, t0, ws);
    r.step3.settled += full.step1.settled;
    r.step3.relaxed += full.step1.relaxed;
    r.step3_ms += detail::ms_since(start);
    r.cost = full.cost;
    r.path = std::move(full.path);
    r.fallback = true;
    return r;
  };

  if (ball.settled(d)) {
    r.exact = true;
    r.cost = ball.arrival(d) - t0;
    r.path = ball.path_to(d);
    return r;
  }
  if (settled.empty()) return fallback();

  start = clock::now();
  const MarkedSubgraph m = mark_subgraph(g, core, ball, settled, src, d);
  r.step2_visited = m.visited;
  r.marked_arcs = m.arcs.size();
  r.step2_ms = detail::ms_since(start);

  start = clock::now();
  ball.reset_counters();
  for (;;) {
    const VertexId u = ball.step([&](ArcId a) { return m.marked[a] != 0; });
    if (u == kNoVertex) break;
    if (u == d) {
      r.step3 = ball.counters();
      r.step3_ms = detail::ms_since(start);
      r.cost = ball.arrival(d) - t0;
      r.path = ball.path_to(d);
      return r;
    }
  }
  r.step3 = ball.counters();
  r.step3_ms = detail::ms_since(start);
  return fallback();
}

/// 100 * (approx - exact) / exact. Throws std::domain_error when exact is 0
/// and approx is not.
double relative_error(double approx, double exact);

/// Query front end over an immutable instance and summary store, optionally
/// contracted and optionally carrying a live update.
class Oracle {
 public:
  Oracle(std::shared_ptr<const Instance> graph, std::shared_ptr<const Store> store);
  /// Summaries built on c.core; queries and paths use original vertex and arc ids.
  Oracle(std::shared_ptr<const ContractedInstance> c, std::shared_ptr<const Instance> original,
         std::shared_ptr<const Store> store);

  QueryResult cfca(VertexId o, VertexId d, double t0, std::size_t n_landmarks, SearchWorkspace& ws,
                   double now = kNever) const;
  QueryResult tdd(VertexId o, VertexId d, double t0, SearchWorkspace& ws, double now = kNever) const;
  QueryResult freeflow(VertexId o, VertexId d, double t0, double now = kNever) const;

  /// Atomically replaces the live update (nullptr clears it).
  void install(std::shared_ptr<const LiveUpdate> update);
  std::shared_ptr<const LiveUpdate> live() const;

  /// Instance searched at time `now` (the disrupted one while a live update is unexpired).
  const Instance& graph(const LiveUpdate* live, double now) const;
  /// Instance that paths and costs refer to.
  const Instance& path_graph() const { return original_ ? *original_ : *graph_; }
  const Instance& summary_graph() const { return *graph_; }
  const Store& store() const { return *store_; }
  const std::vector<std::int32_t>& landmark_index() const { return landmark_index_; }
  bool contracted() const { return contracted_ != nullptr; }

 private:
  template <class Search>
  QueryResult dispatch(VertexId o, VertexId d, const Instance& g, double t0, Search&& search) const;

  std::shared_ptr<const Instance> graph_;
  std::shared_ptr<const ContractedInstance> contracted_;
  std::shared_ptr<const Instance> original_;
  std::shared_ptr<const Store> store_;
  std::vector<std::int32_t> landmark_index_;
  std::shared_ptr<const LiveUpdate> live_;
};

}  // namespace cflat
