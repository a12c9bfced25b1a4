#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace cflat {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class UnreachableError : public std::runtime_error {
 public:
  UnreachableError(VertexId o, VertexId d)
      : std::runtime_error("vertex " + std::to_string(d) + " unreachable from " +
                           std::to_string(o)) {}
};

struct StepCounters {
  std::size_t settled = 0;
  std::size_t relaxed = 0;
};

struct QueryResult {
  double cost = kInf;
  std::vector<ArcId> path;  // arcs of the searched graph, origin first
  bool exact = false;       // destination settled by the landmark ball
  bool fallback = false;    // answered by an unrestricted search

  StepCounters step1, step3;
  std::size_t landmarks_settled = 0;
  std::size_t step2_visited = 0;
  std::size_t marked_arcs = 0;
  double step1_ms = 0, step2_ms = 0, step3_ms = 0;

  std::size_t total_settled() const { return step1.settled + step3.settled; }
};

/// Per-thread scratch space for label-setting searches. Reset is O(1) amortized.
class SearchWorkspace {
 public:
  void reset(std::size_t n) {
    if (stamp_.size() < n) {
      stamp_.resize(n, 0);
      label_.resize(n);
      parent_.resize(n);
      settled_.resize(n);
    }
    if (++current_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      current_ = 1;
    }
    heap_.clear();
  }

  bool reached(VertexId v) const { return stamp_[v] == current_; }
  bool settled(VertexId v) const { return reached(v) && settled_[v]; }
  double label(VertexId v) const { return reached(v) ? label_[v] : kInf; }
  ArcId parent(VertexId v) const { return reached(v) ? parent_[v] : kNoArc; }

  // True when the label improved.
  bool improve(VertexId v, double value, ArcId via) {
    if (!reached(v)) {
      stamp_[v] = current_;
      settled_[v] = 0;
    } else if (settled_[v] || !(value < label_[v])) {
      return false;
    }
    label_[v] = value;
    parent_[v] = via;
    heap_.push_back({value, v});
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
    return true;
  }

  // Next vertex to settle, or kNoVertex. Skips stale heap entries.
  VertexId pop() {
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
      const auto [key, v] = heap_.back();
      heap_.pop_back();
      if (settled_[v] || key != label_[v]) continue;
      settled_[v] = 1;
      return v;
    }
    return kNoVertex;
  }

  bool frontier_empty() {
    while (!heap_.empty()) {
      const auto [key, v] = heap_.front();
      if (!settled_[v] && key == label_[v]) return false;
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
      heap_.pop_back();
    }
    return true;
  }

 private:
  std::uint32_t current_ = 0;
  std::vector<std::uint32_t> stamp_;
  std::vector<double> label_;
  std::vector<ArcId> parent_;
  std::vector<std::uint8_t> settled_;
  std::vector<std::pair<double, VertexId>> heap_;
};

/// Resumable time-dependent Dijkstra search. Labels are arrival times; ties
/// settle the smaller vertex id first. G needs num_vertices(), head(a),
/// travel_time(a, t) and for_each_out(v, fn).
template <class G>
class Ball {
 public:
  Ball(const G& g, SearchWorkspace& ws, VertexId origin, double departure)
      : g_(&g), ws_(&ws), origin_(origin), departure_(departure) {
    ws.reset(g.num_vertices());
    ws.improve(origin, departure, kNoArc);
  }

  VertexId origin() const { return origin_; }
  double departure() const { return departure_; }

  bool reached(VertexId v) const { return ws_->reached(v); }
  bool settled(VertexId v) const { return ws_->settled(v); }
  double arrival(VertexId v) const { return ws_->label(v); }
  ArcId parent(VertexId v) const { return ws_->parent(v); }

  /// Settles the next vertex and relaxes its outgoing arcs accepted by allow.
  template <class Allow>
  VertexId step(Allow&& allow) {
    const VertexId u = ws_->pop();
    if (u == kNoVertex) return u;
    ++counters_.settled;
    const double t = ws_->label(u);
    g_->for_each_out(u, [&](ArcId a) {
      if (!allow(a)) return;
      const VertexId w = g_->head(a);
      if (ws_->settled(w)) return;
      ++counters_.relaxed;
      ws_->improve(w, t + g_->travel_time(a, t), a);
    });
    return u;
  }
  VertexId step() {
    return step([](ArcId) { return true; });
  }

  bool exhausted() { return ws_->frontier_empty(); }

  /// Arcs from the origin to v along current parent pointers.
  std::vector<ArcId> path_to(VertexId v) const {
    std::vector<ArcId> path;
    for (ArcId a = parent(v); a != kNoArc; a = parent(g_->tail(a))) path.push_back(a);
    std::reverse(path.begin(), path.end());
    return path;
  }

  const StepCounters& counters() const { return counters_; }
  void reset_counters() { counters_ = {}; }

 private:
  const G* g_;
  SearchWorkspace* ws_;
  VertexId origin_;
  double departure_;
  StepCounters counters_;
};

template <class G>
QueryResult tdd_query(const G& g, VertexId o, VertexId d, double t0, SearchWorkspace& ws) {
  Ball<G> ball(g, ws, o, t0);
  QueryResult r;
  r.exact = true;
  for (;;) {
    const VertexId u = ball.step();
    if (u == kNoVertex) throw UnreachableError(o, d);
    if (u == d) break;
  }
  r.cost = ball.arrival(d) - t0;
  r.path = ball.path_to(d);
  r.step1 = ball.counters();
  return r;
}

QueryResult tdd_query(const Instance& g, VertexId o, VertexId d, double t0);

/// One-to-all tree. parent[v] is the position of v's tree arc among
/// in_arcs(v), kNoPred for the root and unreachable vertices.
struct Tree {
  std::vector<std::uint8_t> parent;
  std::vector<double> arrival;  // kInf when unreachable
};

void tdd_tree(const Instance& g, VertexId root, double t, SearchWorkspace& ws, Tree& out);
Tree tdd_tree(const Instance& g, VertexId root, double t);

/// Landmark ball of a query. Stops once d is settled, N landmarks are
/// settled, or the frontier is exhausted.
struct SettledLandmark {
  std::uint32_t index;  // position in the landmark list
  VertexId vertex;
  double arrival;
};

/// landmark_index[v] = position of v in the landmark list, or -1.
template <class G>
std::vector<SettledLandmark> grow_ball(Ball<G>& ball, const std::vector<std::int32_t>& landmark_index,
                                       std::size_t n_landmarks, VertexId d) {
  if (n_landmarks == 0) throw std::invalid_argument("N must be at least 1");
  std::vector<SettledLandmark> settled;
  for (;;) {
    const VertexId u = ball.step();
    if (u == kNoVertex) break;
    if (u < landmark_index.size() && landmark_index[u] >= 0) {
      settled.push_back({static_cast<std::uint32_t>(landmark_index[u]), u, ball.arrival(u)});
    }
    if (u == d || settled.size() >= n_landmarks) break;
  }
  return settled;
}

/// Static Dijkstra on free-flow weights (forward over out-arcs or backward
/// over in-arcs). Visits vertices in settling order; visit returns false to
/// stop early. Ties settle the smaller id first.
template <class Visit>
void freeflow_search(const Instance& g, VertexId source, bool backward, SearchWorkspace& ws,
                     Visit&& visit) {
  ws.reset(g.num_vertices());
  ws.improve(source, 0.0, kNoArc);
  for (;;) {
    const VertexId u = ws.pop();
    if (u == kNoVertex) return;
    if (!visit(u, ws.label(u))) return;
    const double du = ws.label(u);
    auto relax = [&](ArcId a) {
      const VertexId w = backward ? g.tail(a) : g.head(a);
      ws.improve(w, du + g.freeflow(a), a);
    };
    if (backward) g.for_each_in(u, relax);
    else g.for_each_out(u, relax);
  }
}

struct VertexDistance {
  VertexId vertex;
  double distance;
};

/// Every w with free-flow distance w -> u at most radius, in settling order.
std::vector<VertexDistance> backward_freeflow(const Instance& g, VertexId u, double radius);

/// The k nearest vertices of source (source included) by free-flow distance.
std::vector<VertexDistance> nearest_freeflow(const Instance& g, VertexId source, std::size_t k,
                                             SearchWorkspace& ws);

/// Static free-flow shortest path, evaluated time-dependently from t0.
QueryResult dij_freeflow_query(const Instance& g, VertexId o, VertexId d, double t0);

/// Time-dependent cost of following path from departure t0.
template <class G>
double path_cost(const G& g, const std::vector<ArcId>& path, double t0) {
  double t = t0;
  for (ArcId a : path) t += g.travel_time(a, t);
  return t - t0;
}

}  // namespace cflat
