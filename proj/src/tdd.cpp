#include "tdd.hpp"

namespace cflat {

QueryResult tdd_query(const Instance& g, VertexId o, VertexId d, double t0) {
  if (o >= g.num_vertices() || d >= g.num_vertices()) throw std::out_of_range("vertex id out of range");
  SearchWorkspace ws;
  return tdd_query(g, o, d, t0, ws);
}

void tdd_tree(const Instance& g, VertexId root, double t, SearchWorkspace& ws, Tree& out) {
  const std::size_t n = g.num_vertices();
  out.parent.assign(n, kNoPred);
  out.arrival.assign(n, kInf);
  Ball<Instance> ball(g, ws, root, t);
  for (VertexId u = ball.step(); u != kNoVertex; u = ball.step()) {
    out.arrival[u] = ball.arrival(u);
    const ArcId a = ball.parent(u);
    if (a != kNoArc) out.parent[u] = static_cast<std::uint8_t>(g.in_position(a));
  }
}

Tree tdd_tree(const Instance& g, VertexId root, double t) {
  SearchWorkspace ws;
  Tree tree;
  tdd_tree(g, root, t, ws, tree);
  return tree;
}

std::vector<VertexDistance> backward_freeflow(const Instance& g, VertexId u, double radius) {
  if (radius < 0) throw std::invalid_argument("radius must be non-negative");
  SearchWorkspace ws;
  std::vector<VertexDistance> out;
  freeflow_search(g, u, true, ws, [&](VertexId v, double dist) {
    if (dist > radius) return false;
    out.push_back({v, dist});
    return true;
  });
  return out;
}

std::vector<VertexDistance> nearest_freeflow(const Instance& g, VertexId source, std::size_t k,
                                             SearchWorkspace& ws) {
  std::vector<VertexDistance> out;
  if (k == 0) return out;
  freeflow_search(g, source, false, ws, [&](VertexId v, double dist) {
    out.push_back({v, dist});
    return out.size() < k;
  });
  return out;
}

QueryResult dij_freeflow_query(const Instance& g, VertexId o, VertexId d, double t0) {
  SearchWorkspace ws;
  QueryResult r;
  bool found = false;
  std::size_t settled = 0;
  freeflow_search(g, o, false, ws, [&](VertexId v, double) {
    ++settled;
    found = v == d;
    return !found;
  });
  if (!found) throw UnreachableError(o, d);
  for (ArcId a = ws.parent(d); a != kNoArc; a = ws.parent(g.tail(a))) r.path.push_back(a);
  std::reverse(r.path.begin(), r.path.end());
  r.cost = path_cost(g, r.path, t0);
  r.step1.settled = settled;
  return r;
}

}  // namespace cflat
