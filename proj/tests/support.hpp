#pragma once

// Random fixtures shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "graph.hpp"
#include "ttf.hpp"

namespace cflat::testing {

// Random periodic function with k breakpoints whose segment slopes stay
// above -max_drop (so it is FIFO for max_drop < 1).
inline TravelTimeFunction random_function(std::mt19937_64& rng, std::size_t k, double period, double lo = 10,
                                          double hi = 200, double max_drop = 0.8) {
  std::uniform_real_distribution<double> time(0, period), value(lo, hi);
  std::vector<double> ts;
  while (ts.size() < k) {
    const double t = time(rng);
    if (std::none_of(ts.begin(), ts.end(), [&](double x) { return std::abs(x - t) < 1e-3 * period; })) ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  std::vector<Breakpoint> pts;
  for (double t : ts) pts.push_back({t, value(rng)});
  // pull values up until every slope (wraparound included) is above -max_drop
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < pts.size() && pts.size() > 1; ++i) {
      const auto& a = pts[i];
      auto& b = pts[(i + 1) % pts.size()];
      const double dt = i + 1 < pts.size() ? b.time - a.time : b.time + period - a.time;
      if (b.value < a.value - max_drop * dt) {
        b.value = a.value - max_drop * dt * 0.99;
        changed = true;
      }
    }
  }
  return TravelTimeFunction(std::move(pts), period);
}

// Random directed graph on n vertices with arc probability p and random
// FIFO functions. Small periods make functions vary over a trip.
inline Instance random_instance(std::mt19937_64& rng, std::size_t n, double p, double period = 1000) {
  std::bernoulli_distribution coin(p);
  std::uniform_int_distribution<std::size_t> pieces(1, 4);
  std::vector<ArcSpec> arcs;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = 0; v < n; ++v) {
      if (u == v || !coin(rng)) continue;
      auto f = random_function(rng, pieces(rng), period, 5, 120);
      arcs.push_back({u, v, {f.points().begin(), f.points().end()}});
    }
  }
  return Instance(n, period, std::vector<VertexInfo>(n), std::move(arcs));
}

inline ArcSpec constant_arc(VertexId a, VertexId b, double w) { return {a, b, {{0.0, w}}}; }

inline Instance make_instance(std::size_t n, std::vector<ArcSpec> arcs, double period = kDay) {
  return Instance(n, period, std::vector<VertexInfo>(n), std::move(arcs));
}

}  // namespace cflat::testing
