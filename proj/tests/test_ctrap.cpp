#include <map>
#include <random>

#include "ctrap.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "tdd.hpp"

using namespace cflat;
using namespace cflat::testing;

namespace {

// Triangle bump of height h over [a, a + 43200], on top of base.
std::vector<Breakpoint> bump(double base, double a, double h) {
  std::vector<Breakpoint> pts{{a, base}, {a + 21600, base + h}};
  if (a + 43200 < kDay) pts.push_back({a + 43200, base});
  if (a > 0) pts.insert(pts.begin(), {0, base});
  return pts;
}

// Destination 3 is reached via 1 (congested in the afternoon) or via 2
// (congested in the morning), so its parent flips once, at noon.
std::vector<ArcSpec> flip_arcs(VertexId via_a, VertexId via_b, VertexId dest) {
  return {{0, via_a, bump(100, 43200, 100)},
          {0, via_b, bump(100, 0, 100)},
          constant_arc(via_a, dest, 50),
          constant_arc(via_b, dest, 50)};
}

CtrapParams params_for(const Instance& g) {
  CtrapParams p;
  p.slopes = path_slope_model(g);
  return p;
}

Instance small_grid(std::size_t side, std::uint64_t seed) {
  GeneratorParams p;
  p.rows = p.cols = side;
  p.seed = seed;
  return generate(p);
}

}  // namespace

TEST_CASE("mae_ok") {
  MetricBounds b{10, 0};
  CHECK(mae_ok(25, 30, 0, 100, 1.0, b, MaeMode::kLiteral));
  CHECK_FALSE(mae_ok(25, 30, 0, 100, 0.1, b, MaeMode::kLiteral));

  const MetricBounds half{0.5, 0.5};
  CHECK(trapezoid_gap(0, 100, 100, 100, half) == doctest::Approx(50));
  CHECK(mae_ok(100, 100, 0, 100, 0.5, half, MaeMode::kGeometric));
  CHECK_FALSE(mae_ok(100, 100, 0, 100, 0.49, half, MaeMode::kGeometric));
  CHECK_THROWS_AS(mae_ok(1, 1, 5, 5, 0.1, half, MaeMode::kGeometric), std::invalid_argument);
  CHECK_THROWS_AS(mae_ok(1, 1, 0, 5, 0, half, MaeMode::kGeometric), std::invalid_argument);

  SUBCASE("gap matches dense sampling of the envelopes") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 500; ++trial) {
      const MetricBounds mb{u(rng), 0.99 * u(rng)};
      const double tf = 10 + 1000 * u(rng);
      // endpoints consistent with the slope bounds
      const double Ds = 50 + 500 * u(rng);
      const double lo = std::max(0.0, Ds - mb.lambda_min * tf), hi = Ds + mb.lambda_max * tf;
      const double Df = lo + (hi - lo) * u(rng);
      double dense = -kInf;
      for (int i = 0; i <= 100000; ++i) {
        const double t = tf * i / 100000.0;
        dense = std::max(dense, trapezoid_upper(t, 0, tf, Ds, Df, mb) - trapezoid_lower(t, 0, tf, Ds, Df, mb));
      }
      CHECK(trapezoid_gap(0, tf, Ds, Df, mb) == doctest::Approx(dense).epsilon(1e-6));
      CHECK(trapezoid_gap(0, tf, Ds, Df, mb) >= dense - 1e-9);
    }
  }
}

TEST_CASE("almost_constant") {
  CHECK(almost_constant(100, 100, 100));
  CHECK_FALSE(almost_constant(100, 101, 100));
}

TEST_CASE("merge") {
  std::vector<std::uint8_t> p{2, 2, 1, 1, 2};
  std::vector<double> d{0, 3200, 6400, 9600, 12800};
  merge(p, d);
  CHECK(p == std::vector<std::uint8_t>{2, 1, 2});
  CHECK(d == std::vector<double>{0, 6400, 12800});
  std::vector<std::uint8_t> same{4, 4, 4};
  std::vector<double> ds{0, 1, 2};
  merge(same, ds);
  CHECK(same.size() == 1);
  std::vector<std::uint8_t> alt{0, 1, 0};
  std::vector<double> da{0, 1, 2};
  merge(alt, da);
  CHECK(alt.size() == 3);
  std::vector<std::uint8_t> bad{0, 1};
  std::vector<double> db{0};
  CHECK_THROWS_AS(merge(bad, db), std::invalid_argument);
}

TEST_CASE("dedup verifies hash groups") {
  const std::vector<std::vector<double>> deps{{0, 10}, {0, 10}, {0, 20}, {0, 10}};
  // rigged: all four share one hash pair
  const std::vector<std::pair<double, double>> hashes(4, {1.0, 2.0});
  const auto rep = dedup(deps, hashes, {1, 1, 1, 0});
  CHECK(rep == std::vector<VertexId>{0, 0, 2, 3});
  const auto distinct = dedup(deps, {{1, 1}, {2, 2}, {3, 3}, {4, 4}}, {1, 1, 1, 1});
  CHECK(distinct == std::vector<VertexId>{0, 1, 2, 3});
}

TEST_CASE("pred_lookup") {
  const std::vector<std::uint8_t> preds{0, 1, 2};
  const std::vector<double> deps{0, 3200, 6400};
  auto r = pred_lookup(preds, deps, kDay, 4000);
  CHECK(r.pred_lo == 1);
  CHECK(r.pred_hi == 2);
  CHECK(r.t_lo == 3200);
  CHECK(r.t_hi == 6400);
  r = pred_lookup(preds, deps, kDay, 7000);
  CHECK(r.pred_lo == 2);
  CHECK(r.pred_hi == 0);
  CHECK(r.t_lo == 6400);
  CHECK(r.t_hi == kDay);
  r = pred_lookup(std::vector<std::uint8_t>{3}, std::vector<double>{0}, kDay, 500);
  CHECK((r.pred_lo == 3 && r.pred_hi == 3));
}

TEST_CASE("summary records") {
  SUBCASE("constant arc gives a unique predecessor") {
    const Instance g = make_instance(2, {constant_arc(0, 1, 10)});
    CtrapTrace trace;
    const auto s = ctrap(g, 0, params_for(g), &trace);
    CHECK(s.kind(1) == RecordKind::kUnique);
    CHECK(s.kind(0) == RecordKind::kUnreachable);
    CHECK(trace.trees == 27);  // round 0 only: 86400 / 3200
    const auto r = pred_lookup(s, 1, 500);
    CHECK((r.pred_lo == 0 && r.pred_hi == 0));
    CHECK_THROWS_AS(pred_lookup(s, 0, 0), std::out_of_range);
  }

  SUBCASE("parent flip at noon") {
    const Instance g = make_instance(4, flip_arcs(1, 2, 3));
    const auto s = ctrap(g, 0, params_for(g));
    REQUIRE(s.kind(3) == RecordKind::kOwned);
    REQUIRE(s.count(3) == 2);
    CHECK(g.tail(g.in_arcs(3)[s.pred(3, 0)]) == 1);
    CHECK(g.tail(g.in_arcs(3)[s.pred(3, 1)]) == 2);
    CHECK(dequantize(s.dep(3, 1), quantization_scale(kDay)) > 43200);
    // sweep against trees, away from the flip
    for (double t = 0; t < kDay; t += 600) {
      if (std::abs(t - 43200) < 3200 || t == 0) continue;
      const Tree tree = tdd_tree(g, 0, t);
      CHECK(pred_lookup(s, 3, t).pred_lo == tree.parent[3]);
    }
  }

  SUBCASE("equal sequences are shared") {
    std::vector<ArcSpec> arcs = flip_arcs(1, 2, 3);
    for (auto& a : flip_arcs(4, 5, 6)) arcs.push_back(a);
    const Instance g = make_instance(7, arcs);
    const auto s = ctrap(g, 0, params_for(g));
    CHECK(s.kind(3) == RecordKind::kOwned);
    CHECK(s.kind(6) == RecordKind::kShared);
    CHECK(s.representative(6) == 3);
    for (std::size_t i = 0; i < s.count(6); ++i) CHECK(s.dep(6, i) == s.dep(3, i));
  }
}

TEST_CASE("sampled predecessor chains are exact") {
  const Instance g = small_grid(8, 2);
  for (VertexId l : {0u, 27u, 63u}) {
    CtrapTrace trace;
    ctrap_sample(g, l, params_for(g), &trace);
    std::map<double, Tree> trees;
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      if (v == l) continue;
      const auto& seq = trace.sampled[v];
      REQUIRE_FALSE(seq.deps.empty());
      for (std::size_t i = 0; i < seq.deps.size(); ++i) {
        const double t = seq.deps[i];
        // follow recorded predecessors at exactly t
        std::vector<ArcId> path;
        for (VertexId u = v; u != l;) {
          const auto& su = trace.sampled[u];
          const auto it = std::lower_bound(su.deps.begin(), su.deps.end(), t);
          REQUIRE((it != su.deps.end() && *it == t));
          const ArcId a = g.in_arcs(u)[su.preds[it - su.deps.begin()]];
          path.push_back(a);
          u = g.tail(a);
        }
        std::reverse(path.begin(), path.end());
        auto tree = trees.find(t);
        if (tree == trees.end()) tree = trees.emplace(t, tdd_tree(g, l, t)).first;
        CHECK(std::abs(path_cost(g, path, t) - (tree->second.arrival[v] - t)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("deactivated intervals bracket the exact profile") {
  const Instance g = small_grid(6, 5);
  const double eps = 0.1;
  for (VertexId l : {0u, 20u}) {
    CtrapTrace trace;
    ctrap_sample(g, l, params_for(g), &trace);
    const auto profile = profile_search(g, l);
    std::size_t checked = 0;
    for (const auto& e : trace.events) {
      if (e.constant) continue;
      const auto& D = *profile[e.destination];
      CHECK(std::abs(D(e.ts) - e.Ds) <= 1e-6);
      CHECK(std::abs(D(e.tf) - e.Df) <= 1e-6);
      for (int i = 0; i < 64; ++i) {
        const double t = e.ts + (e.tf - e.ts) * i / 63.0;
        const double d = D(t);
        const double up = trapezoid_upper(t, e.ts, e.tf, e.Ds, e.Df, e.bounds);
        const double low = trapezoid_lower(t, e.ts, e.tf, e.Ds, e.Df, e.bounds);
        CHECK(low <= d + 1e-6);
        CHECK(d <= up + 1e-6);
        CHECK(up <= (1 + eps) * d + 1e-6);
      }
      ++checked;
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("sampling guards and windows") {
  const Instance g = small_grid(5, 1);
  CtrapParams p = params_for(g);
  p.tau_floor = 3000;
  CHECK_THROWS_AS(ctrap(g, 0, p), CtrapError);
  p = params_for(g);
  p.epsilon = 0;
  CHECK_THROWS_AS(ctrap(g, 0, p), std::invalid_argument);

  CHECK(round0_grid(10000, 3200, std::nullopt) == std::vector<double>{0, 3200, 6400, 9600});
  CHECK(round0_grid(10000, 3200, std::pair{3300.0, 6000.0}) == std::vector<double>{3200, 6400});
  CHECK(round0_grid(10000, 3200, std::pair{9700.0, 9800.0}) == std::vector<double>{9600, 10000});
  CHECK(round0_grid(10000, 3200, std::pair{3200.0, 3200.0}) == std::vector<double>{0, 3200, 6400});
  CHECK_THROWS_AS(round0_grid(10000, 3200, std::pair{-1.0, 5.0}), std::invalid_argument);
}

TEST_CASE("parallel preprocessing is deterministic") {
  const Instance g = small_grid(6, 4);
  const std::vector<VertexId> ls{0, 7, 18, 35};
  const auto serial = preprocess(g, ls, params_for(g), 1);
  const auto parallel = preprocess(g, ls, params_for(g), 3);
  CHECK(serial == parallel);
}
