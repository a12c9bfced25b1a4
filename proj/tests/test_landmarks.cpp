#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <set>

#include "doctest.h"
#include "landmarks.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "tdd.hpp"

using namespace cflat;
using namespace cflat::testing;

namespace {

Instance grid(std::size_t side, std::uint64_t seed = 1) {
  GeneratorParams p;
  p.rows = p.cols = side;
  p.seed = seed;
  return generate(p);
}

Instance star(std::size_t leaves) {
  std::vector<ArcSpec> arcs;
  for (VertexId v = 1; v <= leaves; ++v) {
    arcs.push_back(constant_arc(0, v, 1));
    arcs.push_back(constant_arc(v, 0, 1));
  }
  return make_instance(leaves + 1, arcs);
}

// Exact betweenness from all-pairs distances and shortest-path counts.
std::vector<double> exact_betweenness(const Instance& g) {
  const std::size_t n = g.num_vertices();
  const auto dist = floyd_warshall(g);
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0));
  for (VertexId s = 0; s < n; ++s) {
    std::vector<VertexId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return dist[s][a] < dist[s][b]; });
    sigma[s][s] = 1;
    for (VertexId w : order) {
      if (w == s || dist[s][w] == kNoPath) continue;
      for (ArcId a : g.in_arcs(w)) {
        const VertexId v = g.tail(a);
        if (close(dist[s][v] + g.freeflow(a), dist[s][w])) sigma[s][w] += sigma[s][v];
      }
    }
  }
  std::vector<double> bc(n, 0);
  for (VertexId s = 0; s < n; ++s)
    for (VertexId t = 0; t < n; ++t)
      for (VertexId v = 0; v < n; ++v) {
        if (s == t || v == s || v == t || sigma[s][t] == 0) continue;
        if (close(dist[s][v] + dist[v][t], dist[s][t])) bc[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
      }
  return bc;
}

void check_exclusion(const Instance& g, const LandmarkSet& set, std::size_t exclusion) {
  SearchWorkspace ws;
  std::set<VertexId> chosen(set.ids.begin(), set.ids.end());
  CHECK(chosen.size() == set.ids.size());
  for (VertexId l : set.ids) {
    for (const auto& e : nearest_freeflow(g, l, exclusion, ws)) {
      if (e.vertex != l) CHECK(chosen.count(e.vertex) == 0);
    }
  }
}

}  // namespace

TEST_CASE("policy tags") {
  for (const char* tag : {"R", "SR", "IR", "SK", "KC", "BC", "KB"}) CHECK(policy_tag(parse_policy(tag)) == tag);
  CHECK_THROWS_AS(parse_policy("XX"), std::invalid_argument);
}

TEST_CASE("random selection") {
  const Instance g = grid(5);
  SelectOptions opt;
  opt.size = g.num_vertices();
  auto all = select_landmarks(g, opt).ids;
  std::sort(all.begin(), all.end());
  for (VertexId v = 0; v < g.num_vertices(); ++v) CHECK(all[v] == v);
  opt.size = 7;
  CHECK(select_landmarks(g, opt).ids == select_landmarks(g, opt).ids);
  opt.size = 26;
  CHECK_THROWS_AS(select_landmarks(g, opt), SelectionError);
}

TEST_CASE("exclusion balls") {
  const Instance g = grid(12, 3);
  for (Policy p : {Policy::kSparseRandom, Policy::kBoundary, Policy::kCells, Policy::kBetweenness,
                   Policy::kCellBetweenness}) {
    SelectOptions opt;
    opt.policy = p;
    opt.size = 8;
    opt.exclusion = 6;
    opt.abc_samples = 40;
    const auto set = select_landmarks(g, opt);
    CHECK(set.ids.size() == 8);
    check_exclusion(g, set, 6);
    CHECK(select_landmarks(g, opt).ids == set.ids);
  }
  SelectOptions greedy;
  greedy.policy = Policy::kSparseRandom;
  greedy.size = 2;
  greedy.exclusion = g.num_vertices();
  CHECK_THROWS_AS(select_landmarks(g, greedy), SelectionError);
}

TEST_CASE("important random picks important vertices") {
  const Instance g = grid(12);
  SelectOptions opt;
  opt.policy = Policy::kImportantRandom;
  opt.size = 10;
  for (VertexId v : select_landmarks(g, opt).ids) CHECK(g.vertex(v).category <= kImportantCategory);
  const Instance plain = star(4);
  CHECK_THROWS_AS(select_landmarks(plain, opt), SelectionError);
}

TEST_CASE("preselected vertices are kept out") {
  const Instance g = grid(10);
  SelectOptions opt;
  opt.policy = Policy::kSparseRandom;
  opt.size = 5;
  opt.exclusion = 4;
  opt.preselected = {0, 55};
  const auto set = select_landmarks(g, opt);
  SearchWorkspace ws;
  for (VertexId l : set.ids) {
    CHECK(l != 0);
    CHECK(l != 55);
    for (const auto& e : nearest_freeflow(g, l, 4, ws)) CHECK((e.vertex != 0 && e.vertex != 55));
  }
}

TEST_CASE("betweenness") {
  // path a - b - c
  const Instance path = make_instance(3, {constant_arc(0, 1, 1), constant_arc(1, 0, 1), constant_arc(1, 2, 1),
                                          constant_arc(2, 1, 1)});
  const auto s = abc(path, 3, 1);
  CHECK(s[1] > s[0]);
  CHECK(s[1] > s[2]);

  const auto center = abc(star(5), 6, 1);
  CHECK(std::max_element(center.begin(), center.end()) - center.begin() == 0);
  SelectOptions opt;
  opt.policy = Policy::kBetweenness;
  opt.abc_samples = 6;
  CHECK(select_landmarks(star(5), opt).ids == std::vector<VertexId>{0});

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    // integer weights create ties between shortest paths
    std::vector<ArcSpec> arcs;
    std::uniform_int_distribution<int> w(1, 3);
    for (VertexId u = 0; u < 6; ++u)
      for (VertexId v = 0; v < 6; ++v)
        if (u != v && rng() % 2) arcs.push_back(constant_arc(u, v, w(rng)));
    const Instance g = make_instance(6, arcs);
    const auto got = abc(g, 6, 1);
    const auto want = exact_betweenness(g);
    for (VertexId v = 0; v < 6; ++v) CHECK(got[v] == doctest::Approx(want[v]));
  }
}

TEST_CASE("naive partition") {
  const Instance g = grid(10);
  const auto one = partition_naive(g, 1, 1);
  CHECK(one.boundary.empty());
  const auto singles = partition_naive(g, g.num_vertices(), 1);
  CHECK(singles.boundary.size() == g.num_vertices());

  const auto four = partition_naive(g, 4, 7);
  CHECK(four.cells == 4);
  for (std::uint32_t c = 0; c < 4; ++c) {
    // undirected connectivity inside the cell
    std::vector<VertexId> members;
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      if (four.cell[v] == c) members.push_back(v);
    REQUIRE_FALSE(members.empty());
    std::vector<char> seen(g.num_vertices(), 0);
    std::queue<VertexId> q;
    q.push(members[0]);
    seen[members[0]] = 1;
    std::size_t count = 0;
    while (!q.empty()) {
      const VertexId v = q.front();
      q.pop();
      ++count;
      auto visit = [&](VertexId w) {
        if (four.cell[w] == c && !seen[w]) seen[w] = 1, q.push(w);
      };
      for (ArcId a : g.out_arcs(v)) visit(g.head(a));
      for (ArcId a : g.in_arcs(v)) visit(g.tail(a));
    }
    CHECK(count == members.size());
  }
  CHECK_THROWS_AS(partition_naive(g, 0, 1), std::invalid_argument);
}

TEST_CASE("landmark files") {
  const Instance g = grid(8);
  SelectOptions opt;
  opt.policy = Policy::kSparseRandom;
  opt.size = 5;
  opt.exclusion = 3;
  opt.seed = 42;
  const auto set = select_landmarks(g, opt);
  const auto path = (std::filesystem::temp_directory_path() / "cflat_test_landmarks.txt").string();
  save_landmarks(set, path);
  const auto back = load_landmarks(path);
  CHECK(back.ids == set.ids);
  CHECK(back.tag == "SR");
  CHECK(back.seed == 42);
  CHECK(back.exclusion == 3);
  {
    std::ofstream out(path);
    out << "# policy=R size=1 seed=x exclusion=0\n4\n";
  }
  CHECK_THROWS_AS(load_landmarks(path), FormatError);
  std::remove(path.c_str());
}
