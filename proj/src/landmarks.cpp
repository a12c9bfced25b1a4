#include "landmarks.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "tdd.hpp"

namespace cflat {

Policy parse_policy(const std::string& tag) {
  if (tag == "R") return Policy::kRandom;
  if (tag == "SR") return Policy::kSparseRandom;
  if (tag == "IR") return Policy::kImportantRandom;
  if (tag == "SK") return Policy::kBoundary;
  if (tag == "KC") return Policy::kCells;
  if (tag == "BC") return Policy::kBetweenness;
  if (tag == "KB") return Policy::kCellBetweenness;
  throw std::invalid_argument("unknown landmark policy '" + tag + "'");
}

std::string policy_tag(Policy p) {
  switch (p) {
    case Policy::kRandom: return "R";
    case Policy::kSparseRandom: return "SR";
    case Policy::kImportantRandom: return "IR";
    case Policy::kBoundary: return "SK";
    case Policy::kCells: return "KC";
    case Policy::kBetweenness: return "BC";
    case Policy::kCellBetweenness: return "KB";
  }
  return "?";
}

namespace {

std::vector<VertexId> active_vertices(const Instance& g) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (g.is_active(v)) out.push_back(v);
  }
  return out;
}

}  // namespace

Partition partition_naive(const Instance& g, std::size_t cells, std::uint64_t seed) {
  const std::size_t n = g.num_vertices();
  if (cells == 0 || cells > n) throw std::invalid_argument("cell count must lie in [1, n]");
  auto pool = active_vertices(g);
  if (pool.size() < cells) throw std::invalid_argument("fewer active vertices than cells");
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);

  Partition p;
  p.cells = cells;
  p.cell.assign(n, 0);
  std::vector<double> dist(n, kInf);
  std::vector<std::uint32_t> owner(n, UINT32_MAX);
  std::vector<char> done(n, 0);
  using Item = std::tuple<double, std::uint32_t, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::uint32_t c = 0; c < cells; ++c) {
    dist[pool[c]] = 0;
    owner[pool[c]] = c;
    heap.push({0.0, c, pool[c]});
  }
  while (!heap.empty()) {
    auto [d, c, v] = heap.top();
    heap.pop();
    if (done[v] || d != dist[v] || c != owner[v]) continue;
    done[v] = 1;
    p.cell[v] = c;
    auto relax = [&](ArcId a, VertexId w) {
      const double nd = d + g.freeflow(a);
      if (done[w]) return;
      if (nd < dist[w] || (nd == dist[w] && c < owner[w])) {
        dist[w] = nd;
        owner[w] = c;
        heap.push({nd, c, w});
      }
    };
    for (ArcId a : g.out_arcs(v)) relax(a, g.head(a));
    for (ArcId a : g.in_arcs(v)) relax(a, g.tail(a));
  }
  for (VertexId v = 0; v < n; ++v) {
    bool edge = false;
    for (ArcId a : g.out_arcs(v)) edge = edge || p.cell[g.head(a)] != p.cell[v];
    for (ArcId a : g.in_arcs(v)) edge = edge || p.cell[g.tail(a)] != p.cell[v];
    if (edge) p.boundary.push_back(v);
  }
  return p;
}

std::vector<double> abc(const Instance& g, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("sample count must be at least 1");
  const std::size_t n = g.num_vertices();
  std::vector<VertexId> sources(n);
  std::iota(sources.begin(), sources.end(), 0);
  if (samples < n) {
    std::mt19937_64 rng(seed);
    std::shuffle(sources.begin(), sources.end(), rng);
    sources.resize(samples);
    std::sort(sources.begin(), sources.end());
  }

  std::vector<double> score(n, 0.0), dist(n), sigma(n), delta(n);
  std::vector<std::vector<VertexId>> preds(n);
  std::vector<VertexId> order;
  using Item = std::pair<double, VertexId>;
  for (VertexId s : sources) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();
    order.clear();
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[s] = 0;
    sigma[s] = 1;
    heap.push({0.0, s});
    std::vector<char> done(n, 0);
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (done[v] || d != dist[v]) continue;
      done[v] = 1;
      order.push_back(v);
      for (ArcId a : g.out_arcs(v)) {
        const VertexId w = g.head(a);
        const double nd = d + g.freeflow(a);
        if (nd < dist[w] - kTimeEps) {
          dist[w] = nd;
          sigma[w] = sigma[v];
          preds[w].assign(1, v);
          heap.push({nd, w});
        } else if (std::abs(nd - dist[w]) <= kTimeEps && !done[w]) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const VertexId w = *it;
      for (VertexId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) score[w] += delta[w];
    }
  }
  return score;
}

namespace {

class Picker {
 public:
  Picker(const Instance& g, std::size_t exclusion, bool use_exclusion)
      : g_(g), k_(exclusion), use_exclusion_(use_exclusion), excluded_(g.num_vertices(), 0),
        chosen_(g.num_vertices(), 0) {}

  void preselect(VertexId v) {
    if (v >= g_.num_vertices()) throw std::invalid_argument("preselected vertex out of range");
    if (use_exclusion_) {
      for (const auto& e : nearest_freeflow(g_, v, k_, ws_)) excluded_[e.vertex] = 1;
    }
    chosen_[v] = 1;
    excluded_[v] = 1;
  }

  // Accepts c unless it or a chosen landmark lies in the other's ball.
  bool take(VertexId c) {
    if (excluded_[c] || chosen_[c] || !g_.is_active(c)) return false;
    if (use_exclusion_) {
      const auto ball = nearest_freeflow(g_, c, k_, ws_);
      for (const auto& e : ball) {
        if (chosen_[e.vertex]) {
          excluded_[c] = 1;
          return false;
        }
      }
      for (const auto& e : ball) excluded_[e.vertex] = 1;
    }
    chosen_[c] = 1;
    excluded_[c] = 1;
    picked.push_back(c);
    return true;
  }

  bool chosen(VertexId v) const { return chosen_[v]; }

  std::vector<VertexId> picked;

 private:
  const Instance& g_;
  std::size_t k_;
  bool use_exclusion_;
  std::vector<char> excluded_, chosen_;
  SearchWorkspace ws_;
};

void exhausted(const SelectOptions& opt, std::size_t got) {
  throw SelectionError("landmark policy " + policy_tag(opt.policy) + " exhausted after " +
                       std::to_string(got) + " of " + std::to_string(opt.size) + " picks");
}

// Round-robin over cells, each cell consuming its own candidate order.
void pick_per_cell(Picker& picker, const SelectOptions& opt, std::vector<std::vector<VertexId>> order) {
  std::vector<std::size_t> cursor(order.size(), 0);
  while (picker.picked.size() < opt.size) {
    bool any = false;
    for (std::size_t c = 0; c < order.size() && picker.picked.size() < opt.size; ++c) {
      while (cursor[c] < order[c].size()) {
        if (picker.take(order[c][cursor[c]++])) {
          any = true;
          break;
        }
      }
    }
    if (!any) exhausted(opt, picker.picked.size());
  }
}

}  // namespace

LandmarkSet select_landmarks(const Instance& g, const SelectOptions& opt) {
  if (opt.size == 0) throw std::invalid_argument("landmark count must be at least 1");
  const std::size_t n = g.num_vertices();
  const bool use_exclusion = opt.policy != Policy::kRandom && opt.policy != Policy::kImportantRandom;
  Picker picker(g, opt.exclusion, use_exclusion);
  for (VertexId v : opt.preselected) picker.preselect(v);
  std::mt19937_64 rng(opt.seed);

  auto need_partition = [&]() {
    if (opt.partition) {
      if (opt.partition->cell.size() != n) throw std::invalid_argument("partition does not match instance");
      return *opt.partition;
    }
    return partition_naive(g, std::min(opt.size, active_vertices(g).size()), opt.seed);
  };
  auto by_score = [](std::vector<VertexId>& vs, const std::vector<double>& score) {
    std::stable_sort(vs.begin(), vs.end(), [&](VertexId a, VertexId b) {
      return score[a] > score[b] || (score[a] == score[b] && a < b);
    });
  };

  switch (opt.policy) {
    case Policy::kRandom:
    case Policy::kSparseRandom: {
      auto pool = active_vertices(g);
      std::shuffle(pool.begin(), pool.end(), rng);
      for (VertexId v : pool) {
        if (picker.picked.size() == opt.size) break;
        picker.take(v);
      }
      break;
    }
    case Policy::kImportantRandom: {
      if (!g.has_importance()) throw SelectionError("IR needs vertex importance categories");
      auto pool = active_vertices(g);
      std::shuffle(pool.begin(), pool.end(), rng);
      SearchWorkspace ws;
      for (VertexId v : pool) {
        if (picker.picked.size() == opt.size) break;
        for (const auto& e : nearest_freeflow(g, v, opt.important_ball, ws)) {
          const int cat = g.vertex(e.vertex).category;
          if (cat > 0 && cat <= kImportantCategory && picker.take(e.vertex)) break;
        }
      }
      break;
    }
    case Policy::kBoundary: {
      auto pool = need_partition().boundary;
      std::shuffle(pool.begin(), pool.end(), rng);
      for (VertexId v : pool) {
        if (picker.picked.size() == opt.size) break;
        picker.take(v);
      }
      break;
    }
    case Policy::kBetweenness: {
      const auto score = abc(g, opt.abc_samples, opt.seed);
      auto pool = active_vertices(g);
      by_score(pool, score);
      for (VertexId v : pool) {
        if (picker.picked.size() == opt.size) break;
        picker.take(v);
      }
      break;
    }
    case Policy::kCells:
    case Policy::kCellBetweenness: {
      const auto part = need_partition();
      std::vector<std::vector<VertexId>> order(part.cells);
      for (VertexId v = 0; v < n; ++v) {
        if (g.is_active(v)) order[part.cell[v]].push_back(v);
      }
      if (opt.policy == Policy::kCells) {
        for (auto& o : order) std::shuffle(o.begin(), o.end(), rng);
      } else {
        const auto score = abc(g, opt.abc_samples, opt.seed);
        for (auto& o : order) by_score(o, score);
      }
      pick_per_cell(picker, opt, std::move(order));
      break;
    }
  }
  if (picker.picked.size() < opt.size) exhausted(opt, picker.picked.size());

  LandmarkSet set;
  set.tag = policy_tag(opt.policy);
  set.exclusion = opt.exclusion;
  set.seed = opt.seed;
  set.ids = std::move(picker.picked);
  return set;
}

void save_landmarks(const LandmarkSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# policy=" << set.tag << " size=" << set.ids.size() << " seed=" << set.seed
      << " exclusion=" << set.exclusion << '\n';
  for (VertexId v : set.ids) out << v << '\n';
  if (!out) throw IoError("write failed: " + path);
}

LandmarkSet load_landmarks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  LandmarkSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string kv;
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
        auto number = [&]() -> std::uint64_t {
          std::uint64_t x = 0;
          const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
          if (ec != std::errc() || end != value.data() + value.size()) throw FormatError(line_no, "bad " + key);
          return x;
        };
        if (key == "policy") set.tag = value;
        else if (key == "seed") set.seed = number();
        else if (key == "exclusion") set.exclusion = number();
      }
      continue;
    }
    std::istringstream ss(line);
    std::uint64_t v = 0;
    std::string rest;
    if (!(ss >> v) || (ss >> rest)) throw FormatError(line_no, "expected one vertex id");
    set.ids.push_back(static_cast<VertexId>(v));
  }
  return set;
}

}  // namespace cflat
