#include "contraction.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "tdd.hpp"

namespace cflat {

namespace {

std::vector<VertexId> neighbours(const Instance& g, VertexId v) {
  std::vector<VertexId> out;
  for (ArcId a : g.in_arcs(v)) out.push_back(g.tail(a));
  for (ArcId a : g.out_arcs(v)) out.push_back(g.head(a));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// All combinations of one represented path per arc, concatenated.
std::vector<ArcPath> expand(const std::vector<ArcId>& arcs, const std::vector<std::vector<ArcPath>>& rep) {
  std::vector<ArcPath> out{{}};
  for (ArcId a : arcs) {
    std::vector<ArcPath> next;
    for (const auto& prefix : out) {
      for (const auto& piece : rep[a]) {
        ArcPath p = prefix;
        p.insert(p.end(), piece.begin(), piece.end());
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

struct Shortcut {
  TravelTimeFunction fn;
  std::vector<ArcPath> paths;
};

// One round of chain elimination. Returns false when nothing was contracted.
bool contract_once(Instance& g, std::vector<std::vector<ArcPath>>& rep) {
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<VertexId>> nbrs(n);
  std::vector<char> candidate(n, 0);
  for (VertexId v = 0; v < n; ++v) {
    nbrs[v] = neighbours(g, v);
    candidate[v] = nbrs[v].size() == 2;
  }

  std::vector<char> seen(n, 0), interior(n, 0);
  std::map<std::pair<VertexId, VertexId>, Shortcut> shortcuts;
  auto add_direction = [&](const std::vector<VertexId>& seq) {
    // Parallel arcs per hop; every combination is a candidate path.
    std::vector<std::vector<ArcId>> combos{{}};
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      std::vector<ArcId> hop;
      for (ArcId a : g.out_arcs(seq[i])) {
        if (g.head(a) == seq[i + 1]) hop.push_back(a);
      }
      if (hop.empty()) return;
      std::vector<std::vector<ArcId>> next;
      for (const auto& c : combos) {
        for (ArcId a : hop) {
          auto e = c;
          e.push_back(a);
          next.push_back(std::move(e));
        }
      }
      combos = std::move(next);
    }
    auto& sc = shortcuts[{seq.front(), seq.back()}];
    for (const auto& arcs : combos) {
      TravelTimeFunction f = g.ttf(arcs[0]);
      for (std::size_t i = 1; i < arcs.size(); ++i) f = link(f, g.ttf(arcs[i]));
      sc.fn = sc.paths.empty() ? f : minimum(sc.fn, f);
      for (auto& p : expand(arcs, rep)) sc.paths.push_back(std::move(p));
    }
  };

  bool changed = false;
  for (VertexId x = 0; x < n; ++x) {
    if (!candidate[x] || seen[x]) continue;
    seen[x] = 1;
    // Walk both ways until a non-candidate end (or back to x on a cycle).
    std::vector<VertexId> side[2];
    bool cycle = false;
    for (int s = 0; s < 2 && !cycle; ++s) {
      VertexId prev = x, cur = nbrs[x][s];
      while (candidate[cur]) {
        if (cur == x) {
          cycle = true;
          break;
        }
        seen[cur] = 1;
        side[s].push_back(cur);
        const VertexId nxt = nbrs[cur][0] == prev ? nbrs[cur][1] : nbrs[cur][0];
        prev = cur;
        cur = nxt;
      }
      side[s].push_back(cur);
    }
    if (cycle) continue;
    std::vector<VertexId> seq(side[0].rbegin(), side[0].rend());
    seq.push_back(x);
    seq.insert(seq.end(), side[1].begin(), side[1].end());
    if (seq.front() == seq.back()) continue;
    for (std::size_t i = 1; i + 1 < seq.size(); ++i) interior[seq[i]] = 1;
    changed = true;
    add_direction(seq);
    std::reverse(seq.begin(), seq.end());
    add_direction(seq);
  }
  if (!changed) return false;

  std::vector<ArcSpec> arcs;
  std::vector<std::vector<ArcPath>> new_rep;
  std::map<std::pair<VertexId, VertexId>, std::size_t> kept;
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    if (interior[g.tail(a)] || interior[g.head(a)]) continue;
    kept.try_emplace({g.tail(a), g.head(a)}, arcs.size());
    auto p = g.breakpoints(a);
    arcs.push_back({g.tail(a), g.head(a), {p.begin(), p.end()}});
    new_rep.push_back(rep[a]);
  }
  for (auto& [key, sc] : shortcuts) {
    auto it = kept.find(key);
    if (it != kept.end()) {
      auto& spec = arcs[it->second];
      TravelTimeFunction merged = minimum(TravelTimeFunction(spec.points, g.period()), sc.fn);
      spec.points.assign(merged.points().begin(), merged.points().end());
      auto& r = new_rep[it->second];
      r.insert(r.end(), sc.paths.begin(), sc.paths.end());
    } else {
      arcs.push_back({key.first, key.second, {sc.fn.points().begin(), sc.fn.points().end()}});
      new_rep.push_back(std::move(sc.paths));
    }
  }
  g = Instance(n, g.period(), g.vertices(), std::move(arcs));
  rep = std::move(new_rep);
  return true;
}

}  // namespace

ContractedInstance contract(const Instance& original) {
  ContractedInstance c;
  c.core = original;
  c.represented.resize(original.num_arcs());
  for (ArcId a = 0; a < original.num_arcs(); ++a) c.represented[a] = {{a}};
  while (contract_once(c.core, c.represented)) {
  }
  return c;
}

void save_contracted(const ContractedInstance& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_tdi(out, c.core);
  for (ArcId a = 0; a < c.core.num_arcs(); ++a) {
    out << "S " << a << ' ' << c.represented[a].size();
    for (const auto& p : c.represented[a]) {
      out << ' ' << p.size();
      for (ArcId x : p) out << ' ' << x;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

ContractedInstance load_contracted(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  struct ShortcutLine {
    std::size_t line_no;
    ArcId id;
    std::vector<ArcPath> paths;
  };
  std::vector<ShortcutLine> lines;
  ContractedInstance c;
  c.core = read_tdi(in, [&](std::string_view line, std::size_t line_no) {
    std::istringstream ss{std::string(line)};
    std::string tag;
    std::size_t id = 0, count = 0;
    if (!(ss >> tag >> id >> count) || tag != "S") throw FormatError(line_no, "malformed shortcut line");
    std::vector<ArcPath> paths(count);
    for (auto& p : paths) {
      std::size_t len = 0;
      if (!(ss >> len) || len == 0) throw FormatError(line_no, "malformed shortcut path");
      p.resize(len);
      for (auto& x : p) {
        if (!(ss >> x)) throw FormatError(line_no, "truncated shortcut path");
      }
    }
    std::string rest;
    if (ss >> rest) throw FormatError(line_no, "trailing tokens");
    lines.push_back({line_no, static_cast<ArcId>(id), std::move(paths)});
  });
  auto violations = validate(c.core);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  c.represented.resize(c.core.num_arcs());
  for (ArcId a = 0; a < c.core.num_arcs(); ++a) c.represented[a] = {{a}};
  for (auto& [line_no, id, paths] : lines) {
    if (id >= c.core.num_arcs()) throw FormatError(line_no, "shortcut line for unknown arc " + std::to_string(id));
    c.represented[id] = std::move(paths);
  }
  return c;
}

std::vector<ArcId> unpack(const ContractedInstance& c, const Instance& original,
                          std::span<const ArcId> core_path, double t0) {
  std::vector<ArcId> out;
  double t = t0;
  for (ArcId a : core_path) {
    if (a >= c.represented.size()) throw std::out_of_range("unknown shortcut id " + std::to_string(a));
    const ArcPath* best = nullptr;
    double best_cost = kInf;
    for (const auto& p : c.represented[a]) {
      const double cost = path_cost(original, p, t);
      const bool tie = best && std::abs(cost - best_cost) <= kTimeEps;
      if (!best || (!tie && cost < best_cost) || (tie && p.front() < best->front())) {
        best = &p;
        best_cost = cost;
      }
    }
    for (ArcId x : *best) {
      t += original.travel_time(x, t);
      out.push_back(x);
    }
  }
  return out;
}

ExpandedView::ExpandedView(const Instance& core, const Instance& original, std::vector<ArcId> extra)
    : core_(&core), original_(&original), extra_(std::move(extra)) {}

std::vector<ArcId> chain_arcs(const ContractedInstance& c, const Instance& original,
                              std::span<const VertexId> endpoints) {
  std::vector<char> seen(original.num_vertices(), 0);
  std::vector<ArcId> arcs;
  std::vector<VertexId> stack;
  for (VertexId s : endpoints) {
    if (c.is_active(s) || seen[s]) continue;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      auto visit = [&](ArcId a, VertexId w) {
        arcs.push_back(a);
        if (!c.is_active(w) && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      };
      for (ArcId a : original.out_arcs(v)) visit(a, original.head(a));
      for (ArcId a : original.in_arcs(v)) visit(a, original.tail(a));
    }
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
  return arcs;
}

std::vector<ArcId> unpack(const ContractedInstance& c, const Instance& original,
                          const ExpandedView& view, std::span<const ArcId> view_path, double t0) {
  std::vector<ArcId> out;
  double t = t0;
  for (ArcId a : view_path) {
    std::vector<ArcId> piece;
    if (view.is_extra(a)) {
      piece.push_back(view.original_arc(a));
    } else {
      const ArcId one[] = {a};
      piece = unpack(c, original, one, t);
    }
    for (ArcId x : piece) {
      t += original.travel_time(x, t);
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace cflat
