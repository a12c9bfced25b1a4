#include "graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace cflat {

namespace {

std::string summarize(const std::vector<Violation>& v) {
  std::string s = std::to_string(v.size()) + " instance violation(s)";
  if (!v.empty()) s += ": " + v.front().message;
  return s;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(summarize(violations)), violations_(std::move(violations)) {}

Instance::Instance(std::size_t n, double period, std::vector<VertexInfo> vertices,
                   std::vector<ArcSpec> arcs)
    : n_(n), period_(period), vertices_(std::move(vertices)) {
  if (vertices_.empty()) vertices_.resize(n);
  if (vertices_.size() != n) throw std::invalid_argument("vertex info count differs from n");
  const std::size_t m = arcs.size();
  tails_.reserve(m);
  heads_.reserve(m);
  freeflow_.reserve(m);
  bp_offsets_.reserve(m + 1);
  for (std::size_t a = 0; a < m; ++a) {
    auto& spec = arcs[a];
    if (spec.tail >= n || spec.head >= n) {
      throw std::invalid_argument("arc " + std::to_string(a) + " has an endpoint outside [0,n)");
    }
    if (spec.points.empty()) {
      throw std::invalid_argument("arc " + std::to_string(a) + " has no breakpoints");
    }
    tails_.push_back(spec.tail);
    heads_.push_back(spec.head);
    double ff = std::numeric_limits<double>::infinity();
    for (const auto& b : spec.points) ff = std::min(ff, b.value);
    freeflow_.push_back(ff);
    bps_.insert(bps_.end(), spec.points.begin(), spec.points.end());
    bp_offsets_.push_back(bps_.size());
  }

  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (std::size_t a = 0; a < m; ++a) {
    ++out_offsets_[tails_[a] + 1];
    ++in_offsets_[heads_[a] + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
  out_arcs_.resize(m);
  in_arcs_.resize(m);
  in_pos_.resize(m);
  std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::size_t a = 0; a < m; ++a) {
    out_arcs_[out_fill[tails_[a]]++] = static_cast<ArcId>(a);
    const std::size_t slot = in_fill[heads_[a]]++;
    in_arcs_[slot] = static_cast<ArcId>(a);
    in_pos_[a] = static_cast<std::uint32_t>(slot - in_offsets_[heads_[a]]);
  }
}

TravelTimeFunction Instance::ttf(ArcId a) const {
  auto p = breakpoints(a);
  return TravelTimeFunction(std::vector<Breakpoint>(p.begin(), p.end()), period_);
}

bool Instance::has_importance() const {
  return std::any_of(vertices_.begin(), vertices_.end(),
                     [](const VertexInfo& v) { return v.category != 0; });
}

std::vector<ArcSpec> Instance::arc_specs() const {
  std::vector<ArcSpec> out;
  out.reserve(num_arcs());
  for (ArcId a = 0; a < num_arcs(); ++a) {
    auto p = breakpoints(a);
    out.push_back({tails_[a], heads_[a], {p.begin(), p.end()}});
  }
  return out;
}

bool operator==(const Instance& a, const Instance& b) {
  return a.n_ == b.n_ && a.period_ == b.period_ && a.vertices_ == b.vertices_ &&
         a.tails_ == b.tails_ && a.heads_ == b.heads_ && a.bp_offsets_ == b.bp_offsets_ &&
         a.bps_ == b.bps_;
}

std::vector<Violation> validate(const Instance& g) {
  std::vector<Violation> out;
  const double period = g.period();
  if (!(period > 0)) out.push_back({"period must be positive", std::nullopt, std::nullopt});
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    const std::string tag = "arc " + std::to_string(a) + ": ";
    if (g.tail(a) == g.head(a)) out.push_back({tag + "self-loop", a, std::nullopt});
    auto p = g.breakpoints(a);
    bool ordered = true;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(p[i].time >= 0 && p[i].time < period)) {
        out.push_back({tag + "breakpoint time outside [0,T)", a, std::nullopt});
        ordered = false;
      }
      if (!(p[i].value >= 0) || !std::isfinite(p[i].value)) {
        out.push_back({tag + "negative or non-finite travel time", a, std::nullopt});
      }
      if (i > 0 && !(p[i].time > p[i - 1].time)) {
        out.push_back({tag + "breakpoint times not strictly increasing", a, std::nullopt});
        ordered = false;
      }
    }
    if (ordered && !fifo_check(p, period)) {
      out.push_back({tag + "violates FIFO (segment slope <= -1)", a, std::nullopt});
    }
  }
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (g.in_arcs(v).size() > kMaxInDegree) {
      out.push_back({"vertex " + std::to_string(v) + ": in-degree " +
                         std::to_string(g.in_arcs(v).size()) + " exceeds 255",
                     std::nullopt, v});
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

class Tokens {
 public:
  Tokens(std::string_view line, std::size_t line_no) : rest_(line), line_no_(line_no) {}

  std::string_view word() {
    skip();
    if (rest_.empty()) throw FormatError(line_no_, "unexpected end of line");
    std::size_t i = 0;
    while (i < rest_.size() && !std::isspace(static_cast<unsigned char>(rest_[i]))) ++i;
    auto w = rest_.substr(0, i);
    rest_.remove_prefix(i);
    return w;
  }

  template <class T>
  T number() {
    auto w = word();
    T value{};
    auto res = std::from_chars(w.data(), w.data() + w.size(), value);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size()) {
      throw FormatError(line_no_, "malformed number '" + std::string(w) + "'");
    }
    return value;
  }

  void expect_end() {
    skip();
    if (!rest_.empty()) throw FormatError(line_no_, "trailing tokens");
  }

 private:
  void skip() {
    while (!rest_.empty() && std::isspace(static_cast<unsigned char>(rest_.front()))) {
      rest_.remove_prefix(1);
    }
  }
  std::string_view rest_;
  std::size_t line_no_;
};

bool blank_or_comment(std::string_view s) {
  for (char c : s) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Instance read_tdi(std::istream& in, const ExtraLineHandler& on_extra) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!blank_or_comment(line)) return true;
    }
    return false;
  };

  if (!next_line()) throw FormatError(line_no, "empty file");
  {
    Tokens tok(line, line_no);
    if (tok.word() != "TDI") throw FormatError(line_no, "missing TDI header");
    if (tok.number<int>() != 1) throw FormatError(line_no, "unsupported TDI version");
    tok.expect_end();
  }
  if (!next_line()) throw FormatError(line_no, "missing size line");
  std::size_t n = 0, m = 0;
  double period = 0;
  {
    Tokens tok(line, line_no);
    n = tok.number<std::size_t>();
    m = tok.number<std::size_t>();
    period = tok.number<double>();
    tok.expect_end();
    if (!(period > 0)) throw FormatError(line_no, "period must be positive");
  }

  std::vector<VertexInfo> vertices(n);
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!next_line()) throw FormatError(line_no, "expected " + std::to_string(n) + " vertex lines");
    Tokens tok(line, line_no);
    if (tok.word() != "V") throw FormatError(line_no, "expected vertex line");
    const auto id = tok.number<std::size_t>();
    if (id >= n) throw FormatError(line_no, "vertex id out of range");
    if (seen[id]) throw FormatError(line_no, "duplicate vertex id");
    seen[id] = true;
    vertices[id].x = tok.number<double>();
    vertices[id].y = tok.number<double>();
    vertices[id].category = tok.number<int>();
    tok.expect_end();
  }

  std::vector<ArcSpec> arcs;
  arcs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!next_line()) throw FormatError(line_no, "expected " + std::to_string(m) + " arc lines");
    Tokens tok(line, line_no);
    if (tok.word() != "A") throw FormatError(line_no, "expected arc line");
    ArcSpec spec;
    spec.tail = tok.number<VertexId>();
    spec.head = tok.number<VertexId>();
    if (spec.tail >= n || spec.head >= n) throw FormatError(line_no, "arc endpoint out of range");
    const auto k = tok.number<std::size_t>();
    if (k == 0) throw FormatError(line_no, "arc needs at least one breakpoint");
    spec.points.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      const double t = tok.number<double>();
      const double w = tok.number<double>();
      spec.points.push_back({t, w});
    }
    tok.expect_end();
    arcs.push_back(std::move(spec));
  }

  while (next_line()) {
    if (!on_extra) throw FormatError(line_no, "unexpected content after arc section");
    on_extra(line, line_no);
  }
  return Instance(n, period, std::move(vertices), std::move(arcs));
}

void write_tdi(std::ostream& out, const Instance& g) {
  out << "TDI 1\n" << g.num_vertices() << ' ' << g.num_arcs() << ' ' << format_double(g.period())
      << '\n';
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const auto& info = g.vertex(v);
    out << "V " << v << ' ' << format_double(info.x) << ' ' << format_double(info.y) << ' '
        << info.category << '\n';
  }
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    auto p = g.breakpoints(a);
    out << "A " << g.tail(a) << ' ' << g.head(a) << ' ' << p.size();
    for (const auto& b : p) out << ' ' << format_double(b.time) << ' ' << format_double(b.value);
    out << '\n';
  }
}

Instance load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Instance g = read_tdi(in);
  auto violations = validate(g);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return g;
}

void save(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_tdi(out, instance);
  if (!out) throw IoError("write failed: " + path);
}

MetricBounds slope_bounds(const Instance& g) {
  MetricBounds b;
  std::vector<Violation> bad;
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    auto p = g.breakpoints(a);
    if (!fifo_check(p, g.period())) {
      bad.push_back({"arc " + std::to_string(a) + " violates FIFO", a, std::nullopt});
      continue;
    }
    const std::size_t k = p.size();
    for (std::size_t i = 0; i < k && k > 1; ++i) {
      const auto& x = p[i];
      const auto& y = p[(i + 1) % k];
      const double dt = i + 1 < k ? y.time - x.time : y.time + g.period() - x.time;
      const double s = (y.value - x.value) / dt;
      b.lambda_max = std::max(b.lambda_max, s);
      b.lambda_min = std::max(b.lambda_min, -s);
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return b;
}

double min_arc_time(const Instance& g) {
  double m = std::numeric_limits<double>::infinity();
  for (ArcId a = 0; a < g.num_arcs(); ++a) m = std::min(m, g.freeflow(a));
  return g.num_arcs() == 0 ? 0.0 : m;
}

PathSlopeModel path_slope_model(const Instance& g) {
  return PathSlopeModel{slope_bounds(g), min_arc_time(g)};
}

// ---------------------------------------------------------------------------
// Synthetic instances

namespace {

// Road classes, fastest first.
enum class RoadClass { kHighway, kArterial, kLocal };

struct Road {
  VertexId a, b;
  RoadClass cls;
};

int category_of(RoadClass c) {
  return c == RoadClass::kHighway ? 1 : c == RoadClass::kArterial ? 2 : 5;
}

class ProfileMaker {
 public:
  ProfileMaker(const GeneratorParams& p, std::mt19937_64& rng) : p_(p), rng_(rng) {}

  std::vector<Breakpoint> make(double base) {
    const double T = p_.period;
    const double hour = T / 24.0;
    TravelTimeFunction f = TravelTimeFunction::constant(base, T);
    const std::size_t peaks = std::uniform_int_distribution<std::size_t>(
        1, std::max<std::size_t>(1, p_.max_peaks))(rng_);
    for (std::size_t i = 0; i < peaks && p_.max_peaks > 0; ++i) {
      double center;
      if (uniform(0, 1) < 0.7) {
        center = (i % 2 == 0 ? 8.0 : 17.5) * hour + normal(0.75 * hour);
      } else {
        center = uniform(0, T);
      }
      double amp = uniform(0.1, std::max(0.1, p_.peak_amplitude)) * base;
      const double plateau = uniform(0.5, 2.0) * hour;
      double ramp = std::max(uniform(1.0, 3.0) * hour, amp / p_.lambda_max_target);
      const double max_ramp = (0.9 * T - plateau) / 2.0;
      if (ramp > max_ramp) {
        ramp = max_ramp;
        amp = std::min(amp, ramp * p_.lambda_max_target);
      }
      const double t0 = center - plateau / 2 - ramp;
      std::vector<Breakpoint> pts = {{t0, base},
                                     {t0 + ramp, base + amp},
                                     {t0 + ramp + plateau, base + amp},
                                     {t0 + 2 * ramp + plateau, base}};
      for (auto& b : pts) {
        b.time = std::fmod(b.time, T);
        if (b.time < 0) b.time += T;
      }
      std::sort(pts.begin(), pts.end(),
                [](const Breakpoint& x, const Breakpoint& y) { return x.time < y.time; });
      f = maximum(f, TravelTimeFunction(std::move(pts), T));
    }
    auto p = f.points();
    return {p.begin(), p.end()};
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sd) { return std::normal_distribution<double>(0.0, sd)(rng_); }

 private:
  const GeneratorParams& p_;
  std::mt19937_64& rng_;
};

bool segments_cross(const VertexInfo& a, const VertexInfo& b, const VertexInfo& c,
                    const VertexInfo& d) {
  auto orient = [](const VertexInfo& p, const VertexInfo& q, const VertexInfo& r) {
    const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    return (v > 0) - (v < 0);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a),
            o4 = orient(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

Instance generate(const GeneratorParams& p) {
  if (!(p.period > 0)) throw std::invalid_argument("period must be positive");
  if (!(p.lambda_max_target > 0 && p.lambda_max_target < 0.9)) {
    throw std::invalid_argument("lambda_max_target must lie in (0, 0.9)");
  }
  std::mt19937_64 rng(p.seed);
  ProfileMaker profiles(p, rng);
  std::vector<VertexInfo> vertices;
  std::vector<Road> roads;

  if (p.kind == GeneratorKind::kGrid) {
    if (p.rows == 0 || p.cols == 0) throw std::invalid_argument("grid size must be positive");
    auto line_class = [&](std::size_t i) {
      if (p.highway_every > 0 && i % p.highway_every == 0) return RoadClass::kHighway;
      if (p.arterial_every > 0 && i % p.arterial_every == 0) return RoadClass::kArterial;
      return RoadClass::kLocal;
    };
    for (std::size_t r = 0; r < p.rows; ++r) {
      for (std::size_t c = 0; c < p.cols; ++c) {
        VertexInfo v;
        v.x = static_cast<double>(c) * p.spacing + profiles.uniform(-0.15, 0.15) * p.spacing;
        v.y = static_cast<double>(r) * p.spacing + profiles.uniform(-0.15, 0.15) * p.spacing;
        v.category = category_of(std::min(line_class(r), line_class(c)));
        vertices.push_back(v);
      }
    }
    for (std::size_t r = 0; r < p.rows; ++r) {
      for (std::size_t c = 0; c < p.cols; ++c) {
        const auto id = static_cast<VertexId>(r * p.cols + c);
        if (c + 1 < p.cols) roads.push_back({id, id + 1, line_class(r)});
        if (r + 1 < p.rows) roads.push_back({id, static_cast<VertexId>(id + p.cols), line_class(c)});
      }
    }
  } else {
    if (p.vertices == 0) throw std::invalid_argument("vertex count must be positive");
    const std::size_t n = p.vertices;
    const double side = std::sqrt(static_cast<double>(n)) * p.spacing;
    for (std::size_t i = 0; i < n; ++i) {
      VertexInfo v;
      v.x = profiles.uniform(0, side);
      v.y = profiles.uniform(0, side);
      v.category = profiles.uniform(0, 1) < 0.2 ? 2 : 5;
      vertices.push_back(v);
    }
    // Greedy planar graph over the nearest candidate pairs.
    struct Cand {
      double len;
      VertexId a, b;
    };
    std::vector<Cand> cands;
    const std::size_t k = std::min<std::size_t>(6, n - 1);
    for (VertexId a = 0; a < n; ++a) {
      std::vector<std::pair<double, VertexId>> near;
      for (VertexId b = 0; b < n; ++b) {
        if (a == b) continue;
        near.push_back({std::hypot(vertices[a].x - vertices[b].x, vertices[a].y - vertices[b].y), b});
      }
      std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end());
      for (std::size_t j = 0; j < k; ++j) {
        if (a < near[j].second) cands.push_back({near[j].first, a, near[j].second});
        else cands.push_back({near[j].first, near[j].second, a});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      return std::tie(x.len, x.a, x.b) < std::tie(y.len, y.a, y.b);
    });
    cands.erase(std::unique(cands.begin(), cands.end(),
                            [](const Cand& x, const Cand& y) { return x.a == y.a && x.b == y.b; }),
                cands.end());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::size_t> degree(n, 0);
    for (const auto& c : cands) {
      if (degree[c.a] >= 8 || degree[c.b] >= 8) continue;
      bool crosses = false;
      for (const auto& r : roads) {
        if (r.a == c.a || r.a == c.b || r.b == c.a || r.b == c.b) continue;
        if (segments_cross(vertices[c.a], vertices[c.b], vertices[r.a], vertices[r.b])) {
          crosses = true;
          break;
        }
      }
      if (crosses) continue;
      roads.push_back({c.a, c.b,
                       vertices[c.a].category <= 3 && vertices[c.b].category <= 3 ? RoadClass::kArterial
                                                                                   : RoadClass::kLocal});
      ++degree[c.a];
      ++degree[c.b];
      parent[find_root(parent, c.a)] = find_root(parent, c.b);
    }
    // Join leftover components through their closest vertex pair.
    for (;;) {
      const std::size_t root0 = find_root(parent, 0);
      double best = std::numeric_limits<double>::infinity();
      VertexId ba = 0, bb = 0;
      for (VertexId a = 0; a < n; ++a) {
        if (find_root(parent, a) != root0) continue;
        for (VertexId b = 0; b < n; ++b) {
          if (find_root(parent, b) == root0) continue;
          const double d = std::hypot(vertices[a].x - vertices[b].x, vertices[a].y - vertices[b].y);
          if (d < best) {
            best = d;
            ba = a;
            bb = b;
          }
        }
      }
      if (!std::isfinite(best)) break;
      roads.push_back({ba, bb, RoadClass::kLocal});
      parent[find_root(parent, bb)] = root0;
    }
  }

  std::vector<ArcSpec> arcs;
  auto add_segment = [&](VertexId a, VertexId b, RoadClass cls) {
    const double len = std::hypot(vertices[a].x - vertices[b].x, vertices[a].y - vertices[b].y);
    const double mid = 0.5 * (p.speed_min + p.speed_max);
    for (int dir = 0; dir < 2; ++dir) {
      double speed;
      switch (cls) {
        case RoadClass::kHighway: speed = profiles.uniform(p.speed_max, p.highway_speed); break;
        case RoadClass::kArterial: speed = profiles.uniform(mid, p.speed_max); break;
        default: speed = profiles.uniform(p.speed_min, mid);
      }
      const double base = std::max(1.0, len / speed);
      arcs.push_back({dir == 0 ? a : b, dir == 0 ? b : a, profiles.make(base)});
    }
  };
  for (const auto& road : roads) {
    std::size_t pieces = 1;
    if (p.subdivide_prob > 0 && p.subdivide_max >= 2 && profiles.uniform(0, 1) < p.subdivide_prob) {
      pieces = std::uniform_int_distribution<std::size_t>(2, p.subdivide_max)(rng);
    }
    VertexId prev = road.a;
    for (std::size_t s = 1; s < pieces; ++s) {
      const double f = static_cast<double>(s) / static_cast<double>(pieces);
      VertexInfo v;
      v.x = vertices[road.a].x + f * (vertices[road.b].x - vertices[road.a].x);
      v.y = vertices[road.a].y + f * (vertices[road.b].y - vertices[road.a].y);
      v.category = category_of(road.cls);
      vertices.push_back(v);
      const auto id = static_cast<VertexId>(vertices.size() - 1);
      add_segment(prev, id, road.cls);
      prev = id;
    }
    add_segment(prev, road.b, road.cls);
  }
  const std::size_t n = vertices.size();
  return Instance(n, p.period, std::move(vertices), std::move(arcs));
}

}  // namespace cflat
