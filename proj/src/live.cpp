#include "live.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parallel.hpp"
#include "tdd.hpp"

namespace cflat {

namespace {

// Quantized index without the wrap to 0, so entries just below T sort last.
std::uint32_t quantum(double t, double scale) {
  const QuantizedTime q = quantize(t, scale);
  return q.index == 0 && t > 0 ? 65536u : q.index;
}

struct Step {
  std::uint32_t q;
  std::uint8_t pred;
  friend bool operator==(const Step&, const Step&) = default;
};

// Predecessor active at q0 followed by the changes in (q0, q_end].
std::vector<Step> restrict_steps(const std::vector<Step>& all, std::uint32_t q0, std::uint32_t q_end) {
  std::vector<Step> out;
  std::uint8_t initial = all.back().pred;  // wraps from the previous day
  for (const auto& s : all) {
    if (s.q <= q0) initial = s.pred;
  }
  out.push_back({q0, initial});
  for (const auto& s : all) {
    if (s.q > q0 && s.q <= q_end && s.pred != out.back().pred) out.push_back(s);
  }
  return out;
}

}  // namespace

void check_report(const Instance& g, const DisruptionReport& r) {
  if (r.arc >= g.num_arcs()) throw std::invalid_argument("disruption arc out of range");
  if (!(0 <= r.start && r.start < r.end && r.end < g.period())) {
    throw std::invalid_argument("disruption window must satisfy 0 <= start < end < T");
  }
  if (!(r.factor >= 1.0) || !std::isfinite(r.factor)) throw std::invalid_argument("disruption factor must be >= 1");
  if (!(r.ramp > 0)) throw std::invalid_argument("disruption ramp must be positive");
}

TravelTimeFunction disrupted_function(const TravelTimeFunction& f, const DisruptionReport& r, double* ramp_used) {
  const double T = f.period();
  if (r.factor == 1.0) {
    if (ramp_used) *ramp_used = r.ramp;
    return f;
  }
  auto wrap = [T](double t) { return t - T * std::floor(t / T); };
  for (double w = r.ramp;; w *= 2) {
    if (2 * w + (r.end - r.start) >= T) throw std::invalid_argument("disruption ramp cannot keep FIFO");
    std::vector<Breakpoint> mp = {{wrap(r.start - w), 1.0},
                                  {wrap(r.start), r.factor},
                                  {wrap(r.end), r.factor},
                                  {wrap(r.end + w), 1.0}};
    std::sort(mp.begin(), mp.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.time < b.time; });
    const TravelTimeFunction m(mp, T);
    std::vector<double> times;
    for (const auto& p : f.points()) times.push_back(p.time);
    for (const auto& p : m.points()) times.push_back(p.time);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    std::vector<Breakpoint> out;
    for (double t : times) out.push_back({t, f(t) * m(t)});
    TravelTimeFunction product = simplify(TravelTimeFunction(std::move(out), T));
    if (fifo_check(product)) {
      if (ramp_used) *ramp_used = w;
      return product;
    }
  }
}

Instance disrupt(const Instance& g, const DisruptionReport& r, double* ramp_used) {
  check_report(g, r);
  auto specs = g.arc_specs();
  const TravelTimeFunction f = disrupted_function(g.ttf(r.arc), r, ramp_used);
  specs[r.arc].points.assign(f.points().begin(), f.points().end());
  return Instance(g.num_vertices(), g.period(), g.vertices(), std::move(specs));
}

std::vector<std::uint32_t> affected_landmarks(const Instance& g, const std::vector<VertexId>& landmarks,
                                              const DisruptionReport& r) {
  check_report(g, r);
  std::vector<char> near(g.num_vertices(), 0);
  for (const auto& x : backward_freeflow(g, g.tail(r.arc), r.end - r.start)) near[x.vertex] = 1;
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < landmarks.size(); ++i) {
    if (landmarks[i] < near.size() && near[landmarks[i]]) out.push_back(i);
  }
  return out;
}

const OverlayWindow* TemporalOverlay::find(std::uint32_t landmark_index) const {
  auto it = std::lower_bound(windows.begin(), windows.end(), landmark_index,
                             [](const OverlayWindow& w, std::uint32_t i) { return w.landmark_index < i; });
  return it != windows.end() && it->landmark_index == landmark_index ? &*it : nullptr;
}

LiveUpdate apply_disruption(const Instance& g, const Store& store, const DisruptionReport& r, const LiveParams& p) {
  if (!(p.congestion >= 1.0)) throw std::invalid_argument("congestion factor must be >= 1");
  if (store.num_vertices() != g.num_vertices()) throw std::invalid_argument("store does not match instance");
  LiveUpdate out;
  out.overlay.report = r;
  out.disrupted = disrupt(g, r, &out.overlay.ramp);
  const double T = g.period();
  const double w = out.overlay.ramp;
  const double scale = quantization_scale(T);

  std::vector<double> lb(g.num_vertices(), kInf);
  for (const auto& x : backward_freeflow(g, g.tail(r.arc), r.end - r.start)) lb[x.vertex] = x.distance;
  const auto affected = affected_landmarks(g, store.landmarks(), r);

  auto& windows = out.overlay.windows;
  windows.resize(affected.size());
  parallel_for(affected.size(), p.threads, [&](std::size_t k) {
    OverlayWindow& win = windows[k];
    win.landmark_index = affected[k];
    win.landmark = store.landmarks()[affected[k]];
    const double d = lb[win.landmark];
    win.t_s = std::max(0.0, r.start - w - p.congestion * d);
    win.t_e = std::min(std::nextafter(T, 0.0), r.end + w - d);

    CtrapParams cp = p.ctrap;
    cp.window = std::make_pair(win.t_s, win.t_e);
    const auto grid = round0_grid(T, cp.tau_start, cp.window);
    win.cover_begin = grid.front();
    win.cover_end = grid.back();
    CtrapResult res = ctrap_sample(out.disrupted, win.landmark, cp);

    const LandmarkSummary& base = store.summary(win.landmark_index);
    const std::uint32_t q0 = quantum(win.cover_begin, scale);
    const std::uint32_t q_end = win.cover_end < T ? quantum(win.cover_end, scale) : 65536u;
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      if (!res.reachable[v] || !base.reachable(v)) continue;
      auto& seq = res.merged[v];
      std::vector<Step> mine, theirs;
      for (std::size_t i = 0; i < seq.deps.size(); ++i) {
        if (seq.deps[i] < T) mine.push_back({quantum(seq.deps[i], scale), seq.preds[i]});
      }
      for (std::size_t i = 0; i < base.count(v); ++i) {
        theirs.push_back({base.dep(v, i).index, base.pred(v, i)});
      }
      if (restrict_steps(mine, q0, q_end) != restrict_steps(theirs, q0, q_end)) win.changed.emplace(v, std::move(seq));
    }
  });
  return out;
}

PredInterval lookup_with_overlay(const Store& store, const TemporalOverlay* overlay, std::uint32_t landmark_index,
                                 VertexId v, double t_l, double now) {
  const double T = store.period();
  if (overlay && !overlay->expired(now)) {
    if (const OverlayWindow* win = overlay->find(landmark_index)) {
      const double t = t_l - T * std::floor(t_l / T);
      auto it = win->changed.find(v);
      if (it != win->changed.end() && win->t_s <= t && t <= win->t_e) {
        const auto& deps = it->second.deps;
        const auto& preds = it->second.preds;
        const std::size_t i =
            static_cast<std::size_t>(std::upper_bound(deps.begin(), deps.end(), t) - deps.begin()) - 1;
        PredInterval r;
        r.pred_lo = preds[i];
        r.t_lo = deps[i];
        if (i + 1 < deps.size()) {
          r.pred_hi = preds[i + 1];
          r.t_hi = deps[i + 1];
        } else {
          r.pred_hi = preds[i];
          r.t_hi = win->cover_end;
        }
        return r;
      }
    }
  }
  return pred_lookup(store.summary(landmark_index), v, t_l);
}

}  // namespace cflat
