#include "ttf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cflat {

namespace {

double wrap_time(double t, double period) {
  double x = std::fmod(t, period);
  if (x < 0) x += period;
  if (x >= period) x = 0.0;
  return x;
}

// Sorted, merged candidate departure times in [0, period).
std::vector<double> normalize_times(std::vector<double> times, double period) {
  for (double& t : times) t = wrap_time(t, period);
  std::sort(times.begin(), times.end());
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (out.empty() || t - out.back() > kTimeEps) out.push_back(t);
  }
  while (out.size() > 1 && out.front() + period - out.back() <= kTimeEps) out.pop_back();
  return out;
}

void check_same_period(const TravelTimeFunction& a, const TravelTimeFunction& b) {
  if (a.period() != b.period()) throw TtfError("period mismatch");
}

}  // namespace

double evaluate(std::span<const Breakpoint> points, double period, double t) {
  const std::size_t k = points.size();
  if (k == 1) return points[0].value;
  const double x = wrap_time(t, period);
  auto it = std::upper_bound(points.begin(), points.end(), x,
                             [](double v, const Breakpoint& b) { return v < b.time; });
  double t0, v0, t1, v1;
  if (it == points.begin()) {
    t0 = points[k - 1].time - period;
    v0 = points[k - 1].value;
    t1 = points[0].time;
    v1 = points[0].value;
  } else if (it == points.end()) {
    t0 = points[k - 1].time;
    v0 = points[k - 1].value;
    t1 = points[0].time + period;
    v1 = points[0].value;
  } else {
    t0 = (it - 1)->time;
    v0 = (it - 1)->value;
    t1 = it->time;
    v1 = it->value;
  }
  return v0 + (v1 - v0) * ((x - t0) / (t1 - t0));
}

TravelTimeFunction::TravelTimeFunction(std::vector<Breakpoint> points, double period)
    : period_(period) {
  if (!(period > 0)) throw TtfError("period must be positive");
  if (points.empty()) throw TtfError("travel-time function needs at least one breakpoint");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& b = points[i];
    if (!(b.time >= 0 && b.time < period)) throw TtfError("breakpoint time outside [0, T)");
    if (!(b.value >= 0) || !std::isfinite(b.value)) throw TtfError("negative travel time");
    if (i > 0 && !(b.time > points[i - 1].time)) throw TtfError("breakpoint times not increasing");
  }
  points_.reserve(points.size());
  for (const auto& b : points) {
    if (!points_.empty() && b.time - points_.back().time <= kTimeEps) continue;
    points_.push_back(b);
  }
}

TravelTimeFunction TravelTimeFunction::constant(double value, double period) {
  return TravelTimeFunction({{0.0, value}}, period);
}

bool TravelTimeFunction::is_constant() const {
  return std::all_of(points_.begin(), points_.end(), [&](const Breakpoint& b) {
    return std::abs(b.value - points_[0].value) <= kTimeEps;
  });
}

double TravelTimeFunction::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : points_) m = std::min(m, b.value);
  return m;
}

double TravelTimeFunction::max_value() const {
  double m = 0.0;
  for (const auto& b : points_) m = std::max(m, b.value);
  return m;
}

namespace {

template <class Fn>
void for_each_slope(std::span<const Breakpoint> p, double period, Fn&& fn) {
  const std::size_t k = p.size();
  if (k < 2) return;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    fn((p[i + 1].value - p[i].value) / (p[i + 1].time - p[i].time));
  }
  fn((p[0].value - p[k - 1].value) / (p[0].time + period - p[k - 1].time));
}

}  // namespace

double TravelTimeFunction::max_slope() const {
  double m = 0.0;
  for_each_slope(points_, period_, [&](double s) { m = std::max(m, s); });
  return m;
}

double TravelTimeFunction::max_negative_slope() const {
  double m = 0.0;
  for_each_slope(points_, period_, [&](double s) { m = std::max(m, -s); });
  return m;
}

bool fifo_check(std::span<const Breakpoint> points, double period) {
  bool ok = true;
  for_each_slope(points, period, [&](double s) { ok = ok && s > -1.0; });
  return ok;
}

bool fifo_check(const TravelTimeFunction& f) { return fifo_check(f.points(), f.period()); }

TravelTimeFunction simplify(const TravelTimeFunction& f) {
  const auto pts = f.points();
  const std::size_t k = pts.size();
  if (k <= 1) return f;
  const double period = f.period();

  // Cyclic doubly linked list over breakpoint indices.
  std::vector<std::size_t> prev(k), next(k);
  for (std::size_t i = 0; i < k; ++i) {
    prev[i] = (i + k - 1) % k;
    next[i] = (i + 1) % k;
  }
  std::vector<bool> alive(k, true);
  std::size_t count = k;

  bool changed = true;
  while (changed && count > 2) {
    changed = false;
    for (std::size_t i = 0; i < k && count > 2; ++i) {
      if (!alive[i]) continue;
      const std::size_t p = prev[i], n = next[i];
      double tp = pts[p].time, tn = pts[n].time;
      const double tc = pts[i].time;
      if (tp >= tc) tp -= period;
      if (tn <= tc) tn += period;
      const double interp = pts[p].value + (pts[n].value - pts[p].value) * ((tc - tp) / (tn - tp));
      if (std::abs(interp - pts[i].value) <= kTimeEps) {
        alive[i] = false;
        next[p] = n;
        prev[n] = p;
        --count;
        changed = true;
      }
    }
  }

  std::vector<Breakpoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < k; ++i) {
    if (alive[i]) out.push_back(pts[i]);
  }
  // Two survivors are cyclically collinear only when the function is flat.
  if (out.size() == 2 && std::abs(out[0].value - out[1].value) <= kTimeEps) {
    out.resize(1);
  }
  if (out.size() == 1) out[0].time = 0.0;
  return TravelTimeFunction(std::move(out), period);
}

TravelTimeFunction link(const TravelTimeFunction& f1, const TravelTimeFunction& f2) {
  check_same_period(f1, f2);
  const double period = f1.period();
  const auto p1 = f1.points();

  // Knots of the arrival function A(t) = t + f1(t) over one unwrapped period.
  std::vector<double> kt, ka;
  kt.reserve(p1.size() + 1);
  ka.reserve(p1.size() + 1);
  for (const auto& b : p1) {
    kt.push_back(b.time);
    ka.push_back(b.time + b.value);
  }
  kt.push_back(p1[0].time + period);
  ka.push_back(p1[0].time + period + p1[0].value);

  std::vector<double> cand;
  cand.reserve(p1.size() + f2.size());
  for (const auto& b : p1) cand.push_back(b.time);

  const double a_lo = ka.front();
  for (const auto& b : f2.points()) {
    double y = b.time + period * std::ceil((a_lo - b.time) / period);
    if (y >= a_lo + period) y -= period;
    if (y < a_lo) y += period;
    auto it = std::upper_bound(ka.begin(), ka.end(), y);
    std::size_t seg = static_cast<std::size_t>(it - ka.begin());
    seg = seg == 0 ? 0 : seg - 1;
    if (seg + 1 >= ka.size()) seg = ka.size() - 2;
    const double t = kt[seg] + (y - ka[seg]) / (ka[seg + 1] - ka[seg]) * (kt[seg + 1] - kt[seg]);
    cand.push_back(t);
  }

  const auto times = normalize_times(std::move(cand), period);
  std::vector<Breakpoint> out;
  out.reserve(times.size());
  for (double t : times) {
    const double d1 = f1(t);
    out.push_back({t, d1 + f2(t + d1)});
  }
  return simplify(TravelTimeFunction(std::move(out), period));
}

namespace {

template <class Pick>
TravelTimeFunction envelope(const TravelTimeFunction& f1, const TravelTimeFunction& f2, Pick pick) {
  check_same_period(f1, f2);
  const double period = f1.period();
  std::vector<double> cand;
  cand.reserve(f1.size() + f2.size());
  for (const auto& b : f1.points()) cand.push_back(b.time);
  for (const auto& b : f2.points()) cand.push_back(b.time);
  auto times = normalize_times(std::move(cand), period);

  std::vector<double> crossings;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double a = times[i];
    const double b = i + 1 < times.size() ? times[i + 1] : times[0] + period;
    const double da = f1(a) - f2(a);
    const double db = f1(b) - f2(b);
    if ((da > kTimeEps && db < -kTimeEps) || (da < -kTimeEps && db > kTimeEps)) {
      crossings.push_back(a + (b - a) * (da / (da - db)));
    }
  }
  times.insert(times.end(), crossings.begin(), crossings.end());
  times = normalize_times(std::move(times), period);

  std::vector<Breakpoint> out;
  out.reserve(times.size());
  for (double t : times) out.push_back({t, pick(f1(t), f2(t))});
  return simplify(TravelTimeFunction(std::move(out), period));
}

}  // namespace

TravelTimeFunction minimum(const TravelTimeFunction& f1, const TravelTimeFunction& f2) {
  return envelope(f1, f2, [](double a, double b) { return std::min(a, b); });
}

TravelTimeFunction maximum(const TravelTimeFunction& f1, const TravelTimeFunction& f2) {
  return envelope(f1, f2, [](double a, double b) { return std::max(a, b); });
}

double PathSlopeModel::hops(double cost_cap) const {
  return std::max(1.0, std::floor(cost_cap / min_arc_time + 1e-9));
}

MetricBounds PathSlopeModel::for_hops(double h) const {
  MetricBounds b;
  b.lambda_max = std::expm1(h * std::log1p(arc.lambda_max));
  b.lambda_min = -std::expm1(h * std::log1p(-arc.lambda_min));
  b.lambda_min = std::min(b.lambda_min, std::nextafter(1.0, 0.0));
  return b;
}

MetricBounds PathSlopeModel::for_cost(double cost_cap) const {
  if (!(min_arc_time > 0) || !std::isfinite(cost_cap)) return arc;
  return for_hops(hops(cost_cap));
}

QuantizedTime quantize(double t, double scale) {
  double q = std::ceil(t / scale);
  if (q < 0) q = 0;
  while (q * scale < t) q += 1.0;
  while (q > 0 && (q - 1.0) * scale >= t) q -= 1.0;
  const auto idx = static_cast<std::uint64_t>(q);
  return QuantizedTime{static_cast<std::uint16_t>(idx & 0xFFFFu)};
}

}  // namespace cflat
