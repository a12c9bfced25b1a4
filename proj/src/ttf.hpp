#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace cflat {

/// Absolute tolerance (seconds) for comparing times and travel times.
inline constexpr double kTimeEps = 1e-9;

/// Default period: one day.
inline constexpr double kDay = 86400.0;

struct Breakpoint {
  double time;   // departure time in [0, T)
  double value;  // travel time >= 0

  friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

class TtfError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation on raw breakpoint storage; shared by TravelTimeFunction and the
// flattened arc storage of Instance.
double evaluate(std::span<const Breakpoint> points, double period, double t);

/// Continuous, piecewise-linear, periodic travel-time function. A single
/// breakpoint denotes a constant function.
class TravelTimeFunction {
 public:
  TravelTimeFunction() = default;

  /// Throws TtfError unless times are strictly increasing inside [0, period)
  /// and values are non-negative. Breakpoints closer than kTimeEps are merged.
  TravelTimeFunction(std::vector<Breakpoint> points, double period);

  static TravelTimeFunction constant(double value, double period = kDay);

  double operator()(double t) const { return evaluate(points_, period_, t); }

  double period() const { return period_; }
  std::span<const Breakpoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool is_constant() const;

  double min_value() const;
  double max_value() const;

  /// Largest positive segment slope (0 if none) and largest magnitude of a
  /// negative segment slope (0 if none), wraparound segment included.
  double max_slope() const;
  double max_negative_slope() const;

  friend bool operator==(const TravelTimeFunction&, const TravelTimeFunction&) = default;

 private:
  std::vector<Breakpoint> points_;
  double period_ = kDay;
};

/// True iff every segment slope (incl. wraparound) is > -1, i.e. departing
/// later never means arriving earlier.
bool fifo_check(const TravelTimeFunction& f);
bool fifo_check(std::span<const Breakpoint> points, double period);

/// g(t) = f1(t) + f2(t + f1(t)). Both inputs must be FIFO and share a period.
TravelTimeFunction link(const TravelTimeFunction& f1, const TravelTimeFunction& f2);

/// Pointwise lower envelope.
TravelTimeFunction minimum(const TravelTimeFunction& f1, const TravelTimeFunction& f2);

/// Pointwise upper envelope.
TravelTimeFunction maximum(const TravelTimeFunction& f1, const TravelTimeFunction& f2);

/// min_t f(t), attained at a breakpoint.
inline double freeflow(const TravelTimeFunction& f) { return f.min_value(); }

/// Drops breakpoints lying on the segment between their neighbours.
TravelTimeFunction simplify(const TravelTimeFunction& f);

/// Slope bounds used by the trapezoid approximation.
struct MetricBounds {
  double lambda_max = 0.0;  // max positive slope
  double lambda_min = 0.0;  // max magnitude of negative slope, < 1
};

/// Bounds on the slope of any path-travel-time function whose cost does not
/// exceed a cap. A path of cost c has at most floor(c / min_arc_time) arcs and
/// its slope is prod(1 + f_i') - 1 over those arcs.
struct PathSlopeModel {
  MetricBounds arc;
  double min_arc_time = 0.0;

  /// Largest arc count of a path whose cost is at most cost_cap (>= 1).
  double hops(double cost_cap) const;
  MetricBounds for_hops(double hops) const;
  MetricBounds for_cost(double cost_cap) const;
};

/// 16-bit fixed-range time. Index i denotes s * i; index 0 also denotes T.
struct QuantizedTime {
  std::uint16_t index = 0;
  friend bool operator==(QuantizedTime, QuantizedTime) = default;
};

/// Scale that maps [0, period) onto 16 bits.
inline double quantization_scale(double period) { return period / 65536.0; }

/// index = ceil(t / s) mod 65536, with s * index >= t guaranteed bit-exactly.
QuantizedTime quantize(double t, double scale);
inline double dequantize(QuantizedTime q, double scale) { return scale * q.index; }

}  // namespace cflat
