#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ttf.hpp"

namespace cflat {

using VertexId = std::uint32_t;
using ArcId = std::uint32_t;

inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();
inline constexpr ArcId kNoArc = std::numeric_limits<ArcId>::max();

/// Predecessors are coded as the position of the arc in the head's incoming
/// list, one byte wide. 0xFF is reserved for "no predecessor".
inline constexpr std::uint8_t kNoPred = 0xFF;
inline constexpr std::size_t kMaxInDegree = 255;

/// Lower category = more important road. 0 = unknown.
inline constexpr int kImportantCategory = 3;

struct VertexInfo {
  double x = 0.0;
  double y = 0.0;
  int category = 0;

  friend bool operator==(const VertexInfo&, const VertexInfo&) = default;
};

struct ArcSpec {
  VertexId tail = 0;
  VertexId head = 0;
  std::vector<Breakpoint> points;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the TDI reader. Carries the 1-based line number.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Violation {
  std::string message;
  std::optional<ArcId> arc;
  std::optional<VertexId> vertex;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Directed graph with one periodic travel-time function per arc. Arc ids are
/// dense; incoming and outgoing lists are sorted by arc id so predecessor
/// positions are stable. Immutable once built.
class Instance {
 public:
  Instance() = default;
  /// Throws std::invalid_argument on out-of-range endpoints or empty
  /// functions. Everything else is left to validate().
  Instance(std::size_t n, double period, std::vector<VertexInfo> vertices,
           std::vector<ArcSpec> arcs);

  std::size_t num_vertices() const { return n_; }
  std::size_t num_arcs() const { return tails_.size(); }
  double period() const { return period_; }

  VertexId tail(ArcId a) const { return tails_[a]; }
  VertexId head(ArcId a) const { return heads_[a]; }
  std::span<const Breakpoint> breakpoints(ArcId a) const {
    return {bps_.data() + bp_offsets_[a], bp_offsets_[a + 1] - bp_offsets_[a]};
  }
  TravelTimeFunction ttf(ArcId a) const;
  double travel_time(ArcId a, double t) const { return evaluate(breakpoints(a), period_, t); }
  double freeflow(ArcId a) const { return freeflow_[a]; }

  std::span<const ArcId> out_arcs(VertexId v) const {
    return {out_arcs_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
  }
  std::span<const ArcId> in_arcs(VertexId v) const {
    return {in_arcs_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
  }
  /// Position of arc a inside in_arcs(head(a)).
  std::uint32_t in_position(ArcId a) const { return in_pos_[a]; }

  template <class Fn>
  void for_each_out(VertexId v, Fn&& fn) const {
    for (ArcId a : out_arcs(v)) fn(a);
  }
  template <class Fn>
  void for_each_in(VertexId v, Fn&& fn) const {
    for (ArcId a : in_arcs(v)) fn(a);
  }

  const VertexInfo& vertex(VertexId v) const { return vertices_[v]; }
  bool has_importance() const;

  /// Vertices with at least one incident arc.
  bool is_active(VertexId v) const {
    return out_offsets_[v + 1] > out_offsets_[v] || in_offsets_[v + 1] > in_offsets_[v];
  }

  std::vector<ArcSpec> arc_specs() const;
  const std::vector<VertexInfo>& vertices() const { return vertices_; }

  friend bool operator==(const Instance& a, const Instance& b);

 private:
  std::size_t n_ = 0;
  double period_ = kDay;
  std::vector<VertexInfo> vertices_;
  std::vector<VertexId> tails_, heads_;
  std::vector<std::size_t> bp_offsets_{0};
  std::vector<Breakpoint> bps_;
  std::vector<double> freeflow_;
  std::vector<std::size_t> out_offsets_, in_offsets_;
  std::vector<ArcId> out_arcs_, in_arcs_;
  std::vector<std::uint32_t> in_pos_;
};

/// Every violated instance invariant; empty means valid.
std::vector<Violation> validate(const Instance& instance);

/// Callback for non-core lines (e.g. shortcut sections) found after the arcs.
using ExtraLineHandler = std::function<void(std::string_view line, std::size_t line_no)>;

Instance read_tdi(std::istream& in, const ExtraLineHandler& on_extra = {});
void write_tdi(std::ostream& out, const Instance& instance);

/// Parses and validates; throws FormatError or ValidationError.
Instance load(const std::string& path);
void save(const Instance& instance, const std::string& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

MetricBounds slope_bounds(const Instance& instance);
double min_arc_time(const Instance& instance);
PathSlopeModel path_slope_model(const Instance& instance);

enum class GeneratorKind { kGrid, kRandomPlanar };

struct GeneratorParams {
  GeneratorKind kind = GeneratorKind::kGrid;
  std::size_t rows = 10;
  std::size_t cols = 10;
  std::size_t vertices = 100;  // random-planar only
  std::uint64_t seed = 1;
  double period = kDay;

  // Road geometry and speeds.
  double spacing = 400.0;  // metres between grid neighbours
  double speed_min = 8.0;  // m/s
  double speed_max = 20.0;
  std::size_t arterial_every = 5;  // every k-th row/column is an important road
  std::size_t highway_every = 0;   // every k-th row/column is a highway (0 = none)
  double highway_speed = 30.0;     // upper speed on highways; the lower one is speed_max

  // Congestion profile: 1..max_peaks trapezoidal bumps per arc.
  std::size_t max_peaks = 3;
  double peak_amplitude = 0.8;  // max relative increase over free flow
  double lambda_max_target = 0.002;

  // Probability that a grid edge is subdivided into a degree-2 chain.
  double subdivide_prob = 0.0;
  std::size_t subdivide_max = 3;
};

Instance generate(const GeneratorParams& params);

}  // namespace cflat
