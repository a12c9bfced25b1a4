#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace cflat {

enum class MaeMode { kGeometric, kLiteral };

/// Envelopes through (ts, Ds) and (tf, Df) with slopes bounded by `b`.
double trapezoid_upper(double t, double ts, double tf, double Ds, double Df, const MetricBounds& b);
double trapezoid_lower(double t, double ts, double tf, double Ds, double Df, const MetricBounds& b);
/// max over [ts, tf] of upper - lower.
double trapezoid_gap(double ts, double tf, double Ds, double Df, const MetricBounds& b);

/// Deactivation test for one sampling interval. Geometric: the trapezoid gap
/// is at most eps * min(Ds, Df). Literal: min(Ds, Df) >= (1 + 1/eps) * lambda_max.
bool mae_ok(double Ds, double Df, double ts, double tf, double eps, const MetricBounds& b, MaeMode mode);

/// Geometric test strengthened so that upper <= (1 + eps) * lower holds at
/// every point of the interval, hence upper <= (1 + eps) * D.
bool trapezoid_relative_ok(double Ds, double Df, double ts, double tf, double eps, const MetricBounds& b);

bool almost_constant(double Ds, double Dmid, double Df);

/// Drops entries whose predecessor repeats the previous one.
template <class Time>
void merge(std::vector<std::uint8_t>& preds, std::vector<Time>& deps) {
  if (preds.size() != deps.size()) throw std::invalid_argument("PRED and DEP lengths differ");
  std::size_t w = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (w > 0 && preds[i] == preds[w - 1]) continue;
    preds[w] = preds[i];
    deps[w] = deps[i];
    ++w;
  }
  preds.resize(w);
  deps.resize(w);
}

/// Groups destinations with bitwise-equal hash pairs and element-wise equal
/// sequences. Returns per destination its representative (itself when it
/// owns its sequence, the smallest id of its verified group otherwise).
/// Destinations with eligible[v] == 0 map to themselves.
std::vector<VertexId> dedup(const std::vector<std::vector<double>>& deps,
                            const std::vector<std::pair<double, double>>& hashes,
                            const std::vector<char>& eligible);

enum class RecordKind : std::uint8_t { kUnique = 0, kOwned = 1, kShared = 2, kUnreachable = 0xFF };

/// Per-landmark predecessor summary. Wraps the serialized chunk payload:
/// one 64-bit offset per destination (all-ones = unreachable) followed by the
/// tagged records.
class LandmarkSummary {
 public:
  LandmarkSummary() = default;
  LandmarkSummary(VertexId landmark, std::size_t n, double period, std::vector<std::uint8_t> payload);

  VertexId landmark() const { return landmark_; }
  std::size_t num_destinations() const { return n_; }
  double period() const { return period_; }
  std::span<const std::uint8_t> payload() const { return payload_; }

  RecordKind kind(VertexId v) const;
  bool reachable(VertexId v) const { return kind(v) != RecordKind::kUnreachable; }
  std::size_t count(VertexId v) const;
  std::uint8_t pred(VertexId v, std::size_t i) const;
  /// Departure times, resolved through the representative for shared records.
  QuantizedTime dep(VertexId v, std::size_t i) const;
  VertexId representative(VertexId v) const;

  friend bool operator==(const LandmarkSummary& a, const LandmarkSummary& b) {
    return a.landmark_ == b.landmark_ && a.n_ == b.n_ && a.payload_ == b.payload_;
  }

 private:
  const std::uint8_t* record(VertexId v) const;

  VertexId landmark_ = 0;
  std::size_t n_ = 0;
  double period_ = kDay;
  std::vector<std::uint8_t> payload_;
};

/// Serialized form of one destination before packing.
struct DestinationEntry {
  RecordKind kind = RecordKind::kUnreachable;
  std::vector<std::uint8_t> preds;
  std::vector<QuantizedTime> deps;  // empty for shared records
  VertexId representative = 0;
};

LandmarkSummary pack(VertexId landmark, double period, const std::vector<DestinationEntry>& entries);

struct PredInterval {
  std::uint8_t pred_lo = kNoPred;
  std::uint8_t pred_hi = kNoPred;
  double t_lo = 0;  // dequantized; may be shifted by -T on wrap
  double t_hi = 0;  // may be shifted by +T on wrap
};

/// Predecessors at the breakpoints enclosing t_l (mod T). Throws
/// std::out_of_range when v is unreachable.
PredInterval pred_lookup(const LandmarkSummary& s, VertexId v, double t_l);

/// Same rule over an unquantized sequence.
PredInterval pred_lookup(std::span<const std::uint8_t> preds, std::span<const double> deps, double period,
                         double t_l);

struct CtrapParams {
  double epsilon = 0.1;
  MaeMode mode = MaeMode::kGeometric;
  PathSlopeModel slopes;
  double tau_start = 3200.0;
  double tau_floor = 25.0;
  std::uint64_t seed = 1;
  /// Restricts sampling to the round-0 intervals meeting [first, second];
  /// the grid point T is then sampled as T rather than wrapped to 0.
  std::optional<std::pair<double, double>> window;
};

class CtrapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DeactivationEvent {
  VertexId destination;
  double ts, tf, Ds, Df;
  MetricBounds bounds;
  bool constant;  // by the almost-constant guess rather than the MAE test
};

struct RawSequence {
  std::vector<std::uint8_t> preds;
  std::vector<double> deps;
};

/// Unquantized sequences and the deactivation log of one run.
struct CtrapTrace {
  std::vector<RawSequence> sampled;  // before merge
  std::vector<RawSequence> merged;
  std::vector<std::pair<double, double>> hashes;
  std::vector<double> sample_times;  // in drawing order
  std::vector<DeactivationEvent> events;
  std::size_t trees = 0;
};

/// Post-merge sequences plus hashes, before packing.
struct CtrapResult {
  std::vector<RawSequence> merged;
  std::vector<std::pair<double, double>> hashes;
  std::vector<char> reachable;
};

/// Round-0 sampling times k * step < period. With a window: only the grid
/// intervals meeting it, with period itself as a grid point.
std::vector<double> round0_grid(double period, double step,
                                const std::optional<std::pair<double, double>>& window);

CtrapResult ctrap_sample(const Instance& g, VertexId landmark, const CtrapParams& p, CtrapTrace* trace = nullptr);

LandmarkSummary ctrap(const Instance& g, VertexId landmark, const CtrapParams& p, CtrapTrace* trace = nullptr);

/// All landmarks, `threads` workers (0 = hardware concurrency).
std::vector<LandmarkSummary> preprocess(const Instance& g, const std::vector<VertexId>& landmarks,
                                        const CtrapParams& p, std::size_t threads);

}  // namespace cflat
