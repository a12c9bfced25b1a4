#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <unordered_map>
#include <vector>

#include "ctrap.hpp"
#include "store.hpp"

namespace cflat {

/// Multiplicative slowdown of one arc during [start, end]. The factor is
/// reached over a linear ramp on each side, widened as needed to keep FIFO.
struct DisruptionReport {
  ArcId arc = 0;
  double start = 0;
  double end = 0;
  double factor = 1.0;
  double ramp = 600.0;
};

/// Throws std::invalid_argument unless 0 <= start < end < T, factor >= 1,
/// ramp > 0 and the arc exists.
void check_report(const Instance& g, const DisruptionReport& r);

/// The arc's function times a trapezoid multiplier that is 1 outside
/// [start - ramp, end + ramp]. `ramp_used` receives the final ramp width.
TravelTimeFunction disrupted_function(const TravelTimeFunction& f, const DisruptionReport& r,
                                      double* ramp_used = nullptr);

/// Copy of g with the reported arc replaced.
Instance disrupt(const Instance& g, const DisruptionReport& r, double* ramp_used = nullptr);

/// Positions in `landmarks` whose free-flow distance to the disrupted arc's
/// tail is at most end - start, ascending.
std::vector<std::uint32_t> affected_landmarks(const Instance& g, const std::vector<VertexId>& landmarks,
                                              const DisruptionReport& r);

/// Replacement predecessor sequences of one landmark for departures inside
/// [t_s, t_e]. Only destinations whose sequence differs from the base
/// summary over the sampled range are kept.
struct OverlayWindow {
  std::uint32_t landmark_index = 0;
  VertexId landmark = 0;
  double t_s = 0, t_e = 0;
  double cover_begin = 0, cover_end = 0;  // sampled departure range, contains [t_s, t_e]
  std::unordered_map<VertexId, RawSequence> changed;
};

struct TemporalOverlay {
  DisruptionReport report;
  double ramp = 0;  // as widened
  std::vector<OverlayWindow> windows;  // ascending landmark_index

  double expiry() const { return report.end; }
  bool expired(double now) const { return now > report.end; }
  const OverlayWindow* find(std::uint32_t landmark_index) const;
};

struct LiveParams {
  double congestion = 3.0;  // ub_ff = congestion * lb_ff
  CtrapParams ctrap;
  std::size_t threads = 1;
};

/// A disrupted instance together with the overlay computed on it.
struct LiveUpdate {
  Instance disrupted;
  TemporalOverlay overlay;
};

/// Reruns windowed sampling on the disrupted metric for every affected
/// landmark. `g` is the instance the store was built from.
LiveUpdate apply_disruption(const Instance& g, const Store& store, const DisruptionReport& r,
                            const LiveParams& p);

inline constexpr double kNever = -std::numeric_limits<double>::infinity();

/// Overlay answer when t_l (mod T) lies in the landmark's window, the
/// overlay has not expired and the destination changed; base otherwise.
PredInterval lookup_with_overlay(const Store& store, const TemporalOverlay* overlay,
                                 std::uint32_t landmark_index, VertexId v, double t_l, double now = kNever);

}  // namespace cflat
