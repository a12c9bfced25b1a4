#pragma once

#include <span>
#include <string>
#include <vector>

#include "graph.hpp"

namespace cflat {

using ArcPath = std::vector<ArcId>;

/// Instance with degree-2 chains replaced by shortcuts. The core keeps the
/// original vertex ids; chain interiors stay as isolated (inactive) vertices.
struct ContractedInstance {
  Instance core;
  /// Per core arc: the original-arc paths it stands for (one path of length
  /// one for an untouched original arc).
  std::vector<std::vector<ArcPath>> represented;

  bool is_active(VertexId v) const { return core.is_active(v); }
  bool is_shortcut(ArcId a) const {
    return represented[a].size() != 1 || represented[a][0].size() != 1;
  }
};

/// Contracts chains until none are left.
ContractedInstance contract(const Instance& original);

/// Contracted instance with one `S` line per core arc after the arc section.
void save_contracted(const ContractedInstance& c, const std::string& path);
/// Reads a TDI file; when it has no `S` lines every arc represents itself.
ContractedInstance load_contracted(const std::string& path);

/// Replaces each core arc by its cheapest represented path at the local
/// departure time (ties: smaller first arc id). Throws std::out_of_range on
/// an unknown core arc.
std::vector<ArcId> unpack(const ContractedInstance& c, const Instance& original,
                          std::span<const ArcId> core_path, double t0);

/// Core plus the original arcs around chain-interior endpoints, so searches
/// can start or end at inactive vertices. Arc ids below core.num_arcs() are
/// core arcs, the rest index `extra`.
class ExpandedView {
 public:
  ExpandedView(const Instance& core, const Instance& original, std::vector<ArcId> extra);

  std::size_t num_vertices() const { return core_->num_vertices(); }
  std::size_t num_arcs() const { return core_->num_arcs() + extra_.size(); }
  double period() const { return core_->period(); }

  bool is_extra(ArcId a) const { return a >= core_->num_arcs(); }
  ArcId original_arc(ArcId a) const { return extra_[a - core_->num_arcs()]; }

  VertexId tail(ArcId a) const { return is_extra(a) ? original_->tail(original_arc(a)) : core_->tail(a); }
  VertexId head(ArcId a) const { return is_extra(a) ? original_->head(original_arc(a)) : core_->head(a); }
  double travel_time(ArcId a, double t) const {
    return is_extra(a) ? original_->travel_time(original_arc(a), t) : core_->travel_time(a, t);
  }
  double freeflow(ArcId a) const {
    return is_extra(a) ? original_->freeflow(original_arc(a)) : core_->freeflow(a);
  }

  template <class Fn>
  void for_each_out(VertexId v, Fn&& fn) const {
    core_->for_each_out(v, fn);
    for (std::size_t i = 0; i < extra_.size(); ++i) {
      if (original_->tail(extra_[i]) == v) fn(static_cast<ArcId>(core_->num_arcs() + i));
    }
  }
  template <class Fn>
  void for_each_in(VertexId v, Fn&& fn) const {
    core_->for_each_in(v, fn);
    for (std::size_t i = 0; i < extra_.size(); ++i) {
      if (original_->head(extra_[i]) == v) fn(static_cast<ArcId>(core_->num_arcs() + i));
    }
  }

  const Instance& core() const { return *core_; }

 private:
  const Instance* core_;
  const Instance* original_;
  std::vector<ArcId> extra_;
};

/// Original arcs incident to the inactive chains containing the given
/// vertices (active vertices contribute nothing).
std::vector<ArcId> chain_arcs(const ContractedInstance& c, const Instance& original,
                              std::span<const VertexId> endpoints);

/// Maps a path of view arcs to original arcs.
std::vector<ArcId> unpack(const ContractedInstance& c, const Instance& original,
                          const ExpandedView& view, std::span<const ArcId> view_path, double t0);

}  // namespace cflat
