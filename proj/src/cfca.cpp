#include "cfca.hpp"

#include <atomic>

namespace cflat {

double relative_error(double approx, double exact) {
  if (exact == 0) {
    if (approx == 0) return 0.0;
    throw std::domain_error("relative error undefined for zero optimum");
  }
  return 100.0 * (approx - exact) / exact;
}

Oracle::Oracle(std::shared_ptr<const Instance> graph, std::shared_ptr<const Store> store)
    : graph_(std::move(graph)), store_(std::move(store)) {
  if (!graph_ || !store_) throw std::invalid_argument("oracle needs an instance and a store");
  if (store_->num_vertices() != graph_->num_vertices()) throw std::invalid_argument("store does not match instance");
  landmark_index_.assign(graph_->num_vertices(), -1);
  const auto& ids = store_->landmarks();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= graph_->num_vertices()) throw std::invalid_argument("landmark out of range");
    if (landmark_index_[ids[i]] < 0) landmark_index_[ids[i]] = static_cast<std::int32_t>(i);
  }
}

Oracle::Oracle(std::shared_ptr<const ContractedInstance> c, std::shared_ptr<const Instance> original,
               std::shared_ptr<const Store> store)
    : Oracle(std::shared_ptr<const Instance>(c, &c->core), std::move(store)) {
  if (!original || original->num_vertices() != c->core.num_vertices()) {
    throw std::invalid_argument("original instance does not match contraction");
  }
  contracted_ = std::move(c);
  original_ = std::move(original);
}

void Oracle::install(std::shared_ptr<const LiveUpdate> update) {
  // unpacked paths are evaluated on the original arcs, which a core disruption does not touch
  if (update && contracted_) throw std::invalid_argument("live updates need an uncontracted instance");
  if (update && update->disrupted.num_vertices() != graph_->num_vertices()) {
    throw std::invalid_argument("live update does not match instance");
  }
  std::atomic_store(&live_, std::move(update));
}

std::shared_ptr<const LiveUpdate> Oracle::live() const { return std::atomic_load(&live_); }

const Instance& Oracle::graph(const LiveUpdate* live, double now) const {
  return live && !live->overlay.expired(now) ? live->disrupted : *graph_;
}

template <class Search>
QueryResult Oracle::dispatch(VertexId o, VertexId d, const Instance& g, double t0, Search&& search) const {
  if (o >= g.num_vertices() || d >= g.num_vertices()) throw std::out_of_range("vertex out of range");
  if (!contracted_) return search(g);
  const auto& c = *contracted_;
  if (c.is_active(o) && c.is_active(d)) {
    QueryResult r = search(g);
    r.path = unpack(c, *original_, r.path, t0);
    return r;
  }
  const VertexId ends[] = {o, d};
  const ExpandedView view(g, *original_, chain_arcs(c, *original_, ends));
  QueryResult r = search(view);
  r.path = unpack(c, *original_, view, r.path, t0);
  return r;
}

QueryResult Oracle::cfca(VertexId o, VertexId d, double t0, std::size_t n_landmarks, SearchWorkspace& ws,
                         double now) const {
  const auto live = this->live();
  const Instance& g = graph(live.get(), now);
  SummarySource src{store_.get(), live ? &live->overlay : nullptr, now};
  return dispatch(o, d, g, t0, [&](const auto& view) {
    return cfca_search(view, g, src, landmark_index_, o, d, t0, n_landmarks, ws);
  });
}

QueryResult Oracle::tdd(VertexId o, VertexId d, double t0, SearchWorkspace& ws, double now) const {
  const auto live = this->live();
  const Instance& g = graph(live.get(), now);
  return dispatch(o, d, g, t0, [&](const auto& view) { return tdd_query(view, o, d, t0, ws); });
}

QueryResult Oracle::freeflow(VertexId o, VertexId d, double t0, double now) const {
  if (original_) return dij_freeflow_query(*original_, o, d, t0);
  const auto live = this->live();
  return dij_freeflow_query(graph(live.get(), now), o, d, t0);
}

}  // namespace cflat
