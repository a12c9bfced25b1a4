#include "cflat/cflat.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <string>

#include "bench.hpp"
#include "cfca.hpp"
#include "contraction.hpp"
#include "ctrap.hpp"
#include "graph.hpp"
#include "landmarks.hpp"
#include "live.hpp"
#include "store.hpp"

using namespace cflat;

struct cflat_instance {
  std::shared_ptr<const Instance> graph;
  std::shared_ptr<const ContractedInstance> contracted;  // null for plain instances
};

struct cflat_landmarks {
  LandmarkSet set;
};

struct cflat_store {
  std::shared_ptr<const Store> store;
};

struct cflat_oracle {
  std::unique_ptr<Oracle> oracle;
};

struct cflat_result {
  QueryResult r;
};

namespace {

thread_local std::string last_error;

cflat_status fail(cflat_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Runs fn and maps exceptions to status codes.
template <class Fn>
cflat_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return CFLAT_OK;
  } catch (const IoError& e) {
    return fail(CFLAT_ERR_IO, e.what());
  } catch (const FormatError& e) {
    return fail(CFLAT_ERR_FORMAT, e.what());
  } catch (const StoreError& e) {
    return fail(CFLAT_ERR_FORMAT, e.what());
  } catch (const ValidationError& e) {
    return fail(CFLAT_ERR_VALIDATION, e.what());
  } catch (const TtfError& e) {
    return fail(CFLAT_ERR_VALIDATION, e.what());
  } catch (const UnreachableError& e) {
    return fail(CFLAT_ERR_UNREACHABLE, e.what());
  } catch (const CtrapError& e) {
    return fail(CFLAT_ERR_PREPROCESS, e.what());
  } catch (const SelectionError& e) {
    return fail(CFLAT_ERR_SELECTION, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CFLAT_ERR_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(CFLAT_ERR_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(CFLAT_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(CFLAT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CFLAT_ERR_INTERNAL, "unknown error");
  }
}

#define CFLAT_REQUIRE(cond)                                               \
  do {                                                                    \
    if (!(cond)) return fail(CFLAT_ERR_ARGUMENT, "null argument: " #cond); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

CtrapParams ctrap_params(const Instance& g, const cflat_preprocess_params& p) {
  CtrapParams cp;
  cp.epsilon = p.epsilon;
  cp.mode = p.literal_mae ? MaeMode::kLiteral : MaeMode::kGeometric;
  cp.tau_start = p.tau_start;
  cp.tau_floor = p.tau_floor;
  cp.seed = p.seed;
  cp.slopes = path_slope_model(g);
  return cp;
}

}  // namespace

extern "C" {

const char* cflat_last_error(void) { return last_error.c_str(); }

const char* cflat_status_name(cflat_status s) {
  switch (s) {
    case CFLAT_OK: return "ok";
    case CFLAT_ERR_ARGUMENT: return "invalid argument";
    case CFLAT_ERR_IO: return "i/o error";
    case CFLAT_ERR_FORMAT: return "format error";
    case CFLAT_ERR_VALIDATION: return "validation error";
    case CFLAT_ERR_UNREACHABLE: return "unreachable";
    case CFLAT_ERR_PREPROCESS: return "preprocessing error";
    case CFLAT_ERR_SELECTION: return "landmark selection error";
    case CFLAT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void cflat_string_free(char* s) { std::free(s); }

void cflat_generate_defaults(cflat_generate_params* p) {
  if (!p) return;
  const GeneratorParams d;
  p->kind = "grid";
  p->rows = static_cast<uint32_t>(d.rows);
  p->cols = static_cast<uint32_t>(d.cols);
  p->vertices = static_cast<uint32_t>(d.vertices);
  p->seed = d.seed;
  p->period = d.period;
}

cflat_status cflat_generate(const cflat_generate_params* p, cflat_instance** out) {
  CFLAT_REQUIRE(p && out);
  return guarded([&] {
    GeneratorParams gp;
    const std::string kind = p->kind ? p->kind : "grid";
    if (kind == "grid") gp.kind = GeneratorKind::kGrid;
    else if (kind == "planar") gp.kind = GeneratorKind::kRandomPlanar;
    else throw std::invalid_argument("unknown generator kind '" + kind + "'");
    gp.rows = p->rows;
    gp.cols = p->cols;
    gp.vertices = p->vertices;
    gp.seed = p->seed;
    gp.period = p->period;
    *out = new cflat_instance{std::make_shared<Instance>(generate(gp)), nullptr};
  });
}

cflat_status cflat_instance_load(const char* path, cflat_instance** out) {
  CFLAT_REQUIRE(path && out);
  return guarded([&] {
    auto c = std::make_shared<ContractedInstance>(load_contracted(path));
    bool shortcuts = false;
    for (ArcId a = 0; a < c->core.num_arcs() && !shortcuts; ++a) shortcuts = c->is_shortcut(a);
    if (shortcuts) {
      *out = new cflat_instance{std::shared_ptr<const Instance>(c, &c->core), c};
    } else {
      *out = new cflat_instance{std::make_shared<Instance>(std::move(c->core)), nullptr};
    }
  });
}

cflat_status cflat_instance_save(const cflat_instance* g, const char* path) {
  CFLAT_REQUIRE(g && path);
  return guarded([&] {
    if (g->contracted) save_contracted(*g->contracted, path);
    else save(*g->graph, path);
  });
}

void cflat_instance_free(cflat_instance* g) { delete g; }
size_t cflat_instance_vertices(const cflat_instance* g) { return g ? g->graph->num_vertices() : 0; }
size_t cflat_instance_arcs(const cflat_instance* g) { return g ? g->graph->num_arcs() : 0; }
double cflat_instance_period(const cflat_instance* g) { return g ? g->graph->period() : 0.0; }
int cflat_instance_is_contracted(const cflat_instance* g) { return g && g->contracted ? 1 : 0; }

cflat_status cflat_instance_validate(const cflat_instance* g, size_t* violations) {
  CFLAT_REQUIRE(g && violations);
  return guarded([&] {
    const auto v = validate(*g->graph);
    *violations = v.size();
    if (!v.empty()) throw ValidationError(v);
  });
}

cflat_status cflat_contract(const cflat_instance* g, cflat_instance** out) {
  CFLAT_REQUIRE(g && out);
  if (g->contracted) return fail(CFLAT_ERR_ARGUMENT, "instance is already contracted");
  return guarded([&] {
    auto c = std::make_shared<ContractedInstance>(contract(*g->graph));
    *out = new cflat_instance{std::shared_ptr<const Instance>(c, &c->core), c};
  });
}

cflat_status cflat_landmarks_select(const cflat_instance* g, const char* policy, size_t size, size_t exclusion,
                                    uint64_t seed, const cflat_landmarks* keep, cflat_landmarks** out) {
  CFLAT_REQUIRE(g && policy && out);
  return guarded([&] {
    SelectOptions opt;
    opt.policy = parse_policy(policy);
    opt.size = size;
    opt.exclusion = exclusion;
    opt.seed = seed;
    if (keep) opt.preselected = keep->set.ids;
    LandmarkSet chosen = select_landmarks(*g->graph, opt);
    if (keep) {
      LandmarkSet merged = keep->set;
      merged.tag += "+" + chosen.tag;
      merged.ids.insert(merged.ids.end(), chosen.ids.begin(), chosen.ids.end());
      chosen = std::move(merged);
    }
    *out = new cflat_landmarks{std::move(chosen)};
  });
}

cflat_status cflat_landmarks_load(const char* path, cflat_landmarks** out) {
  CFLAT_REQUIRE(path && out);
  return guarded([&] { *out = new cflat_landmarks{load_landmarks(path)}; });
}

cflat_status cflat_landmarks_save(const cflat_landmarks* l, const char* path) {
  CFLAT_REQUIRE(l && path);
  return guarded([&] { save_landmarks(l->set, path); });
}

void cflat_landmarks_free(cflat_landmarks* l) { delete l; }
size_t cflat_landmarks_count(const cflat_landmarks* l) { return l ? l->set.ids.size() : 0; }
uint32_t cflat_landmarks_get(const cflat_landmarks* l, size_t i) {
  return l && i < l->set.ids.size() ? l->set.ids[i] : UINT32_MAX;
}

void cflat_preprocess_defaults(cflat_preprocess_params* p) {
  if (!p) return;
  const CtrapParams d;
  p->epsilon = d.epsilon;
  p->literal_mae = 0;
  p->threads = 0;
  p->tau_start = d.tau_start;
  p->tau_floor = d.tau_floor;
  p->seed = d.seed;
  p->compress = 0;
}

cflat_status cflat_preprocess(const cflat_instance* g, const cflat_landmarks* l, const cflat_preprocess_params* p,
                              const char* store_path) {
  CFLAT_REQUIRE(g && l && p && store_path);
  return guarded([&] {
    for (VertexId v : l->set.ids) {
      if (v >= g->graph->num_vertices()) throw std::invalid_argument("landmark " + std::to_string(v) + " out of range");
    }
    const auto summaries = preprocess(*g->graph, l->set.ids, ctrap_params(*g->graph, *p), p->threads);
    save_store(store_path, g->graph->num_vertices(), summaries, p->compress != 0);
  });
}

cflat_status cflat_store_open(const char* path, const cflat_instance* g, cflat_store** out) {
  CFLAT_REQUIRE(path && out);
  return guarded([&] {
    auto s = Store::open(path, g ? g->graph->period() : kDay);
    if (g && s->num_vertices() != g->graph->num_vertices()) throw std::invalid_argument("store does not match instance");
    *out = new cflat_store{std::move(s)};
  });
}

void cflat_store_free(cflat_store* s) { delete s; }
size_t cflat_store_landmarks(const cflat_store* s) { return s ? s->store->num_landmarks() : 0; }

cflat_status cflat_store_stat(const cflat_store* s, size_t i, cflat_store_stats* out) {
  CFLAT_REQUIRE(s && out);
  return guarded([&] {
    const SummaryStats st = summary_stats(*s->store, i);
    out->landmark = st.landmark;
    out->stored_bytes = st.stored_bytes;
    out->payload_bytes = st.payload_bytes;
    out->unreachable = st.unreachable;
    out->unique = st.unique;
    out->owned = st.owned;
    out->shared = st.shared;
    out->breakpoints = st.breakpoints;
    out->share_ratio = st.share_ratio();
    out->compressed = s->store->compressed(i) ? 1 : 0;
  });
}

cflat_status cflat_oracle_new(const cflat_instance* g, const cflat_instance* original, const cflat_store* s,
                              cflat_oracle** out) {
  CFLAT_REQUIRE(g && s && out);
  return guarded([&] {
    std::unique_ptr<Oracle> o;
    if (g->contracted && original) {
      o = std::make_unique<Oracle>(g->contracted, original->graph, s->store);
    } else {
      o = std::make_unique<Oracle>(g->graph, s->store);
    }
    *out = new cflat_oracle{std::move(o)};
  });
}

void cflat_oracle_free(cflat_oracle* o) { delete o; }

cflat_status cflat_query(const cflat_oracle* o, cflat_algorithm algo, uint32_t from, uint32_t to, double departure,
                         size_t n_landmarks, cflat_result** out) {
  CFLAT_REQUIRE(o && out);
  return guarded([&] {
    thread_local SearchWorkspace ws;
    auto res = std::make_unique<cflat_result>();
    switch (algo) {
      case CFLAT_CFCA: res->r = o->oracle->cfca(from, to, departure, n_landmarks, ws); break;
      case CFLAT_TDD: res->r = o->oracle->tdd(from, to, departure, ws); break;
      case CFLAT_DIJ_FREEFLOW: res->r = o->oracle->freeflow(from, to, departure); break;
      default: throw std::invalid_argument("unknown algorithm");
    }
    *out = res.release();
  });
}

void cflat_result_free(cflat_result* r) { delete r; }
double cflat_result_cost(const cflat_result* r) { return r ? r->r.cost : 0.0; }
int cflat_result_exact(const cflat_result* r) { return r && r->r.exact ? 1 : 0; }
int cflat_result_fallback(const cflat_result* r) { return r && r->r.fallback ? 1 : 0; }
size_t cflat_result_path_length(const cflat_result* r) { return r ? r->r.path.size() : 0; }
const uint32_t* cflat_result_path(const cflat_result* r) { return r ? r->r.path.data() : nullptr; }
size_t cflat_result_settled(const cflat_result* r) { return r ? r->r.total_settled() : 0; }

double cflat_relative_error(double approx, double exact) {
  try {
    return relative_error(approx, exact);
  } catch (const std::exception& e) {
    last_error = e.what();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

void cflat_disruption_defaults(cflat_disruption* d) {
  if (!d) return;
  const DisruptionReport r;
  const LiveParams lp;
  d->arc = 0;
  d->start = 0;
  d->end = 0;
  d->factor = r.factor;
  d->ramp = r.ramp;
  d->congestion = lp.congestion;
  d->threads = 1;
}

cflat_status cflat_update(cflat_oracle* o, const cflat_disruption* d, const cflat_preprocess_params* p,
                          size_t* affected, size_t* changed) {
  CFLAT_REQUIRE(o && d && p);
  if (o->oracle->contracted()) return fail(CFLAT_ERR_ARGUMENT, "live updates need an uncontracted instance");
  return guarded([&] {
    const Instance& g = o->oracle->summary_graph();
    DisruptionReport r;
    r.arc = d->arc;
    r.start = d->start;
    r.end = d->end;
    r.factor = d->factor;
    r.ramp = d->ramp;
    LiveParams lp;
    lp.congestion = d->congestion;
    lp.threads = d->threads;
    lp.ctrap = ctrap_params(g, *p);
    auto update = std::make_shared<LiveUpdate>(apply_disruption(g, o->oracle->store(), r, lp));
    if (affected) *affected = update->overlay.windows.size();
    if (changed) {
      *changed = 0;
      for (const auto& w : update->overlay.windows) *changed += w.changed.size();
    }
    o->oracle->install(std::move(update));
  });
}

cflat_status cflat_update_window(const cflat_oracle* o, size_t i, uint32_t* landmark, double* t_s, double* t_e) {
  CFLAT_REQUIRE(o && landmark && t_s && t_e);
  const auto live = o->oracle->live();
  if (!live || i >= live->overlay.windows.size()) return fail(CFLAT_ERR_ARGUMENT, "no such overlay window");
  const auto& w = live->overlay.windows[i];
  *landmark = w.landmark;
  *t_s = w.t_s;
  *t_e = w.t_e;
  last_error.clear();
  return CFLAT_OK;
}

void cflat_update_clear(cflat_oracle* o) {
  if (o) o->oracle->install(nullptr);
}

cflat_status cflat_bench(const cflat_oracle* o, const cflat_bench_params* p, const char* csv_path, char** json,
                         char** table) {
  CFLAT_REQUIRE(o && p && (p->ns || p->ns_count == 0));
  return guarded([&] {
    BenchOptions opt;
    opt.ns.assign(p->ns, p->ns + p->ns_count);
    opt.baseline = p->freeflow_baseline ? Baseline::kFreeflow : Baseline::kTdd;
    opt.threads = p->threads;
    const Workload w = make_workload(*o->oracle, p->queries, p->seed);
    const BenchReport report = run_bench(*o->oracle, w, opt);
    if (csv_path) {
      std::ofstream out(csv_path);
      if (!out) throw IoError("cannot write " + std::string(csv_path));
      write_csv(out, report);
      if (!out) throw IoError("write failed: " + std::string(csv_path));
    }
    if (json) *json = dup_string(aggregate_json(report));
    if (table) *table = dup_string(quantile_table(report));
  });
}

}  // extern "C"
