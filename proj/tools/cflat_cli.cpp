// Command-line front end over the cflat C API.

#include <cflat/cflat.h>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(cflat_status s) {
  if (s != CFLAT_OK) throw Failure(std::string(cflat_status_name(s)) + ": " + cflat_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using InstancePtr = std::unique_ptr<cflat_instance, Deleter<cflat_instance, cflat_instance_free>>;
using LandmarksPtr = std::unique_ptr<cflat_landmarks, Deleter<cflat_landmarks, cflat_landmarks_free>>;
using StorePtr = std::unique_ptr<cflat_store, Deleter<cflat_store, cflat_store_free>>;
using OraclePtr = std::unique_ptr<cflat_oracle, Deleter<cflat_oracle, cflat_oracle_free>>;
using ResultPtr = std::unique_ptr<cflat_result, Deleter<cflat_result, cflat_result_free>>;

InstancePtr load_instance(const std::string& path) {
  cflat_instance* g = nullptr;
  check(cflat_instance_load(path.c_str(), &g));
  return InstancePtr(g);
}

StorePtr open_store(const std::string& path, const cflat_instance* g) {
  cflat_store* s = nullptr;
  check(cflat_store_open(path.c_str(), g, &s));
  return StorePtr(s);
}

OraclePtr make_oracle(const cflat_instance* g, const cflat_instance* original, const cflat_store* s) {
  cflat_oracle* o = nullptr;
  check(cflat_oracle_new(g, original, s, &o));
  return OraclePtr(o);
}

ResultPtr run_query(const cflat_oracle* o, cflat_algorithm algo, uint32_t from, uint32_t to, double t0, size_t n) {
  cflat_result* r = nullptr;
  check(cflat_query(o, algo, from, to, t0, n, &r));
  return ResultPtr(r);
}

std::string path_string(const cflat_result* r) {
  std::ostringstream out;
  const uint32_t* p = cflat_result_path(r);
  for (size_t i = 0; i < cflat_result_path_length(r); ++i) out << (i ? " " : "") << p[i];
  return out.str();
}

std::size_t default_threads() {
  if (const char* env = std::getenv("CFLAT_THREADS")) {
    try {
      return std::stoul(env);
    } catch (const std::exception&) {
      std::fprintf(stderr, "ignoring CFLAT_THREADS=%s\n", env);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent route planning with landmark predecessor summaries"};
  app.require_subcommand(1);
  const std::size_t threads_default = default_threads();

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic road network");
  cflat_generate_params gp;
  cflat_generate_defaults(&gp);
  std::string gen_kind = "grid", gen_out;
  gen->add_option("--kind", gen_kind, "grid or planar")->check(CLI::IsMember({"grid", "planar"}));
  gen->add_option("--rows", gp.rows);
  gen->add_option("--cols", gp.cols);
  gen->add_option("--vertices", gp.vertices, "planar only");
  gen->add_option("--seed", gp.seed);
  gen->add_option("--period", gp.period);
  gen->add_option("-o,--output", gen_out)->required();

  // contract
  auto* con = app.add_subcommand("contract", "Replace degree-2 chains by shortcuts");
  std::string con_in, con_out;
  con->add_option("-i,--input", con_in)->required();
  con->add_option("-o,--output", con_out)->required();

  // landmarks
  auto* lm = app.add_subcommand("landmarks", "Select landmarks");
  std::string lm_in, lm_policy = "R", lm_mix, lm_out;
  std::size_t lm_size = 16, lm_exclusion = 0;
  std::uint64_t lm_seed = 1;
  lm->add_option("-i,--input", lm_in)->required();
  lm->add_option("--policy", lm_policy)->check(CLI::IsMember({"R", "SR", "IR", "SK", "KC", "BC", "KB"}));
  lm->add_option("--size", lm_size);
  lm->add_option("--exclusion", lm_exclusion, "free-flow ball size around each landmark");
  lm->add_option("--seed", lm_seed);
  lm->add_option("--mix", lm_mix, "second policy as POLICY:K");
  lm->add_option("-o,--output", lm_out)->required();

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Build the landmark summary store");
  cflat_preprocess_params pp;
  cflat_preprocess_defaults(&pp);
  pp.threads = threads_default;
  std::string pre_in, pre_lm, pre_out, pre_mae = "geometric";
  bool pre_compress = false;
  pre->add_option("-i,--input", pre_in)->required();
  pre->add_option("-l,--landmarks", pre_lm)->required();
  pre->add_option("--epsilon", pp.epsilon);
  pre->add_option("--mae", pre_mae)->check(CLI::IsMember({"geometric", "literal"}));
  pre->add_option("--threads", pp.threads, "0 = all cores (default from CFLAT_THREADS)");
  pre->add_option("--tau-start", pp.tau_start);
  pre->add_option("--tau-floor", pp.tau_floor);
  pre->add_option("--seed", pp.seed);
  pre->add_flag("--compress", pre_compress);
  pre->add_option("-o,--output", pre_out)->required();

  // query
  auto* qry = app.add_subcommand("query", "Answer one query");
  std::string q_in, q_store, q_original, q_algo = "cfca";
  uint32_t q_from = 0, q_to = 0;
  double q_at = 0;
  std::size_t q_n = 1;
  bool q_verify = false;
  qry->add_option("-i,--input", q_in)->required();
  qry->add_option("-s,--store", q_store)->required();
  qry->add_option("--original", q_original, "uncontracted instance, for paths over original arcs");
  qry->add_option("--from", q_from)->required();
  qry->add_option("--to", q_to)->required();
  qry->add_option("--at", q_at)->required();
  qry->add_option("--n", q_n);
  qry->add_option("--algorithm", q_algo)->check(CLI::IsMember({"cfca", "tdd", "dijff"}));
  qry->add_flag("--verify", q_verify, "also run TDD and report the relative error");

  // bench
  auto* bch = app.add_subcommand("bench", "Run a random query workload");
  std::string b_in, b_store, b_original, b_baseline = "tdd", b_csv;
  std::size_t b_queries = 1000, b_threads = 1;
  std::uint64_t b_seed = 1;
  std::vector<std::size_t> b_ns{1, 2, 4, 6};
  bch->add_option("-i,--input", b_in)->required();
  bch->add_option("-s,--store", b_store)->required();
  bch->add_option("--original", b_original);
  bch->add_option("--queries", b_queries);
  bch->add_option("--seed", b_seed);
  bch->add_option("--n", b_ns)->delimiter(',');
  bch->add_option("--baseline", b_baseline)->check(CLI::IsMember({"tdd", "dijff"}));
  bch->add_option("--csv", b_csv);
  bch->add_option("--threads", b_threads, "> 1 runs queries in parallel without timing");

  // update
  auto* upd = app.add_subcommand("update", "Apply a live-traffic disruption");
  cflat_disruption dp;
  cflat_disruption_defaults(&dp);
  dp.threads = threads_default;
  std::string u_in, u_store;
  std::vector<std::string> u_queries;
  std::size_t u_n = 1;
  upd->add_option("-i,--input", u_in)->required();
  upd->add_option("-s,--store", u_store)->required();
  upd->add_option("--arc", dp.arc)->required();
  upd->add_option("--from", dp.start, "disruption start (s)")->required();
  upd->add_option("--to", dp.end, "disruption end (s)")->required();
  upd->add_option("--factor", dp.factor)->required();
  upd->add_option("--ramp", dp.ramp);
  upd->add_option("--congestion", dp.congestion);
  upd->add_option("--threads", dp.threads);
  upd->add_option("--query", u_queries, "O,D,T0 answered with the overlay");
  upd->add_option("--n", u_n);

  // stats
  auto* sts = app.add_subcommand("stats", "Per-landmark store statistics");
  std::string s_store;
  sts->add_option("-s,--store", s_store)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      gp.kind = gen_kind.c_str();
      cflat_instance* g = nullptr;
      check(cflat_generate(&gp, &g));
      InstancePtr owned(g);
      check(cflat_instance_save(g, gen_out.c_str()));
      std::printf("vertices %zu arcs %zu\n", cflat_instance_vertices(g), cflat_instance_arcs(g));
    } else if (*con) {
      auto g = load_instance(con_in);
      cflat_instance* c = nullptr;
      check(cflat_contract(g.get(), &c));
      InstancePtr owned(c);
      check(cflat_instance_save(c, con_out.c_str()));
      std::printf("arcs %zu -> %zu\n", cflat_instance_arcs(g.get()), cflat_instance_arcs(c));
    } else if (*lm) {
      auto g = load_instance(lm_in);
      cflat_landmarks* first = nullptr;
      check(cflat_landmarks_select(g.get(), lm_policy.c_str(), lm_size, lm_exclusion, lm_seed, nullptr, &first));
      LandmarksPtr set(first);
      if (!lm_mix.empty()) {
        const auto colon = lm_mix.find(':');
        if (colon == std::string::npos) throw Failure("--mix expects POLICY:K");
        const std::string policy = lm_mix.substr(0, colon);
        const std::size_t k = std::stoul(lm_mix.substr(colon + 1));
        cflat_landmarks* mixed = nullptr;
        check(cflat_landmarks_select(g.get(), policy.c_str(), k, lm_exclusion, lm_seed + 1, set.get(), &mixed));
        set.reset(mixed);
      }
      check(cflat_landmarks_save(set.get(), lm_out.c_str()));
      std::printf("landmarks %zu\n", cflat_landmarks_count(set.get()));
    } else if (*pre) {
      auto g = load_instance(pre_in);
      cflat_landmarks* l = nullptr;
      check(cflat_landmarks_load(pre_lm.c_str(), &l));
      LandmarksPtr set(l);
      pp.literal_mae = pre_mae == "literal";
      pp.compress = pre_compress;
      check(cflat_preprocess(g.get(), l, &pp, pre_out.c_str()));
      std::printf("store %s landmarks %zu\n", pre_out.c_str(), cflat_landmarks_count(l));
    } else if (*qry) {
      auto g = load_instance(q_in);
      InstancePtr original = q_original.empty() ? nullptr : load_instance(q_original);
      auto s = open_store(q_store, g.get());
      auto o = make_oracle(g.get(), original.get(), s.get());
      const cflat_algorithm algo = q_algo == "cfca" ? CFLAT_CFCA : q_algo == "tdd" ? CFLAT_TDD : CFLAT_DIJ_FREEFLOW;
      auto r = run_query(o.get(), algo, q_from, q_to, q_at, q_n);
      std::printf("cost %.9g\n", cflat_result_cost(r.get()));
      std::printf("exact %d\nfallback %d\n", cflat_result_exact(r.get()), cflat_result_fallback(r.get()));
      std::printf("settled %zu\n", cflat_result_settled(r.get()));
      if (q_verify) {
        auto ref = run_query(o.get(), CFLAT_TDD, q_from, q_to, q_at, q_n);
        std::printf("tdd_cost %.9g\nerror_pct %.6g\n", cflat_result_cost(ref.get()),
                    cflat_relative_error(cflat_result_cost(r.get()), cflat_result_cost(ref.get())));
      }
      std::printf("path %s\n", path_string(r.get()).c_str());
    } else if (*bch) {
      auto g = load_instance(b_in);
      InstancePtr original = b_original.empty() ? nullptr : load_instance(b_original);
      auto s = open_store(b_store, g.get());
      auto o = make_oracle(g.get(), original.get(), s.get());
      cflat_bench_params bp{b_queries, b_seed, b_ns.data(), b_ns.size(), b_baseline == "dijff", b_threads};
      char* json = nullptr;
      char* table = nullptr;
      check(cflat_bench(o.get(), &bp, b_csv.empty() ? nullptr : b_csv.c_str(), &json, &table));
      std::printf("%s\n", json);
      std::fprintf(stderr, "%s", table);
      cflat_string_free(json);
      cflat_string_free(table);
    } else if (*upd) {
      auto g = load_instance(u_in);
      auto s = open_store(u_store, g.get());
      auto o = make_oracle(g.get(), nullptr, s.get());
      std::size_t affected = 0, changed = 0;
      check(cflat_update(o.get(), &dp, &pp, &affected, &changed));
      std::printf("affected %zu changed %zu\n", affected, changed);
      for (std::size_t i = 0; i < affected; ++i) {
        uint32_t landmark = 0;
        double t_s = 0, t_e = 0;
        check(cflat_update_window(o.get(), i, &landmark, &t_s, &t_e));
        std::printf("landmark %u window %.3f %.3f\n", landmark, t_s, t_e);
      }
      for (const auto& spec : u_queries) {
        unsigned from = 0, to = 0;
        double t0 = 0;
        if (std::sscanf(spec.c_str(), "%u,%u,%lf", &from, &to, &t0) != 3) throw Failure("--query expects O,D,T0");
        auto r = run_query(o.get(), CFLAT_CFCA, from, to, t0, u_n);
        auto ref = run_query(o.get(), CFLAT_TDD, from, to, t0, u_n);
        std::printf("query %u %u %.3f cost %.9g tdd %.9g error_pct %.6g\n", from, to, t0, cflat_result_cost(r.get()),
                    cflat_result_cost(ref.get()),
                    cflat_relative_error(cflat_result_cost(r.get()), cflat_result_cost(ref.get())));
      }
    } else if (*sts) {
      auto s = open_store(s_store, nullptr);
      std::printf("landmark,stored_bytes,payload_bytes,compressed,unreachable,unique,owned,shared,breakpoints,"
                  "share_ratio\n");
      for (std::size_t i = 0; i < cflat_store_landmarks(s.get()); ++i) {
        cflat_store_stats st;
        check(cflat_store_stat(s.get(), i, &st));
        std::printf("%u,%llu,%llu,%d,%zu,%zu,%zu,%zu,%zu,%.6f\n", st.landmark,
                    static_cast<unsigned long long>(st.stored_bytes), static_cast<unsigned long long>(st.payload_bytes),
                    st.compressed, st.unreachable, st.unique, st.owned, st.shared, st.breakpoints, st.share_ratio);
      }
    }
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
