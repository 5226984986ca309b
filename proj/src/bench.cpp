#include "gbnns/bench.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "gbnns/vector_io.hpp"

namespace gbnns::bench {

std::string DatasetSpec::describe() const {
  if (source == "uniform") return "uniform:n=" + std::to_string(n) + ":d=" + std::to_string(d);
  return "file:" + source + ":n=" + std::to_string(n);
}

double QuerySpec::planted_radius(std::int64_t n, int d) const {
  if (radius) return *radius;
  return std::min(radius_scale * std::pow(static_cast<double>(n), -1.0 / d), 1.5);
}

std::string QuerySpec::describe() const {
  std::ostringstream out;
  out << kind << ":m=" << count;
  if (kind == "planted") {
    if (radius) {
      out << ":R=" << std::setprecision(17) << *radius;
    } else {
      out << ":Rs=" << std::setprecision(17) << radius_scale;
    }
  }
  return out.str();
}

Dataset make_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.source == "uniform") return generate_uniform(spec.n, spec.d, seed);
  return load_vectors(spec.source, parse_vector_format(spec.format), true, Metric::Spherical, spec.n);
}

QuerySet make_queries(const Dataset& ds, const QuerySpec& spec, std::uint64_t seed) {
  if (spec.kind == "uniform") return sample_queries_uniform(ds, spec.count, seed);
  return plant_queries(ds, spec.count, spec.planted_radius(ds.size(), ds.sphere_dim()), seed);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr std::array<std::string_view, 28> kColumns = {
    "schema",     "plan",      "cell",        "dataset",     "n",          "d",
    "rep",        "graph",     "M",           "k",           "long_scheme", "long_edges",
    "phi",        "algorithm", "beam",        "llf",         "query_kind", "queries",
    "seed",       "mean_degree", "recall_at_1", "error",     "mean_steps", "mean_dist_comps",
    "wall_seconds", "qps",     "status",      "message"};

std::string num(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

void write_csv_header(std::ostream& out) {
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
}

void write_csv_row(std::ostream& out, const BenchRecord& r) {
  out << kSchemaVersion << ',' << quote(r.plan) << ',' << r.cell << ',' << quote(r.dataset) << ',' << r.n << ','
      << r.d << ',' << r.repetition << ',' << r.graph << ',' << num(r.M) << ',' << r.k << ',' << r.long_scheme << ','
      << r.long_edges << ',' << num(r.phi) << ',' << r.algorithm << ',' << r.beam << ',' << (r.llf ? 1 : 0) << ','
      << r.query_kind << ',' << r.queries << ',' << r.seed << ',' << num(r.mean_degree) << ',' << num(r.recall_at_1)
      << ',' << num(r.error) << ',' << num(r.mean_steps) << ',' << num(r.mean_distance_computations) << ','
      << num(r.wall_seconds) << ',' << num(r.queries_per_second) << ',' << r.status << ',' << quote(r.message)
      << '\n';
}

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedHeader, "empty CSV");
  const auto header = split_csv(line);
  if (header.size() != kColumns.size() || !std::equal(header.begin(), header.end(), kColumns.begin()))
    throw Error(ErrorCode::MalformedHeader, "CSV header does not match schema " + std::string(kSchemaVersion));
  std::vector<BenchRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != kColumns.size() || f[0] != kSchemaVersion)
      throw Error(ErrorCode::MalformedHeader, "CSV row does not match schema");
    BenchRecord r;
    try {
      r.plan = f[1];
      r.cell = std::stoll(f[2]);
      r.dataset = f[3];
      r.n = std::stoll(f[4]);
      r.d = std::stoi(f[5]);
      r.repetition = std::stoi(f[6]);
      r.graph = f[7];
      r.M = std::stod(f[8]);
      r.k = std::stoi(f[9]);
      r.long_scheme = f[10];
      r.long_edges = std::stoi(f[11]);
      r.phi = std::stod(f[12]);
      r.algorithm = f[13];
      r.beam = std::stoi(f[14]);
      r.llf = f[15] == "1";
      r.query_kind = f[16];
      r.queries = std::stoll(f[17]);
      r.seed = std::stoull(f[18]);
      r.mean_degree = std::stod(f[19]);
      r.recall_at_1 = std::stod(f[20]);
      r.error = std::stod(f[21]);
      r.mean_steps = std::stod(f[22]);
      r.mean_distance_computations = std::stod(f[23]);
      r.wall_seconds = std::stod(f[24]);
      r.queries_per_second = std::stod(f[25]);
      r.status = f[26];
      r.message = f[27];
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::MalformedHeader, "unparseable CSV row: " + line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plans

namespace {

std::string describe(const std::optional<LongEdgeConfig>& cfg) {
  if (!cfg) return "none";
  std::ostringstream out;
  out << to_string(cfg->scheme) << ":E=" << cfg->edges_per_node << ":phi=" << std::setprecision(17) << cfg->phi
      << (cfg->exclude_near ? ":x" : "") << (cfg->use_alias ? ":alias" : "");
  return out.str();
}

std::string describe(const SearchConfig& cfg) {
  std::ostringstream out;
  out << to_string(cfg.algorithm) << ":w=" << cfg.beam_width << ":llf=" << cfg.llf << ":max=" << cfg.max_steps;
  if (cfg.start.kind == StartPolicy::Kind::FixedIndex) out << ":start=" << cfg.start.index;
  return out.str();
}

std::uint64_t fan_out(std::uint64_t master, const std::string& tuple) {
  return derive_seed(master, stable_hash(tuple));
}

// Memoises the most recent build; a failed build is remembered so every
// dependent cell reports the same error without retrying.
template <typename T>
class Stage {
 public:
  const T& get(const std::string& key, const std::function<T()>& build) {
    if (key != key_ || (!value_ && error_.empty())) {
      key_ = key;
      value_.reset();
      error_.clear();
      try {
        value_.emplace(build());
      } catch (const std::exception& e) {
        error_ = e.what();
      }
    }
    if (!value_) throw std::runtime_error(error_);
    return *value_;
  }

 private:
  std::string key_;
  std::optional<T> value_;
  std::string error_;
};

}  // namespace

std::vector<BenchRecord> run_plan(const ExperimentPlan& plan, std::ostream& out) {
  write_csv_header(out);
  out.flush();
  std::vector<BenchRecord> records;
  Stage<Dataset> datasets;
  Stage<QuerySet> query_sets;
  Stage<std::pair<SearchGraph, double>> graphs;
  Stage<SearchGraph> long_graphs;
  std::int64_t cell = 0;

  for (const auto& ds_spec : plan.datasets) {
    for (int rep = 0; rep < plan.repetitions; ++rep) {
      const std::string ds_key = ds_spec.describe() + "|rep=" + std::to_string(rep);
      for (const auto& gcfg : plan.graphs) {
        const std::string g_key = ds_key + "|" + gcfg.describe();
        for (const auto& lcfg : plan.long_edges) {
          const std::string l_key = g_key + "|" + describe(lcfg);
          for (const auto& scfg : plan.searches) {
            const std::string cell_key = l_key + "|" + plan.queries.describe() + "|" + describe(scfg);
            BenchRecord r;
            r.plan = plan.name;
            r.cell = cell++;
            r.dataset = ds_spec.describe();
            r.n = ds_spec.n;
            r.d = ds_spec.d;
            r.repetition = rep;
            r.graph = std::string(to_string(gcfg.kind));
            r.M = gcfg.kind == GraphKind::Knn ? 0.0 : gcfg.M;
            r.k = gcfg.kind == GraphKind::Knn ? gcfg.k : 0;
            r.long_scheme = lcfg ? std::string(to_string(lcfg->scheme)) : "none";
            r.long_edges = lcfg ? lcfg->resolved_edges(ds_spec.n) : 0;
            r.phi = lcfg && lcfg->scheme == LongEdgeScheme::RankPresampled ? lcfg->phi : 0.0;
            r.algorithm = std::string(to_string(scfg.algorithm));
            r.beam = scfg.beam_width;
            r.llf = scfg.llf;
            r.query_kind = plan.queries.kind;
            r.queries = plan.queries.count;
            r.seed = fan_out(plan.master_seed, cell_key);
            try {
              const Dataset& ds = datasets.get(ds_key, [&] { return make_dataset(ds_spec, fan_out(plan.master_seed, "dataset|" + ds_key)); });
              r.n = ds.size();
              r.d = ds.sphere_dim();
              r.long_edges = lcfg ? lcfg->resolved_edges(ds.size()) : 0;
              const QuerySet& qs = query_sets.get(ds_key + "|" + plan.queries.describe(), [&] {
                return make_queries(ds, plan.queries, fan_out(plan.master_seed, "queries|" + ds_key));
              });
              const auto& [base, degree] = graphs.get(g_key, [&] {
                SearchGraph g = build_graph(ds, gcfg);
                const double deg = graph_stats(g, ds).mean_degree;
                return std::pair{std::move(g), deg};
              });
              r.mean_degree = degree;
              const SearchGraph& g = long_graphs.get(l_key, [&] {
                if (!lcfg) return base;
                LongEdgeConfig cfg = *lcfg;
                cfg.seed = fan_out(plan.master_seed, "long|" + l_key);
                return attach(base, sample_long_edges(ds, cfg));
              });
              SearchConfig cfg = scfg;
              cfg.seed = r.seed;
              const auto ev = evaluate_query_set(g, ds, qs, cfg);
              r.recall_at_1 = ev.recall_at_1;
              r.error = 1.0 - ev.recall_at_1;
              r.mean_steps = ev.mean_steps;
              r.mean_distance_computations = ev.mean_distance_computations;
              r.wall_seconds = ev.wall_seconds;
              r.queries_per_second = ev.wall_seconds > 0.0 ? static_cast<double>(ev.queries) / ev.wall_seconds : 0.0;
            } catch (const std::exception& e) {
              r.status = "error";
              r.message = e.what();
              r.recall_at_1 = 0.0;
              r.error = 1.0;
            }
            write_csv_row(out, r);
            out.flush();
            records.push_back(std::move(r));
          }
        }
      }
    }
  }
  return records;
}

std::vector<BenchRecord> emit_curves(std::vector<BenchRecord> records) {
  auto curve_key = [](const BenchRecord& r) {
    std::ostringstream out;
    out << r.plan << '|' << r.dataset << '|' << r.repetition << '|' << r.graph << '|' << num(r.M) << '|'
        << r.long_scheme << '|' << r.long_edges << '|' << num(r.phi) << '|' << r.algorithm << '|' << r.llf << '|'
        << r.query_kind << '|' << r.queries;
    return out.str();
  };
  std::map<std::string, std::vector<BenchRecord>> groups;
  for (auto& r : records)
    if (r.status == "ok") groups[curve_key(r)].push_back(std::move(r));
  std::vector<BenchRecord> out;
  for (auto& [key, group] : groups) {
    std::stable_sort(group.begin(), group.end(), [](const BenchRecord& a, const BenchRecord& b) {
      if (a.mean_distance_computations != b.mean_distance_computations)
        return a.mean_distance_computations < b.mean_distance_computations;
      return a.cell < b.cell;
    });
    std::vector<double> seen;
    for (auto& r : group) {
      if (std::find(seen.begin(), seen.end(), r.error) != seen.end()) continue;
      seen.push_back(r.error);
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

ScalingResult step_scaling_experiment(const ScalingParams& params) {
  if (params.n_list.size() < 2) throw Error(ErrorCode::InvalidArgument, "scaling needs at least two sizes");
  ScalingResult result;
  std::vector<double> xs, ys;
  for (const auto n : params.n_list) {
    const std::uint64_t seed_n = derive_seed(params.seed, static_cast<std::uint64_t>(n));
    const Dataset ds = generate_uniform(n, params.d, seed_n);
    SearchGraph g = build_graph(ds, params.graph);
    ScalingPoint p;
    p.n = n;
    p.mean_degree = graph_stats(g, ds).mean_degree;
    if (params.long_edges) {
      LongEdgeConfig cfg = *params.long_edges;
      cfg.seed = derive_seed(seed_n, 1);
      g = attach(std::move(g), sample_long_edges(ds, cfg));
    }
    const QuerySet qs = make_queries(ds, params.queries, derive_seed(seed_n, 2));
    SearchConfig scfg;
    scfg.seed = derive_seed(seed_n, 3);
    const auto ev = evaluate_query_set(g, ds, qs, scfg);
    p.mean_steps = ev.mean_steps;
    p.recall = ev.recall_at_1;
    p.mean_distance_computations = ev.mean_distance_computations;
    result.points.push_back(p);
    xs.push_back(static_cast<double>(n));
    ys.push_back(p.mean_steps);
  }
  if (std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; })) {
    result.fit = stats::fit_log_log(xs, ys);
  } else {
    result.fit.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

const SchemeOutcome* ComparisonResult::find(std::optional<LongEdgeScheme> scheme) const {
  for (const auto& o : outcomes)
    if (o.scheme == scheme) return &o;
  return nullptr;
}

ComparisonResult long_edge_comparison(const ComparisonParams& params) {
  const Dataset ds = generate_uniform(params.n, params.d, derive_seed(params.seed, 0));
  const SearchGraph base = build_graph(ds, params.graph);
  const QuerySet qs = make_queries(ds, params.queries, derive_seed(params.seed, 1));
  ComparisonResult result;
  result.mean_degree = graph_stats(base, ds).mean_degree;
  for (const auto& scheme : params.schemes) {
    SearchGraph g = base;
    if (scheme) {
      LongEdgeConfig cfg;
      cfg.scheme = *scheme;
      cfg.edges_per_node = params.edges_per_node;
      cfg.phi = params.phi;
      cfg.seed = derive_seed(params.seed, 2);
      g = attach(std::move(g), sample_long_edges(ds, cfg));
    }
    SearchConfig scfg;
    scfg.llf = params.llf;
    scfg.seed = derive_seed(params.seed, 3);
    const auto ev = evaluate_query_set(g, ds, qs, scfg, EvaluationOptions{.keep_per_query = true, .success_radius = std::nullopt});
    SchemeOutcome o;
    o.scheme = scheme;
    o.recall = ev.recall_at_1;
    o.mean_steps = ev.mean_steps;
    o.mean_distance_computations = ev.mean_distance_computations;
    for (const auto& r : ev.per_query) {
      o.steps.push_back(static_cast<double>(r.steps));
      o.distance_computations.push_back(static_cast<double>(r.distance_computations));
      o.correct.push_back(r.success_exact);
    }
    result.outcomes.push_back(std::move(o));
  }
  return result;
}

DegreeSearch minimal_degree(const SearchGraph& full_knn, const Dataset& ds, const QuerySet& qs,
                            const SearchConfig& cfg, double target_recall) {
  const int max_k = full_knn.config().k;
  std::map<int, QueryEvaluation> seen;
  auto eval = [&](int k) -> const QueryEvaluation& {
    auto it = seen.find(k);
    if (it == seen.end()) {
      const SearchGraph g = k == max_k ? full_knn : truncate_knn(full_knn, k);
      it = seen.emplace(k, evaluate_query_set(g, ds, qs, cfg)).first;
    }
    return it->second;
  };
  auto outcome = [&](std::optional<int> degree, int k) {
    const auto& ev = eval(k);
    return DegreeSearch{degree, ev.recall_at_1, ev.mean_steps, ev.mean_distance_computations};
  };
  int lo = 0;  // largest degree known to miss the target
  int hi = 1;
  while (eval(hi).recall_at_1 < target_recall) {
    lo = hi;
    if (hi == max_k) return outcome(std::nullopt, max_k);
    hi = std::min(2 * hi, max_k);
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (eval(mid).recall_at_1 >= target_recall) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return outcome(hi, hi);
}

std::vector<Table2Row> table2_analog(const Table2Params& params) {
  std::vector<Table2Row> rows;
  for (int d : params.dims) {
    const std::uint64_t seed_d = derive_seed(params.seed, static_cast<std::uint64_t>(d));
    const Dataset ds = generate_uniform(params.n, d, seed_d);
    const QuerySet qs = sample_queries_uniform(ds, params.queries, derive_seed(seed_d, 1));
    const int max_k = static_cast<int>(std::min<std::int64_t>(params.max_degree, params.n - 1));
    const SearchGraph knn = build_knn(ds, max_k);
    SearchConfig greedy;
    greedy.seed = derive_seed(seed_d, 2);
    SearchConfig beam = greedy;
    beam.algorithm = SearchAlgorithm::Beam;
    beam.beam_width = params.beam_width;
    Table2Row row;
    row.d = d;
    row.greedy = minimal_degree(knn, ds, qs, greedy, params.target_recall);
    row.beam = minimal_degree(knn, ds, qs, beam, params.target_recall);
    rows.push_back(row);
  }
  return rows;
}

LlfResult llf_ablation(const LlfParams& params) {
  const Dataset ds = generate_uniform(params.n, params.d, derive_seed(params.seed, 0));
  const SearchGraph plain = build_graph(ds, params.graph);
  const QuerySet qs = make_queries(ds, params.queries, derive_seed(params.seed, 1));
  LongEdgeConfig lcfg;
  lcfg.scheme = params.scheme;
  lcfg.edges_per_node = params.edges_per_node;
  lcfg.seed = derive_seed(params.seed, 2);
  const SearchGraph with_long = attach(plain, sample_long_edges(ds, lcfg));

  SearchConfig off;
  off.seed = derive_seed(params.seed, 3);
  SearchConfig on = off;
  on.llf = true;
  LlfResult r;
  const auto a = evaluate_query_set(with_long, ds, qs, off);
  const auto b = evaluate_query_set(with_long, ds, qs, on);
  const auto c = evaluate_query_set(plain, ds, qs, off);
  const auto e = evaluate_query_set(plain, ds, qs, on);
  r.recall_plain = a.recall_at_1;
  r.dc_plain = a.mean_distance_computations;
  r.steps_plain = a.mean_steps;
  r.recall_llf = b.recall_at_1;
  r.dc_llf = b.mean_distance_computations;
  r.steps_llf = b.mean_steps;
  r.recall_no_long_plain = c.recall_at_1;
  r.dc_no_long_plain = c.mean_distance_computations;
  r.recall_no_long_llf = e.recall_at_1;
  r.dc_no_long_llf = e.mean_distance_computations;
  return r;
}

}  // namespace gbnns::bench
