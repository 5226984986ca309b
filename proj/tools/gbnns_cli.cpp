// Command-line front end: dataset preparation, graph construction, search,
// the two-space pipeline and the benchmark suites.

#include <omp.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>

#include "gbnns/bench.hpp"
#include "gbnns/geometry.hpp"
#include "gbnns/graph.hpp"
#include "gbnns/long_edges.hpp"
#include "gbnns/rerank.hpp"
#include "gbnns/search.hpp"
#include "gbnns/vector_io.hpp"

namespace {

using namespace gbnns;

constexpr const char* kThreadsEnv = "GBNNS_THREADS";

// Assertion bookkeeping for the bench suites.
class Checks {
 public:
  void expect(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    failed_ |= !ok;
  }
  int exit_code() const { return failed_ ? 1 : 0; }

 private:
  bool failed_ = false;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  return out;
}

// ---------------------------------------------------------------------------
// caps

struct CapsOptions {
  std::vector<int> dims{2, 4, 8, 16, 32, 64};
  std::vector<double> gammas;
  int grid = 11;
  std::vector<double> alphas, betas, thetas;
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 1;
  std::string out;
};

void add_caps(CLI::App& app) {
  auto opt = std::make_shared<CapsOptions>();
  auto* caps = app.add_subcommand("caps", "Spherical cap volumes")->require_subcommand(1);
  auto* tab = caps->add_subcommand("tabulate", "Tabulate C(gamma) or W(alpha, beta, theta) as CSV");
  tab->add_option("--d", opt->dims, "Sphere dimensions")->delimiter(',');
  tab->add_option("--gamma", opt->gammas, "Cap heights (default: uniform grid on [0, 1])")->delimiter(',');
  tab->add_option("--grid", opt->grid, "Grid size when --gamma is absent");
  tab->add_option("--alpha", opt->alphas, "Intersection mode: first cap heights")->delimiter(',');
  tab->add_option("--beta", opt->betas, "Second cap heights")->delimiter(',');
  tab->add_option("--theta", opt->thetas, "Angles between cap centres")->delimiter(',');
  tab->add_option("--mc", opt->mc_samples, "Also emit Monte Carlo rows with this many samples");
  tab->add_option("--seed", opt->seed);
  tab->add_option("--out", opt->out, "Output CSV (default stdout)");
  tab->callback([opt] {
    std::ofstream file;
    if (!opt->out.empty()) file = open_out(opt->out);
    std::ostream& out = opt->out.empty() ? std::cout : file;
    out << std::setprecision(12);
    auto method = [](VolumeMethod m) { return m == VolumeMethod::Quadrature ? "quadrature" : "montecarlo"; };
    if (!opt->alphas.empty() || !opt->betas.empty() || !opt->thetas.empty()) {
      if (opt->alphas.empty() || opt->betas.empty() || opt->thetas.empty())
        throw CLI::ValidationError("--alpha, --beta and --theta go together");
      out << "d,alpha,beta,theta,method,value,stderr\n";
      for (int d : opt->dims)
        for (double a : opt->alphas)
          for (double b : opt->betas)
            for (double t : opt->thetas) {
              const IntersectionSpec spec(a, b, t, d);
              std::vector<VolumeEstimate> rows{intersection_volume(spec)};
              if (opt->mc_samples) rows.push_back(intersection_volume_mc(spec, opt->mc_samples, opt->seed));
              for (const auto& v : rows)
                out << d << ',' << a << ',' << b << ',' << t << ',' << method(v.method) << ',' << v.value << ','
                    << v.standard_error << '\n';
            }
      return;
    }
    auto gammas = opt->gammas;
    if (gammas.empty())
      for (int i = 0; i < opt->grid; ++i) gammas.push_back(opt->grid == 1 ? 0.0 : static_cast<double>(i) / (opt->grid - 1));
    out << "d,gamma,method,value,stderr\n";
    for (int d : opt->dims)
      for (double g : gammas) {
        const CapSpec spec(g, d);
        std::vector<VolumeEstimate> rows{cap_volume(spec)};
        if (opt->mc_samples) rows.push_back(cap_volume_mc(spec, opt->mc_samples, opt->seed));
        for (const auto& v : rows)
          out << d << ',' << g << ',' << method(v.method) << ',' << v.value << ',' << v.standard_error << '\n';
      }
  });
}

// ---------------------------------------------------------------------------
// data

struct DataOptions {
  std::int64_t n = 10000;
  int d = 2;
  std::uint64_t seed = 1;
  std::string out, in, format = "fvecs", id, data;
  bool normalize = true;
  std::int64_t limit = 0;
  std::int64_t queries = 0;
  std::string query_kind = "planted";
  double radius = 0.0;
  std::string queries_out;
  int bins = 50;
  double upper = 0.0;
};

void add_data(CLI::App& app) {
  auto opt = std::make_shared<DataOptions>();
  auto* data = app.add_subcommand("data", "Datasets and queries")->require_subcommand(1);

  auto* gen = data->add_subcommand("gen", "Uniform points on S^d (fvecs + .meta sidecar)");
  gen->add_option("--n", opt->n)->required();
  gen->add_option("--d", opt->d, "Sphere dimension (vectors have d + 1 components)")->required();
  gen->add_option("--seed", opt->seed);
  gen->add_option("--out", opt->out)->required();
  gen->add_option("--queries", opt->queries, "Also write this many queries");
  gen->add_option("--query-kind", opt->query_kind)->check(CLI::IsMember({"planted", "uniform"}));
  gen->add_option("--radius", opt->radius, "Planted radius (default 0.5 n^(-1/d))");
  gen->add_option("--queries-out", opt->queries_out);
  gen->callback([opt] {
    const Dataset ds = generate_uniform(opt->n, opt->d, opt->seed);
    save_dataset(opt->out, ds);
    spdlog::info("wrote {} points on S^{} to {}", ds.size(), ds.sphere_dim(), opt->out);
    if (opt->queries > 0) {
      if (opt->queries_out.empty()) throw CLI::ValidationError("--queries needs --queries-out");
      bench::QuerySpec spec;
      spec.kind = opt->query_kind;
      spec.count = opt->queries;
      if (opt->radius > 0.0) spec.radius = opt->radius;
      const QuerySet qs = bench::make_queries(ds, spec, derive_seed(opt->seed, 1));
      write_fvecs(opt->queries_out, qs.queries);
      spdlog::info("wrote {} {} queries to {}", qs.size(), spec.kind, opt->queries_out);
    }
  });

  auto* imp = data->add_subcommand("import", "Read fvecs/bvecs, normalise, write dataset");
  imp->add_option("--in", opt->in)->required();
  imp->add_option("--format", opt->format)->check(CLI::IsMember({"fvecs", "bvecs"}));
  imp->add_option("--limit", opt->limit, "Read at most this many vectors");
  imp->add_option("--id", opt->id, "Dataset id (default: file stem and size)");
  imp->add_option("--out", opt->out)->required();
  imp->callback([opt] {
    const Dataset ds = load_vectors(opt->in, parse_vector_format(opt->format), true, Metric::Spherical,
                                    opt->limit > 0 ? std::optional<Eigen::Index>(opt->limit) : std::nullopt,
                                    opt->id.empty() ? std::nullopt : std::optional(opt->id));
    save_dataset(opt->out, ds);
    spdlog::info("imported {} vectors of dimension {} as '{}'", ds.size(), ds.dim(), ds.id());
  });

  auto* hist = data->add_subcommand("nn-hist", "Histogram of nearest-neighbour distances (CSV)");
  hist->add_option("--data", opt->data)->required();
  hist->add_option("--bins", opt->bins);
  hist->add_option("--upper", opt->upper, "Upper edge of the last bin (default: max distance)");
  hist->add_option("--out", opt->out, "Output CSV (default stdout)");
  hist->callback([opt] {
    const Dataset ds = load_dataset(opt->data);
    const Histogram h = nn_distance_histogram(ds, opt->bins, opt->upper > 0.0 ? std::optional(opt->upper) : std::nullopt);
    std::ofstream file;
    if (!opt->out.empty()) file = open_out(opt->out);
    std::ostream& out = opt->out.empty() ? std::cout : file;
    out << std::setprecision(10) << "bin_lower,bin_upper,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      out << h.lower + static_cast<double>(i) * h.bin_width() << ',' << h.lower + static_cast<double>(i + 1) * h.bin_width()
          << ',' << h.counts[i] << '\n';
  });
}

// ---------------------------------------------------------------------------
// graph

struct GraphOptions {
  std::string data, graph, out, kind = "knn", scheme = "kl-rank";
  double M = 0.0;
  int k = 10;
  bool cap = false, symmetrize = false;
  int count = 0;
  double phi = 0.5;
  std::uint64_t seed = 1;
  bool exclude_near = false, alias = false;
};

GraphConfig graph_config(const std::string& kind, double M, int k, bool cap, bool symmetrize) {
  if (kind == "dense") return GraphConfig::dense(M, cap);
  if (kind == "sparse") return GraphConfig::sparse(M);
  return GraphConfig::knn(k, symmetrize);
}

void print_stats(const GraphStats& st) {
  std::cout << "mean_degree=" << fmt(st.mean_degree) << " min_degree=" << st.min_degree
            << " max_degree=" << st.max_degree << " edges=" << st.edge_count << " expected_f=" << fmt(st.expected_f)
            << '\n';
}

void add_graph(CLI::App& app) {
  auto opt = std::make_shared<GraphOptions>();
  auto* graph = app.add_subcommand("graph", "Proximity graphs")->require_subcommand(1);

  auto* build = graph->add_subcommand("build", "Exhaustive threshold or kNN graph");
  build->add_option("--data", opt->data)->required();
  build->add_option("--kind", opt->kind)->check(CLI::IsMember({"dense", "sparse", "knn"}));
  build->add_option("--M", opt->M, "Threshold parameter (dense: M > 1, sparse: 0 < M < 1)");
  build->add_option("--k", opt->k, "Out-degree for knn");
  build->add_flag("--cap", opt->cap, "Dense: clamp an out-of-range radius to pi/2");
  build->add_flag("--symmetrize", opt->symmetrize, "Knn: add reverse edges");
  build->add_option("--out", opt->out)->required();
  build->callback([opt] {
    const Dataset ds = load_dataset(opt->data);
    const SearchGraph g = build_graph(ds, graph_config(opt->kind, opt->M, opt->k, opt->cap, opt->symmetrize));
    save_graph(opt->out, g);
    print_stats(graph_stats(g, ds));
  });

  auto* add = graph->add_subcommand("add-long", "Sample long-range edges into a graph");
  add->add_option("--data", opt->data)->required();
  add->add_option("--graph", opt->graph)->required();
  add->add_option("--out", opt->out, "Output graph (default: overwrite --graph)");
  add->add_option("--scheme", opt->scheme)
      ->check(CLI::IsMember({"kl-dist", "kl-rank", "kl-rank-presampled", "uniform"}));
  add->add_option("--count", opt->count, "Draws per node (default ceil(log2 n))");
  add->add_option("--phi", opt->phi, "Pre-sample exponent for kl-rank-presampled");
  add->add_option("--seed", opt->seed);
  add->add_flag("--exclude-near", opt->exclude_near, "kl-dist: skip targets within n^(-1/d)");
  add->add_flag("--alias", opt->alias, "kl-dist: alias-table draws");
  add->callback([opt] {
    const Dataset ds = load_dataset(opt->data);
    SearchGraph g = load_graph(opt->graph, ds);
    LongEdgeConfig cfg;
    cfg.scheme = parse_long_edge_scheme(opt->scheme);
    cfg.edges_per_node = opt->count;
    cfg.phi = opt->phi;
    cfg.seed = opt->seed;
    cfg.exclude_near = opt->exclude_near;
    cfg.use_alias = opt->alias;
    g = attach(std::move(g), sample_long_edges(ds, cfg));
    save_graph(opt->out.empty() ? opt->graph : opt->out, g);
    std::size_t total = 0;
    for (std::size_t v = 0; v < g.size(); ++v) total += g.long_edges(static_cast<NodeId>(v)).size();
    std::cout << "scheme=" << opt->scheme << " long_edges=" << total
              << " mean_per_node=" << fmt(static_cast<double>(total) / static_cast<double>(g.size())) << '\n';
  });

  auto* st = graph->add_subcommand("stats", "Degree statistics of a saved graph");
  st->add_option("--data", opt->data)->required();
  st->add_option("--graph", opt->graph)->required();
  st->callback([opt] {
    const Dataset ds = load_dataset(opt->data);
    print_stats(graph_stats(load_graph(opt->graph, ds), ds));
  });
}

// ---------------------------------------------------------------------------
// search

struct SearchOptions {
  std::string data, graph, queries, per_query, algo = "greedy", start = "random";
  int beam = 1;
  bool llf = false;
  std::int64_t max_steps = 0;
  std::uint64_t seed = 1;
  std::string transform;
  std::string transform_kind = "random";
  int target_dim = 32;
  std::string kind = "knn";
  double M = 0.0;
  int k = 20;
  std::string out_graph, out_transform;
};

SearchConfig search_config(const SearchOptions& o) {
  SearchConfig cfg;
  cfg.algorithm = parse_search_algorithm(o.algo);
  cfg.beam_width = cfg.algorithm == SearchAlgorithm::Beam ? o.beam : 1;
  cfg.llf = o.llf;
  cfg.max_steps = o.max_steps;
  cfg.seed = o.seed;
  if (o.start != "random") cfg.start = StartPolicy::fixed(static_cast<NodeId>(std::stoul(o.start)));
  return cfg;
}

void add_search_flags(CLI::App* cmd, SearchOptions& o, bool with_algo = true) {
  if (with_algo) cmd->add_option("--algo", o.algo)->check(CLI::IsMember({"greedy", "beam"}));
  cmd->add_option("--beam", o.beam, "Beam width");
  cmd->add_flag("--llf", o.llf, "Evaluate long edges first");
  cmd->add_option("--start", o.start, "'random' or a node index");
  cmd->add_option("--max-steps", o.max_steps, "Expansion budget (default 16 n^(1/d) log2 n)");
  cmd->add_option("--seed", o.seed);
}

void add_search(CLI::App& app) {
  auto opt = std::make_shared<SearchOptions>();
  auto* search = app.add_subcommand("search", "Graph search")->require_subcommand(1);
  auto* run = search->add_subcommand("run", "Search a query file and report recall and cost");
  run->add_option("--data", opt->data)->required();
  run->add_option("--graph", opt->graph)->required();
  run->add_option("--queries", opt->queries, "fvecs query file")->required();
  run->add_option("--per-query", opt->per_query, "Write query_id,answer,truth,steps,dist_comps CSV");
  add_search_flags(run, *opt);
  run->callback([opt] {
    const Dataset ds = load_dataset(opt->data);
    const SearchGraph g = load_graph(opt->graph, ds);
    const QuerySet qs = make_query_set(ds, read_vectors(opt->queries, VectorFormat::Fvecs));
    const auto ev = evaluate_query_set(g, ds, qs, search_config(*opt), {.keep_per_query = !opt->per_query.empty()});
    if (!opt->per_query.empty()) {
      auto out = open_out(opt->per_query);
      out << "query_id,answer,truth,steps,dist_comps\n";
      for (std::size_t i = 0; i < ev.per_query.size(); ++i)
        out << i << ',' << ev.per_query[i].answer << ',' << qs.ground_truth[i] << ',' << ev.per_query[i].steps << ','
            << ev.per_query[i].distance_computations << '\n';
    }
    std::cout << "queries=" << ev.queries << " recall_at_1=" << fmt(ev.recall_at_1, 6)
              << " mean_steps=" << fmt(ev.mean_steps) << " mean_dist_comps=" << fmt(ev.mean_distance_computations)
              << " max_steps_hits=" << ev.max_steps_hits << " wall_seconds=" << fmt(ev.wall_seconds) << '\n';
  });
}

// ---------------------------------------------------------------------------
// pipeline

void add_pipeline(CLI::App& app) {
  auto opt = std::make_shared<SearchOptions>();
  auto* pipe = app.add_subcommand("pipeline", "Search in a transformed space, re-rank in the original")
                   ->require_subcommand(1);
  auto* build = pipe->add_subcommand("build", "Fit a transform and build the low-space graph");
  build->add_option("--data", opt->data)->required();
  build->add_option("--transform-kind", opt->transform_kind)->check(CLI::IsMember({"identity", "random", "pca"}));
  build->add_option("--target-dim", opt->target_dim, "Output ambient dimension");
  build->add_option("--seed", opt->seed);
  build->add_option("--kind", opt->kind)->check(CLI::IsMember({"dense", "sparse", "knn"}));
  build->add_option("--M", opt->M);
  build->add_option("--k", opt->k);
  build->add_option("--out-graph", opt->out_graph)->required();
  build->add_option("--out-transform", opt->out_transform)->required();
  build->callback([opt] {
    const Dataset ds = load_dataset(opt->data);
    const auto fitted = fit_transform(ds, {parse_transform_kind(opt->transform_kind), opt->target_dim, opt->seed});
    const SearchGraph g = build_graph(fitted.transformed, graph_config(opt->kind, opt->M, opt->k, false, false));
    save_graph(opt->out_graph, g);
    save_transform(opt->out_transform, fitted.transform);
    print_stats(graph_stats(g, fitted.transformed));
  });

  auto* run = pipe->add_subcommand("search", "Beam search in the low space with original-space re-ranking");
  run->add_option("--data", opt->data, "Original-space dataset")->required();
  run->add_option("--graph", opt->graph, "Low-space graph")->required();
  run->add_option("--transform", opt->transform)->required();
  run->add_option("--queries", opt->queries, "fvecs query file (original space)")->required();
  add_search_flags(run, *opt, false);
  run->callback([opt] {
    const Dataset ds = load_dataset(opt->data);
    const Transform t = load_transform(opt->transform);
    const Dataset low = t.apply(ds);
    const SearchGraph g = load_graph(opt->graph, low);
    const QuerySet qs = make_query_set(ds, read_vectors(opt->queries, VectorFormat::Fvecs));
    SearchConfig cfg = search_config(*opt);
    cfg.algorithm = SearchAlgorithm::Beam;
    cfg.beam_width = opt->beam;
    const auto ev = evaluate_rerank(g, low, ds, qs, t, cfg);
    std::cout << "queries=" << ev.queries << " beam=" << cfg.beam_width << " recall_rerank=" << fmt(ev.recall_rerank, 6)
              << " recall_low_only=" << fmt(ev.recall_low_only, 6)
              << " mean_low_dist_comps=" << fmt(ev.mean_low_distance_computations)
              << " mean_orig_dist_comps=" << fmt(ev.mean_original_distance_computations) << '\n';
  });
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  std::string plan, out, in;
  std::uint64_t seed = 1;
  std::int64_t n = 0;
  std::int64_t queries = 0;
  int d = 2;
  double M = 0.0;
  std::vector<std::int64_t> n_list;
  int max_degree = 2048;
};

std::string scheme_name(std::optional<LongEdgeScheme> s) { return s ? std::string(to_string(*s)) : "none"; }

int bench_scaling(const BenchOptions& o) {
  Checks checks;
  bench::ScalingParams plain;
  plain.seed = o.seed;
  if (!o.n_list.empty()) plain.n_list = o.n_list;
  if (o.M > 0.0) plain.graph = GraphConfig::dense(o.M);
  if (o.queries > 0) plain.queries.count = o.queries;
  auto report = [](const std::string& label, const bench::ScalingResult& r) {
    std::cout << label << '\n' << "  n, mean_degree, mean_steps, recall, mean_dist_comps\n";
    for (const auto& p : r.points)
      std::cout << "  " << p.n << ", " << fmt(p.mean_degree) << ", " << fmt(p.mean_steps) << ", " << fmt(p.recall)
                << ", " << fmt(p.mean_distance_computations) << '\n';
    std::cout << "  slope=" << fmt(r.fit.slope) << " r2=" << fmt(r.fit.r_squared) << '\n';
  };
  const auto base = bench::step_scaling_experiment(plain);
  report("plain d=2 " + plain.graph.describe(), base);
  checks.expect("d=2 step exponent in [0.35, 0.65]", base.fit.slope >= 0.35 && base.fit.slope <= 0.65,
                "slope " + fmt(base.fit.slope));

  bench::ScalingParams kl = plain;
  kl.long_edges = LongEdgeConfig{};
  const auto with_long = bench::step_scaling_experiment(kl);
  report("kl-rank d=2 " + kl.graph.describe(), with_long);
  const double ratio = with_long.points.back().mean_steps / base.points.back().mean_steps;
  checks.expect("kl-rank steps <= 1/3 plain at largest n", ratio <= 1.0 / 3.0, "ratio " + fmt(ratio));

  bench::ScalingParams high = plain;
  high.d = 16;
  high.graph = GraphConfig::dense(1.5);
  const auto flat = bench::step_scaling_experiment(high);
  report("plain d=16 " + high.graph.describe(), flat);
  checks.expect("d=16 |step exponent| < 0.15", std::abs(flat.fit.slope) < 0.15, "slope " + fmt(flat.fit.slope));
  return checks.exit_code();
}

int bench_long_edges(const BenchOptions& o) {
  Checks checks;
  bench::ComparisonParams p;
  p.seed = o.seed;
  p.d = o.d;
  if (o.n > 0) p.n = o.n;
  if (o.M > 0.0) p.graph = GraphConfig::dense(o.M);
  if (o.queries > 0) p.queries.count = o.queries;
  const auto r = bench::long_edge_comparison(p);
  std::cout << "d=" << p.d << " n=" << p.n << " " << p.graph.describe() << " mean_degree=" << fmt(r.mean_degree) << '\n'
            << "scheme, recall, mean_steps, mean_dist_comps\n";
  for (const auto& s : r.outcomes)
    std::cout << scheme_name(s.scheme) << ", " << fmt(s.recall) << ", " << fmt(s.mean_steps) << ", "
              << fmt(s.mean_distance_computations) << '\n';
  const auto* rank = r.find(LongEdgeScheme::KleinbergRank);
  const auto* uni = r.find(LongEdgeScheme::UniformRandom);
  const auto* dist = r.find(LongEdgeScheme::KleinbergDistance);
  const auto* pre = r.find(LongEdgeScheme::RankPresampled);
  const auto diff = stats::bootstrap_mean_difference(rank->steps, uni->steps, 1000, derive_seed(o.seed, 99));
  checks.expect("kl-rank steps < uniform (bootstrap 95%)", diff.upper < 0.0,
                "mean diff " + fmt(diff.estimate) + " CI [" + fmt(diff.lower) + ", " + fmt(diff.upper) + "]");
  const double rd = std::abs(rank->mean_steps - dist->mean_steps) / rank->mean_steps;
  checks.expect("kl-rank vs kl-dist steps within 20%", rd <= 0.20, "relative gap " + fmt(rd));
  const double rp = std::abs(pre->mean_steps - rank->mean_steps) / rank->mean_steps;
  checks.expect("presampled vs kl-rank steps within 25%", rp <= 0.25, "relative gap " + fmt(rp));
  return checks.exit_code();
}

int bench_table2(const BenchOptions& o) {
  Checks checks;
  bench::Table2Params p;
  p.seed = o.seed;
  if (o.n > 0) p.n = o.n;
  if (o.queries > 0) p.queries = o.queries;
  p.max_degree = o.max_degree;
  const auto rows = bench::table2_analog(p);
  auto deg = [](const bench::DegreeSearch& s) { return s.degree ? std::to_string(*s.degree) : ">max"; };
  std::cout << "n=" << p.n << " target_recall=" << p.target_recall << '\n'
            << "d, greedy_degree, greedy_steps, greedy_recall, beam_degree, beam_steps, beam_recall\n";
  for (const auto& r : rows)
    std::cout << r.d << ", " << deg(r.greedy) << ", " << fmt(r.greedy.mean_steps) << ", " << fmt(r.greedy.recall)
              << ", " << deg(r.beam) << ", " << fmt(r.beam.mean_steps) << ", " << fmt(r.beam.recall) << '\n';
  bool degrees_rise = true, steps_fall = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int prev = rows[i - 1].greedy.degree.value_or(p.max_degree + 1);
    const int cur = rows[i].greedy.degree.value_or(p.max_degree + 1);
    degrees_rise &= cur >= prev;
    steps_fall &= rows[i].greedy.mean_steps <= rows[i - 1].greedy.mean_steps;
  }
  checks.expect("greedy degree grows with d", degrees_rise, "see table");
  checks.expect("greedy steps shrink with d", steps_fall, "see table");
  for (const auto& r : rows) {
    if (r.d == 16) {
      const bool ok = r.greedy.degree.has_value() == false
                          ? r.beam.degree.has_value() && *r.beam.degree * 10 <= p.max_degree
                          : r.beam.degree && *r.beam.degree * 10 <= *r.greedy.degree;
      checks.expect("d=16 beam degree <= greedy degree / 10", ok, deg(r.beam) + " vs " + deg(r.greedy));
    }
    if (r.d == 2) {
      const double target = 200.0 * std::sqrt(static_cast<double>(p.n) / 1e6);
      const double ratio = r.greedy.mean_steps / target;
      checks.expect("d=2 greedy steps within 3x of 200 (n/1e6)^(1/2)", ratio >= 1.0 / 3.0 && ratio <= 3.0,
                    fmt(r.greedy.mean_steps) + " vs " + fmt(target));
    }
  }
  return checks.exit_code();
}

int bench_llf(const BenchOptions& o) {
  Checks checks;
  bench::LlfParams p;
  p.seed = o.seed;
  p.d = o.d;
  if (o.n > 0) p.n = o.n;
  if (o.M > 0.0) p.graph = GraphConfig::dense(o.M);
  if (o.queries > 0) p.queries.count = o.queries;
  const auto r = bench::llf_ablation(p);
  std::cout << "graph, llf, recall, mean_dist_comps\n"
            << "kl-rank, 0, " << fmt(r.recall_plain) << ", " << fmt(r.dc_plain) << '\n'
            << "kl-rank, 1, " << fmt(r.recall_llf) << ", " << fmt(r.dc_llf) << '\n'
            << "none, 0, " << fmt(r.recall_no_long_plain) << ", " << fmt(r.dc_no_long_plain) << '\n'
            << "none, 1, " << fmt(r.recall_no_long_llf) << ", " << fmt(r.dc_no_long_llf) << '\n';
  checks.expect("llf lowers distance computations", r.dc_llf <= r.dc_plain, fmt(r.dc_llf) + " vs " + fmt(r.dc_plain));
  checks.expect("llf recall change within 0.5%", std::abs(r.recall_llf - r.recall_plain) <= 0.005,
                fmt(r.recall_llf - r.recall_plain));
  checks.expect("llf is a no-op without long edges",
                r.recall_no_long_llf == r.recall_no_long_plain && r.dc_no_long_llf == r.dc_no_long_plain, "exact");
  return checks.exit_code();
}

void add_bench(CLI::App& app, int& exit_code) {
  auto opt = std::make_shared<BenchOptions>();
  auto* bench_cmd = app.add_subcommand("bench", "Experiment harness")->require_subcommand(1);

  auto* run = bench_cmd->add_subcommand("run", "Run a YAML experiment plan, writing CSV");
  run->add_option("--plan", opt->plan)->required();
  run->add_option("--out", opt->out, "CSV path (default: the plan's output, else stdout)");
  run->callback([opt, &exit_code] {
    auto plan = bench::load_plan(opt->plan);
    if (!opt->out.empty()) plan.output = opt->out;
    std::ofstream file;
    if (!plan.output.empty()) file = open_out(plan.output.string());
    std::ostream& out = plan.output.empty() ? std::cout : file;
    const auto records = bench::run_plan(plan, out);
    const auto errors = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.status != "ok"; });
    spdlog::info("{} cells, {} failed", records.size(), errors);
    exit_code = 0;
  });

  auto* curves = bench_cmd->add_subcommand("curves", "Reduce a results CSV to sorted (error, cost) curves");
  curves->add_option("--in", opt->in)->required();
  curves->add_option("--out", opt->out, "Output CSV (default stdout)");
  curves->callback([opt] {
    std::ifstream in(opt->in);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + opt->in);
    const auto records = bench::emit_curves(bench::read_csv(in));
    std::ofstream file;
    if (!opt->out.empty()) file = open_out(opt->out);
    std::ostream& out = opt->out.empty() ? std::cout : file;
    bench::write_csv_header(out);
    for (const auto& r : records) bench::write_csv_row(out, r);
  });

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt->seed);
    cmd->add_option("--queries", opt->queries, "Query count override");
  };
  auto* scaling = bench_cmd->add_subcommand("scaling", "Greedy step scaling with n (plain and kl-rank)");
  common(scaling);
  scaling->add_option("--n-list", opt->n_list)->delimiter(',');
  scaling->add_option("--M", opt->M, "Dense threshold parameter for the d=2 runs");
  scaling->callback([opt, &exit_code] { exit_code = bench_scaling(*opt); });

  auto* le = bench_cmd->add_subcommand("long-edges", "Compare long-edge schemes at equal budget");
  common(le);
  le->add_option("--n", opt->n);
  le->add_option("--d", opt->d);
  le->add_option("--M", opt->M);
  le->callback([opt, &exit_code] { exit_code = bench_long_edges(*opt); });

  auto* t2 = bench_cmd->add_subcommand("table2", "Minimal kNN degree for recall 0.99, greedy vs beam");
  common(t2);
  t2->add_option("--n", opt->n);
  t2->add_option("--max-degree", opt->max_degree);
  t2->callback([opt, &exit_code] { exit_code = bench_table2(*opt); });

  auto* llf = bench_cmd->add_subcommand("llf", "Long-links-first ablation");
  common(llf);
  llf->add_option("--n", opt->n);
  llf->add_option("--d", opt->d);
  llf->add_option("--M", opt->M);
  llf->callback([opt, &exit_code] { exit_code = bench_llf(*opt); });
}

void apply_thread_override() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    const int threads = std::atoi(env);
    if (threads > 0) {
      omp_set_num_threads(threads);
    } else {
      spdlog::warn("ignoring {}='{}'", kThreadsEnv, env);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based nearest neighbour search on the sphere"};
  app.require_subcommand(1);
  int exit_code = 0;
  add_caps(app);
  add_data(app);
  add_graph(app);
  add_search(app);
  add_pipeline(app);
  add_bench(app, exit_code);
  apply_thread_override();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const gbnns::Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return exit_code;
}
