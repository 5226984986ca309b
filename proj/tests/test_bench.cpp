#include <gtest/gtest.h>

#include <sstream>

#include "gbnns/bench.hpp"
#include "gbnns/stats.hpp"

using namespace gbnns;
using namespace gbnns::bench;

namespace {

const char* kSmallPlan = R"(
name: small
master_seed: 7
dataset: {n: 300, d: 2}
queries: {kind: planted, count: 40}
graphs:
  - {kind: knn, k: [4, 8]}
long_edges: [none, {scheme: kl-rank}]
search:
  - {algo: greedy}
)";

// Drops the wall-time dependent columns.
std::string stable_columns(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string f;
    int i = 0;
    while (std::getline(fields, f, ',')) {
      if (i != 24 && i != 25) out << f << ',';
      ++i;
    }
    out << '\n';
  }
  return out.str();
}

BenchRecord record(std::int64_t cell, double error, double cost, int beam) {
  BenchRecord r;
  r.plan = "p";
  r.cell = cell;
  r.error = error;
  r.recall_at_1 = 1.0 - error;
  r.mean_distance_computations = cost;
  r.beam = beam;
  return r;
}

}  // namespace

TEST(Stats, LinearFitExact) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = stats::fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  const std::vector<double> n{1000, 4000, 16000}, s{10, 20, 40};
  EXPECT_NEAR(stats::fit_log_log(n, s).slope, 0.5, 1e-12);
}

TEST(Stats, BootstrapCoversMeanAndIsDeterministic) {
  std::vector<double> v(500);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 10);
  const auto a = stats::bootstrap_mean(v, 1000, 3);
  const auto b = stats::bootstrap_mean(v, 1000, 3);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_LT(a.lower, 4.5);
  EXPECT_GT(a.upper, 4.5);
  std::vector<double> w(v);
  for (double& x : w) x += 1.0;
  const auto d = stats::bootstrap_mean_difference(v, w, 1000, 3);
  EXPECT_NEAR(d.estimate, -1.0, 1e-12);
  EXPECT_NEAR(d.upper, -1.0, 1e-12);
}

TEST(Stats, ChiSquare) {
  const std::vector<std::int64_t> counts{250, 250, 250, 250};
  const std::vector<double> p{0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(stats::chi_square(counts, p).statistic, 0.0);
  const std::vector<std::int64_t> skewed{400, 200, 200, 200};
  EXPECT_GT(stats::chi_square(skewed, p).z, 3.0);
  const std::vector<std::int64_t> impossible{1, 0};
  const std::vector<double> q{0.0, 1.0};
  EXPECT_TRUE(std::isinf(stats::chi_square(impossible, q).z));
}

TEST(Plan, ParsesCrossProduct) {
  const auto plan = parse_plan(kSmallPlan);
  EXPECT_EQ(plan.name, "small");
  EXPECT_EQ(plan.master_seed, 7u);
  EXPECT_EQ(plan.graphs.size(), 2u);
  EXPECT_EQ(plan.long_edges.size(), 2u);
  EXPECT_FALSE(plan.long_edges[0]);
  EXPECT_EQ(plan.cell_count(), 4u);
}

TEST(Plan, Rejections) {
  EXPECT_THROW(parse_plan("name: x\n"), Error);
  EXPECT_THROW(parse_plan("dataset: {n: 10}\ngraphs: [{kind: ring}]\n"), Error);
  EXPECT_THROW(parse_plan("dataset: {n: 10}\ngraphs: [{kind: knn}]\nqueries: {kind: odd}\n"), Error);
  EXPECT_THROW(parse_plan("[unbalanced"), Error);
}

TEST(RunPlan, SingleCell) {
  const auto plan = parse_plan("dataset: {n: 100, d: 2}\nqueries: {count: 10}\ngraphs: [{kind: knn, k: 5}]\n");
  std::ostringstream out;
  const auto records = run_plan(plan, out);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].status, "ok");
  int lines = 0;
  for (char c : out.str()) lines += c == '\n';
  EXPECT_EQ(lines, 2);
  EXPECT_EQ(out.str().rfind("schema,", 0), 0u);
}

TEST(RunPlan, EnumerationOrderAndDeterminism) {
  const auto plan = parse_plan(kSmallPlan);
  std::ostringstream a, b;
  const auto records = run_plan(plan, a);
  run_plan(plan, b);
  EXPECT_EQ(stable_columns(a.str()), stable_columns(b.str()));
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0].k, 4);
  EXPECT_EQ(records[0].long_scheme, "none");
  EXPECT_EQ(records[1].k, 4);
  EXPECT_EQ(records[1].long_scheme, "kl-rank");
  EXPECT_EQ(records[2].k, 8);
  for (const auto& r : records) {
    EXPECT_EQ(r.status, "ok");
    EXPECT_NEAR(r.error, 1.0 - r.recall_at_1, 1e-15);
  }
}

TEST(RunPlan, AddingCellsKeepsExistingSeeds) {
  const auto small = run_plan(parse_plan(kSmallPlan), *std::make_unique<std::ostringstream>());
  std::string wider = kSmallPlan;
  wider.replace(wider.find("k: [4, 8]"), 9, "k: [4, 6, 8]");
  const auto big = run_plan(parse_plan(wider), *std::make_unique<std::ostringstream>());
  for (const auto& r : small) {
    const auto it = std::find_if(big.begin(), big.end(), [&](const BenchRecord& b) {
      return b.k == r.k && b.long_scheme == r.long_scheme;
    });
    ASSERT_NE(it, big.end());
    EXPECT_EQ(it->seed, r.seed);
    EXPECT_EQ(it->mean_distance_computations, r.mean_distance_computations);
  }
}

TEST(RunPlan, CellFailureBecomesErrorRow) {
  const auto plan = parse_plan("dataset: {n: 50, d: 2}\nqueries: {count: 5}\ngraphs: [{kind: knn, k: [3, 80]}]\n");
  std::ostringstream out;
  const auto records = run_plan(plan, out);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].status, "ok");
  EXPECT_EQ(records[1].status, "error");
  EXPECT_FALSE(records[1].message.empty());
}

TEST(Csv, RoundTrip) {
  const auto plan = parse_plan(kSmallPlan);
  std::ostringstream out;
  const auto records = run_plan(plan, out);
  std::istringstream in(out.str());
  const auto back = read_csv(in);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].graph, records[i].graph);
    EXPECT_EQ(back[i].seed, records[i].seed);
    EXPECT_EQ(back[i].mean_distance_computations, records[i].mean_distance_computations);
  }
  std::istringstream bad("schema,v0\n");
  EXPECT_THROW(read_csv(bad), Error);
}

TEST(EmitCurves, SinglePassThroughAndIdempotent) {
  const auto one = emit_curves({record(0, 0.1, 50.0, 1)});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].cell, 0);
  const std::vector<BenchRecord> many{record(0, 0.2, 30.0, 1), record(1, 0.05, 90.0, 4), record(2, 0.2, 40.0, 2),
                                      record(3, 0.1, 60.0, 3)};
  const auto curve = emit_curves(many);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[0].cell, 0);  // cheapest of the two error=0.2 rows
  EXPECT_EQ(curve[1].cell, 3);
  EXPECT_EQ(curve[2].cell, 1);
  const auto again = emit_curves(curve);
  ASSERT_EQ(again.size(), curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) EXPECT_EQ(again[i].cell, curve[i].cell);
}

TEST(Experiments, ScalingRunsOnSmallSizes) {
  ScalingParams p;
  p.n_list = {500, 2000};
  p.graph = GraphConfig::dense(4.0);
  p.queries.count = 50;
  const auto r = step_scaling_experiment(p);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_GT(r.points[1].mean_steps, 0.0);
}

TEST(Experiments, MinimalDegreeIsMinimal) {
  const auto ds = generate_uniform(2000, 4, 3);
  const auto qs = sample_queries_uniform(ds, 100, 3);
  const auto knn = build_knn(ds, 64);
  SearchConfig cfg;
  cfg.seed = 2;
  const auto found = minimal_degree(knn, ds, qs, cfg, 0.9);
  ASSERT_TRUE(found.degree);
  EXPECT_GE(found.recall, 0.9);
  if (*found.degree > 1)
    EXPECT_LT(evaluate_query_set(truncate_knn(knn, *found.degree - 1), ds, qs, cfg).recall_at_1, 0.9);
}
