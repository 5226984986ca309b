#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gbnns/data.hpp"
#include "gbnns/graph.hpp"
#include "gbnns/long_edges.hpp"
#include "gbnns/search.hpp"
#include "gbnns/stats.hpp"

namespace gbnns::bench {

inline constexpr std::string_view kSchemaVersion = "v1";

struct DatasetSpec {
  /// "uniform" or a path to an fvecs/bvecs file.
  std::string source = "uniform";
  std::int64_t n = 1000;
  int d = 2;
  std::string format = "fvecs";

  std::string describe() const;
};

struct QuerySpec {
  /// "planted" or "uniform".
  std::string kind = "planted";
  std::int64_t count = 1000;
  /// Planted radius: `radius` if set, else radius_scale * n^(-1/d).
  std::optional<double> radius;
  double radius_scale = 0.5;

  double planted_radius(std::int64_t n, int d) const;
  std::string describe() const;
};

struct ExperimentPlan {
  std::string name = "plan";
  std::vector<DatasetSpec> datasets;
  std::vector<GraphConfig> graphs;
  std::vector<std::optional<LongEdgeConfig>> long_edges{std::nullopt};
  std::vector<SearchConfig> searches;
  QuerySpec queries;
  int repetitions = 1;
  std::filesystem::path output;
  std::uint64_t master_seed = 0;

  std::size_t cell_count() const;
};

/// YAML plan. Any scalar parameter may be given as a list; lists expand into
/// a cross product in document order.
ExperimentPlan parse_plan(const std::string& text);
ExperimentPlan load_plan(const std::filesystem::path& path);

struct BenchRecord {
  std::string plan;
  std::int64_t cell = 0;
  std::string dataset;
  std::int64_t n = 0;
  int d = 0;
  int repetition = 0;
  std::string graph = "none";
  double M = 0.0;
  int k = 0;
  std::string long_scheme = "none";
  int long_edges = 0;
  double phi = 0.0;
  std::string algorithm = "greedy";
  int beam = 1;
  bool llf = false;
  std::string query_kind;
  std::int64_t queries = 0;
  std::uint64_t seed = 0;
  double mean_degree = 0.0;
  double recall_at_1 = 0.0;
  double error = 1.0;
  double mean_steps = 0.0;
  double mean_distance_computations = 0.0;
  double wall_seconds = 0.0;
  double queries_per_second = 0.0;
  std::string status = "ok";
  std::string message;
};

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const BenchRecord& r);
/// Reads a CSV produced by write_csv_*; throws MalformedHeader on a schema mismatch.
std::vector<BenchRecord> read_csv(std::istream& in);

/// Runs every cell; cell failures become status=error rows. Each row is
/// flushed to `out` as soon as its cell finishes.
std::vector<BenchRecord> run_plan(const ExperimentPlan& plan, std::ostream& out);

/// Per-configuration (error, cost) curves: records grouped by everything but
/// the effort knobs (beam, k), sorted by cost, keeping the cheapest record
/// for each distinct error. Idempotent.
std::vector<BenchRecord> emit_curves(std::vector<BenchRecord> records);

Dataset make_dataset(const DatasetSpec& spec, std::uint64_t seed);
QuerySet make_queries(const Dataset& ds, const QuerySpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Theory-validation experiments.

struct ScalingParams {
  int d = 2;
  std::vector<std::int64_t> n_list{1000, 4000, 16000, 64000};
  GraphConfig graph = GraphConfig::dense(2.0);
  std::optional<LongEdgeConfig> long_edges;
  QuerySpec queries{"planted", 500, std::nullopt, 0.5};
  std::uint64_t seed = 1;
};

struct ScalingPoint {
  std::int64_t n = 0;
  double mean_degree = 0.0;
  double mean_steps = 0.0;
  double recall = 0.0;
  double mean_distance_computations = 0.0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  stats::LinearFit fit;  // log mean steps vs log n
};

ScalingResult step_scaling_experiment(const ScalingParams& params);

struct ComparisonParams {
  int d = 2;
  std::int64_t n = 64000;
  GraphConfig graph = GraphConfig::dense(8.0);
  std::vector<std::optional<LongEdgeScheme>> schemes{std::nullopt, LongEdgeScheme::UniformRandom,
                                                     LongEdgeScheme::KleinbergDistance, LongEdgeScheme::KleinbergRank,
                                                     LongEdgeScheme::RankPresampled};
  int edges_per_node = 0;  // 0: ceil(log2 n)
  double phi = 0.5;
  bool llf = false;
  QuerySpec queries{"planted", 500, std::nullopt, 0.5};
  std::uint64_t seed = 1;
};

struct SchemeOutcome {
  std::optional<LongEdgeScheme> scheme;  // nullopt: plain graph
  double recall = 0.0;
  double mean_steps = 0.0;
  double mean_distance_computations = 0.0;
  std::vector<double> steps;  // per query, for paired bootstrap
  std::vector<double> distance_computations;
  std::vector<char> correct;
};

struct ComparisonResult {
  double mean_degree = 0.0;
  std::vector<SchemeOutcome> outcomes;

  const SchemeOutcome* find(std::optional<LongEdgeScheme> scheme) const;
};

ComparisonResult long_edge_comparison(const ComparisonParams& params);

struct Table2Params {
  std::int64_t n = 100000;
  std::vector<int> dims{2, 4, 8, 16};
  std::int64_t queries = 1000;
  double target_recall = 0.99;
  int beam_width = 100;
  int max_degree = 2048;
  std::uint64_t seed = 1;
};

struct DegreeSearch {
  std::optional<int> degree;  // nullopt: target not reached within max_degree
  double recall = 0.0;        // at `degree`, or at max_degree when unreached
  double mean_steps = 0.0;
  double mean_distance_computations = 0.0;
};

struct Table2Row {
  int d = 0;
  DegreeSearch greedy;
  DegreeSearch beam;
};

/// Smallest kNN degree reaching target recall for each d, greedy and beam.
/// Degrees are searched by doubling then bisection, assuming recall grows
/// with the degree.
std::vector<Table2Row> table2_analog(const Table2Params& params);
DegreeSearch minimal_degree(const SearchGraph& full_knn, const Dataset& ds, const QuerySet& qs,
                            const SearchConfig& cfg, double target_recall);

struct LlfParams {
  int d = 2;
  std::int64_t n = 64000;
  GraphConfig graph = GraphConfig::dense(8.0);
  LongEdgeScheme scheme = LongEdgeScheme::KleinbergRank;
  int edges_per_node = 0;
  QuerySpec queries{"planted", 1000, std::nullopt, 0.5};
  std::uint64_t seed = 1;
};

struct LlfResult {
  double recall_plain = 0.0;
  double recall_llf = 0.0;
  double dc_plain = 0.0;
  double dc_llf = 0.0;
  double steps_plain = 0.0;
  double steps_llf = 0.0;
  double recall_no_long_plain = 0.0;
  double recall_no_long_llf = 0.0;
  double dc_no_long_plain = 0.0;
  double dc_no_long_llf = 0.0;
};

LlfResult llf_ablation(const LlfParams& params);

}  // namespace gbnns::bench
