#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "gbnns/bench.hpp"

namespace gbnns::bench {
namespace {

// A scalar or a list of scalars; a missing key yields {fallback}.
template <typename T>
std::vector<T> values(const YAML::Node& node, const char* key, T fallback) {
  const YAML::Node v = node[key];
  if (!v) return {fallback};
  if (v.IsSequence()) {
    std::vector<T> out;
    for (const auto& item : v) out.push_back(item.as<T>());
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, std::string("empty list for '") + key + "'");
    return out;
  }
  return {v.as<T>()};
}

template <typename T>
T scalar(const YAML::Node& node, const char* key, T fallback) {
  const YAML::Node v = node[key];
  return v ? v.as<T>() : fallback;
}

void parse_datasets(const YAML::Node& node, std::vector<DatasetSpec>& out) {
  const auto sources = values<std::string>(node, "source", "uniform");
  const auto ns = values<std::int64_t>(node, "n", 1000);
  const auto ds = values<int>(node, "d", 2);
  const auto format = scalar<std::string>(node, "format", "fvecs");
  for (const auto& s : sources)
    for (auto n : ns)
      for (int d : ds) out.push_back({s, n, d, format});
}

void parse_graphs(const YAML::Node& node, std::vector<GraphConfig>& out) {
  const auto kind = scalar<std::string>(node, "kind", "knn");
  if (kind == "knn") {
    const bool sym = scalar<bool>(node, "symmetrize", false);
    for (int k : values<int>(node, "k", 10)) out.push_back(GraphConfig::knn(k, sym));
  } else if (kind == "dense") {
    const bool cap = scalar<bool>(node, "cap", false);
    for (double m : values<double>(node, "M", 2.0)) out.push_back(GraphConfig::dense(m, cap));
  } else if (kind == "sparse") {
    for (double m : values<double>(node, "M", 0.2)) out.push_back(GraphConfig::sparse(m));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown graph kind '" + kind + "'");
  }
}

void parse_long_edges(const YAML::Node& node, std::vector<std::optional<LongEdgeConfig>>& out) {
  if (node.IsScalar()) {
    if (node.as<std::string>() != "none")
      throw Error(ErrorCode::InvalidArgument, "long-edge entries are 'none' or a mapping");
    out.push_back(std::nullopt);
    return;
  }
  const bool exclude = scalar<bool>(node, "exclude_near", false);
  const bool alias = scalar<bool>(node, "alias", false);
  for (const auto& scheme : values<std::string>(node, "scheme", "kl-rank"))
    for (int count : values<int>(node, "count", 0))
      for (double phi : values<double>(node, "phi", 0.5)) {
        LongEdgeConfig cfg;
        cfg.scheme = parse_long_edge_scheme(scheme);
        cfg.edges_per_node = count;
        cfg.phi = phi;
        cfg.exclude_near = exclude;
        cfg.use_alias = alias;
        out.push_back(cfg);
      }
}

void parse_searches(const YAML::Node& node, std::vector<SearchConfig>& out) {
  const auto algo = parse_search_algorithm(scalar<std::string>(node, "algo", "greedy"));
  const auto max_steps = scalar<std::int64_t>(node, "max_steps", 0);
  StartPolicy start;
  if (const auto s = node["start"]; s && s.as<std::string>() != "random") start = StartPolicy::fixed(s.as<NodeId>());
  for (int beam : values<int>(node, "beam", 1))
    for (bool llf : values<bool>(node, "llf", false)) {
      SearchConfig cfg;
      cfg.algorithm = algo;
      cfg.beam_width = algo == SearchAlgorithm::Beam ? beam : 1;
      cfg.llf = llf;
      cfg.max_steps = max_steps;
      cfg.start = start;
      out.push_back(cfg);
    }
}

}  // namespace

ExperimentPlan parse_plan(const std::string& text) {
  ExperimentPlan plan;
  try {
    const YAML::Node root = YAML::Load(text);
    if (!root.IsMap()) throw Error(ErrorCode::InvalidArgument, "a plan is a YAML mapping");
    plan.name = scalar<std::string>(root, "name", "plan");
    plan.master_seed = scalar<std::uint64_t>(root, "master_seed", 0);
    plan.repetitions = scalar<int>(root, "repetitions", 1);
    plan.output = scalar<std::string>(root, "output", "");

    if (const auto d = root["dataset"]) parse_datasets(d, plan.datasets);
    if (const auto ds = root["datasets"])
      for (const auto& d : ds) parse_datasets(d, plan.datasets);
    if (const auto q = root["queries"]) {
      plan.queries.kind = scalar<std::string>(q, "kind", "planted");
      plan.queries.count = scalar<std::int64_t>(q, "count", 1000);
      if (q["radius"]) plan.queries.radius = q["radius"].as<double>();
      plan.queries.radius_scale = scalar<double>(q, "radius_scale", 0.5);
    }
    if (const auto gs = root["graphs"])
      for (const auto& g : gs) parse_graphs(g, plan.graphs);
    if (const auto ls = root["long_edges"]) {
      plan.long_edges.clear();
      for (const auto& l : ls) parse_long_edges(l, plan.long_edges);
    }
    if (const auto ss = root["search"])
      for (const auto& s : ss) parse_searches(s, plan.searches);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad plan: ") + e.what());
  }
  if (plan.datasets.empty()) throw Error(ErrorCode::InvalidArgument, "plan has no dataset");
  if (plan.graphs.empty()) throw Error(ErrorCode::InvalidArgument, "plan has no graphs");
  if (plan.searches.empty()) plan.searches.emplace_back();
  if (plan.long_edges.empty()) plan.long_edges.emplace_back(std::nullopt);
  if (plan.repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be >= 1");
  if (plan.queries.kind != "planted" && plan.queries.kind != "uniform")
    throw Error(ErrorCode::InvalidArgument, "query kind must be planted or uniform");
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_plan(text.str());
}

std::size_t ExperimentPlan::cell_count() const {
  return datasets.size() * static_cast<std::size_t>(repetitions) * graphs.size() * long_edges.size() *
         searches.size();
}

}  // namespace gbnns::bench
