#include "gbnns/rerank.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <array>
#include <chrono>
#include <fstream>
#include <random>

#include "kernels.hpp"

namespace gbnns {

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Identity: return "identity";
    case TransformKind::RandomProjection: return "random";
    case TransformKind::PcaProjection: return "pca";
  }
  return "identity";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "identity") return TransformKind::Identity;
  if (name == "random") return TransformKind::RandomProjection;
  if (name == "pca") return TransformKind::PcaProjection;
  throw Error(ErrorCode::InvalidArgument, "unknown transform '" + std::string(name) + "'");
}

Transform::Transform(TransformKind kind, Eigen::MatrixXd projection, Eigen::VectorXd mean, std::string tag)
    : kind_(kind), projection_(std::move(projection)), mean_(std::move(mean)), tag_(std::move(tag)) {
  if (kind_ != TransformKind::Identity && projection_.cols() != mean_.size())
    throw Error(ErrorCode::DimensionMismatch, "transform mean does not match its input dimension");
}

Eigen::MatrixXd Transform::apply(const Eigen::MatrixXd& vectors) const {
  if (vectors.rows() != input_dim())
    throw Error(ErrorCode::DimensionMismatch, "transform expects dimension " + std::to_string(input_dim()) +
                                                  ", got " + std::to_string(vectors.rows()));
  if (kind_ == TransformKind::Identity) return vectors;
  Eigen::MatrixXd out = projection_ * (vectors.colwise() - mean_);
  normalize_columns(out);
  return out;
}

Dataset Transform::apply(const Dataset& ds) const {
  if (kind_ == TransformKind::Identity) {
    if (ds.dim() != input_dim()) throw Error(ErrorCode::DimensionMismatch, "identity transform dimension differs");
    return ds;
  }
  return Dataset(apply(ds.points()), Metric::Spherical, ds.id() + "~" + tag_);
}

FittedTransform fit_transform(const Dataset& ds, const TransformSpec& spec) {
  const Eigen::Index dim = ds.dim();
  if (spec.kind == TransformKind::Identity) {
    Transform t(TransformKind::Identity, Eigen::MatrixXd(), Eigen::VectorXd::Zero(dim), "");
    return {t.apply(ds), t};
  }
  if (spec.target_dim < 2 || spec.target_dim > dim)
    throw Error(ErrorCode::InvalidArgument, "target_dim must lie in [2, " + std::to_string(dim) + "]");
  const Eigen::Index k = spec.target_dim;
  const std::string tag = std::string(to_string(spec.kind)) + std::to_string(k) + "-s" + std::to_string(spec.seed);

  if (spec.kind == TransformKind::RandomProjection) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd gauss(dim, k);
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < dim; ++i) gauss(i, j) = normal(rng);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, k);
    Transform t(TransformKind::RandomProjection, q.transpose(), Eigen::VectorXd::Zero(dim), tag);
    return {t.apply(ds), t};
  }

  const Eigen::VectorXd mean = ds.points().rowwise().mean();
  const Eigen::MatrixXd centred = ds.points().colwise() - mean;
  const Eigen::MatrixXd cov = centred * centred.transpose() / static_cast<double>(ds.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigenvalues ascend; take the last k columns, largest first.
  Eigen::MatrixXd axes(k, dim);
  for (Eigen::Index r = 0; r < k; ++r) axes.row(r) = eig.eigenvectors().col(dim - 1 - r).transpose();
  Transform t(TransformKind::PcaProjection, axes, mean, tag);
  return {t.apply(ds), t};
}

namespace {

constexpr std::array<char, 8> kTransformMagic = {'G', 'B', 'N', 'S', 'X', 'F', 'R', 'M'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (in.gcount() != sizeof(T)) throw Error(ErrorCode::TruncatedFile, "transform file ends early");
  return v;
}

}  // namespace

void save_transform(const std::filesystem::path& path, const Transform& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out.write(kTransformMagic.data(), kTransformMagic.size());
  put(out, static_cast<std::uint8_t>(t.kind()));
  put(out, static_cast<std::uint32_t>(t.projection().rows()));
  put(out, static_cast<std::uint32_t>(t.mean().size()));
  put(out, static_cast<std::uint32_t>(t.tag().size()));
  out.write(t.tag().data(), static_cast<std::streamsize>(t.tag().size()));
  out.write(reinterpret_cast<const char*>(t.mean().data()), static_cast<std::streamsize>(t.mean().size() * 8));
  out.write(reinterpret_cast<const char*>(t.projection().data()),
            static_cast<std::streamsize>(t.projection().size() * 8));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

Transform load_transform(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (magic != kTransformMagic) throw Error(ErrorCode::MalformedHeader, path.string() + " is not a transform file");
  const auto kind = get<std::uint8_t>(in);
  if (kind > static_cast<std::uint8_t>(TransformKind::PcaProjection))
    throw Error(ErrorCode::MalformedHeader, "unknown transform kind");
  const auto rows = get<std::uint32_t>(in);
  const auto cols = get<std::uint32_t>(in);
  const auto tag_len = get<std::uint32_t>(in);
  if (cols > (1u << 20) || rows > cols || tag_len > 4096) throw Error(ErrorCode::MalformedHeader, "bad transform shape");
  std::string tag(tag_len, '\0');
  in.read(tag.data(), tag_len);
  Eigen::VectorXd mean(cols);
  Eigen::MatrixXd projection(rows, cols);
  in.read(reinterpret_cast<char*>(mean.data()), static_cast<std::streamsize>(mean.size() * 8));
  in.read(reinterpret_cast<char*>(projection.data()), static_cast<std::streamsize>(projection.size() * 8));
  if (!in) throw Error(ErrorCode::TruncatedFile, "transform file ends early");
  return Transform(static_cast<TransformKind>(kind), std::move(projection), std::move(mean), std::move(tag));
}

namespace {

RerankResult rerank_one(const SearchGraph& g_low, SearchContext& ctx, const Dataset& ds_orig,
                        const Eigen::Ref<const Eigen::VectorXd>& q_orig, const Eigen::Ref<const Eigen::VectorXd>& q_low,
                        const SearchConfig& cfg, std::vector<CandidatePool::Entry>& pool) {
  SearchConfig beam = cfg;
  beam.algorithm = SearchAlgorithm::Beam;
  ctx.begin(q_low);
  RerankResult r;
  r.low = beam_search(g_low, ctx, beam, &pool);
  r.low_answer = r.low.answer;
  r.low_distance_computations = r.low.distance_computations;
  double best_dot = -2.0;
  NodeId best = pool.front().node;
  for (const auto& e : pool) {
    const double dot = q_orig.dot(ds_orig.point(e.node));
    if (detail::closer(dot, e.node, best_dot, best)) best = e.node, best_dot = dot;
  }
  r.original_distance_computations = static_cast<std::int64_t>(pool.size());
  r.answer = best;
  return r;
}

void check_pipeline(const SearchGraph& g_low, const Dataset& ds_low, const Dataset& ds_orig, const Transform& t) {
  check_graph_matches(g_low, ds_low);
  if (ds_low.size() != ds_orig.size())
    throw Error(ErrorCode::DatasetMismatch, "low-space and original datasets differ in size");
  if (t.input_dim() != ds_orig.dim() || t.output_dim() != ds_low.dim())
    throw Error(ErrorCode::DimensionMismatch, "transform does not map the original space onto the low space");
  const std::string expected = t.kind() == TransformKind::Identity ? ds_orig.id() : ds_orig.id() + "~" + t.tag();
  if (ds_low.id() != expected)
    throw Error(ErrorCode::DatasetMismatch, "low-space dataset '" + ds_low.id() + "' was not produced by this transform");
}

}  // namespace

RerankResult search_and_rerank(const SearchGraph& g_low, const Dataset& ds_low, const Dataset& ds_orig,
                               const Eigen::Ref<const Eigen::VectorXd>& q_orig, const Transform& transform,
                               const SearchConfig& cfg) {
  check_pipeline(g_low, ds_low, ds_orig, transform);
  if (q_orig.size() != ds_orig.dim()) throw Error(ErrorCode::DimensionMismatch, "query dimension differs");
  const Eigen::VectorXd q_low = transform.apply(Eigen::MatrixXd(q_orig)).col(0);
  SearchContext ctx(ds_low);
  std::vector<CandidatePool::Entry> pool;
  return rerank_one(g_low, ctx, ds_orig, q_orig, q_low, cfg, pool);
}

RerankEvaluation evaluate_rerank(const SearchGraph& g_low, const Dataset& ds_low, const Dataset& ds_orig,
                                 const QuerySet& qs, const Transform& transform, const SearchConfig& cfg,
                                 bool keep_per_query) {
  check_pipeline(g_low, ds_low, ds_orig, transform);
  cfg.validate();
  if (qs.queries.rows() != ds_orig.dim()) throw Error(ErrorCode::DimensionMismatch, "query dimension differs");
  if (static_cast<Eigen::Index>(qs.ground_truth.size()) != qs.size())
    throw Error(ErrorCode::IndexMismatch, "ground truth does not cover every query");
  const Eigen::MatrixXd q_low = transform.apply(qs.queries);
  const std::int64_t m = qs.size();
  std::vector<RerankResult> results(static_cast<std::size_t>(m));
  const auto t0 = std::chrono::steady_clock::now();
#pragma omp parallel
  {
    SearchContext ctx(ds_low);
    std::vector<CandidatePool::Entry> pool;
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < m; ++i) {
      SearchConfig cfg_i = cfg;
      cfg_i.seed = query_seed(cfg.seed, i);
      results[static_cast<std::size_t>(i)] = rerank_one(g_low, ctx, ds_orig, qs.queries.col(i), q_low.col(i), cfg_i, pool);
    }
  }
  const auto t1 = std::chrono::steady_clock::now();

  RerankEvaluation ev;
  ev.queries = m;
  std::int64_t hit_rerank = 0, hit_low = 0, low_dc = 0, orig_dc = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    hit_rerank += results[i].answer == qs.ground_truth[i];
    hit_low += results[i].low_answer == qs.ground_truth[i];
    low_dc += results[i].low_distance_computations;
    orig_dc += results[i].original_distance_computations;
  }
  const auto md = static_cast<double>(m);
  ev.recall_rerank = static_cast<double>(hit_rerank) / md;
  ev.recall_low_only = static_cast<double>(hit_low) / md;
  ev.mean_low_distance_computations = static_cast<double>(low_dc) / md;
  ev.mean_original_distance_computations = static_cast<double>(orig_dc) / md;
  ev.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (keep_per_query) ev.per_query = std::move(results);
  return ev;
}

}  // namespace gbnns
