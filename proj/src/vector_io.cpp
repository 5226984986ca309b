#include "gbnns/vector_io.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace gbnns {
namespace {

static_assert(std::endian::native == std::endian::little, "vector files are read as little-endian");

constexpr std::int32_t kMaxDim = 1 << 20;

}  // namespace

VectorFormat parse_vector_format(std::string_view name) {
  if (name == "fvecs") return VectorFormat::Fvecs;
  if (name == "bvecs") return VectorFormat::Bvecs;
  throw Error(ErrorCode::InvalidArgument, "unknown vector format '" + std::string(name) + "'");
}

Eigen::MatrixXd read_vectors(const std::filesystem::path& path, VectorFormat format,
                             std::optional<Eigen::Index> limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const std::size_t component = format == VectorFormat::Fvecs ? 4 : 1;

  std::vector<double> values;
  std::int32_t dim = -1;
  Eigen::Index count = 0;
  std::vector<char> buffer;
  while (!limit || count < *limit) {
    std::array<char, 4> header{};
    in.read(header.data(), 4);
    const auto got = in.gcount();
    if (got == 0) break;
    if (got != 4) throw Error(ErrorCode::TruncatedFile, "partial dimension header in " + path.string());
    std::int32_t this_dim = 0;
    std::memcpy(&this_dim, header.data(), 4);
    if (this_dim <= 0 || this_dim > kMaxDim)
      throw Error(ErrorCode::MalformedHeader, "invalid dimension " + std::to_string(this_dim));
    if (dim < 0) dim = this_dim;
    if (this_dim != dim)
      throw Error(ErrorCode::InconsistentDimensions,
                  "vector " + std::to_string(count) + " has dimension " + std::to_string(this_dim) +
                      ", expected " + std::to_string(dim));
    buffer.resize(static_cast<std::size_t>(dim) * component);
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size())
      throw Error(ErrorCode::TruncatedFile, "vector " + std::to_string(count) + " is truncated");
    for (std::int32_t i = 0; i < dim; ++i) {
      if (format == VectorFormat::Fvecs) {
        float f = 0.0f;
        std::memcpy(&f, buffer.data() + 4 * i, 4);
        values.push_back(f);
      } else {
        values.push_back(static_cast<unsigned char>(buffer[static_cast<std::size_t>(i)]));
      }
    }
    ++count;
  }
  if (dim < 0) throw Error(ErrorCode::MalformedHeader, path.string() + " holds no vectors");
  return Eigen::Map<Eigen::MatrixXd>(values.data(), dim, count);
}

Dataset load_vectors(const std::filesystem::path& path, VectorFormat format, bool normalize,
                     Metric metric, std::optional<Eigen::Index> limit, std::optional<std::string> id) {
  Eigen::MatrixXd points = read_vectors(path, format, limit);
  if (normalize) normalize_columns(points);
  const auto n = points.cols();
  return Dataset(std::move(points), metric,
                 id.value_or(path.stem().string() + "-n" + std::to_string(n)));
}

void write_fvecs(const std::filesystem::path& path, const Eigen::MatrixXd& vectors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  const auto dim = static_cast<std::int32_t>(vectors.rows());
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    out.write(reinterpret_cast<const char*>(&dim), 4);
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const auto f = static_cast<float>(vectors(i, j));
      out.write(reinterpret_cast<const char*>(&f), 4);
    }
  }
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

std::filesystem::path meta_path(const std::filesystem::path& data_path) {
  return std::filesystem::path(data_path.string() + ".meta");
}

void write_meta(const std::filesystem::path& path, const DatasetMeta& meta) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << meta.id;
  out << YAML::Key << "n" << YAML::Value << meta.n;
  out << YAML::Key << "d" << YAML::Value << meta.d;
  out << YAML::Key << "metric" << YAML::Value << std::string(to_string(meta.metric));
  out << YAML::EndMap;
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  file << out.c_str() << "\n";
}

DatasetMeta read_meta(const std::filesystem::path& path) {
  try {
    const YAML::Node node = YAML::LoadFile(path.string());
    DatasetMeta meta;
    meta.id = node["id"].as<std::string>();
    meta.n = node["n"].as<std::int64_t>();
    meta.d = node["d"].as<int>();
    meta.metric = parse_metric(node["metric"].as<std::string>());
    return meta;
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::MalformedHeader, "bad metadata " + path.string() + ": " + e.what());
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  write_fvecs(path, ds.points());
  write_meta(meta_path(path), {ds.id(), ds.size(), ds.sphere_dim(), ds.metric()});
}

Dataset load_dataset(const std::filesystem::path& path) {
  const DatasetMeta meta = read_meta(meta_path(path));
  Eigen::MatrixXd points = read_vectors(path, VectorFormat::Fvecs);
  if (points.cols() != meta.n || points.rows() != meta.d + 1)
    throw Error(ErrorCode::InconsistentDimensions, "metadata does not match " + path.string());
  normalize_columns(points);
  return Dataset(std::move(points), meta.metric, meta.id);
}

}  // namespace gbnns
