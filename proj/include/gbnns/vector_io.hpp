#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>

#include "gbnns/data.hpp"

namespace gbnns {

// fvecs / bvecs: little-endian records, each a 4-byte signed dimension
// followed by that many float32 (fvecs) or uint8 (bvecs) components.
enum class VectorFormat { Fvecs, Bvecs };

VectorFormat parse_vector_format(std::string_view name);

/// Raw vectors, one per column. Errors: MalformedHeader (non-positive or absurd
/// dimension, empty file), InconsistentDimensions, TruncatedFile.
Eigen::MatrixXd read_vectors(const std::filesystem::path& path, VectorFormat format,
                             std::optional<Eigen::Index> limit = std::nullopt);

/// Reads vectors into a Dataset. With `normalize` every vector is projected to
/// the unit sphere; otherwise they must already be unit norm.
Dataset load_vectors(const std::filesystem::path& path, VectorFormat format, bool normalize,
                     Metric metric = Metric::Spherical,
                     std::optional<Eigen::Index> limit = std::nullopt,
                     std::optional<std::string> id = std::nullopt);

void write_fvecs(const std::filesystem::path& path, const Eigen::MatrixXd& vectors);

/// Sidecar describing a dataset file: written next to it as `<file>.meta`.
struct DatasetMeta {
  std::string id;
  std::int64_t n = 0;
  int d = 0;  // sphere dimension
  Metric metric = Metric::Spherical;
};

std::filesystem::path meta_path(const std::filesystem::path& data_path);
void write_meta(const std::filesystem::path& path, const DatasetMeta& meta);
DatasetMeta read_meta(const std::filesystem::path& path);

/// fvecs file plus sidecar. Loading re-normalises (float32 storage drifts by
/// ~1e-7) and checks the sidecar's n and d against the file.
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace gbnns
