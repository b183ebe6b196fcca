#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semgeo/dataset.hpp"

namespace semgeo {

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EmbeddingBundle {
    std::string model_id;
    std::vector<std::string> labels;
    FloatMatrix matrix;     // rows follow labels
    std::string checksum;   // "sha256:<hex>" over the little-endian matrix bytes

    std::size_t count() const { return static_cast<std::size_t>(matrix.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(matrix.cols()); }

    bool operator==(const EmbeddingBundle& o) const {
        return model_id == o.model_id && labels == o.labels && checksum == o.checksum &&
               matrix.rows() == o.matrix.rows() && matrix.cols() == o.matrix.cols() &&
               std::equal(matrix.data(), matrix.data() + matrix.size(), o.matrix.data(),
                          [](float a, float b) { return std::memcmp(&a, &b, sizeof a) == 0; });
    }
};

struct AlignedData {
    Dataset dataset;
    Eigen::MatrixXd matrix;        // row i belongs to dataset.items[i]
    std::string bundle_checksum;   // empty when the matrix did not come from a bundle
};

std::string matrix_checksum(const FloatMatrix& m);

/// Fills in the checksum and checks the bundle invariants.
EmbeddingBundle make_bundle(std::string model_id, std::vector<std::string> labels, FloatMatrix matrix);

void validate(const EmbeddingBundle& bundle);

/// `path` may be the manifest file, the .f32 file or the common prefix.
EmbeddingBundle read_bundle(const std::filesystem::path& path);
/// Writes `<prefix>.manifest.json` and `<prefix>.f32`.
void write_bundle(const EmbeddingBundle& bundle, const std::filesystem::path& prefix);

/// Bundle prefix for a manifest or matrix path (strips `.manifest.json`/`.f32`).
std::filesystem::path bundle_prefix(const std::filesystem::path& path);

AlignedData align(const Dataset& dataset, const EmbeddingBundle& bundle);
AlignedData align_matrix(const Dataset& dataset, const Eigen::MatrixXd& matrix);

/// Scales every row to unit length. Zero rows are a NumericError.
void normalize_rows(AlignedData& data);

/// Deterministic stand-in embeddings with category structure: one random
/// centre per category, tight noise around it, and items carrying a
/// sequence_index laid out along a per-group direction.
EmbeddingBundle synthetic_bundle(const Dataset& dataset, std::size_t dim, std::uint64_t seed);

}  // namespace semgeo
