#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "semgeo/embedding.hpp"

namespace semgeo {

enum class MethodId { phate, pca, cmds, spectral };

inline constexpr MethodId kAllMethods[] = {MethodId::phate, MethodId::pca, MethodId::cmds,
                                           MethodId::spectral};

std::string_view to_string(MethodId m);
/// Throws ValidationError listing the valid method names.
MethodId parse_method(std::string_view s);

struct PhateParams {
    std::size_t k = 10;
    double alpha = 10.0;
    std::size_t t = 20;
    std::size_t out_dims = 2;
    std::uint64_t seed = 0;
    std::size_t mds_max_iter = 500;
    double mds_tol = 1e-6;
    double log_floor = 1e-7;

    bool operator==(const PhateParams&) const = default;
};

/// Everything needed to reproduce one projection. Only the fields relevant to
/// `method` influence the result; the rest are carried along unchanged.
struct ProjectionParams {
    MethodId method = MethodId::phate;
    PhateParams phate;             // phate.out_dims is the output dimension for every method
    std::size_t spectral_k = 10;
    bool normalize_embeddings = false;

    std::size_t out_dims() const { return phate.out_dims; }
    bool operator==(const ProjectionParams&) const = default;
};

/// Throws ValidationError when the parameters cannot be applied to n points.
void validate(const ProjectionParams& params, std::size_t n);

/// Canonical JSON text (sorted keys, no whitespace); stable across runs.
std::string params_to_json(const ProjectionParams& params);
ProjectionParams params_from_json(std::string_view text);
/// First 12 hex digits of sha256(params_to_json(params)).
std::string params_hash(const ProjectionParams& params);

struct Provenance {
    std::string bundle_checksum;
    std::string timestamp;  // ISO-8601 UTC

    bool operator==(const Provenance&) const = default;
};

struct Projection {
    Eigen::MatrixXd coords;  // n x out_dims, rows follow labels
    MethodId method = MethodId::phate;
    ProjectionParams params;
    std::string dataset_id;
    std::vector<std::string> labels;
    double stress = 0.0;
    Provenance provenance;
    std::vector<std::string> warnings;

    std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(coords.cols()); }
};

/// sha256 over the coordinate doubles, "sha256:<hex>".
std::string coords_checksum(const Eigen::MatrixXd& coords);

/// UTC timestamp honouring SOURCE_DATE_EPOCH when set.
std::string current_timestamp();

/// Runs the method named in params.method.
Projection project(const AlignedData& data, const ProjectionParams& params);

/// Writes `projection.csv` and `projection.manifest.json` into `dir`.
void export_projection(const Projection& projection, const std::filesystem::path& dir);
Projection import_projection(const std::filesystem::path& dir);

}  // namespace semgeo
