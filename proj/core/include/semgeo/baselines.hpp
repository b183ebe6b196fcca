#pragma once

#include <cstddef>

#include "semgeo/embedding.hpp"
#include "semgeo/projection.hpp"

namespace semgeo {

/// Mean-centred data on its top principal axes (descending variance).
Projection pca_project(const AlignedData& data, std::size_t out_dims);

/// Classical MDS on the Euclidean distances of the raw rows.
Projection cmds_project(const AlignedData& data, std::size_t out_dims);

/// Laplacian eigenmap on the symmetric kNN graph. Disconnected graphs are
/// embedded per component (components ordered by their smallest label) and
/// laid out side by side along the first axis, with a warning.
Projection spectral_project(const AlignedData& data, std::size_t k, std::size_t out_dims);

}  // namespace semgeo
