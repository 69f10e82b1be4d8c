#pragma once

#include <cstddef>
#include <vector>

#include "pcqa/core/neighbor_index.hpp"
#include "pcqa/core/point_cloud.hpp"

namespace pcqa {

/// Per-point unit normals aligned with the cloud they were estimated on.
struct NormalField {
    std::vector<Vec3> normals;
    /// Indices whose neighborhood had zero covariance; their normal is +z.
    std::vector<std::size_t> degenerate;

    std::size_t size() const noexcept { return normals.size(); }
};

inline constexpr std::size_t kDefaultNormalNeighbors = 12;

/// PCA normals: for every point, the eigenvector of the smallest eigenvalue
/// of the covariance of the point and its k nearest neighbors. The sign is
/// fixed so the first nonzero component is positive.
///
/// Requires k >= 3 and at least k + 1 points (DomainError otherwise).
NormalField estimate_normals(const PointCloud& cloud, std::size_t k = kDefaultNormalNeighbors, unsigned jobs = 1);

/// Same, reusing an index already built over `cloud`.
NormalField estimate_normals(const PointCloud& cloud, const NeighborIndex& index, std::size_t k, unsigned jobs = 1);

/// Applies the sign rule in place.
void canonicalize_sign(Vec3& n);

}  // namespace pcqa
