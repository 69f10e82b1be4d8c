#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcqa/core/point_cloud.hpp"

namespace pcqa {

struct Neighbor {
    std::size_t index;
    double squared_distance;
};

/// Exact nearest-neighbor index (kd-tree) over a fixed set of positions.
///
/// Ties are broken by the lowest point index, so every query has exactly one
/// answer and agrees with a linear scan that uses the same rule. Immutable
/// after construction; concurrent queries are safe.
class NeighborIndex {
public:
    explicit NeighborIndex(const PointCloud& cloud);
    explicit NeighborIndex(std::vector<Vec3> positions);

    std::size_t size() const noexcept { return points_.size(); }

    Neighbor nearest(const Vec3& query) const;

    /// The k nearest points ordered by (distance, index). Returns fewer than
    /// k when the index holds fewer points.
    std::vector<Neighbor> k_nearest(const Vec3& query, std::size_t k) const;

private:
    struct Node {
        std::uint32_t begin;
        std::uint32_t end;
        std::int32_t left = -1;  // -1 marks a leaf
        std::int32_t right = -1;
        int axis = 0;
        double split = 0.0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);

    std::vector<Vec3> points_;           // reordered by tree layout
    std::vector<std::uint32_t> order_;   // tree slot -> original index
    std::vector<Node> nodes_;
};

/// Squared Euclidean distance. All NN code paths (index and oracles) use
/// this single expression so equal-distance ties compare identically.
inline double squared_distance(const Vec3& a, const Vec3& b) noexcept {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace pcqa
