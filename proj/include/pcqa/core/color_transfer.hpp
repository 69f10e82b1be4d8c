#pragma once

#include "pcqa/core/neighbor_index.hpp"
#include "pcqa/core/point_cloud.hpp"

namespace pcqa {

/// Recolors `target` with the color of each point's nearest neighbor in
/// `source` (exact NN, lowest index on ties). The target's own colors, if
/// any, are discarded. Throws MissingAttributeError if source has no colors.
PointCloud transfer_colors(const PointCloud& source, const PointCloud& target, unsigned jobs = 1);

PointCloud transfer_colors(const PointCloud& source, const NeighborIndex& source_index, const PointCloud& target,
                           unsigned jobs = 1);

}  // namespace pcqa
