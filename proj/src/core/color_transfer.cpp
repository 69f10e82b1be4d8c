#include "pcqa/core/color_transfer.hpp"

#include "pcqa/util/parallel.hpp"

namespace pcqa {

PointCloud transfer_colors(const PointCloud& source, const PointCloud& target, unsigned jobs) {
    source.colors();  // fail fast before building the index
    const NeighborIndex index(source);
    return transfer_colors(source, index, target, jobs);
}

PointCloud transfer_colors(const PointCloud& source, const NeighborIndex& source_index, const PointCloud& target,
                           unsigned jobs) {
    const auto& src_colors = source.colors();
    const auto& pts = target.positions();
    std::vector<Rgb> colors(pts.size());
    parallel_for(pts.size(), jobs, [&](std::size_t i) { colors[i] = src_colors[source_index.nearest(pts[i]).index]; });
    return target.with_colors(std::move(colors));
}

}  // namespace pcqa
