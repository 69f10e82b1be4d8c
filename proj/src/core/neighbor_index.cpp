#include "pcqa/core/neighbor_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

#include "pcqa/util/errors.hpp"

namespace pcqa {

namespace {
constexpr std::uint32_t kLeafSize = 12;

bool closer(double d, std::size_t i, double best_d, std::size_t best_i) {
    return d < best_d || (d == best_d && i < best_i);
}
}  // namespace

NeighborIndex::NeighborIndex(const PointCloud& cloud) : NeighborIndex(cloud.positions()) {}

NeighborIndex::NeighborIndex(std::vector<Vec3> positions) {
    if (positions.empty()) throw DomainError("cannot index an empty point set");
    if (positions.size() > std::numeric_limits<std::uint32_t>::max())
        throw DomainError("point set too large for the neighbor index");

    order_.resize(positions.size());
    std::iota(order_.begin(), order_.end(), 0u);
    points_ = std::move(positions);
    nodes_.reserve(2 * (points_.size() / kLeafSize + 1));
    build(0, static_cast<std::uint32_t>(points_.size()));

    std::vector<Vec3> reordered(points_.size());
    for (std::size_t slot = 0; slot < order_.size(); ++slot) reordered[slot] = points_[order_[slot]];
    points_ = std::move(reordered);
}

std::int32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;

    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
            std::numeric_limits<double>::lowest()};
    for (std::uint32_t i = begin; i < end; ++i) {
        const auto& p = points_[order_[i]];
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    if (hi[axis] == lo[axis]) return id;  // all points coincide

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = points_[a][axis];
                         const double cb = points_[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });
    const double split = points_[order_[mid]][axis];

    // Left holds coordinates <= split, right holds >= split.
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

Neighbor NeighborIndex::nearest(const Vec3& query) const {
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_i = std::numeric_limits<std::size_t>::max();

    std::int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (n.left < 0) {
            for (std::uint32_t s = n.begin; s < n.end; ++s) {
                const double d = squared_distance(points_[s], query);
                if (closer(d, order_[s], best_d, best_i)) {
                    best_d = d;
                    best_i = order_[s];
                }
            }
            continue;
        }
        const double diff = query[n.axis] - n.split;
        const std::int32_t near = diff <= 0.0 ? n.left : n.right;
        const std::int32_t far = diff <= 0.0 ? n.right : n.left;
        // Visit far side only if it can hold an equal-or-closer point; the
        // inclusive bound keeps lowest-index tie-breaking exact.
        if (diff * diff <= best_d) stack[top++] = far;
        stack[top++] = near;
    }
    return {best_i, best_d};
}

std::vector<Neighbor> NeighborIndex::k_nearest(const Vec3& query, std::size_t k) const {
    k = std::min(k, points_.size());
    if (k == 0) return {};

    auto worse = [](const Neighbor& a, const Neighbor& b) {
        return a.squared_distance < b.squared_distance ||
               (a.squared_distance == b.squared_distance && a.index < b.index);
    };
    std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(worse)> heap(worse);

    struct Pending {
        std::int32_t node;
        double bound;
    };
    std::vector<Pending> stack;
    stack.push_back({0, 0.0});
    while (!stack.empty()) {
        const Pending cur = stack.back();
        stack.pop_back();
        if (heap.size() == k && cur.bound > heap.top().squared_distance) continue;
        const Node& n = nodes_[cur.node];
        if (n.left < 0) {
            for (std::uint32_t s = n.begin; s < n.end; ++s) {
                const Neighbor cand{order_[s], squared_distance(points_[s], query)};
                if (heap.size() < k) {
                    heap.push(cand);
                } else if (worse(cand, heap.top())) {
                    heap.pop();
                    heap.push(cand);
                }
            }
            continue;
        }
        const double diff = query[n.axis] - n.split;
        const std::int32_t near = diff <= 0.0 ? n.left : n.right;
        const std::int32_t far = diff <= 0.0 ? n.right : n.left;
        stack.push_back({far, diff * diff});
        stack.push_back({near, cur.bound});
    }

    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = heap.top();
        heap.pop();
    }
    return out;
}

}  // namespace pcqa
