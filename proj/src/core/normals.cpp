#include "pcqa/core/normals.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "pcqa/util/errors.hpp"
#include "pcqa/util/parallel.hpp"

namespace pcqa {

void canonicalize_sign(Vec3& n) {
    constexpr double kZero = 1e-9;
    for (double c : n) {
        if (std::abs(c) > kZero) {
            if (c < 0.0)
                for (double& v : n) v = -v;
            return;
        }
    }
}

NormalField estimate_normals(const PointCloud& cloud, std::size_t k, unsigned jobs) {
    const NeighborIndex index(cloud);
    return estimate_normals(cloud, index, k, jobs);
}

NormalField estimate_normals(const PointCloud& cloud, const NeighborIndex& index, std::size_t k, unsigned jobs) {
    if (k < 3) throw DomainError("normal estimation needs k >= 3, got " + std::to_string(k));
    if (cloud.size() < k + 1)
        throw DomainError("normal estimation with k=" + std::to_string(k) + " needs at least " +
                          std::to_string(k + 1) + " points, cloud has " + std::to_string(cloud.size()));

    const auto& pts = cloud.positions();
    NormalField field;
    field.normals.resize(pts.size());
    std::vector<char> flagged(pts.size(), 0);

    parallel_for(pts.size(), jobs, [&](std::size_t i) {
        const auto nbrs = index.k_nearest(pts[i], k + 1);
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (const auto& nb : nbrs) mean += Eigen::Vector3d(pts[nb.index][0], pts[nb.index][1], pts[nb.index][2]);
        mean /= static_cast<double>(nbrs.size());

        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto& nb : nbrs) {
            const Eigen::Vector3d d = Eigen::Vector3d(pts[nb.index][0], pts[nb.index][1], pts[nb.index][2]) - mean;
            cov.noalias() += d * d.transpose();
        }
        cov /= static_cast<double>(nbrs.size());

        if (cov.cwiseAbs().maxCoeff() == 0.0) {
            field.normals[i] = {0.0, 0.0, 1.0};
            flagged[i] = 1;
            return;
        }
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
        const Eigen::Vector3d v = solver.eigenvectors().col(0).normalized();  // eigenvalues ascending
        Vec3 n{v.x(), v.y(), v.z()};
        canonicalize_sign(n);
        field.normals[i] = n;
    });

    for (std::size_t i = 0; i < flagged.size(); ++i)
        if (flagged[i]) field.degenerate.push_back(i);
    return field;
}

}  // namespace pcqa
