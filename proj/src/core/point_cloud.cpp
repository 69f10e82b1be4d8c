#include "pcqa/core/point_cloud.hpp"

#include <cmath>

#include "pcqa/util/errors.hpp"

namespace pcqa {

PointCloud::PointCloud(std::vector<Vec3> positions, std::optional<std::vector<Rgb>> colors, int bit_depth,
                       std::string name)
    : positions_(std::move(positions)), colors_(std::move(colors)), bit_depth_(bit_depth), name_(std::move(name)) {
    if (positions_.empty()) throw SchemaError("point cloud must contain at least one point");
    if (bit_depth_ <= 0 || bit_depth_ > 30)
        throw ConfigurationError("bit depth must be in [1, 30], got " + std::to_string(bit_depth_));
    if (colors_ && colors_->size() != positions_.size())
        throw SchemaError("color count " + std::to_string(colors_->size()) + " does not match point count " +
                          std::to_string(positions_.size()));
    const double hi = peak();
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        for (double c : positions_[i]) {
            if (!(c >= 0.0 && c <= hi))
                throw SchemaError("point " + std::to_string(i) + " lies outside [0, " + std::to_string(hi) +
                                  "] for bit depth " + std::to_string(bit_depth_));
        }
    }
}

const std::vector<Rgb>& PointCloud::colors() const {
    if (!colors_) throw MissingAttributeError("point cloud '" + name_ + "' has no color attributes");
    return *colors_;
}

double PointCloud::peak() const noexcept { return std::ldexp(1.0, bit_depth_) - 1.0; }

PointCloud PointCloud::with_colors(std::vector<Rgb> colors) const {
    return PointCloud(positions_, std::move(colors), bit_depth_, name_);
}

int infer_bit_depth(const std::vector<Vec3>& positions) {
    double max_coord = 0.0;
    for (const auto& p : positions)
        for (double c : p) max_coord = std::max(max_coord, c);
    int bits = 1;
    while (std::ldexp(1.0, bits) - 1.0 < max_coord && bits < 30) ++bits;
    return bits;
}

const std::vector<ContentDescriptor>& dataset_catalog() {
    static const std::vector<ContentDescriptor> catalog = {
        {"Bouquet", 3150249, 10, DensityClass::Solid, 0.418, 0.41},
        {"StMichael", 1871158, 10, DensityClass::Solid, 0.418, 0.21},
        {"Soldier", 1089091, 10, DensityClass::Solid, 0.418, 0.01},
        {"Thaidancer", 3130215, 12, DensityClass::Solid, 0.328, 0.22},
        {"House_without_roof", 4848745, 12, DensityClass::Dense, 0.036, 0.13},
        {"Boxer", 3493085, 12, DensityClass::Dense, 0.048, 0.03},
    };
    return catalog;
}

const ContentDescriptor& find_content(const std::string& name) {
    for (const auto& c : dataset_catalog())
        if (c.name == name) return c;
    throw DomainError("unknown content '" + name + "'");
}

}  // namespace pcqa
