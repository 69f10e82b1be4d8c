#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pcqa {

using Vec3 = std::array<double, 3>;
using Rgb = std::array<std::uint8_t, 3>;

/// Geometry plus optional per-point color, in voxel units.
///
/// Invariants checked at construction: at least one point, colors (when
/// present) match positions in length, every coordinate lies in
/// [0, 2^bit_depth - 1]. Duplicate points are kept as-is.
class PointCloud {
public:
    PointCloud(std::vector<Vec3> positions, std::optional<std::vector<Rgb>> colors, int bit_depth,
               std::string name = {});

    std::size_t size() const noexcept { return positions_.size(); }
    const std::vector<Vec3>& positions() const noexcept { return positions_; }
    bool has_colors() const noexcept { return colors_.has_value(); }
    /// Throws MissingAttributeError when the cloud carries no color.
    const std::vector<Rgb>& colors() const;
    const std::optional<std::vector<Rgb>>& maybe_colors() const noexcept { return colors_; }
    int bit_depth() const noexcept { return bit_depth_; }
    const std::string& name() const noexcept { return name_; }

    /// Largest representable coordinate, 2^bit_depth - 1.
    double peak() const noexcept;

    /// Same cloud with colors replaced (or added).
    PointCloud with_colors(std::vector<Rgb> colors) const;

private:
    std::vector<Vec3> positions_;
    std::optional<std::vector<Rgb>> colors_;
    int bit_depth_;
    std::string name_;
};

/// Smallest bit depth able to hold every coordinate of `positions`.
int infer_bit_depth(const std::vector<Vec3>& positions);

enum class DensityClass { Solid, Dense, Sparse };

/// Catalogue entry for a dataset model.
struct ContentDescriptor {
    std::string name;
    std::size_t point_count;
    int geometry_precision;
    DensityClass density_class;
    double density_factor;
    double color_gamut_volume;  // fraction in [0, 1]
};

/// The six models of the evaluated dataset.
const std::vector<ContentDescriptor>& dataset_catalog();

/// Looks up a catalog entry by name; throws DomainError if unknown.
const ContentDescriptor& find_content(const std::string& name);

}  // namespace pcqa
