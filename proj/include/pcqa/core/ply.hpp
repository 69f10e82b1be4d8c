#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pcqa/core/point_cloud.hpp"

namespace pcqa {

enum class PlyEncoding { Ascii, BinaryLittleEndian };
enum class PlyPositionType { Float32, Float64 };

struct PlyWriteOptions {
    PlyEncoding encoding = PlyEncoding::BinaryLittleEndian;
    PlyPositionType position_type = PlyPositionType::Float32;
};

/// Reads an ascii or binary_little_endian PLY file.
///
/// Positions come from the vertex properties x, y, z (any scalar type);
/// colors from red, green, blue (uchar only). Point order is preserved and
/// duplicates are kept. The bit depth is taken from `bit_depth` when given,
/// otherwise from a `comment bit_depth N` header line, otherwise inferred
/// from the largest coordinate.
PointCloud load_ply(const std::filesystem::path& path, std::optional<int> bit_depth = std::nullopt);

/// Same as load_ply, reading from an in-memory buffer. `origin` names the
/// source in error messages.
PointCloud parse_ply(std::string_view bytes, std::optional<int> bit_depth = std::nullopt,
                     const std::string& origin = "<memory>");

void save_ply(const PointCloud& cloud, const std::filesystem::path& path, const PlyWriteOptions& options = {});

std::string serialize_ply(const PointCloud& cloud, const PlyWriteOptions& options = {});

}  // namespace pcqa
