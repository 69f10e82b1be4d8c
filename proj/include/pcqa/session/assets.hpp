#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcqa/core/point_cloud.hpp"

namespace pcqa {

/// Packed little-endian asset for the browser client: uint32 count, then
/// count float32 xyz triples, then count uint8 rgb triples. Clouds without
/// color are packed as mid grey.
std::string pack_points(const PointCloud& cloud);

/// Inverse of pack_points (bit depth is not stored). Throws ParseError on a
/// truncated or oversized buffer.
PointCloud unpack_points(std::string_view bytes, int bit_depth = 10);

/// Uncompressed POSIX ustar archive with zero mtimes, so identical inputs
/// give identical bytes.
std::string make_tar(const std::vector<std::pair<std::string, std::string>>& files);

/// Stimulus PLY files in one directory, looked up as `<id>.ply`, with packed
/// versions cached after the first request.
class AssetStore {
public:
    explicit AssetStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

    /// nullopt for an unknown id or one that is not a plain file name.
    std::optional<std::filesystem::path> ply_path(const std::string& id) const;
    /// Packed bytes; nullopt for an unknown id. Parse errors propagate.
    std::optional<std::string> packed(const std::string& id);

private:
    std::filesystem::path dir_;
    std::mutex mutex_;
    std::map<std::string, std::string> cache_;
};

}  // namespace pcqa
