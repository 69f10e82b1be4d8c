#include "pcqa/session/assets.hpp"

#include <bit>
#include <cstring>
#include <regex>

#include "pcqa/core/ply.hpp"
#include "pcqa/util/errors.hpp"

namespace pcqa {

namespace {

static_assert(std::endian::native == std::endian::little, "packed assets assume a little-endian host");

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T get(std::string_view bytes, std::size_t& pos) {
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

std::string pack_points(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    if (n > 0xffffffffu) throw DomainError("cloud too large for the packed asset format");
    std::string out;
    out.reserve(4 + n * 15);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n));
    for (const auto& p : cloud.positions())
        for (double c : p) put<float>(out, static_cast<float>(c));
    for (std::size_t i = 0; i < n; ++i) {
        if (cloud.has_colors()) {
            for (auto ch : cloud.colors()[i]) out.push_back(static_cast<char>(ch));
        } else {
            out.append(3, static_cast<char>(128));
        }
    }
    return out;
}

PointCloud unpack_points(std::string_view bytes, int bit_depth) {
    if (bytes.size() < 4) throw ParseError("packed asset shorter than its header");
    std::size_t pos = 0;
    const auto n = get<std::uint32_t>(bytes, pos);
    if (bytes.size() != 4 + std::size_t(n) * 15)
        throw ParseError("packed asset size does not match its point count " + std::to_string(n));
    std::vector<Vec3> pts(n);
    for (auto& p : pts)
        for (auto& c : p) c = get<float>(bytes, pos);
    std::vector<Rgb> cols(n);
    for (auto& c : cols)
        for (auto& ch : c) ch = static_cast<std::uint8_t>(bytes[pos++]);
    return PointCloud(std::move(pts), std::move(cols), bit_depth, "packed");
}

std::string make_tar(const std::vector<std::pair<std::string, std::string>>& files) {
    std::string out;
    for (const auto& [name, data] : files) {
        if (name.empty() || name.size() > 99) throw DomainError("tar member name must have 1..99 characters");
        char h[512] = {};
        std::memcpy(h, name.data(), name.size());
        std::snprintf(h + 100, 8, "%07o", 0644);
        std::snprintf(h + 108, 8, "%07o", 0);
        std::snprintf(h + 116, 8, "%07o", 0);
        std::snprintf(h + 124, 12, "%011llo", static_cast<unsigned long long>(data.size()));
        std::snprintf(h + 136, 12, "%011o", 0);
        h[156] = '0';
        std::memcpy(h + 257, "ustar", 6);
        std::memcpy(h + 263, "00", 2);
        std::memset(h + 148, ' ', 8);
        unsigned sum = 0;
        for (unsigned char c : h) sum += c;
        std::snprintf(h + 148, 8, "%06o", sum);
        h[155] = ' ';
        out.append(h, 512);
        out += data;
        out.append((512 - data.size() % 512) % 512, '\0');
    }
    out.append(1024, '\0');
    return out;
}

std::optional<std::filesystem::path> AssetStore::ply_path(const std::string& id) const {
    static const std::regex kName("[A-Za-z0-9_.-]{1,128}");
    if (!std::regex_match(id, kName) || id.find("..") != std::string::npos) return std::nullopt;
    const auto p = dir_ / (id + ".ply");
    if (!std::filesystem::is_regular_file(p)) return std::nullopt;
    return p;
}

std::optional<std::string> AssetStore::packed(const std::string& id) {
    {
        std::lock_guard lock(mutex_);
        if (const auto it = cache_.find(id); it != cache_.end()) return it->second;
    }
    const auto path = ply_path(id);
    if (!path) return std::nullopt;
    std::string bytes = pack_points(load_ply(*path));
    std::lock_guard lock(mutex_);
    return cache_.emplace(id, std::move(bytes)).first->second;
}

}  // namespace pcqa
