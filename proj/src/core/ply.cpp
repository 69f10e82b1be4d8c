#include "pcqa/core/ply.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "pcqa/util/errors.hpp"

namespace pcqa {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> scalar_type_from_name(std::string_view name) {
    if (name == "char" || name == "int8") return ScalarType::Int8;
    if (name == "uchar" || name == "uint8") return ScalarType::UInt8;
    if (name == "short" || name == "int16") return ScalarType::Int16;
    if (name == "ushort" || name == "uint16") return ScalarType::UInt16;
    if (name == "int" || name == "int32") return ScalarType::Int32;
    if (name == "uint" || name == "uint32") return ScalarType::UInt32;
    if (name == "float" || name == "float32") return ScalarType::Float32;
    if (name == "double" || name == "float64") return ScalarType::Float64;
    return std::nullopt;
}

std::size_t scalar_size(ScalarType t) {
    switch (t) {
        case ScalarType::Int8:
        case ScalarType::UInt8: return 1;
        case ScalarType::Int16:
        case ScalarType::UInt16: return 2;
        case ScalarType::Int32:
        case ScalarType::UInt32:
        case ScalarType::Float32: return 4;
        case ScalarType::Float64: return 8;
    }
    return 0;
}

struct Property {
    std::string name;
    ScalarType type;
    bool is_list = false;
    ScalarType count_type = ScalarType::UInt8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

struct Header {
    PlyEncoding encoding = PlyEncoding::Ascii;
    std::vector<Element> elements;
    std::optional<int> bit_depth;
    std::string name;
    std::size_t body_offset = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

Header parse_header(std::string_view bytes, const std::string& origin) {
    Header h;
    std::size_t pos = 0;
    int line_no = 0;
    bool saw_format = false;
    auto fail = [&](std::string_view line, const std::string& why) -> ParseError {
        return ParseError(origin + ": malformed PLY header at line " + std::to_string(line_no) + " ('" +
                          std::string(line) + "'): " + why);
    };

    for (;;) {
        if (pos >= bytes.size()) throw ParseError(origin + ": PLY header is missing 'end_header'");
        std::size_t eol = bytes.find('\n', pos);
        if (eol == std::string_view::npos) eol = bytes.size();
        std::string_view line = bytes.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = std::min(eol + 1, bytes.size());
        ++line_no;

        auto tok = split_ws(line);
        if (line_no == 1) {
            if (tok.size() != 1 || tok[0] != "ply") throw fail(line, "expected magic 'ply'");
            continue;
        }
        if (tok.empty()) continue;
        const auto key = tok[0];
        if (key == "format") {
            if (tok.size() != 3) throw fail(line, "expected 'format <encoding> <version>'");
            if (tok[1] == "ascii")
                h.encoding = PlyEncoding::Ascii;
            else if (tok[1] == "binary_little_endian")
                h.encoding = PlyEncoding::BinaryLittleEndian;
            else if (tok[1] == "binary_big_endian")
                throw UnsupportedFormatError(origin + ": binary_big_endian PLY is not supported");
            else
                throw fail(line, "unknown encoding");
            saw_format = true;
        } else if (key == "comment") {
            if (tok.size() == 3 && tok[1] == "bit_depth") {
                int bd = 0;
                if (!parse_number(tok[2], bd)) throw fail(line, "bit_depth comment is not an integer");
                h.bit_depth = bd;
            } else if (tok.size() == 3 && tok[1] == "name") {
                h.name = std::string(tok[2]);
            }
        } else if (key == "obj_info") {
            continue;
        } else if (key == "element") {
            std::size_t count = 0;
            if (tok.size() != 3 || !parse_number(tok[2], count)) throw fail(line, "expected 'element <name> <count>'");
            h.elements.push_back({std::string(tok[1]), count, {}});
        } else if (key == "property") {
            if (h.elements.empty()) throw fail(line, "property declared before any element");
            Property p;
            if (tok.size() == 5 && tok[1] == "list") {
                auto ct = scalar_type_from_name(tok[2]);
                auto vt = scalar_type_from_name(tok[3]);
                if (!ct || !vt) throw UnsupportedFormatError(origin + ": unsupported list property type on line " +
                                                             std::to_string(line_no));
                p = {std::string(tok[4]), *vt, true, *ct};
            } else if (tok.size() == 3) {
                auto t = scalar_type_from_name(tok[1]);
                if (!t) throw UnsupportedFormatError(origin + ": unsupported property type '" + std::string(tok[1]) +
                                                     "' on line " + std::to_string(line_no));
                p = {std::string(tok[2]), *t};
            } else {
                throw fail(line, "expected 'property <type> <name>'");
            }
            h.elements.back().properties.push_back(std::move(p));
        } else if (key == "end_header") {
            if (!saw_format) throw fail(line, "end_header reached without a format line");
            h.body_offset = pos;
            return h;
        } else {
            throw fail(line, "unknown keyword");
        }
    }
}

double read_binary_scalar(const char* p, ScalarType t) {
    switch (t) {
        case ScalarType::Int8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
        case ScalarType::UInt8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
        case ScalarType::Int16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
        case ScalarType::UInt16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
        case ScalarType::Int32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
        case ScalarType::UInt32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
        case ScalarType::Float32: { float v; std::memcpy(&v, p, 4); return v; }
        case ScalarType::Float64: { double v; std::memcpy(&v, p, 8); return v; }
    }
    return 0.0;
}

// Sequential reader over the body, shared by both encodings.
class BodyReader {
public:
    BodyReader(std::string_view body, PlyEncoding enc, const std::string& origin)
        : body_(body), enc_(enc), origin_(origin) {}

    double next(ScalarType t) {
        if (enc_ == PlyEncoding::BinaryLittleEndian) {
            const std::size_t n = scalar_size(t);
            if (pos_ + n > body_.size()) throw ParseError(origin_ + ": unexpected end of binary PLY body");
            const double v = read_binary_scalar(body_.data() + pos_, t);
            pos_ += n;
            return v;
        }
        while (pos_ < body_.size() && is_space(body_[pos_])) ++pos_;
        std::size_t end = pos_;
        while (end < body_.size() && !is_space(body_[end])) ++end;
        if (end == pos_) throw ParseError(origin_ + ": unexpected end of ascii PLY body");
        std::string_view token = body_.substr(pos_, end - pos_);
        pos_ = end;
        double v = 0.0;
        if (!parse_number(token, v))
            throw ParseError(origin_ + ": invalid number '" + std::string(token) + "' in ascii PLY body");
        return v;
    }

private:
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

    std::string_view body_;
    PlyEncoding enc_;
    const std::string& origin_;
    std::size_t pos_ = 0;
};

}  // namespace

PointCloud parse_ply(std::string_view bytes, std::optional<int> bit_depth, const std::string& origin) {
    const Header h = parse_header(bytes, origin);

    const Element* vertex = nullptr;
    for (const auto& e : h.elements)
        if (e.name == "vertex") vertex = &e;
    if (vertex == nullptr) throw SchemaError(origin + ": PLY file has no vertex element");

    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
    for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
        const auto& p = vertex->properties[i];
        const int idx = static_cast<int>(i);
        if (p.name == "x") ix = idx;
        else if (p.name == "y") iy = idx;
        else if (p.name == "z") iz = idx;
        else if (p.name == "red") ir = idx;
        else if (p.name == "green") ig = idx;
        else if (p.name == "blue") ib = idx;
        else continue;
        if (p.is_list) throw UnsupportedFormatError(origin + ": property '" + p.name + "' must not be a list");
    }
    if (ix < 0 || iy < 0 || iz < 0) throw SchemaError(origin + ": vertex element lacks x, y, z properties");
    const int color_props = (ir >= 0) + (ig >= 0) + (ib >= 0);
    if (color_props != 0 && color_props != 3)
        throw SchemaError(origin + ": vertex element has an incomplete red/green/blue set");
    const bool has_colors = color_props == 3;
    if (has_colors) {
        for (int ci : {ir, ig, ib}) {
            if (vertex->properties[ci].type != ScalarType::UInt8)
                throw UnsupportedFormatError(origin + ": color property '" + vertex->properties[ci].name +
                                             "' must be uchar");
        }
    }

    BodyReader reader(bytes.substr(h.body_offset), h.encoding, origin);
    std::vector<Vec3> positions;
    std::vector<Rgb> colors;
    std::vector<double> values;

    for (const auto& e : h.elements) {
        const bool is_vertex = &e == vertex;
        if (is_vertex) {
            positions.reserve(e.count);
            if (has_colors) colors.reserve(e.count);
        }
        for (std::size_t row = 0; row < e.count; ++row) {
            values.assign(e.properties.size(), 0.0);
            for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
                const auto& p = e.properties[pi];
                if (p.is_list) {
                    const auto n = static_cast<std::size_t>(reader.next(p.count_type));
                    for (std::size_t k = 0; k < n; ++k) reader.next(p.type);
                } else {
                    values[pi] = reader.next(p.type);
                }
            }
            if (is_vertex) {
                if (has_colors) {
                    for (int ci : {ir, ig, ib}) {
                        if (values[ci] < 0.0 || values[ci] > 255.0 || values[ci] != std::floor(values[ci]))
                            throw ParseError(origin + ": color value out of uchar range in vertex " +
                                             std::to_string(row));
                    }
                }
                positions.push_back({values[ix], values[iy], values[iz]});
                if (has_colors)
                    colors.push_back({static_cast<std::uint8_t>(values[ir]), static_cast<std::uint8_t>(values[ig]),
                                      static_cast<std::uint8_t>(values[ib])});
            }
        }
        if (is_vertex) break;  // trailing elements (faces etc.) are not needed
    }

    const int depth = bit_depth ? *bit_depth : h.bit_depth ? *h.bit_depth : infer_bit_depth(positions);
    std::optional<std::vector<Rgb>> maybe_colors;
    if (has_colors) maybe_colors = std::move(colors);
    std::string name = h.name;
    return PointCloud(std::move(positions), std::move(maybe_colors), depth, std::move(name));
}

PointCloud load_ply(const std::filesystem::path& path, std::optional<int> bit_depth) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EnvironmentError("cannot open PLY file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    PointCloud cloud = parse_ply(bytes, bit_depth, path.string());
    if (!cloud.name().empty()) return cloud;
    return PointCloud(cloud.positions(), cloud.maybe_colors(), cloud.bit_depth(), path.stem().string());
}

std::string serialize_ply(const PointCloud& cloud, const PlyWriteOptions& options) {
    std::ostringstream out;
    const bool ascii = options.encoding == PlyEncoding::Ascii;
    const bool f64 = options.position_type == PlyPositionType::Float64;
    out << "ply\n" << (ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n");
    out << "comment bit_depth " << cloud.bit_depth() << "\n";
    if (!cloud.name().empty() && cloud.name().find_first_of(" \t\r\n") == std::string::npos)
        out << "comment name " << cloud.name() << "\n";
    out << "element vertex " << cloud.size() << "\n";
    const char* ptype = f64 ? "double" : "float";
    out << "property " << ptype << " x\nproperty " << ptype << " y\nproperty " << ptype << " z\n";
    if (cloud.has_colors()) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";

    const auto& pos = cloud.positions();
    const auto* cols = cloud.has_colors() ? &cloud.colors() : nullptr;
    if (ascii) {
        out.precision(f64 ? 17 : 9);
        for (std::size_t i = 0; i < pos.size(); ++i) {
            if (f64)
                out << pos[i][0] << ' ' << pos[i][1] << ' ' << pos[i][2];
            else
                out << static_cast<float>(pos[i][0]) << ' ' << static_cast<float>(pos[i][1]) << ' '
                    << static_cast<float>(pos[i][2]);
            if (cols) out << ' ' << int((*cols)[i][0]) << ' ' << int((*cols)[i][1]) << ' ' << int((*cols)[i][2]);
            out << '\n';
        }
    } else {
        for (std::size_t i = 0; i < pos.size(); ++i) {
            for (double c : pos[i]) {
                if (f64) {
                    out.write(reinterpret_cast<const char*>(&c), sizeof c);
                } else {
                    const auto f = static_cast<float>(c);
                    out.write(reinterpret_cast<const char*>(&f), sizeof f);
                }
            }
            if (cols) out.write(reinterpret_cast<const char*>((*cols)[i].data()), 3);
        }
    }
    return out.str();
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path, const PlyWriteOptions& options) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EnvironmentError("cannot write PLY file '" + path.string() + "'");
    const std::string bytes = serialize_ply(cloud, options);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw EnvironmentError("failed writing PLY file '" + path.string() + "'");
}

}  // namespace pcqa
