#include "pcqa/codec/adapter.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "pcqa/core/ply.hpp"
#include "pcqa/util/errors.hpp"

namespace fs = std::filesystem;

namespace pcqa {

bool ParamSpec::contains(double v) const {
    if (!std::isfinite(v)) return false;
    switch (kind) {
        case Kind::Real: return (lo_open ? v > lo : v >= lo) && v <= hi;
        case Kind::Integer: return v == std::floor(v) && v >= lo && v <= hi;
        case Kind::Choice: return std::find(choices.begin(), choices.end(), v) != choices.end();
    }
    return false;
}

std::string ParamSpec::describe() const {
    switch (kind) {
        case Kind::Real: return (lo_open ? "(" : "[") + format_param(lo) + ", " + format_param(hi) + "]";
        case Kind::Integer: return "integer in [" + format_param(lo) + ", " + format_param(hi) + "]";
        case Kind::Choice: {
            std::string out = "one of {";
            for (std::size_t i = 0; i < choices.size(); ++i) out += (i ? ", " : "") + format_param(choices[i]);
            return out + "}";
        }
    }
    return {};
}

const std::vector<ParamSpec>& codec_schema(CodecId id) {
    using K = ParamSpec::Kind;
    static const std::vector<ParamSpec> gpcc = {
        {"pqs", K::Real, 0.0, 1.0, true, {}},
        {"qp", K::Integer, 4, 51, false, {}},
    };
    static const std::vector<ParamSpec> vpcc = {
        {"aqp", K::Integer, 0, 51, false, {}},
        {"gqp", K::Integer, 0, 51, false, {}},
        {"occupancyPrecision", K::Choice, 0, 0, false, {2, 4}},
    };
    static const std::vector<ParamSpec> jpeg = {
        {"lambda", K::Choice, 0, 0, false, {0.0025, 0.005, 0.01, 0.025, 0.05}},
        {"sf", K::Choice, 0, 0, false, {1, 2, 4, 8}},
        {"cri", K::Integer, 0, 4, false, {}},
    };
    switch (id) {
        case CodecId::GPCC:
        case CodecId::Mock: return gpcc;
        case CodecId::VPCC: return vpcc;
        case CodecId::JPEGPleno: return jpeg;
    }
    return gpcc;
}

std::string format_param(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) return std::to_string(static_cast<long long>(v));
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::optional<double> EncodedResult::geometry_share() const {
    if (!geometry_bytes || bitstream_bytes == 0) return std::nullopt;
    return static_cast<double>(*geometry_bytes) / static_cast<double>(bitstream_bytes);
}

// ---------------------------------------------------------------------------
// mock codec

double mock_geometry_bpp(double s) { return 1.2 * std::pow(s, 0.9); }

double mock_bpp(double s, int q) { return mock_geometry_bpp(s) + 3.0 * std::pow(s, 0.9) * std::exp2(-(q - 4) / 6.0); }

EncodedResult mock_encode(const PointCloud& content, double s, int q) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("mock codec: s must be in (0, 1], got " + format_param(s));
    if (q < 4 || q > 51) throw DomainError("mock codec: q must be in [4, 51], got " + std::to_string(q));

    const double hi = content.peak();
    std::vector<Vec3> pos = content.positions();
    for (auto& p : pos)
        for (auto& c : p) {
            // Half-down rounding keeps x = 2k+1 at s = 0.5 on the lower cell.
            const double r = std::ceil(c * s - 0.5);
            c = std::clamp(r / s, 0.0, hi);
        }

    std::optional<std::vector<Rgb>> colors;
    if (content.has_colors()) {
        const double step = std::exp2((q - 4) / 6.0);
        colors = content.colors();
        for (auto& rgb : *colors)
            for (auto& ch : rgb) ch = static_cast<std::uint8_t>(std::clamp(std::round(std::round(ch / step) * step), 0.0, 255.0));
    }

    EncodedResult out;
    out.params = {{"pqs", s}, {"qp", q}};
    out.bitrate_bpp = mock_bpp(s, q);
    const double n = static_cast<double>(content.size());
    out.bitstream_bytes = std::max<std::uint64_t>(1, std::llround(out.bitrate_bpp * n / 8.0));
    out.geometry_bytes = std::min(out.bitstream_bytes, static_cast<std::uint64_t>(std::llround(mock_geometry_bpp(s) * n / 8.0)));
    out.decoded = std::make_shared<const PointCloud>(std::move(pos), std::move(colors), content.bit_depth(),
                                                     content.name() + "-mock");
    return out;
}

// ---------------------------------------------------------------------------
// external command plumbing

namespace {

const std::set<std::string> kBuiltinSlots = {"input", "bitstream", "decoded", "workdir"};

std::vector<std::string> template_slots(const std::string& tmpl) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = tmpl.find('{', pos)) != std::string::npos) {
        const auto end = tmpl.find('}', pos);
        if (end == std::string::npos) throw ConfigurationError("unterminated slot in template: " + tmpl);
        out.push_back(tmpl.substr(pos + 1, end - pos - 1));
        pos = end + 1;
    }
    return out;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

bool is_executable(const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

// Span of the program word in a shell command, skipping VAR=value prefixes.
std::pair<std::size_t, std::size_t> program_span(const std::string& cmd) {
    std::size_t pos = 0;
    while (true) {
        pos = cmd.find_first_not_of(" \t", pos);
        if (pos == std::string::npos) return {cmd.size(), 0};
        const auto end = std::min(cmd.find_first_of(" \t", pos), cmd.size());
        const std::string word = cmd.substr(pos, end - pos);
        if (word.find('=') == std::string::npos || word.find('{') != std::string::npos) return {pos, end - pos};
        pos = end;
    }
}

std::optional<fs::path> find_executable(const std::string& program) {
    if (program.find('/') != std::string::npos) {
        const fs::path p = fs::absolute(program);
        return is_executable(p) ? std::optional<fs::path>(p) : std::nullopt;
    }
    const char* path = std::getenv("PATH");
    for (const auto& dir : split_list(path ? path : "", ':'))
        if (is_executable(fs::path(dir) / program)) return fs::path(dir) / program;
    return std::nullopt;
}

// Replaces the program word with its absolute path so the command still
// works after changing into the job directory.
std::string absolutize_program(const std::string& cmd) {
    const auto [pos, len] = program_span(cmd);
    if (len == 0) return cmd;
    const std::string program = cmd.substr(pos, len);
    if (program.find('{') != std::string::npos) return cmd;
    const auto found = find_executable(program);
    if (!found) throw EnvironmentError("codec executable not found: " + program);
    return cmd.substr(0, pos) + shell_quote(found->string()) + cmd.substr(pos + len);
}

std::string tail_of(const fs::path& log, std::size_t max_chars = 600) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    return s.size() > max_chars ? "..." + s.substr(s.size() - max_chars) : s;
}

void run_in(const fs::path& workdir, const std::string& cmd) {
    const fs::path log = workdir / "codec.log";
    const std::string full = "cd " + shell_quote(workdir.string()) + " && (" + cmd + ") >>" +
                             shell_quote(log.string()) + " 2>&1";
    const int status = std::system(full.c_str());
    if (status == -1) throw EnvironmentError("could not spawn a shell for: " + cmd);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        throw EnvironmentError("codec command failed with status " + std::to_string(code) + ": " + cmd + "\n" +
                               tail_of(log));
    }
}

class TempDir {
public:
    TempDir(const fs::path& root, bool keep) : keep_(keep) {
        const fs::path base = root.empty() ? fs::temp_directory_path() : root;
        fs::create_directories(base);
        std::string pattern = (base / "pcqa-job-XXXXXX").string();
        if (::mkdtemp(pattern.data()) == nullptr)
            throw EnvironmentError("cannot create a working directory under " + base.string());
        path_ = pattern;
    }
    ~TempDir() {
        if (keep_) return;
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    bool keep_;
};

std::uint64_t read_byte_count(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw EnvironmentError("codec did not produce " + p.string());
    long long v = -1;
    in >> v;
    if (!in || v < 0) throw ParseError(p.string() + ": expected a non-negative byte count");
    return static_cast<std::uint64_t>(v);
}

}  // namespace

std::string CodecAdapter::substitute(const std::string& tmpl, const std::map<std::string, std::string>& slots) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = tmpl.find('{', pos);
        if (open == std::string::npos) break;
        const auto close = tmpl.find('}', open);
        if (close == std::string::npos) throw ConfigurationError("unterminated slot in template: " + tmpl);
        const std::string key = tmpl.substr(open + 1, close - open - 1);
        const auto it = slots.find(key);
        if (it == slots.end()) throw DomainError("no value for template slot {" + key + "}");
        out += tmpl.substr(pos, open - pos) + it->second;
        pos = close + 1;
    }
    return out + tmpl.substr(pos);
}

CodecAdapter CodecAdapter::mock() { return CodecAdapter(CodecId::Mock, "mock", std::nullopt); }

CodecAdapter CodecAdapter::external(CodecId id, std::string name, ExternalCommand cmd) {
    if (id == CodecId::Mock) throw ConfigurationError("the mock codec has no external command");
    if (trim(cmd.command).empty()) throw ConfigurationError("adapter '" + name + "' has an empty command");
    std::set<std::string> known = kBuiltinSlots;
    for (const auto& spec : codec_schema(id)) known.insert(spec.name);
    for (const auto& p : cmd.params)
        if (!known.count(p) || kBuiltinSlots.count(p))
            throw ConfigurationError("adapter '" + name + "': parameter '" + p + "' is not in the " + to_string(id) +
                                     " schema");
    for (const auto* tmpl : {&cmd.command, &cmd.decode_command})
        for (const auto& slot : template_slots(*tmpl))
            if (!known.count(slot))
                throw ConfigurationError("adapter '" + name + "': template slot {" + slot + "} is not a " +
                                         to_string(id) + " parameter");
    return CodecAdapter(id, std::move(name), std::move(cmd));
}

CodecAdapter CodecAdapter::from_config(const KvConfig& cfg) {
    const CodecId id = parse_codec(cfg.get("codec").value_or("gpcc"));
    if (id == CodecId::Mock) return mock();
    ExternalCommand cmd;
    cmd.command = cfg.require("command");
    cmd.decode_command = cfg.get("decode_command").value_or("");
    if (auto p = cfg.get("params")) {
        cmd.params = split_list(*p);
    } else {
        std::set<std::string> seen;
        for (const auto* tmpl : {&cmd.command, &cmd.decode_command})
            for (const auto& slot : template_slots(*tmpl))
                if (!kBuiltinSlots.count(slot) && seen.insert(slot).second) cmd.params.push_back(slot);
    }
    if (auto v = cfg.get("outputs.bitstream")) cmd.bitstream = *v;
    if (auto v = cfg.get("outputs.decoded")) cmd.decoded = *v;
    cmd.geometry_bytes = cfg.get("outputs.geometry_bytes");
    const std::string name = cfg.get("name").value_or(fs::path(cfg.origin()).stem().string());
    return external(id, name, std::move(cmd));
}

CodecAdapter CodecAdapter::load(const fs::path& path) { return from_config(KvConfig::load(path)); }

CodecAdapter CodecAdapter::resolve(const std::string& name_or_path) {
    if (name_or_path == "mock") return mock();
    std::error_code ec;
    if (fs::is_regular_file(name_or_path, ec)) return load(name_or_path);
    const char* env = std::getenv("PCQA_ADAPTER_PATH");
    for (const auto& dir : split_list(env ? env : "", ':'))
        for (const auto& candidate : {fs::path(dir) / name_or_path, fs::path(dir) / (name_or_path + ".toml")})
            if (fs::is_regular_file(candidate, ec)) return load(candidate);
    throw EnvironmentError("adapter '" + name_or_path + "' not found (searched PCQA_ADAPTER_PATH)");
}

void CodecAdapter::check_environment() const {
    if (!external_) return;
    for (const auto* tmpl : {&external_->command, &external_->decode_command})
        if (!trim(*tmpl).empty()) absolutize_program(*tmpl);
}

void CodecAdapter::validate(const ParamValues& params) const {
    const auto& specs = schema();
    for (const auto& [name, value] : params) {
        const auto it = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.name == name; });
        if (it == specs.end()) throw DomainError(to_string(id_) + " has no parameter '" + name + "'");
        if (!it->contains(value))
            throw DomainError(name + " = " + format_param(value) + " is outside " + it->describe());
    }
    const std::vector<std::string> required =
        external_ ? external_->params : std::vector<std::string>{"pqs", "qp"};
    for (const auto& name : required)
        if (!params.count(name)) throw DomainError("missing value for parameter '" + name + "'");
}

EncodedResult CodecAdapter::encode(const PointCloud& content, const ParamValues& params,
                                   const EncodeContext& ctx) const {
    validate(params);
    if (!external_) return mock_encode(content, params.at("pqs"), static_cast<int>(params.at("qp")));
    return run_external(content, params, ctx);
}

EncodedResult CodecAdapter::run_external(const PointCloud& content, const ParamValues& params,
                                         const EncodeContext& ctx) const {
    const ExternalCommand& cmd = *external_;
    TempDir job(ctx.work_root, ctx.keep_workdirs);
    const fs::path& wd = job.path();

    fs::path input;
    if (ctx.content_path) {
        input = fs::absolute(*ctx.content_path);
    } else {
        input = wd / "input.ply";
        save_ply(content, input);
    }

    std::map<std::string, std::string> slots = {
        {"input", shell_quote(input.string())},
        {"bitstream", shell_quote((wd / cmd.bitstream).string())},
        {"decoded", shell_quote((wd / cmd.decoded).string())},
        {"workdir", shell_quote(wd.string())},
    };
    for (const auto& [k, v] : params) slots[k] = format_param(v);

    run_in(wd, absolutize_program(substitute(cmd.command, slots)));
    if (!trim(cmd.decode_command).empty()) run_in(wd, absolutize_program(substitute(cmd.decode_command, slots)));

    const fs::path bitstream = wd / cmd.bitstream;
    std::error_code ec;
    const auto bytes = fs::file_size(bitstream, ec);
    if (ec) throw EnvironmentError("codec did not produce the bitstream " + bitstream.string());

    EncodedResult out;
    out.params = params;
    out.bitstream_bytes = bytes;
    if (cmd.geometry_bytes) {
        out.geometry_bytes = read_byte_count(wd / *cmd.geometry_bytes);
        if (*out.geometry_bytes > out.bitstream_bytes)
            throw SchemaError("geometry substream (" + std::to_string(*out.geometry_bytes) +
                              " bytes) larger than the bitstream (" + std::to_string(bytes) + " bytes)");
    }
    out.bitrate_bpp = bits_per_point(bytes, content.size());
    const fs::path decoded = wd / cmd.decoded;
    if (!fs::is_regular_file(decoded, ec)) throw EnvironmentError("codec did not produce " + decoded.string());
    out.decoded = std::make_shared<const PointCloud>(load_ply(decoded, content.bit_depth()));
    return out;
}

}  // namespace pcqa
