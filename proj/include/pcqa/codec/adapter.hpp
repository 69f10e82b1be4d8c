#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcqa/codec/types.hpp"
#include "pcqa/core/point_cloud.hpp"
#include "pcqa/metrics/metrics.hpp"
#include "pcqa/util/kv_config.hpp"

namespace pcqa {

/// Parameter name -> value. Integer parameters are stored as whole doubles.
using ParamValues = std::map<std::string, double>;

struct ParamSpec {
    enum class Kind { Real, Integer, Choice };

    std::string name;
    Kind kind = Kind::Real;
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;  // Real only: (lo, hi] instead of [lo, hi]
    std::vector<double> choices;

    bool contains(double v) const;
    std::string describe() const;
};

/// Parameter domains of each codec. The mock codec uses the G-PCC names
/// (pqs plays the role of the geometry scale s, qp the color quantizer q).
const std::vector<ParamSpec>& codec_schema(CodecId id);

/// Integers print without a fraction, reals in shortest round-trip form.
std::string format_param(double v);

struct EncodedResult {
    ParamValues params;
    std::uint64_t bitstream_bytes = 0;
    std::optional<std::uint64_t> geometry_bytes;
    /// Bits per reference point. Measured from the bitstream for external
    /// codecs, modeled for the mock.
    double bitrate_bpp = 0.0;
    std::shared_ptr<const PointCloud> decoded;
    std::optional<MetricReport> report;

    /// pg = geometry / total, when the codec reports the geometry size.
    std::optional<double> geometry_share() const;
};

/// Per-call environment for encode().
struct EncodeContext {
    /// PLY file holding the content. When absent, external adapters write
    /// the cloud into the job's working directory first.
    std::optional<std::filesystem::path> content_path;
    /// Parent of the per-job temporary directories (system temp if empty).
    std::filesystem::path work_root;
    bool keep_workdirs = false;
};

/// Command templates of an external codec. Slots are written `{name}`;
/// available slots are {input}, {bitstream}, {decoded}, {workdir} and the
/// codec's parameter names. Commands run through /bin/sh inside a fresh
/// working directory per job.
struct ExternalCommand {
    std::string command;
    std::string decode_command;  // may be empty when `command` also decodes
    std::vector<std::string> params;
    std::string bitstream = "bitstream.bin";
    std::string decoded = "decoded.ply";
    /// File holding the geometry substream size in bytes, if the codec reports it.
    std::optional<std::string> geometry_bytes;
};

class CodecAdapter {
public:
    static CodecAdapter mock();
    /// Throws ConfigurationError when a template slot is not a built-in or a
    /// parameter of the codec.
    static CodecAdapter external(CodecId id, std::string name, ExternalCommand cmd);

    /// Adapter from a key/value file with keys `codec`, `name`, `command`,
    /// `decode_command`, `params`, `outputs.bitstream`, `outputs.decoded`,
    /// `outputs.geometry_bytes`. `codec = "mock"` yields the built-in mock.
    static CodecAdapter from_config(const KvConfig& cfg);
    static CodecAdapter load(const std::filesystem::path& path);

    /// Resolves an adapter argument: an existing path is used as is,
    /// otherwise `<name>` and `<name>.toml` are looked up in the
    /// colon-separated PCQA_ADAPTER_PATH directories. "mock" needs no file.
    static CodecAdapter resolve(const std::string& name_or_path);

    CodecId id() const noexcept { return id_; }
    const std::string& name() const noexcept { return name_; }
    const std::vector<ParamSpec>& schema() const { return codec_schema(id_); }
    bool is_external() const noexcept { return external_.has_value(); }
    const std::optional<ExternalCommand>& command() const noexcept { return external_; }

    /// Throws EnvironmentError when an executable named by the templates
    /// cannot be found. No-op for the mock.
    void check_environment() const;

    /// Throws DomainError for unknown names, out-of-domain values, or
    /// template parameters without a value.
    void validate(const ParamValues& params) const;

    /// Encodes and decodes one configuration. The metric report is left empty.
    EncodedResult encode(const PointCloud& content, const ParamValues& params, const EncodeContext& ctx = {}) const;

    /// The command line after slot substitution. Exposed for logging and tests.
    static std::string substitute(const std::string& tmpl, const std::map<std::string, std::string>& slots);

private:
    CodecAdapter(CodecId id, std::string name, std::optional<ExternalCommand> ext)
        : id_(id), name_(std::move(name)), external_(std::move(ext)) {}

    EncodedResult run_external(const PointCloud& content, const ParamValues& params, const EncodeContext& ctx) const;

    CodecId id_;
    std::string name_;
    std::optional<ExternalCommand> external_;
};

/// Deterministic stand-in codec. Positions are scaled by s, rounded half
/// down, scaled back and clamped to the grid; colors are quantized with
/// step 2^((q-4)/6). Modeled rate: 1.2 s^0.9 + 3.0 s^0.9 2^(-(q-4)/6) bpp,
/// the first term being geometry. Throws DomainError outside s in (0, 1]
/// and integer q in [4, 51].
EncodedResult mock_encode(const PointCloud& content, double s, int q);

/// Modeled mock rate without touching any points.
double mock_bpp(double s, int q);
double mock_geometry_bpp(double s);

}  // namespace pcqa
