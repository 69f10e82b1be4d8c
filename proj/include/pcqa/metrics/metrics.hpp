#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcqa/core/normals.hpp"
#include "pcqa/core/point_cloud.hpp"

namespace pcqa {

/// A PSNR in dB, or the explicit lossless marker when the MSE is zero.
class Psnr {
public:
    static Psnr lossless() { return Psnr(); }
    static Psnr from_mse(double peak_squared, double mse);
    static Psnr db(double value) { return Psnr(value); }

    bool is_lossless() const noexcept { return !db_; }
    /// dB value; +infinity for the lossless marker.
    double value() const noexcept;

    friend bool operator==(const Psnr&, const Psnr&) = default;

private:
    Psnr() = default;
    explicit Psnr(double v) : db_(v) {}
    std::optional<double> db_;
};

struct YuvWeights {
    double y = 6.0;
    double u = 1.0;
    double v = 1.0;
};

struct ColorPsnr {
    Psnr y;
    Psnr u;
    Psnr v;
    Psnr yuv;
};

/// External metric hook (e.g. a PCQM binary). Implementations must be
/// thread-safe if the caller evaluates pairs concurrently.
class MetricPlugin {
public:
    virtual ~MetricPlugin() = default;
    virtual std::string name() const = 0;
    virtual double compute(const PointCloud& reference, const PointCloud& decoded) const = 0;
};

struct MetricOptions {
    /// Overrides the reference's declared precision for the PSNR peak.
    std::optional<int> bit_depth;
    std::size_t normal_neighbors = kDefaultNormalNeighbors;
    YuvWeights weights;
    /// nullopt: compute color metrics when both clouds have color.
    /// true: require color (MissingAttributeError otherwise). false: skip.
    std::optional<bool> color;
    std::vector<std::shared_ptr<const MetricPlugin>> plugins;
    unsigned jobs = 1;
};

struct MetricReport {
    Psnr d1_psnr = Psnr::lossless();
    Psnr d2_psnr = Psnr::lossless();
    std::optional<Psnr> y_psnr;
    std::optional<Psnr> yuv_psnr;
    std::map<std::string, double> plugin_scores;
    double bitrate_bpp = 0.0;
};

/// Symmetric point-to-point PSNR with peak 3 * (2^bit_depth - 1)^2.
Psnr d1_psnr(const PointCloud& reference, const PointCloud& decoded, const MetricOptions& options = {});

/// Symmetric point-to-plane PSNR. `normals` belong to the reference; both
/// directions project onto the normal of the reference point in the pair.
Psnr d2_psnr(const PointCloud& reference, const PointCloud& decoded, const NormalField& normals,
             const MetricOptions& options = {});

/// Per-channel BT.709 YCbCr PSNR (peak 255) with symmetric max MSE, plus
/// the weighted average of the channel PSNRs.
ColorPsnr color_psnr(const PointCloud& reference, const PointCloud& decoded, const YuvWeights& weights = {},
                     unsigned jobs = 1);

/// Bits per reference point.
double bits_per_point(std::uint64_t bitstream_bytes, std::size_t reference_points);

/// PCA normals of the reference as used by evaluate_triple: k is capped at
/// N - 1, and clouds too small for PCA get +z everywhere.
NormalField reference_normals(const PointCloud& reference, const MetricOptions& options = {});

/// All built-in metrics plus registered plugins for one decoded cloud.
/// Reference normals are estimated with PCA unless supplied.
MetricReport evaluate_triple(const PointCloud& reference, const PointCloud& decoded, std::uint64_t bitstream_bytes,
                             const MetricOptions& options = {}, const NormalField* reference_normals = nullptr);

/// Full-range BT.709 RGB -> YCbCr.
std::array<double, 3> rgb_to_ycbcr(const Rgb& rgb) noexcept;

/// Labels that identify one row of a metric table.
struct ReportLabels {
    std::string content;
    std::string codec;
    std::string rate;
    std::string strategy;
};

std::string metric_csv_header(const std::vector<std::string>& plugin_columns = {});
std::string metric_csv_row(const ReportLabels& labels, const MetricReport& report,
                           const std::vector<std::string>& plugin_columns = {});
/// "inf" for the lossless marker, fixed decimals otherwise.
std::string format_psnr(const Psnr& p, int decimals = 6);

}  // namespace pcqa
