#include "pcqa/metrics/metrics.hpp"

#include <cmath>
#include <limits>

#include "pcqa/core/neighbor_index.hpp"
#include "pcqa/util/csv.hpp"
#include "pcqa/util/errors.hpp"
#include "pcqa/util/parallel.hpp"

namespace pcqa {

Psnr Psnr::from_mse(double peak_squared, double mse) {
    if (mse == 0.0) return lossless();
    return Psnr(10.0 * std::log10(peak_squared / mse));
}

double Psnr::value() const noexcept { return db_ ? *db_ : std::numeric_limits<double>::infinity(); }

std::array<double, 3> rgb_to_ycbcr(const Rgb& rgb) noexcept {
    const double r = rgb[0], g = rgb[1], b = rgb[2];
    const double y = 0.2126 * r + 0.7152 * g + 0.0722 * b;
    return {y, (b - y) / 1.8556 + 128.0, (r - y) / 1.5748 + 128.0};
}

namespace {

/// Nearest-neighbor maps in both directions.
struct Matching {
    std::vector<std::size_t> ref_to_dec;
    std::vector<std::size_t> dec_to_ref;
};

std::vector<std::size_t> match(const std::vector<Vec3>& from, const NeighborIndex& into, unsigned jobs) {
    std::vector<std::size_t> out(from.size());
    parallel_for(from.size(), jobs, [&](std::size_t i) { out[i] = into.nearest(from[i]).index; });
    return out;
}

Matching match_both(const PointCloud& ref, const PointCloud& dec, unsigned jobs) {
    const NeighborIndex ref_index(ref);
    const NeighborIndex dec_index(dec);
    return {match(ref.positions(), dec_index, jobs), match(dec.positions(), ref_index, jobs)};
}

double geometry_peak_squared(const PointCloud& reference, const MetricOptions& options) {
    const int depth = options.bit_depth ? *options.bit_depth : reference.bit_depth();
    if (depth <= 0) throw ConfigurationError("PSNR peak needs a positive bit depth");
    const double p = std::ldexp(1.0, depth) - 1.0;
    return 3.0 * p * p;
}

Psnr d1_from(const PointCloud& ref, const PointCloud& dec, const Matching& m, double peak_sq, unsigned jobs) {
    const auto& a = ref.positions();
    const auto& b = dec.positions();
    const double ab =
        deterministic_sum(a.size(), jobs, [&](std::size_t i) { return squared_distance(a[i], b[m.ref_to_dec[i]]); });
    const double ba =
        deterministic_sum(b.size(), jobs, [&](std::size_t j) { return squared_distance(b[j], a[m.dec_to_ref[j]]); });
    return Psnr::from_mse(peak_sq, std::max(ab / a.size(), ba / b.size()));
}

double projected_sq(const Vec3& p, const Vec3& q, const Vec3& n) {
    const double e = (p[0] - q[0]) * n[0] + (p[1] - q[1]) * n[1] + (p[2] - q[2]) * n[2];
    return e * e;
}

Psnr d2_from(const PointCloud& ref, const PointCloud& dec, const NormalField& normals, const Matching& m,
             double peak_sq, unsigned jobs) {
    if (normals.size() != ref.size())
        throw SchemaError("normal field has " + std::to_string(normals.size()) + " entries, reference has " +
                          std::to_string(ref.size()) + " points");
    const auto& a = ref.positions();
    const auto& b = dec.positions();
    const auto& n = normals.normals;
    const double ab = deterministic_sum(a.size(), jobs, [&](std::size_t i) {
        return projected_sq(b[m.ref_to_dec[i]], a[i], n[i]);
    });
    const double ba = deterministic_sum(b.size(), jobs, [&](std::size_t j) {
        const std::size_t r = m.dec_to_ref[j];
        return projected_sq(b[j], a[r], n[r]);
    });
    return Psnr::from_mse(peak_sq, std::max(ab / a.size(), ba / b.size()));
}

std::vector<std::array<double, 3>> to_ycbcr(const std::vector<Rgb>& colors) {
    std::vector<std::array<double, 3>> out(colors.size());
    for (std::size_t i = 0; i < colors.size(); ++i) out[i] = rgb_to_ycbcr(colors[i]);
    return out;
}

ColorPsnr color_from(const PointCloud& ref, const PointCloud& dec, const Matching& m, const YuvWeights& w,
                     unsigned jobs) {
    if (!(w.y >= 0 && w.u >= 0 && w.v >= 0) || w.y + w.u + w.v <= 0.0)
        throw DomainError("YUV weights must be non-negative with a positive sum");
    const auto a = to_ycbcr(ref.colors());
    const auto b = to_ycbcr(dec.colors());

    Psnr channel[3] = {Psnr::lossless(), Psnr::lossless(), Psnr::lossless()};
    for (int c = 0; c < 3; ++c) {
        const double ab = deterministic_sum(a.size(), jobs, [&](std::size_t i) {
            const double d = a[i][c] - b[m.ref_to_dec[i]][c];
            return d * d;
        });
        const double ba = deterministic_sum(b.size(), jobs, [&](std::size_t j) {
            const double d = b[j][c] - a[m.dec_to_ref[j]][c];
            return d * d;
        });
        channel[c] = Psnr::from_mse(255.0 * 255.0, std::max(ab / a.size(), ba / b.size()));
    }

    const double weights[3] = {w.y, w.u, w.v};
    double num = 0.0, den = 0.0;
    bool lossless = false;
    for (int c = 0; c < 3; ++c) {
        if (weights[c] == 0.0) continue;
        if (channel[c].is_lossless()) lossless = true;
        else num += weights[c] * channel[c].value();
        den += weights[c];
    }
    const Psnr yuv = lossless ? Psnr::lossless() : Psnr::db(num / den);
    return {channel[0], channel[1], channel[2], yuv};
}

}  // namespace

Psnr d1_psnr(const PointCloud& reference, const PointCloud& decoded, const MetricOptions& options) {
    const double peak = geometry_peak_squared(reference, options);
    return d1_from(reference, decoded, match_both(reference, decoded, options.jobs), peak, options.jobs);
}

Psnr d2_psnr(const PointCloud& reference, const PointCloud& decoded, const NormalField& normals,
             const MetricOptions& options) {
    const double peak = geometry_peak_squared(reference, options);
    if (normals.size() != reference.size())
        throw SchemaError("normal field has " + std::to_string(normals.size()) + " entries, reference has " +
                          std::to_string(reference.size()) + " points");
    return d2_from(reference, decoded, normals, match_both(reference, decoded, options.jobs), peak, options.jobs);
}

ColorPsnr color_psnr(const PointCloud& reference, const PointCloud& decoded, const YuvWeights& weights,
                     unsigned jobs) {
    reference.colors();
    decoded.colors();
    return color_from(reference, decoded, match_both(reference, decoded, jobs), weights, jobs);
}

double bits_per_point(std::uint64_t bitstream_bytes, std::size_t reference_points) {
    if (reference_points == 0) throw DomainError("bits per point needs a non-empty reference");
    return 8.0 * static_cast<double>(bitstream_bytes) / static_cast<double>(reference_points);
}

NormalField reference_normals(const PointCloud& reference, const MetricOptions& options) {
    const std::size_t k = std::min(options.normal_neighbors, reference.size() - 1);
    if (k >= 3) return estimate_normals(reference, k, options.jobs);
    // Too few points for PCA: every normal falls back to +z.
    NormalField field;
    field.normals.assign(reference.size(), Vec3{0, 0, 1});
    return field;
}

MetricReport evaluate_triple(const PointCloud& reference, const PointCloud& decoded, std::uint64_t bitstream_bytes,
                             const MetricOptions& options, const NormalField* reference_normals) {
    const bool both_colored = reference.has_colors() && decoded.has_colors();
    const bool want_color = options.color.value_or(both_colored);
    if (want_color) {
        reference.colors();
        decoded.colors();
    }

    const double peak = geometry_peak_squared(reference, options);
    const Matching m = match_both(reference, decoded, options.jobs);

    MetricReport report;
    report.bitrate_bpp = bits_per_point(bitstream_bytes, reference.size());
    report.d1_psnr = d1_from(reference, decoded, m, peak, options.jobs);

    NormalField estimated;
    if (reference_normals == nullptr) {
        estimated = pcqa::reference_normals(reference, options);
        reference_normals = &estimated;
    }
    report.d2_psnr = d2_from(reference, decoded, *reference_normals, m, peak, options.jobs);

    if (want_color) {
        const ColorPsnr c = color_from(reference, decoded, m, options.weights, options.jobs);
        report.y_psnr = c.y;
        report.yuv_psnr = c.yuv;
    }
    for (const auto& plugin : options.plugins) report.plugin_scores[plugin->name()] = plugin->compute(reference, decoded);
    return report;
}

std::string format_psnr(const Psnr& p, int decimals) {
    return p.is_lossless() ? "inf" : format_real(p.value(), decimals);
}

std::string metric_csv_header(const std::vector<std::string>& plugin_columns) {
    std::vector<std::string> cols = {"content", "codec",  "rate",  "strategy", "bpp",
                                     "d1_psnr", "d2_psnr", "y_psnr", "yuv_psnr"};
    cols.insert(cols.end(), plugin_columns.begin(), plugin_columns.end());
    return csv_join(cols);
}

std::string metric_csv_row(const ReportLabels& labels, const MetricReport& report,
                           const std::vector<std::string>& plugin_columns) {
    std::vector<std::string> cols = {labels.content,
                                     labels.codec,
                                     labels.rate,
                                     labels.strategy,
                                     format_real(report.bitrate_bpp, 6),
                                     format_psnr(report.d1_psnr),
                                     format_psnr(report.d2_psnr),
                                     report.y_psnr ? format_psnr(*report.y_psnr) : "na",
                                     report.yuv_psnr ? format_psnr(*report.yuv_psnr) : "na"};
    for (const auto& name : plugin_columns) {
        const auto it = report.plugin_scores.find(name);
        cols.push_back(it == report.plugin_scores.end() ? "na" : format_real(it->second, 6));
    }
    return csv_join(cols);
}

}  // namespace pcqa
