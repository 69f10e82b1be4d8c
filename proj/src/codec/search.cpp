#include "pcqa/codec/search.hpp"

#include <cmath>
#include <limits>

#include "pcqa/util/csv.hpp"
#include "pcqa/util/errors.hpp"
#include "pcqa/util/parallel.hpp"

namespace pcqa {

namespace {

void require_axis(const GridAxis& axis, const char* what) {
    if (axis.param.empty()) throw DomainError(std::string(what) + " axis has no parameter name");
    if (axis.values.empty()) throw DomainError(std::string(what) + " axis '" + axis.param + "' is empty");
}

void score(EncodedResult& r, const PointCloud& content, const NormalField& normals, const MetricOptions& metrics) {
    MetricReport report = evaluate_triple(content, *r.decoded, r.bitstream_bytes, metrics, &normals);
    report.bitrate_bpp = r.bitrate_bpp;
    r.report = std::move(report);
}

struct LadderOutcome {
    std::optional<std::size_t> chosen;
    std::optional<EncodedResult> result;
    std::size_t encodes = 0;
    bool fell_back = false;
};

// Largest ladder index whose bitrate is <= target, for fixed other params.
LadderOutcome search_ladder(const CodecAdapter& codec, const PointCloud& content, const ParamValues& fixed,
                            const GridAxis& ladder, double target, bool exhaustive, const EncodeContext& ctx) {
    LadderOutcome out;
    auto encode_at = [&](std::size_t i) {
        ParamValues p = fixed;
        p[ladder.param] = ladder.values[i];
        ++out.encodes;
        return codec.encode(content, p, ctx);
    };

    if (!exhaustive) {
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ladder.values.size(); ++i) {
            EncodedResult r = encode_at(i);
            if (r.bitrate_bpp < prev) {
                out.fell_back = true;
                break;
            }
            prev = r.bitrate_bpp;
            if (r.bitrate_bpp > target) break;
            out.chosen = i;
            out.result = std::move(r);
        }
        if (!out.fell_back) return out;
        out.chosen.reset();
        out.result.reset();
    }

    // Without monotonicity the only safe answer comes from the top: the
    // first feasible entry from above is the largest one.
    for (std::size_t i = ladder.values.size(); i-- > 0;) {
        EncodedResult r = encode_at(i);
        if (r.bitrate_bpp <= target) {
            out.chosen = i;
            out.result = std::move(r);
            break;
        }
    }
    return out;
}

std::string report_cell(const std::optional<Psnr>& p) { return p ? format_psnr(*p) : "na"; }

}  // namespace

std::vector<SweepRow> grid_sweep(const CodecAdapter& codec, const PointCloud& content, const GridAxis& outer,
                                 const GridAxis& inner, const SweepOptions& options) {
    require_axis(outer, "outer");
    require_axis(inner, "inner");
    if (outer.param == inner.param) throw DomainError("both grid axes use '" + outer.param + "'");
    codec.check_environment();

    const NormalField normals = reference_normals(content, options.metrics);
    const std::size_t cols = inner.values.size();
    std::vector<SweepRow> rows(outer.values.size() * cols);
    parallel_for(rows.size(), options.jobs, [&](std::size_t cell) {
        SweepRow& row = rows[cell];
        row.params = options.fixed;
        row.params[outer.param] = outer.values[cell / cols];
        row.params[inner.param] = inner.values[cell % cols];
        try {
            EncodedResult r = codec.encode(content, row.params, options.encode);
            score(r, content, normals, options.metrics);
            r.decoded.reset();  // a grid of decoded clouds would not fit in memory
            row.result = std::move(r);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

std::vector<IsorateRow> isorate_search(const CodecAdapter& codec, const PointCloud& content,
                                       const IsorateRequest& request, const SweepOptions& options) {
    if (!(request.target_bpp > 0.0) || !std::isfinite(request.target_bpp))
        throw DomainError("isorate target must be a positive bitrate");
    require_axis(request.sweep, "sweep");
    require_axis(request.ladder, "ladder");
    if (request.sweep.param == request.ladder.param)
        throw DomainError("sweep and ladder both use '" + request.sweep.param + "'");
    codec.check_environment();

    const NormalField normals = reference_normals(content, options.metrics);
    std::vector<IsorateRow> rows(request.sweep.values.size());
    parallel_for(rows.size(), options.jobs, [&](std::size_t k) {
        IsorateRow& row = rows[k];
        row.sweep_value = request.sweep.values[k];
        ParamValues fixed = options.fixed;
        fixed[request.sweep.param] = row.sweep_value;
        try {
            LadderOutcome o = search_ladder(codec, content, fixed, request.ladder, request.target_bpp,
                                            request.exhaustive, options.encode);
            row.encodes = o.encodes;
            row.fell_back = o.fell_back;
            if (o.chosen) {
                row.chosen = request.ladder.values[*o.chosen];
                score(*o.result, content, normals, options.metrics);
                o.result->decoded.reset();
                row.result = std::move(o.result);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

StrategyDirective strategy_directive(CodecId codec, std::string_view content, int bit_depth, RatePoint rate,
                                     Strategy strategy) {
    StrategyDirective d;
    switch (codec) {
        case CodecId::Mock:
            bit_depth = bit_depth == 12 ? 12 : 10;
            [[fallthrough]];
        case CodecId::GPCC: {
            const int qp = gpcc_strategy_qp(rate, strategy, bit_depth);
            d.fixed["qp"] = qp;
            if (strategy == Strategy::P1)
                d.fixed["pqs"] = gpcc_ctc_params(gpcc_ctc_rate(rate), bit_depth).pqs;
            else
                d.search = GridAxis{"pqs", gpcc_pqs_ladder(bit_depth)};
            break;
        }
        case CodecId::VPCC: {
            const VpccDirective v = vpcc_strategy_params(rate, strategy);
            d.fixed["aqp"] = v.aqp;
            d.fixed["occupancyPrecision"] = v.occupancy_precision;
            if (v.gqp)
                d.fixed["gqp"] = *v.gqp;
            else
                d.search = GridAxis{"gqp", vpcc_gqp_ladder()};
            break;
        }
        case CodecId::JPEGPleno: {
            const JpegConfig c = jpeg_config_lookup(content, rate, strategy);
            d.fixed = {{"lambda", c.lambda}, {"sf", c.sf}, {"cri", c.cri}};
            break;
        }
    }
    return d;
}

std::vector<StimulusEncoding> encode_rate_point(const CodecAdapter& codec, const PointCloud& content,
                                                RatePoint rate, const SweepOptions& options) {
    codec.check_environment();
    const NormalField normals = reference_normals(content, options.metrics);

    std::vector<StimulusEncoding> out;
    std::optional<double> target;
    for (const Strategy s : kAllStrategies) {
        StimulusEncoding enc;
        enc.id = StimulusId{content.name(), codec.id(), s, rate};
        try {
            const StrategyDirective d = strategy_directive(codec.id(), content.name(), content.bit_depth(), rate, s);
            ParamValues fixed = options.fixed;
            for (const auto& [k, v] : d.fixed) fixed[k] = v;
            if (!d.search) {
                EncodedResult r = codec.encode(content, fixed, options.encode);
                score(r, content, normals, options.metrics);
                if (s == Strategy::P1) target = r.bitrate_bpp;
                enc.result = std::move(r);
            } else if (!target) {
                enc.error = "P1 bitrate unavailable, cannot match the rate";
            } else {
                enc.target_bpp = target;
                LadderOutcome o = search_ladder(codec, content, fixed, *d.search, *target, false, options.encode);
                if (!o.chosen) {
                    enc.error = "no " + d.search->param + " value reaches the P1 bitrate";
                } else {
                    score(*o.result, content, normals, options.metrics);
                    enc.result = std::move(o.result);
                }
            }
        } catch (const std::exception& e) {
            enc.error = e.what();
        }
        out.push_back(std::move(enc));
    }
    return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const GridAxis& outer,
                     const GridAxis& inner, const std::vector<std::string>& plugin_columns) {
    std::vector<std::string> header = {outer.param, inner.param, "status", "bpp", "bitstream_bytes",
                                       "geometry_bytes", "d1_psnr", "d2_psnr", "y_psnr", "yuv_psnr"};
    header.insert(header.end(), plugin_columns.begin(), plugin_columns.end());
    header.push_back("error");
    out << csv_join(header) << '\n';
    for (const auto& row : rows) {
        std::vector<std::string> cols = {format_param(row.params.at(outer.param)),
                                         format_param(row.params.at(inner.param))};
        if (!row.ok()) {
            cols.push_back("error");
            cols.resize(cols.size() + 7 + plugin_columns.size(), "na");
            cols.push_back(row.error);
        } else {
            const EncodedResult& r = *row.result;
            const MetricReport& m = *r.report;
            cols.insert(cols.end(), {"ok", format_real(r.bitrate_bpp, 6), std::to_string(r.bitstream_bytes),
                                     r.geometry_bytes ? std::to_string(*r.geometry_bytes) : "na",
                                     format_psnr(m.d1_psnr), format_psnr(m.d2_psnr), report_cell(m.y_psnr),
                                     report_cell(m.yuv_psnr)});
            for (const auto& name : plugin_columns) {
                const auto it = m.plugin_scores.find(name);
                cols.push_back(it == m.plugin_scores.end() ? "na" : format_real(it->second, 6));
            }
            cols.push_back("");
        }
        out << csv_join(cols) << '\n';
    }
}

void write_isorate_csv(std::ostream& out, const std::vector<IsorateRow>& rows) {
    out << "sweep_value,chosen_value,bpp,d1,d2,y,yuv\n";
    for (const auto& row : rows) {
        std::vector<std::string> cols = {format_param(row.sweep_value)};
        if (!row.feasible()) {
            cols.resize(7, "na");
        } else {
            const MetricReport& m = *row.result->report;
            cols.insert(cols.end(), {format_param(*row.chosen), format_real(row.result->bitrate_bpp, 6),
                                     format_psnr(m.d1_psnr), format_psnr(m.d2_psnr), report_cell(m.y_psnr),
                                     report_cell(m.yuv_psnr)});
        }
        out << csv_join(cols) << '\n';
    }
}

}  // namespace pcqa
