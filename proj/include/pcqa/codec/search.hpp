#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pcqa/codec/adapter.hpp"
#include "pcqa/codec/ctc_tables.hpp"

namespace pcqa {

struct GridAxis {
    std::string param;
    std::vector<double> values;
};

struct SweepOptions {
    MetricOptions metrics;
    EncodeContext encode;
    /// Parameters held constant for every job (e.g. occupancyPrecision).
    ParamValues fixed;
    /// Concurrent codec jobs. Output order never depends on it.
    unsigned jobs = 1;
};

struct SweepRow {
    ParamValues params;
    /// Empty when the cell failed; `error` then says why.
    std::optional<EncodedResult> result;
    std::string error;

    bool ok() const noexcept { return result.has_value(); }
};

/// Encodes every cell of outer x inner in row-major order (outer axis
/// slowest) and scores it against `content`. A failing cell becomes an
/// error row. Throws DomainError for an empty axis and EnvironmentError,
/// before any cell runs, when the codec cannot be invoked.
std::vector<SweepRow> grid_sweep(const CodecAdapter& codec, const PointCloud& content, const GridAxis& outer,
                                 const GridAxis& inner, const SweepOptions& options = {});

struct IsorateRequest {
    double target_bpp = 0.0;
    /// Secondary parameter, one output row per value.
    GridAxis sweep;
    /// Primary parameter candidates ordered by increasing bitrate.
    GridAxis ladder;
    /// Evaluate every ladder entry instead of stopping at the first one
    /// above the target.
    bool exhaustive = false;
};

struct IsorateRow {
    double sweep_value = 0.0;
    /// Largest ladder entry whose bitrate stays at or below the target.
    std::optional<double> chosen;
    std::optional<EncodedResult> result;  // includes the metric report
    std::size_t encodes = 0;
    /// The ladder turned out not to be monotone and was searched exhaustively.
    bool fell_back = false;
    std::string error;

    bool feasible() const noexcept { return chosen.has_value(); }
};

/// For each sweep value, the largest ladder entry meeting the target rate.
/// The ladder is scanned upwards and the scan stops at the first entry over
/// the target; if a bitrate decrease is observed along the way the search
/// reverts to evaluating every entry. Sweep values where even the first
/// entry is too expensive yield infeasible rows.
std::vector<IsorateRow> isorate_search(const CodecAdapter& codec, const PointCloud& content,
                                       const IsorateRequest& request, const SweepOptions& options = {});

/// Parameters for one (codec, rate, strategy) cell. When `search` is set,
/// that parameter still has to be resolved against the P1 bitrate.
struct StrategyDirective {
    ParamValues fixed;
    std::optional<GridAxis> search;
};

/// The mock codec follows the G-PCC tables (bit depths other than 12 use
/// the 10-bit row). `content` only matters for JPEG Pleno.
StrategyDirective strategy_directive(CodecId codec, std::string_view content, int bit_depth, RatePoint rate,
                                     Strategy strategy);

/// One encoded stimulus of the dataset.
struct StimulusEncoding {
    StimulusId id;
    std::optional<EncodedResult> result;
    /// Target used for rate matching (the P1 bitrate), when searched.
    std::optional<double> target_bpp;
    std::string error;
};

/// Encodes P1 from the tables, then resolves P2 and P3 against the P1
/// bitrate. JPEG Pleno cells are encoded directly from their table entry.
std::vector<StimulusEncoding> encode_rate_point(const CodecAdapter& codec, const PointCloud& content,
                                                RatePoint rate, const SweepOptions& options = {});

// CSV output ---------------------------------------------------------------

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const GridAxis& outer,
                     const GridAxis& inner, const std::vector<std::string>& plugin_columns = {});

/// Columns: sweep_value,chosen_value,bpp,d1,d2,y,yuv. Infeasible rows carry
/// "na" in every column after the sweep value.
void write_isorate_csv(std::ostream& out, const std::vector<IsorateRow>& rows);

}  // namespace pcqa
