#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pcqa/codec/types.hpp"

namespace pcqa {

/// G-PCC CTC rate points r01..r06 (lossy geometry, lossy attributes).
enum class GpccCtcRate { r01 = 1, r02, r03, r04, r05, r06 };

/// V-PCC CTC rate points r1..r5.
enum class VpccCtcRate { r1 = 1, r2, r3, r4, r5 };

struct GpccParams {
    double pqs;
    int qp;
    friend bool operator==(const GpccParams&, const GpccParams&) = default;
};

struct VpccParams {
    int aqp;
    int gqp;
    int occupancy_precision;
    friend bool operator==(const VpccParams&, const VpccParams&) = default;
};

/// A V-PCC encoding directive. `gqp` is empty when it has to be resolved by
/// an isorate search against the P1 bitrate.
struct VpccDirective {
    int aqp;
    std::optional<int> gqp;
    int occupancy_precision;
};

/// JPEG Pleno configuration: rate-distortion trade-off λ, sampling factor,
/// color rate index.
struct JpegConfig {
    double lambda;
    int sf;
    int cri;
    friend bool operator==(const JpegConfig&, const JpegConfig&) = default;
};

/// Throws DomainError unless bit_depth is 10 or 12.
GpccParams gpcc_ctc_params(GpccCtcRate rate, int bit_depth);

/// R1..R4 correspond to r02..r05.
GpccCtcRate gpcc_ctc_rate(RatePoint rate) noexcept;
VpccCtcRate vpcc_ctc_rate(RatePoint rate) noexcept;

/// One CTC pqs step up: doubled below 0.5, otherwise the distance to 1 is
/// halved. Throws DomainError outside (0, 1).
double next_pqs(double pqs);

/// qp for a G-PCC strategy. (R4, P2) depends on the bit depth: 34 at 12 bit,
/// 31 otherwise.
int gpcc_strategy_qp(RatePoint rate, Strategy strategy, int bit_depth);

/// Candidate pqs values ordered by increasing bitrate: the CTC row for the
/// bit depth extended by two steps below r01 and one above r06, with the
/// midpoint of every consecutive pair inserted. All values are exact dyadic
/// fractions in (0, 1].
std::vector<double> gpcc_pqs_ladder(int bit_depth);

VpccParams vpcc_ctc_params(VpccCtcRate rate);

/// P1: CTC values. P2: aqp + 5, occupancy 4. P3: CTC aqp, occupancy 2.
/// gqp stays unresolved for P2 and P3.
VpccDirective vpcc_strategy_params(RatePoint rate, Strategy strategy);

/// gqp ladder ordered by increasing bitrate (51 down to 0).
std::vector<double> vpcc_gqp_ladder();

/// Throws DomainError for a content outside the evaluated dataset.
JpegConfig jpeg_config_lookup(std::string_view content, RatePoint rate, Strategy strategy);

/// Band of the geometry share pg = geometry/total. Boundaries 0.4 and 0.6
/// fall into the lower band. Throws DomainError for a zero total or a
/// geometry size above the total.
Strategy classify_pg(std::uint64_t geometry_bytes, std::uint64_t total_bytes);

enum class ConfigRelation { StrictlyBetter, StrictlyWorse, TradeOff, Equal };

std::string_view to_string(ConfigRelation r) noexcept;

/// Quality relation of JPEG Pleno configuration `a` relative to `b`.
/// Geometry: lower SF is better; at equal SF lower λ is better; when SF and
/// λ point in opposite directions the geometry is incomparable. Color: higher
/// CRI is better.
ConfigRelation config_relation(const JpegConfig& a, const JpegConfig& b) noexcept;

}  // namespace pcqa
