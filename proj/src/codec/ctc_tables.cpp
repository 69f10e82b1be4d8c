#include "pcqa/codec/ctc_tables.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>

#include "pcqa/core/point_cloud.hpp"
#include "pcqa/util/errors.hpp"

namespace pcqa {

namespace {

constexpr std::array<double, 6> kPqs12 = {0.03125, 0.0625, 0.125, 0.25, 0.5, 0.75};
constexpr std::array<double, 6> kPqs10 = {0.125, 0.25, 0.5, 0.75, 0.875, 0.9375};
constexpr std::array<int, 6> kGpccQp = {51, 46, 40, 34, 28, 22};

// [strategy][rate], R4/P2 handled separately.
constexpr int kStrategyQp[3][4] = {
    {46, 40, 34, 28},
    {37, 34, 28, 0},
    {28, 28, 22, 22},
};

constexpr std::array<VpccParams, 5> kVpcc = {{
    {42, 32, 4},
    {37, 28, 4},
    {32, 24, 4},
    {27, 20, 4},
    {22, 16, 2},
}};

struct JpegRow {
    std::string_view content;
    JpegConfig cfg[4][3];  // [rate][strategy]
};

// clang-format off
constexpr JpegRow kJpeg[] = {
    {"Bouquet", {
        {{0.05, 2, 1}, {0.025, 2, 0}, {0.01, 2, 0}},
        {{0.05, 1, 1}, {0.025, 1, 0}, {0.01, 1, 0}},
        {{0.005, 1, 3}, {0.005, 1, 2}, {0.0025, 1, 2}},
        {{0.005, 1, 4}, {0.0025, 1, 4}, {0.0025, 1, 3}}}},
    {"StMichael", {
        {{0.05, 2, 1}, {0.025, 2, 0}, {0.01, 2, 0}},
        {{0.05, 1, 2}, {0.025, 1, 1}, {0.01, 1, 0}},
        {{0.01, 1, 3}, {0.005, 1, 2}, {0.0025, 1, 2}},
        {{0.005, 1, 4}, {0.0025, 1, 4}, {0.0025, 1, 3}}}},
    {"Soldier", {
        {{0.01, 4, 3}, {0.005, 4, 2}, {0.025, 2, 0}},
        {{0.05, 1, 2}, {0.05, 1, 1}, {0.025, 1, 0}},
        {{0.025, 1, 3}, {0.01, 1, 3}, {0.005, 1, 2}},
        {{0.005, 1, 4}, {0.0025, 1, 4}, {0.0025, 1, 3}}}},
    {"Thaidancer", {
        {{0.05, 8, 1}, {0.025, 8, 1}, {0.025, 8, 0}},
        {{0.05, 4, 1}, {0.025, 4, 1}, {0.05, 4, 0}},
        {{0.025, 2, 2}, {0.025, 2, 1}, {0.01, 2, 0}},
        {{0.025, 1, 3}, {0.01, 1, 2}, {0.005, 1, 1}}}},
    {"Boxer", {
        {{0.05, 8, 2}, {0.05, 8, 1}, {0.025, 8, 0}},
        {{0.05, 4, 3}, {0.05, 4, 2}, {0.025, 4, 1}},
        {{0.05, 2, 3}, {0.05, 2, 2}, {0.025, 2, 1}},
        {{0.05, 1, 3}, {0.005, 2, 4}, {0.0025, 2, 3}}}},
    {"House_without_roof", {
        {{0.05, 8, 2}, {0.025, 8, 1}, {0.01, 8, 0}},
        {{0.025, 4, 2}, {0.025, 4, 1}, {0.01, 4, 1}},
        {{0.025, 2, 3}, {0.01, 2, 2}, {0.005, 2, 1}},
        {{0.01, 1, 3}, {0.005, 1, 3}, {0.005, 1, 2}}}},
};
// clang-format on

void require_gpcc_depth(int bit_depth) {
    if (bit_depth != 10 && bit_depth != 12)
        throw DomainError("G-PCC CTC parameters are defined for 10 and 12 bit inputs, got " +
                          std::to_string(bit_depth));
}

int idx(RatePoint r) { return static_cast<int>(r) - 1; }
int idx(Strategy s) { return static_cast<int>(s) - 1; }

// Three-way comparison where +1 means `a` has the better quality.
int compare_geometry(const JpegConfig& a, const JpegConfig& b, bool& incomparable) {
    incomparable = false;
    const int sf = a.sf < b.sf ? 1 : (a.sf > b.sf ? -1 : 0);
    const int lambda = a.lambda < b.lambda ? 1 : (a.lambda > b.lambda ? -1 : 0);
    if (sf == 0) return lambda;
    if (lambda == 0 || lambda == sf) return sf;
    incomparable = true;
    return 0;
}

}  // namespace

GpccParams gpcc_ctc_params(GpccCtcRate rate, int bit_depth) {
    require_gpcc_depth(bit_depth);
    const int i = static_cast<int>(rate) - 1;
    if (i < 0 || i >= 6) throw DomainError("G-PCC CTC rate out of range");
    return {bit_depth == 12 ? kPqs12[i] : kPqs10[i], kGpccQp[i]};
}

GpccCtcRate gpcc_ctc_rate(RatePoint rate) noexcept { return static_cast<GpccCtcRate>(static_cast<int>(rate) + 1); }
VpccCtcRate vpcc_ctc_rate(RatePoint rate) noexcept { return static_cast<VpccCtcRate>(static_cast<int>(rate)); }

double next_pqs(double pqs) {
    if (!(pqs > 0.0 && pqs < 1.0)) throw DomainError("next_pqs needs 0 < pqs < 1, got " + std::to_string(pqs));
    return pqs < 0.5 ? 2.0 * pqs : 1.0 - (1.0 - pqs) / 2.0;
}

int gpcc_strategy_qp(RatePoint rate, Strategy strategy, int bit_depth) {
    require_gpcc_depth(bit_depth);
    if (rate == RatePoint::R4 && strategy == Strategy::P2) return bit_depth == 12 ? 34 : 31;
    return kStrategyQp[idx(strategy)][idx(rate)];
}

std::vector<double> gpcc_pqs_ladder(int bit_depth) {
    require_gpcc_depth(bit_depth);
    const auto& row = bit_depth == 12 ? kPqs12 : kPqs10;
    std::vector<double> base = {row[0] / 4.0, row[0] / 2.0};
    base.insert(base.end(), row.begin(), row.end());
    base.push_back(next_pqs(row.back()));

    std::vector<double> ladder;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (i > 0) ladder.push_back((base[i - 1] + base[i]) / 2.0);
        ladder.push_back(base[i]);
    }
    return ladder;
}

VpccParams vpcc_ctc_params(VpccCtcRate rate) {
    const int i = static_cast<int>(rate) - 1;
    if (i < 0 || i >= 5) throw DomainError("V-PCC CTC rate out of range");
    return kVpcc[i];
}

VpccDirective vpcc_strategy_params(RatePoint rate, Strategy strategy) {
    const VpccParams ctc = vpcc_ctc_params(vpcc_ctc_rate(rate));
    switch (strategy) {
        case Strategy::P1: return {ctc.aqp, ctc.gqp, ctc.occupancy_precision};
        case Strategy::P2: return {ctc.aqp + 5, std::nullopt, 4};
        case Strategy::P3: return {ctc.aqp, std::nullopt, 2};
    }
    throw InternalError("unreachable strategy");
}

std::vector<double> vpcc_gqp_ladder() {
    std::vector<double> out;
    for (int g = 51; g >= 0; --g) out.push_back(g);
    return out;
}

JpegConfig jpeg_config_lookup(std::string_view content, RatePoint rate, Strategy strategy) {
    for (const auto& row : kJpeg)
        if (row.content == content) return row.cfg[idx(rate)][idx(strategy)];
    throw DomainError("no JPEG Pleno configuration for content '" + std::string(content) + "'");
}

Strategy classify_pg(std::uint64_t geometry_bytes, std::uint64_t total_bytes) {
    if (total_bytes == 0) throw DomainError("pg is undefined for an empty bitstream");
    if (geometry_bytes > total_bytes) throw DomainError("geometry substream larger than the whole bitstream");
    // Integer comparisons keep the 0.4 / 0.6 boundaries exact.
    const auto g = static_cast<unsigned __int128>(geometry_bytes) * 10;
    const auto t = static_cast<unsigned __int128>(total_bytes);
    if (g <= 4 * t) return Strategy::P1;
    if (g <= 6 * t) return Strategy::P2;
    return Strategy::P3;
}

std::string_view to_string(ConfigRelation r) noexcept {
    switch (r) {
        case ConfigRelation::StrictlyBetter: return "strictly_better";
        case ConfigRelation::StrictlyWorse: return "strictly_worse";
        case ConfigRelation::TradeOff: return "trade_off";
        case ConfigRelation::Equal: return "equal";
    }
    return "?";
}

ConfigRelation config_relation(const JpegConfig& a, const JpegConfig& b) noexcept {
    bool incomparable = false;
    const int geo = compare_geometry(a, b, incomparable);
    if (incomparable) return ConfigRelation::TradeOff;
    const int col = a.cri > b.cri ? 1 : (a.cri < b.cri ? -1 : 0);
    if (geo == 0 && col == 0) return ConfigRelation::Equal;
    if (geo >= 0 && col >= 0) return ConfigRelation::StrictlyBetter;
    if (geo <= 0 && col <= 0) return ConfigRelation::StrictlyWorse;
    return ConfigRelation::TradeOff;
}

}  // namespace pcqa
